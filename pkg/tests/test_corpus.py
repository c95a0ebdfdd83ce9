import numpy as np
import pytest

from errors import DimensionError, InvalidParameterError, ParseError
from ingestion.bow_loader import BowLoader, load_bow, save_bow
from ingestion.corpus import CountMatrix, Vocabulary
from ingestion.preprocessing import filter_vocab, mask_tokens, top_terms
from sampling.rng import Rng

EXAMPLE = "2\n3\n2\n1 1 4\n2 3 1\n"


def _write(tmp_path, text, name="docword.test.txt"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_load_uci_example(tmp_path):
    vocab, x = load_bow(_write(tmp_path, EXAMPLE))
    assert vocab is None
    assert x.shape == (3, 2)
    assert x.to_dense().tolist() == [[4, 0], [0, 0], [0, 1]]
    assert x.doc_totals().tolist() == [4, 1]


def test_load_picks_up_vocab_sidecar(tmp_path):
    path = _write(tmp_path, EXAMPLE)
    (tmp_path / "vocab.test.txt").write_text("apple\nbanana\ncherry\n", encoding="utf-8")
    vocab, _ = load_bow(path)
    assert vocab.terms == ("apple", "banana", "cherry")


@pytest.mark.parametrize("text", [
    "2\n3\n",
    "2\nthree\n1\n1 1 1\n",
    "2\n3\n1\n3 1 1\n",
    "2\n3\n1\n1 4 1\n",
    "2\n3\n1\n1 1 0\n",
    "2\n3\n2\n1 1 1\n1 1 2\n",
    "2\n3\n3\n1 1 1\n",
    "2\n3\n1\n1 1\n",
])
def test_load_rejects_malformed_files(tmp_path, text):
    with pytest.raises(ParseError):
        load_bow(_write(tmp_path, text))


def test_parse_error_carries_line_number(tmp_path):
    with pytest.raises(ParseError) as info:
        load_bow(_write(tmp_path, "2\n3\n2\n1 1 4\n9 3 1\n"))
    assert info.value.line_number == 5


def test_vocab_size_must_match_header(tmp_path):
    path = _write(tmp_path, EXAMPLE)
    (tmp_path / "vocab.test.txt").write_text("apple\nbanana\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_bow(path)


def test_save_then_load_preserves_counts(tmp_path):
    gen = np.random.default_rng(3)
    x = CountMatrix.from_dense(gen.poisson(1.0, size=(12, 7)))
    vocab = Vocabulary(tuple(f"w{i}" for i in range(12)))
    path = str(tmp_path / "docword.saved.txt")
    save_bow(path, x, vocab)
    loaded_vocab, loaded = load_bow(path)
    assert loaded == x
    assert loaded_vocab == vocab


def test_default_vocab_path():
    assert BowLoader.default_vocab_path("data/docword.nips.txt").name == "vocab.nips.txt"
    assert BowLoader.default_vocab_path("data/corpus.bow").name == "corpus.vocab"


def test_count_matrix_rejects_bad_entries():
    with pytest.raises(DimensionError):
        CountMatrix.from_entries(2, 2, [(2, 0, 1)])
    with pytest.raises(InvalidParameterError):
        CountMatrix.from_entries(2, 2, [(0, 0, 1), (0, 0, 2)])
    with pytest.raises(InvalidParameterError):
        CountMatrix.from_dense([[1, -1]])


def test_count_matrix_expand_tokens():
    x = CountMatrix.from_dense([[2, 0], [1, 3]])
    words, docs = x.expand_tokens()
    assert words.tolist() == [0, 0, 1, 1, 1, 1]
    assert docs.tolist() == [0, 0, 0, 1, 1, 1]


def test_vocabulary_rejects_duplicates():
    with pytest.raises(InvalidParameterError):
        Vocabulary(("a", "b", "a"))


def test_mask_tokens_counts_per_document():
    x = CountMatrix.from_dense([[10], [0], [10]])
    mask = mask_tokens(x, 0.3, Rng(1))
    assert mask.train.total() == 6
    assert mask.heldout.total() == 14
    assert mask.original == x


def test_mask_tokens_conserves_every_entry(toy_corpus):
    mask = mask_tokens(toy_corpus, 0.5, Rng(2))
    assert mask.original == toy_corpus
    expected = np.floor(0.5 * toy_corpus.doc_totals() + 0.5).astype(int)
    assert mask.train.doc_totals().tolist() == expected.tolist()


def test_mask_tokens_rejects_bad_fraction(toy_corpus):
    for fraction in (0.0, 1.0, 1.5):
        with pytest.raises(InvalidParameterError):
            mask_tokens(toy_corpus, fraction, Rng(0))


def test_filter_vocab_drops_stopwords_and_rare_terms():
    x = CountMatrix.from_dense([[5, 1], [1, 0], [2, 2], [0, 0]])
    vocab = Vocabulary(("the", "rare", "topic", "empty"))
    kept_vocab, kept = filter_vocab(x, vocab, stoplist=["the"], min_count=2)
    assert kept_vocab.terms == ("topic",)
    assert kept.to_dense().tolist() == [[2, 2]]


def test_filter_vocab_keeps_empty_documents():
    x = CountMatrix.from_dense([[1, 0], [0, 3]])
    vocab = Vocabulary(("a", "b"))
    _, kept = filter_vocab(x, vocab, stoplist=["b"])
    assert kept.J == 2
    assert kept.doc_totals().tolist() == [1, 0]


def test_top_terms_keeps_most_frequent_in_order():
    x = CountMatrix.from_dense([[1], [5], [3], [5]])
    vocab = Vocabulary(("a", "b", "c", "d"))
    kept_vocab, kept = top_terms(x, vocab, 2)
    assert kept_vocab.terms == ("b", "d")
    assert kept.to_dense().ravel().tolist() == [5, 5]


def test_config_echo_header_is_written_and_skipped(tmp_path):
    x = CountMatrix.from_dense([[1, 0], [2, 3]])
    path = str(tmp_path / "generated.bow")
    save_bow(path, x, config_echo={"seed": 5, "eta": [0.05]})
    lines = (tmp_path / "generated.bow").read_text().splitlines()
    assert lines[:2] == ["# seed=5", "# eta=[0.05]"]
    _, loaded = load_bow(path)
    assert loaded == x


def test_line_numbers_count_comment_lines(tmp_path):
    with pytest.raises(ParseError) as info:
        load_bow(_write(tmp_path, "# seed=1\n2\n3\n2\n1 1 4\n9 3 1\n"))
    assert info.value.line_number == 6
