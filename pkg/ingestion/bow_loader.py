"""
UCI bag-of-words loading and saving.

Format: three header lines (D documents, W terms, NNZ nonzeros) followed by
NNZ lines "docID wordID count", IDs 1-indexed.  Lines starting with `#`
(a config echo written by `save`) are skipped.  An optional vocabulary
sidecar holds one term per line, in wordID order.  All files are UTF-8.
"""
import logging
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple

from errors import ParseError
from ingestion.corpus import CountMatrix, Vocabulary

logger = logging.getLogger(__name__)


class BowLoader:
    """Read and write UCI bag-of-words corpora."""

    HEADER_FIELDS = ("D", "W", "NNZ")

    @staticmethod
    def default_vocab_path(path: str) -> Path:
        """Sidecar location: docword.<name>.txt -> vocab.<name>.txt, else <stem>.vocab."""
        p = Path(path)
        if p.name.startswith("docword."):
            return p.with_name("vocab." + p.name[len("docword."):])
        return p.with_suffix(".vocab")

    @staticmethod
    def load_vocab(path: str) -> Vocabulary:
        """Load a vocabulary file, one term per line."""
        terms: List[str] = []
        with open(path, "r", encoding="utf-8") as f:
            for line_number, line in enumerate(f, start=1):
                term = line.rstrip("\r\n")
                if not term.strip():
                    raise ParseError("empty vocabulary term", line_number, str(path))
                terms.append(term)
        try:
            return Vocabulary(tuple(terms))
        except ValueError as e:
            raise ParseError(str(e), 0, str(path)) from e

    @staticmethod
    def save_vocab(path: str, vocab: Vocabulary) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for term in vocab.terms:
                f.write(f"{term}\n")

    @staticmethod
    def _numbered(f) -> Iterator[Tuple[int, str]]:
        return ((n, line) for n, line in enumerate(f, start=1) if not line.startswith("#"))

    @classmethod
    def _read_header(cls, lines: Iterator[Tuple[int, str]], path: str) -> Tuple[Tuple[int, int, int], int]:
        values = []
        line_number = 0
        for name in cls.HEADER_FIELDS:
            try:
                line_number, raw = next(lines)
            except StopIteration:
                raise ParseError(f"missing header line {name}", line_number + 1, path)
            try:
                value = int(raw.strip())
            except ValueError:
                raise ParseError(f"header {name} is not an integer: {raw.strip()!r}", line_number, path)
            if value < 0:
                raise ParseError(f"header {name} must be >= 0, got {value}", line_number, path)
            values.append(value)
        return (values[0], values[1], values[2]), line_number

    @classmethod
    def load(cls, file_path: str, vocab_path: Optional[str] = None) -> Tuple[Optional[Vocabulary], CountMatrix]:
        """
        Load a UCI bag-of-words file.

        Args:
            file_path: Path to the docword file
            vocab_path: Optional vocabulary sidecar; the conventional sidecar
                location is tried when omitted

        Returns:
            (Vocabulary or None, CountMatrix with V = W and J = D)
        """
        path = str(file_path)
        entries = []
        seen = set()
        with open(path, "r", encoding="utf-8") as f:
            lines = cls._numbered(f)
            (D, W, NNZ), nnz_line = cls._read_header(lines, path)
            for line_number, raw in lines:
                text = raw.strip()
                if not text:
                    continue
                parts = text.split()
                if len(parts) != 3:
                    raise ParseError(f"expected 'docID wordID count', got {text!r}", line_number, path)
                try:
                    doc_id, word_id, count = (int(x) for x in parts)
                except ValueError:
                    raise ParseError(f"non-integer field in {text!r}", line_number, path)
                if not 1 <= doc_id <= D:
                    raise ParseError(f"docID {doc_id} outside 1..{D}", line_number, path)
                if not 1 <= word_id <= W:
                    raise ParseError(f"wordID {word_id} outside 1..{W}", line_number, path)
                if count <= 0:
                    raise ParseError(f"count must be positive, got {count}", line_number, path)
                key = (word_id - 1, doc_id - 1)
                if key in seen:
                    raise ParseError(f"duplicate entry for docID {doc_id} wordID {word_id}", line_number, path)
                seen.add(key)
                entries.append((word_id - 1, doc_id - 1, count))
        if len(entries) != NNZ:
            raise ParseError(f"header declares NNZ={NNZ} but {len(entries)} entries were read", nnz_line, path)

        matrix = CountMatrix.from_entries(W, D, entries)

        vocab = None
        sidecar = Path(vocab_path) if vocab_path else cls.default_vocab_path(path)
        if sidecar.exists():
            vocab = cls.load_vocab(str(sidecar))
            if vocab.size != W:
                raise ParseError(f"vocabulary has {vocab.size} terms but header declares W={W}", 0, str(sidecar))
        elif vocab_path:
            raise ParseError("vocabulary file not found", 0, str(sidecar))

        logger.info(f"Loaded {path}: V={W} J={D} nnz={NNZ} tokens={matrix.total()}")
        return vocab, matrix

    @classmethod
    def save(cls, file_path: str, matrix: CountMatrix, vocab: Optional[Vocabulary] = None,
             vocab_path: Optional[str] = None, config_echo: Optional[Dict[str, Any]] = None) -> None:
        """Write `matrix` (and optionally its vocabulary sidecar) in UCI format, `config_echo` as `#` lines first."""
        with open(file_path, "w", encoding="utf-8", newline="\n") as f:
            for key, value in (config_echo or {}).items():
                f.write(f"# {key}={value}\n")
            f.write(f"{matrix.J}\n{matrix.V}\n{matrix.nnz}\n")
            for v, j, c in matrix.entries():
                f.write(f"{j + 1} {v + 1} {c}\n")
        if vocab is not None:
            cls.save_vocab(vocab_path or str(cls.default_vocab_path(file_path)), vocab)
        logger.info(f"Saved {file_path}: V={matrix.V} J={matrix.J} nnz={matrix.nnz}")


def load_bow(path: str, vocab_path: Optional[str] = None) -> Tuple[Optional[Vocabulary], CountMatrix]:
    return BowLoader.load(path, vocab_path)


def save_bow(path: str, matrix: CountMatrix, vocab: Optional[Vocabulary] = None,
             vocab_path: Optional[str] = None, config_echo: Optional[Dict[str, Any]] = None) -> None:
    BowLoader.save(path, matrix, vocab, vocab_path, config_echo)
