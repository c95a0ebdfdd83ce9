"""
Ingestion module initialization.
"""
from ingestion.corpus import CountMatrix, HeldoutMask, Vocabulary
from ingestion.bow_loader import BowLoader, load_bow, save_bow
from ingestion.preprocessing import CorpusFilter, filter_vocab, mask_tokens, top_terms

__all__ = [
    "BowLoader",
    "CorpusFilter",
    "CountMatrix",
    "HeldoutMask",
    "Vocabulary",
    "filter_vocab",
    "load_bow",
    "mask_tokens",
    "save_bow",
    "top_terms",
]
