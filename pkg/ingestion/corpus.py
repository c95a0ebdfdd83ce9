"""
Corpus data types: vocabulary, sparse term-by-document counts, heldout split.
"""
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from errors import DimensionError, InvalidParameterError


@dataclass(frozen=True)
class Vocabulary:
    """Ordered, duplicate-free list of terms; index 0-based."""
    terms: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if len(set(self.terms)) != len(self.terms):
            seen = set()
            dup = next(t for t in self.terms if t in seen or seen.add(t))
            raise InvalidParameterError(f"duplicate vocabulary term: {dup!r}")

    @property
    def size(self) -> int:
        return len(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __getitem__(self, index: int) -> str:
        return self.terms[index]

    def subset(self, keep: Sequence[int]) -> "Vocabulary":
        return Vocabulary(tuple(self.terms[i] for i in keep))


class CountMatrix:
    """Sparse V x J matrix of positive integer counts (terms by documents).

    Backed by a canonical `scipy.sparse.csc_matrix`: no explicit zeros, no
    duplicate entries, sorted indices.  Treated as immutable.
    """

    def __init__(self, matrix, shape: Optional[Tuple[int, int]] = None):
        csc = sparse.csc_matrix(matrix, shape=shape, dtype=np.int64, copy=True)
        csc.sum_duplicates()
        csc.eliminate_zeros()
        csc.sort_indices()
        if csc.nnz and csc.data.min() <= 0:
            raise InvalidParameterError("counts must be positive integers")
        self._csc = csc

    @classmethod
    def from_entries(cls, V: int, J: int, entries: Iterable[Tuple[int, int, int]]) -> "CountMatrix":
        """Build from (term, doc, count) triples; duplicates are rejected."""
        rows: List[int] = []
        cols: List[int] = []
        vals: List[int] = []
        seen = set()
        for v, j, c in entries:
            if not (0 <= v < V and 0 <= j < J):
                raise DimensionError(f"entry ({v}, {j}) outside a {V}x{J} matrix")
            if c <= 0:
                raise InvalidParameterError(f"entry ({v}, {j}) has non-positive count {c}")
            if (v, j) in seen:
                raise InvalidParameterError(f"duplicate entry ({v}, {j})")
            seen.add((v, j))
            rows.append(v)
            cols.append(j)
            vals.append(int(c))
        coo = sparse.coo_matrix((np.asarray(vals, dtype=np.int64), (rows, cols)), shape=(V, J))
        return cls(coo)

    @classmethod
    def from_dense(cls, array) -> "CountMatrix":
        arr = np.asarray(array)
        if arr.ndim != 2:
            raise DimensionError(f"expected a 2-D array, got shape {arr.shape}")
        if np.any(arr < 0) or np.any(arr != np.round(arr)):
            raise InvalidParameterError("counts must be nonnegative integers")
        return cls(sparse.csc_matrix(arr.astype(np.int64)))

    @property
    def matrix(self) -> sparse.csc_matrix:
        return self._csc

    @property
    def V(self) -> int:
        return self._csc.shape[0]

    @property
    def J(self) -> int:
        return self._csc.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self._csc.shape

    @property
    def nnz(self) -> int:
        return self._csc.nnz

    def entries(self) -> List[Tuple[int, int, int]]:
        """(term, doc, count) triples ordered by document, then term."""
        out = []
        for j in range(self.J):
            terms, counts = self.column(j)
            out.extend((int(v), j, int(c)) for v, c in zip(terms, counts))
        return out

    def column(self, j: int) -> Tuple[np.ndarray, np.ndarray]:
        start, stop = self._csc.indptr[j], self._csc.indptr[j + 1]
        return self._csc.indices[start:stop], self._csc.data[start:stop]

    def doc_totals(self) -> np.ndarray:
        return np.asarray(self._csc.sum(axis=0)).ravel().astype(np.int64)

    def term_totals(self) -> np.ndarray:
        return np.asarray(self._csc.sum(axis=1)).ravel().astype(np.int64)

    def total(self) -> int:
        return int(self._csc.data.sum())

    def to_dense(self) -> np.ndarray:
        return self._csc.toarray()

    def select_terms(self, keep: Sequence[int]) -> "CountMatrix":
        return CountMatrix(self._csc[np.asarray(keep, dtype=np.int64), :])

    def select_docs(self, keep: Sequence[int]) -> "CountMatrix":
        return CountMatrix(self._csc[:, np.asarray(keep, dtype=np.int64)])

    def expand_tokens(self) -> Tuple[np.ndarray, np.ndarray]:
        """Token-level (word ids, doc ids), grouped by document."""
        doc_ids = np.repeat(np.arange(self.J), np.diff(self._csc.indptr))
        words = np.repeat(self._csc.indices, self._csc.data)
        docs = np.repeat(doc_ids, self._csc.data)
        return words.astype(np.int64), docs.astype(np.int64)

    def __add__(self, other: "CountMatrix") -> "CountMatrix":
        if self.shape != other.shape:
            raise DimensionError(f"cannot add {self.shape} and {other.shape}")
        return CountMatrix(self._csc + other._csc)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CountMatrix) or self.shape != other.shape:
            return False
        return (self._csc != other._csc).nnz == 0

    def __repr__(self) -> str:
        return f"CountMatrix(V={self.V}, J={self.J}, nnz={self.nnz}, total={self.total()})"


@dataclass(frozen=True)
class HeldoutMask:
    """Token-level split of one corpus; train + heldout equals the original."""
    train: CountMatrix
    heldout: CountMatrix
    fraction: float

    def __post_init__(self):
        if self.train.shape != self.heldout.shape:
            raise DimensionError("train and heldout parts must share a shape")
        if not 0 < self.fraction < 1:
            raise InvalidParameterError(f"fraction must lie in (0, 1), got {self.fraction}")

    @property
    def original(self) -> CountMatrix:
        return self.train + self.heldout
