"""
Parity-check matrices and GF(2) utilities for binary LDPC codes.

The matrix is kept as sparse neighborhoods (row and column index lists) plus
flattened edge arrays; decoders iterate those, never a dense H.
"""

import logging
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from app.config import REG32_SEED

logger = logging.getLogger(__name__)

# Restarts of the socket construction before giving up on a degree profile
_MAX_RESTARTS = 1000
_MAX_SHUFFLES = 200


class DimensionError(ValueError):
    """A vector does not match the matrix it is used with."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class ParityCheckMatrix:
    """Immutable M x N binary matrix; row i lists the variables of clause i."""

    def __init__(self, n: int, rows: Sequence[Iterable[int]], name: str = "custom", source: str | None = None):
        if n < 1:
            raise ValueError(f"variable count must be positive, got {n}")
        if len(rows) == 0:
            raise ValueError("a parity-check matrix needs at least one clause")

        built = []
        for i, row in enumerate(rows):
            idx = np.asarray(list(row), dtype=np.int64)
            if idx.size == 0:
                raise ValueError(f"clause {i} is empty")
            if idx.min() < 0 or idx.max() >= n:
                raise ValueError(f"clause {i} references a column outside [0, {n})")
            if np.unique(idx).size != idx.size:
                raise ValueError(f"clause {i} lists a column twice")
            built.append(_frozen(np.sort(idx)))

        self.name = name
        self.source = source
        # SHA-256 of the file text when loaded from disk
        self.digest: str | None = None
        self._n = int(n)
        self._rows = tuple(built)

        row_degrees = np.array([r.size for r in built], dtype=np.int64)
        self._row_ptr = _frozen(np.concatenate(([0], np.cumsum(row_degrees))))
        self._edge_cols = _frozen(np.concatenate(built))
        self._edge_rows = _frozen(np.repeat(np.arange(len(built), dtype=np.int64), row_degrees))

        # Column view: stable sort of the edges by column keeps rows ascending
        order = np.argsort(self._edge_cols, kind="stable")
        col_degrees = np.bincount(self._edge_cols, minlength=n)
        splits = np.cumsum(col_degrees)[:-1]
        self._cols = tuple(_frozen(c) for c in np.split(self._edge_rows[order], splits))

        data = np.ones(self._edge_cols.size, dtype=np.int64)
        self._matrix = sparse.csr_matrix((data, self._edge_cols, self._row_ptr), shape=(len(built), n))

    @classmethod
    def from_dense(cls, dense, name: str = "custom", source: str | None = None) -> "ParityCheckMatrix":
        a = np.asarray(dense)
        if a.ndim != 2:
            raise ValueError(f"dense matrix must be 2-D, got shape {a.shape}")
        if not np.isin(a, (0, 1)).all():
            raise ValueError("dense matrix entries must be 0 or 1")
        return cls(a.shape[1], [np.flatnonzero(row) for row in a], name=name, source=source)

    @property
    def m(self) -> int:
        return len(self._rows)

    @property
    def n(self) -> int:
        return self._n

    @property
    def rows(self) -> tuple:
        return self._rows

    @property
    def cols(self) -> tuple:
        return self._cols

    @property
    def edge_rows(self) -> np.ndarray:
        return self._edge_rows

    @property
    def edge_cols(self) -> np.ndarray:
        return self._edge_cols

    @property
    def row_ptr(self) -> np.ndarray:
        return self._row_ptr

    @property
    def num_edges(self) -> int:
        return int(self._edge_cols.size)

    @property
    def matrix(self) -> sparse.csr_matrix:
        return self._matrix

    @cached_property
    def row_degrees(self) -> np.ndarray:
        return _frozen(np.diff(self._row_ptr))

    @cached_property
    def col_degrees(self) -> np.ndarray:
        return _frozen(np.array([c.size for c in self._cols], dtype=np.int64))

    @cached_property
    def generator(self) -> np.ndarray:
        return _frozen(gaussian_generator(self))

    @property
    def k(self) -> int:
        return int(self.generator.shape[0])

    @property
    def rank(self) -> int:
        return self.n - self.k

    @property
    def rate(self) -> float:
        return self.k / self.n

    def row_sums(self, values: np.ndarray) -> np.ndarray:
        """Sum `values[j]` over each clause's variables (z_i = sum_j h_ij v_j)."""
        return np.add.reduceat(values[self._edge_cols], self._row_ptr[:-1])

    def col_sums(self, per_clause: np.ndarray) -> np.ndarray:
        """Sum a per-clause quantity over each variable's clauses."""
        return np.bincount(self._edge_cols, weights=per_clause[self._edge_rows], minlength=self._n)

    def to_dense(self) -> np.ndarray:
        return self._matrix.toarray().astype(np.uint8)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParityCheckMatrix):
            return NotImplemented
        return (
            self.n == other.n
            and self.m == other.m
            and all(np.array_equal(a, b) for a, b in zip(self._rows, other._rows))
        )

    def __hash__(self) -> int:
        return hash((self.n, tuple(tuple(r.tolist()) for r in self._rows)))

    def __repr__(self) -> str:
        return f"ParityCheckMatrix(name={self.name!r}, m={self.m}, n={self.n}, edges={self.num_edges})"


def as_word(u, n: int) -> np.ndarray:
    """Validate a binary word of length n and return it as int64."""
    bits = np.asarray(u)
    if bits.shape != (n,):
        raise DimensionError(f"expected a word of length {n}, got shape {bits.shape}")
    bits = bits.astype(np.int64)
    if ((bits != 0) & (bits != 1)).any():
        raise ValueError("word entries must be 0 or 1")
    return bits


def syndrome(h: ParityCheckMatrix, u) -> np.ndarray:
    """Clause parities of u: bit i is the XOR of u over row i."""
    bits = as_word(u, h.n)
    return (h.matrix @ bits % 2).astype(np.uint8)


def is_codeword(h: ParityCheckMatrix, u) -> bool:
    return not syndrome(h, u).any()


def _gf2_rref(a: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2); returns the nonzero rows and pivot columns."""
    a = a.astype(np.uint8) % 2
    m, n = a.shape
    pivots: list[int] = []
    row = 0
    for col in range(n):
        if row == m:
            break
        nz = np.flatnonzero(a[row:, col])
        if nz.size == 0:
            continue
        p = row + nz[0]
        if p != row:
            a[[row, p]] = a[[p, row]]
        others = a[:, col].astype(bool)
        others[row] = False
        a[others] ^= a[row]
        pivots.append(col)
        row += 1
    return a[:row], pivots


def gf2_rank(h: ParityCheckMatrix) -> int:
    return len(_gf2_rref(h.to_dense())[1])


def gaussian_generator(h: ParityCheckMatrix) -> np.ndarray:
    """
    Generator matrix (k x N) spanning the null space of H over GF(2).

    Elimination pivots on columns in order; the k non-pivot (free) columns
    carry the identity, so row t of G is the codeword with only free bit t set.
    """
    rref, pivots = _gf2_rref(h.to_dense())
    free = [c for c in range(h.n) if c not in set(pivots)]
    g = np.zeros((len(free), h.n), dtype=np.uint8)
    if free:
        g[:, free] = np.eye(len(free), dtype=np.uint8)
        if pivots:
            g[:, pivots] = rref[:, free].T
    if len(pivots) < h.m:
        logger.warning("%s is rank deficient: rank %d for %d clauses", h.name, len(pivots), h.m)
    return g


def encode(message, g: np.ndarray) -> np.ndarray:
    msg = np.asarray(message, dtype=np.int64)
    if msg.shape != (g.shape[0],):
        raise DimensionError(f"message length {msg.shape} does not match k={g.shape[0]}")
    return (msg @ g.astype(np.int64) % 2).astype(np.uint8)


def random_regular_matrix(m: int, n: int, col_degree: int, seed: int, name: str | None = None) -> ParityCheckMatrix:
    """
    Random column-regular matrix built by matching shuffled edge sockets.

    Duplicate edges are rejected by reshuffling the unplaced sockets; a
    construction that stalls restarts from a fresh permutation of the same
    generator, so the result is a deterministic function of the seed.
    """
    if m < 1 or n < 1 or col_degree < 1:
        raise ValueError(f"m, n and col_degree must be positive, got ({m}, {n}, {col_degree})")
    if col_degree > m:
        raise ValueError(f"column degree {col_degree} exceeds the clause count {m}")
    edges = n * col_degree
    if edges % m:
        raise ValueError(f"{edges} edge sockets cannot be split evenly over {m} clauses")
    row_degree = edges // m
    if row_degree > n:
        raise ValueError(f"row degree {row_degree} exceeds the variable count {n}")

    rng = np.random.default_rng(seed)
    for attempt in range(_MAX_RESTARTS):
        v_socks = np.repeat(np.arange(n), col_degree)
        c_socks = np.repeat(np.arange(m), row_degree)
        rng.shuffle(v_socks)
        rng.shuffle(c_socks)

        placed: set[tuple[int, int]] = set()
        idx, stalls = 0, 0
        while idx < edges:
            pair = (int(c_socks[idx]), int(v_socks[idx]))
            if pair not in placed:
                placed.add(pair)
                idx += 1
                stalls = 0
                continue
            stalls += 1
            if stalls >= _MAX_SHUFFLES:
                break
            rng.shuffle(v_socks[idx:])
            rng.shuffle(c_socks[idx:])

        if idx == edges:
            rows: list[list[int]] = [[] for _ in range(m)]
            for i, j in placed:
                rows[i].append(j)
            return ParityCheckMatrix(n, rows, name=name or f"regular-{m}x{n}-d{col_degree}", source=f"seed={seed}")
        logger.debug("socket matching stalled, restart %d", attempt + 1)

    raise ValueError(f"no duplicate-free ({col_degree},{row_degree}) matrix found after {_MAX_RESTARTS} restarts")


# Three-bit majority code: u1^u2 = 0, u2^u3 = 0
_MAJORITY = [[1, 1, 0], [0, 1, 1]]
# Hamming(7,4): column j is the binary expansion of j + 1
_HAMMING74 = [
    [1, 0, 1, 0, 1, 0, 1],
    [0, 1, 1, 0, 0, 1, 1],
    [0, 0, 0, 1, 1, 1, 1],
]


@lru_cache(maxsize=None)
def builtin_matrix(name: str) -> ParityCheckMatrix:
    if name == "majority":
        return ParityCheckMatrix.from_dense(_MAJORITY, name="majority", source="builtin")
    if name == "ham74":
        return ParityCheckMatrix.from_dense(_HAMMING74, name="ham74", source="builtin")
    if name == "reg32":
        h = random_regular_matrix(24, 32, 3, seed=REG32_SEED, name="reg32")
        h.source = "builtin"
        return h
    raise KeyError(name)


def degree_summary(degrees: np.ndarray) -> str:
    lo, hi = int(degrees.min()), int(degrees.max())
    return f"{lo}" if lo == hi else f"{lo}..{hi}"


def describe(h: ParityCheckMatrix) -> dict:
    """Shape, rank and degree profile of a matrix (the `codes` summary)."""
    return {
        "name": h.name,
        "N": h.n,
        "M": h.m,
        "rank": h.rank,
        "k": h.k,
        "rate": h.rate,
        "rowdeg": degree_summary(h.row_degrees),
        "coldeg": degree_summary(h.col_degrees),
        "edges": h.num_edges,
    }
