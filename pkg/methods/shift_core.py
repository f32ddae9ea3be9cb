#!/usr/bin/env python3
"""
Subshifts of finite type

Defines the shift space X (finite alphabet, admissible transitions, left shift T),
the lexicographic tables of admissible words every other module indexes into,
de Bruijn word graphs, periodic orbits and the shift metric.

Words are rows of uint8 arrays (alphabets up to 256 symbols). Word tables are
always in lexicographic order, so extensions of a common prefix are contiguous.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_CAP = 2 ** 24
MAX_ALPHABET = 256

Word = Tuple[int, ...]


class EnumerationLimitError(ValueError):
    """An exhaustive computation would exceed the enumeration cap"""

    def __init__(self, what: str, required: int, cap: int):
        super().__init__(
            f"{what} requires {required} entries, above the enumeration cap {cap} "
            f"(raise the cap with --cap or lower the horizon)"
        )
        self.what = what
        self.required = required
        self.cap = cap


class DomainError(ValueError):
    """Mathematically invalid input; `witness` names the offending word or symbol"""

    def __init__(self, message: str, witness: Any = None):
        super().__init__(message)
        self.witness = witness


def check_cap(what: str, required: int, cap: Optional[int]) -> None:
    limit = DEFAULT_CAP if cap is None else cap
    if required > limit:
        raise EnumerationLimitError(what, required, limit)


def _boolean_power(matrix: np.ndarray, exponent: int) -> np.ndarray:
    size = matrix.shape[0]
    result = np.eye(size, dtype=np.int64)
    base = matrix.astype(np.int64)
    while exponent:
        if exponent & 1:
            result = np.minimum(result @ base, 1)
        base = np.minimum(base @ base, 1)
        exponent >>= 1
    return result


def is_primitive(matrix: np.ndarray) -> bool:
    """Wielandt: a primitive n×n 0/1 matrix has A^((n-1)^2+1) > 0."""
    size = matrix.shape[0]
    return bool(np.all(_boolean_power(matrix, (size - 1) ** 2 + 1) > 0))


@dataclass(frozen=True)
class Sft:
    """One-sided subshift of finite type given by a 0/1 transition matrix"""

    alphabet_size: int
    transitions: Tuple[Tuple[bool, ...], ...]

    def __post_init__(self):
        size = self.alphabet_size
        if not isinstance(size, (int, np.integer)) or size < 1:
            raise DomainError(f"alphabet_size must be a positive integer, got {size!r}")
        if size > MAX_ALPHABET:
            raise DomainError(f"alphabet_size {size} exceeds the supported maximum {MAX_ALPHABET}")
        rows = tuple(tuple(bool(x) for x in row) for row in self.transitions)
        if len(rows) != size or any(len(row) != size for row in rows):
            raise DomainError(f"transitions must be a {size}x{size} matrix")
        object.__setattr__(self, "transitions", rows)

        matrix = self.matrix
        for a in range(size):
            if not matrix[a].any():
                raise DomainError(f"symbol {a} has no admissible successor", witness=a)
            if not matrix[:, a].any():
                raise DomainError(f"symbol {a} has no admissible predecessor", witness=a)
        if not is_primitive(matrix):
            raise DomainError("transition matrix is not primitive (no power is strictly positive)")

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.transitions, dtype=bool).reshape(self.alphabet_size, self.alphabet_size)

    @property
    def full_shift(self) -> bool:
        return all(all(row) for row in self.transitions)

    @classmethod
    def full(cls, alphabet_size: int) -> "Sft":
        return cls(alphabet_size, tuple((True,) * alphabet_size for _ in range(alphabet_size)))

    @classmethod
    def golden_mean(cls) -> "Sft":
        """Two symbols, the word 11 forbidden."""
        return cls(2, ((True, True), (True, False)))

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[Any]]) -> "Sft":
        rows = tuple(tuple(bool(x) for x in row) for row in matrix)
        return cls(len(rows), rows)

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "Sft":
        size = data.get("alphabet_size")
        if data.get("full_shift") and "transitions" not in data:
            if size is None:
                raise DomainError("full_shift shorthand needs alphabet_size")
            return cls.full(int(size))
        if "transitions" not in data:
            raise DomainError("sft needs either transitions or full_shift: true")
        sft = cls.from_matrix(data["transitions"])
        if size is not None and int(size) != sft.alphabet_size:
            raise DomainError(
                f"alphabet_size {size} does not match the {sft.alphabet_size}x{sft.alphabet_size} transitions"
            )
        return sft

    def to_json(self) -> Dict[str, Any]:
        return {
            "alphabet_size": self.alphabet_size,
            "transitions": [[int(x) for x in row] for row in self.transitions],
            "full_shift": self.full_shift,
        }

    def is_admissible(self, word: Sequence[int]) -> bool:
        if len(word) == 0:
            return False
        if any(not 0 <= int(a) < self.alphabet_size for a in word):
            return False
        return all(self.transitions[int(a)][int(b)] for a, b in zip(word, word[1:]))

    def check_word(self, word: Sequence[int]) -> Word:
        if not self.is_admissible(word):
            raise DomainError(f"word {word_to_str(word)} is not admissible", witness=tuple(word))
        return tuple(int(a) for a in word)


# --- words -----------------------------------------------------------------


def word_to_str(word: Iterable[int]) -> str:
    symbols = [int(a) for a in word]
    if all(a < 10 for a in symbols):
        return "".join(str(a) for a in symbols)
    return ".".join(str(a) for a in symbols)


def parse_word(text: str, alphabet_size: int) -> Word:
    if "." in text or alphabet_size > 10:
        symbols = tuple(int(part) for part in text.split("."))
    else:
        symbols = tuple(int(ch) for ch in text)
    if any(not 0 <= a < alphabet_size for a in symbols):
        raise DomainError(f"word {text!r} uses symbols outside the alphabet of size {alphabet_size}", witness=text)
    return symbols


def count_words(sft: Sft, n: int) -> int:
    """Exact number of admissible words of length n (row-vector recursion on the transitions)."""
    if n < 1:
        raise DomainError(f"word length must be at least 1, got {n}")
    counts = [1] * sft.alphabet_size
    for _ in range(n - 1):
        counts = [
            sum(counts[a] for a in range(sft.alphabet_size) if sft.transitions[a][b])
            for b in range(sft.alphabet_size)
        ]
    return sum(counts)


@lru_cache(maxsize=64)
def _word_table(sft: Sft, n: int) -> np.ndarray:
    size = sft.alphabet_size
    matrix = sft.matrix
    symbols = np.arange(size, dtype=np.uint8)
    words = symbols.reshape(size, 1)
    for _ in range(1, n):
        last = np.repeat(words[:, -1], size)
        following = np.tile(symbols, len(words))
        keep = matrix[last, following]
        words = np.hstack([np.repeat(words, size, axis=0)[keep], following[keep, None]])
    words.setflags(write=False)
    logger.debug(f"Built word table n={n}: {len(words)} words")
    return words


def word_table(sft: Sft, n: int, cap: Optional[int] = None) -> np.ndarray:
    """Admissible words of length n as a read-only (count, n) uint8 array, lexicographic."""
    check_cap(f"words of length {n}", count_words(sft, n), cap)
    return _word_table(sft, n)


def enumerate_words(sft: Sft, n: int, cap: Optional[int] = None) -> List[Word]:
    return [tuple(int(a) for a in row) for row in word_table(sft, n, cap)]


def word_codes(words: np.ndarray, alphabet_size: int) -> np.ndarray:
    """Base-|A| integer code of each row; order-preserving."""
    length = words.shape[1]
    if length * math.log2(max(alphabet_size, 2)) < 62:
        weights = alphabet_size ** np.arange(length - 1, -1, -1, dtype=np.int64)
        return words.astype(np.int64) @ weights
    weights = np.array([alphabet_size ** p for p in range(length - 1, -1, -1)], dtype=object)
    return words.astype(object) @ weights


@lru_cache(maxsize=64)
def _table_codes(sft: Sft, n: int) -> np.ndarray:
    return word_codes(_word_table(sft, n), sft.alphabet_size)


def word_index(sft: Sft, words: Union[np.ndarray, Sequence[Sequence[int]]], cap: Optional[int] = None) -> np.ndarray:
    """Row index of each word in word_table(sft, len(word))."""
    words = np.atleast_2d(np.asarray(words, dtype=np.uint8))
    length = words.shape[1]
    word_table(sft, length, cap)
    table = _table_codes(sft, length)
    codes = word_codes(words, sft.alphabet_size)
    idx = np.minimum(np.searchsorted(table, codes), len(table) - 1)
    bad = np.flatnonzero(table[idx] != codes)
    if len(bad):
        witness = tuple(int(a) for a in words[bad[0]])
        raise DomainError(f"word {word_to_str(witness)} is not admissible", witness=witness)
    return idx.astype(np.int64)


def window_index(sft: Sft, length: int, start: int, width: int, cap: Optional[int] = None) -> np.ndarray:
    """For each admissible length-word, the index of its sub-word [start, start+width)."""
    words = word_table(sft, length, cap)
    return word_index(sft, words[:, start:start + width], cap)


def prefix_index(sft: Sft, length: int, prefix_len: int, cap: Optional[int] = None) -> np.ndarray:
    return window_index(sft, length, 0, prefix_len, cap)


def group_reduce(
    sft: Sft, values: np.ndarray, length: int, prefix_len: int, ufunc: np.ufunc, cap: Optional[int] = None
) -> np.ndarray:
    """Fold values indexed by length-words onto their prefix_len-prefixes (min, max or add)."""
    if prefix_len == length:
        return np.asarray(values)
    groups = prefix_index(sft, length, prefix_len, cap)
    starts = np.flatnonzero(np.r_[True, groups[1:] != groups[:-1]])
    return ufunc.reduceat(np.asarray(values), starts)


# --- word graphs -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WordGraph:
    """De Bruijn graph of depth k: nodes are admissible k-words, edges are admissible (k+1)-words."""

    sft: Sft
    depth: int
    nodes: np.ndarray
    edge_src: np.ndarray
    edge_dst: np.ndarray
    successors: np.ndarray
    predecessors: np.ndarray

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edge_src)

    def node_word(self, index: int) -> Word:
        return tuple(int(a) for a in self.nodes[index])

    def to_networkx(self, weights: Optional[np.ndarray] = None) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.node_count))
        for e, (u, v) in enumerate(zip(self.edge_src.tolist(), self.edge_dst.tolist())):
            if weights is None:
                graph.add_edge(u, v)
            else:
                graph.add_edge(u, v, weight=float(weights[e]))
        return graph

    def cycle_symbols(self, node_cycle: Sequence[int]) -> Word:
        return tuple(int(self.nodes[v][0]) for v in node_cycle)


def word_graph(sft: Sft, k: int, cap: Optional[int] = None) -> WordGraph:
    if k < 1:
        raise DomainError(f"word graph depth must be at least 1, got {k}")
    edges = word_table(sft, k + 1, cap)
    nodes = word_table(sft, k, cap)
    src = prefix_index(sft, k + 1, k, cap)
    dst = window_index(sft, k + 1, 1, k, cap)

    successors = np.full((len(nodes), sft.alphabet_size), -1, dtype=np.int64)
    predecessors = np.full((len(nodes), sft.alphabet_size), -1, dtype=np.int64)
    successors[src, edges[:, -1]] = dst
    predecessors[dst, edges[:, 0]] = src
    for array in (src, dst, successors, predecessors):
        array.setflags(write=False)

    return WordGraph(sft, k, nodes, src, dst, successors, predecessors)


# --- periodic points -------------------------------------------------------


def canonical_rotation(cycle: Sequence[int]) -> Word:
    cycle = tuple(int(a) for a in cycle)
    return min(cycle[i:] + cycle[:i] for i in range(len(cycle)))


@dataclass(frozen=True)
class EventuallyPeriodicPoint:
    """The point prefix · cycle^∞ of A^N."""

    prefix: Word
    cycle: Word

    def __post_init__(self):
        if not self.cycle:
            raise DomainError("an eventually periodic point needs a non-empty cycle")

    def symbol(self, i: int) -> int:
        """Symbol x_i, indices starting at 1."""
        if i <= len(self.prefix):
            return self.prefix[i - 1]
        return self.cycle[(i - len(self.prefix) - 1) % len(self.cycle)]

    def shift(self) -> "EventuallyPeriodicPoint":
        if self.prefix:
            return EventuallyPeriodicPoint(self.prefix[1:], self.cycle)
        return EventuallyPeriodicPoint((), self.cycle[1:] + self.cycle[:1])

    def head(self, n: int) -> Word:
        return tuple(self.symbol(i) for i in range(1, n + 1))


@dataclass(frozen=True)
class PeriodicOrbit:
    cycle: Word

    def __post_init__(self):
        if not self.cycle:
            raise DomainError("a periodic orbit needs a non-empty cycle")
        object.__setattr__(self, "cycle", tuple(int(a) for a in self.cycle))

    @property
    def period(self) -> int:
        return len(self.cycle)

    def canonical(self) -> "PeriodicOrbit":
        return PeriodicOrbit(canonical_rotation(self.cycle))

    def point(self) -> EventuallyPeriodicPoint:
        return EventuallyPeriodicPoint((), self.cycle)

    def is_admissible(self, sft: Sft) -> bool:
        return sft.is_admissible(self.cycle * 2)

    def __str__(self) -> str:
        return f"({word_to_str(self.cycle)})^inf"


def periodic_orbits(
    sft: Sft, max_period: int, depth: int = 1, cap: Optional[int] = None
) -> List[PeriodicOrbit]:
    """Simple cycles of the depth-k word graph up to max_period, one per rotation class."""
    if max_period < 1:
        raise DomainError(f"max_period must be at least 1, got {max_period}")
    limit = DEFAULT_CAP if cap is None else cap
    graph = word_graph(sft, depth, cap)
    found = set()
    for node_cycle in nx.simple_cycles(graph.to_networkx(), length_bound=max_period):
        found.add(canonical_rotation(graph.cycle_symbols(node_cycle)))
        if len(found) > limit:
            raise EnumerationLimitError(f"periodic orbits up to period {max_period}", len(found), limit)
    orbits = [PeriodicOrbit(c) for c in sorted(found, key=lambda c: (len(c), c))]
    logger.debug(f"Found {len(orbits)} periodic orbits up to period {max_period} at depth {depth}")
    return orbits


PointLike = Union[EventuallyPeriodicPoint, PeriodicOrbit]


def shift_metric(x: PointLike, y: PointLike) -> float:
    """d(x, y) = 2^-n(x,y) with n(x,y) the first index (from 1) where x and y differ."""
    if isinstance(x, PeriodicOrbit):
        x = x.point()
    if isinstance(y, PeriodicOrbit):
        y = y.point()
    horizon = max(len(x.prefix), len(y.prefix)) + math.lcm(len(x.cycle), len(y.cycle))
    for i in range(1, horizon + 1):
        if x.symbol(i) != y.symbol(i):
            return 2.0 ** (-i)
    return 0.0
