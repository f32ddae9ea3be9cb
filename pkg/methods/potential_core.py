#!/usr/bin/env python3
"""
Locally constant potentials

A potential of depth k takes one value per admissible k-word. Birkhoff sums are
path sums on the depth-k word graph: the edge (w -> w') carries f(w), so S_n f
over the cylinder of an (n+k-1)-word is the weight of an n-node path.

Extrema of S_n f come from max-plus / min-plus dynamic programming, and the
quotient seminorm from Karp's maximum mean cycle.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from shift_core import (
    DomainError,
    PeriodicOrbit,
    Sft,
    Word,
    WordGraph,
    canonical_rotation,
    check_cap,
    count_words,
    group_reduce,
    parse_word,
    prefix_index,
    window_index,
    word_graph,
    word_index,
    word_table,
    word_to_str,
)

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LocallyConstantPotential:
    """f(x) = values[index of x_1..x_k] on an SFT"""

    __array_ufunc__ = None

    sft: Sft
    depth: int
    values: np.ndarray

    def __post_init__(self):
        if self.depth < 1:
            raise DomainError(f"potential depth must be at least 1, got {self.depth}")
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        expected = count_words(self.sft, self.depth)
        if len(values) != expected:
            raise DomainError(f"depth-{self.depth} potential needs {expected} values, got {len(values)}")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise DomainError("potential values must be finite", witness=self.word(bad))
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    # --- construction ---------------------------------------------------

    @classmethod
    def constant(cls, sft: Sft, c: float, depth: int = 1) -> "LocallyConstantPotential":
        return cls(sft, depth, np.full(count_words(sft, depth), float(c)))

    @classmethod
    def from_function(cls, sft: Sft, depth: int, fn: Callable[[Word], float]) -> "LocallyConstantPotential":
        words = word_table(sft, depth)
        return cls(sft, depth, np.array([fn(tuple(int(a) for a in w)) for w in words], dtype=np.float64))

    @classmethod
    def from_mapping(cls, sft: Sft, depth: int, mapping: Dict[Union[str, Word], float]) -> "LocallyConstantPotential":
        words = word_table(sft, depth)
        values = np.full(len(words), np.nan)
        for key, value in mapping.items():
            word = parse_word(key, sft.alphabet_size) if isinstance(key, str) else tuple(key)
            if len(word) != depth:
                raise DomainError(f"word {word_to_str(word)} does not have length {depth}", witness=word)
            values[word_index(sft, [word])[0]] = float(value)
        missing = np.flatnonzero(np.isnan(values))
        if len(missing):
            witness = tuple(int(a) for a in words[missing[0]])
            raise DomainError(f"no value given for admissible word {word_to_str(witness)}", witness=witness)
        return cls(sft, depth, values)

    @classmethod
    def from_json(cls, sft: Sft, data: Dict) -> "LocallyConstantPotential":
        depth = int(data.get("depth", 1))
        if "constant" in data:
            return cls.constant(sft, float(data["constant"]), depth)
        if "values" not in data:
            raise DomainError("potential needs either values or constant")
        return cls.from_mapping(sft, depth, data["values"])

    @classmethod
    def random(cls, sft: Sft, depth: int, rng: np.random.Generator, scale: float = 1.0) -> "LocallyConstantPotential":
        return cls(sft, depth, rng.uniform(-scale, scale, size=count_words(sft, depth)))

    def to_json(self) -> Dict:
        return {
            "depth": self.depth,
            "values": {word_to_str(w): float(v) for w, v in zip(word_table(self.sft, self.depth), self.values)},
        }

    # --- access ---------------------------------------------------------

    def word(self, index: int) -> Word:
        return tuple(int(a) for a in word_table(self.sft, self.depth)[index])

    def value(self, word: Sequence[int]) -> float:
        """f on the cylinder of a word of length >= depth."""
        if len(word) < self.depth:
            raise DomainError(f"word {word_to_str(word)} is shorter than the depth {self.depth}", witness=tuple(word))
        self.sft.check_word(word)
        return float(self.values[word_index(self.sft, [tuple(word[: self.depth])])[0]])

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def lift(self, depth: int) -> "LocallyConstantPotential":
        if depth < self.depth:
            raise DomainError(f"cannot lift a depth-{self.depth} potential down to depth {depth}")
        if depth == self.depth:
            return self
        return LocallyConstantPotential(self.sft, depth, self.values[prefix_index(self.sft, depth, self.depth)])

    def edge_weights(self, graph: WordGraph) -> np.ndarray:
        """Weight of each edge (w -> w') of a graph of the same depth: f(w)."""
        if graph.depth != self.depth:
            return self.lift(graph.depth).edge_weights(graph)
        return self.values[graph.edge_src]

    # --- arithmetic -----------------------------------------------------

    def _reconcile(self, other: "LocallyConstantPotential") -> Tuple[np.ndarray, np.ndarray, int]:
        if other.sft != self.sft:
            raise DomainError("potentials live on different shifts")
        depth = max(self.depth, other.depth)
        return self.lift(depth).values, other.lift(depth).values, depth

    def __add__(self, other):
        if isinstance(other, LocallyConstantPotential):
            a, b, depth = self._reconcile(other)
            return LocallyConstantPotential(self.sft, depth, a + b)
        return LocallyConstantPotential(self.sft, self.depth, self.values + float(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return LocallyConstantPotential(self.sft, self.depth, -self.values)

    def __mul__(self, c: float):
        return LocallyConstantPotential(self.sft, self.depth, float(c) * self.values)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"LocallyConstantPotential(depth={self.depth}, words={len(self.values)})"


@dataclass(frozen=True)
class BirkhoffExtrema:
    n: int
    min_value: float
    max_value: float
    argmin_word: Word
    argmax_word: Word

    @property
    def sup_norm(self) -> float:
        return max(abs(self.min_value), abs(self.max_value))


@dataclass
class SeminormReport:
    value: float
    max_mean: float
    min_mean: float
    witness_cycles: Tuple[PeriodicOrbit, PeriodicOrbit]
    birkhoff_trace: Optional[List[Tuple[int, float]]] = None

    @property
    def gap(self) -> Optional[float]:
        """Distance of the last trace entry above the seminorm."""
        if not self.birkhoff_trace:
            return None
        return self.birkhoff_trace[-1][1] - self.value

    def to_json(self) -> Dict:
        return {
            "value": self.value,
            "max_mean": self.max_mean,
            "min_mean": self.min_mean,
            "max_witness": word_to_str(self.witness_cycles[0].cycle),
            "min_witness": word_to_str(self.witness_cycles[1].cycle),
            "birkhoff_trace": [{"n": n, "normalized_sup": v} for n, v in (self.birkhoff_trace or [])],
            "gap": self.gap,
        }


# --- Birkhoff sums -----------------------------------------------------------


def _incoming_weights(graph: WordGraph, node_values: np.ndarray) -> np.ndarray:
    """node_values[v] placed on the predecessor slots of every node, NaN where no edge."""
    return np.where(graph.predecessors >= 0, node_values[np.maximum(graph.predecessors, 0)], np.nan)


def _path_word(graph: WordGraph, path: Sequence[int]) -> Word:
    word = graph.node_word(path[0])
    return word + tuple(int(graph.nodes[v][-1]) for v in path[1:])


def _extremal_path(graph: WordGraph, weights: np.ndarray, n: int, maximize: bool) -> Tuple[float, Word]:
    """Best n-node path, node weights given; returns (value, word of length n+k-1)."""
    pick = np.nanargmax if maximize else np.nanargmin
    best = weights.copy()
    back = np.zeros((n, graph.node_count), dtype=np.int64)
    for step in range(1, n):
        incoming = _incoming_weights(graph, best)
        slot = pick(incoming, axis=1)
        back[step] = graph.predecessors[np.arange(graph.node_count), slot]
        best = incoming[np.arange(graph.node_count), slot] + weights
    node = int(pick(best))
    value = float(best[node])
    path = [node]
    for step in range(n - 1, 0, -1):
        node = int(back[step, node])
        path.append(node)
    return value, _path_word(graph, path[::-1])


def birkhoff_extrema(f: LocallyConstantPotential, n: int, cap: Optional[int] = None) -> BirkhoffExtrema:
    """Exact min and max of S_n f over X by max-plus / min-plus DP on the depth-k graph."""
    if n < 1:
        raise DomainError(f"Birkhoff horizon must be at least 1, got {n}")
    graph = word_graph(f.sft, f.depth, cap)
    max_value, argmax = _extremal_path(graph, f.values, n, maximize=True)
    min_value, argmin = _extremal_path(graph, f.values, n, maximize=False)
    return BirkhoffExtrema(n, min_value, max_value, argmin, argmax)


def birkhoff_trace(f: LocallyConstantPotential, n_max: int, cap: Optional[int] = None) -> List[Tuple[int, float, float]]:
    """(n, min S_n f, max S_n f) for n = 1..n_max in one forward sweep."""
    graph = word_graph(f.sft, f.depth, cap)
    hi = f.values.copy()
    lo = f.values.copy()
    trace = [(1, float(lo.min()), float(hi.max()))]
    for n in range(2, n_max + 1):
        hi = np.nanmax(_incoming_weights(graph, hi), axis=1) + f.values
        lo = np.nanmin(_incoming_weights(graph, lo), axis=1) + f.values
        trace.append((n, float(lo.min()), float(hi.max())))
    return trace


def _tail_extrema(graph: WordGraph, values: np.ndarray, steps: int) -> Tuple[np.ndarray, np.ndarray]:
    """Per start node v: min and max over paths of `steps` further nodes of the summed node values."""
    lo = np.zeros(graph.node_count)
    hi = np.zeros(graph.node_count)
    successors = graph.successors
    valid = successors >= 0
    safe = np.maximum(successors, 0)
    for _ in range(steps):
        hi = np.nanmax(np.where(valid, values[safe] + hi[safe], np.nan), axis=1)
        lo = np.nanmin(np.where(valid, values[safe] + lo[safe], np.nan), axis=1)
    return lo, hi


def birkhoff_cylinder_bounds(
    f: LocallyConstantPotential, n: int, m: int, cap: Optional[int] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Exact inf and sup of S_n f over every admissible m-cylinder (arrays indexed by word_table(m))."""
    if n < 1 or m < 1:
        raise DomainError(f"horizon and cylinder rank must be positive, got n={n}, m={m}")
    sft, k = f.sft, f.depth
    length = max(m, k)
    check_cap(f"cylinder bounds on words of length {length}", count_words(sft, length), cap)

    fixed = np.zeros(count_words(sft, length))
    for i in range(min(n, length - k + 1)):
        fixed += f.values[window_index(sft, length, i, k, cap)]

    steps = n + k - 1 - length
    if steps > 0:
        graph = word_graph(sft, k, cap)
        tail_lo, tail_hi = _tail_extrema(graph, f.values, steps)
        last = window_index(sft, length, length - k, k, cap)
        lower, upper = fixed + tail_lo[last], fixed + tail_hi[last]
    else:
        lower, upper = fixed, fixed.copy()

    if length > m:
        lower = group_reduce(sft, lower, length, m, np.minimum, cap)
        upper = group_reduce(sft, upper, length, m, np.maximum, cap)
    return lower, upper


def birkhoff_potential(f: LocallyConstantPotential, n: int, cap: Optional[int] = None) -> LocallyConstantPotential:
    """S_n f as a potential of depth n+k-1."""
    depth = n + f.depth - 1
    _, upper = birkhoff_cylinder_bounds(f, n, depth, cap)
    return LocallyConstantPotential(f.sft, depth, upper)


# --- mean cycles ---------------------------------------------------------------


def _edge_weight(graph: WordGraph, weights: np.ndarray, u: int, v: int) -> float:
    """Weight of the edge u -> v (weights indexed like word_table(depth + 1))."""
    symbol = int(graph.nodes[v][-1])
    if graph.successors[u, symbol] != v:
        raise DomainError(f"no edge {word_to_str(graph.node_word(u))} -> {word_to_str(graph.node_word(v))}")
    edge_word = graph.node_word(u) + (symbol,)
    return float(weights[word_index(graph.sft, [edge_word])[0]])


def _decompose_cycles(walk: Sequence[int]) -> List[List[int]]:
    """Split a closed-or-open walk into the simple cycles it traverses."""
    cycles = []
    stack: List[int] = []
    position: Dict[int, int] = {}
    for node in walk:
        if node in position:
            start = position[node]
            cycle = stack[start:]
            cycles.append(cycle)
            for v in cycle:
                del position[v]
            del stack[start:]
        position[node] = len(stack)
        stack.append(node)
    return cycles


def max_mean_cycle(
    graph: WordGraph, weights: np.ndarray, cap: Optional[int] = None
) -> Tuple[float, PeriodicOrbit]:
    """
    Karp's maximum mean cycle.

    The witness is chosen among the simple cycles of the critical walk that
    Karp's table traces back from the optimal end node: best mean first, then
    shortest, then lexicographically smallest canonical rotation. Optimal
    cycles off that walk are not enumerated, so on ties the witness is the
    smallest optimal cycle of the walk, not of the whole graph.
    """
    nodes = graph.node_count
    check_cap("Karp table", (nodes + 1) * nodes, cap)
    weights = np.asarray(weights, dtype=np.float64)

    incoming_weight = np.full((nodes, graph.sft.alphabet_size), np.nan)
    first = graph.nodes[graph.edge_src][:, 0]
    incoming_weight[graph.edge_dst, first] = weights

    table = np.zeros((nodes + 1, nodes))
    back = np.zeros((nodes + 1, nodes), dtype=np.int64)
    rows = np.arange(nodes)
    for j in range(1, nodes + 1):
        candidates = _incoming_weights(graph, table[j - 1]) + incoming_weight
        slot = np.nanargmax(candidates, axis=1)
        table[j] = candidates[rows, slot]
        back[j] = graph.predecessors[rows, slot]

    levels = np.arange(nodes)[:, None]
    ratios = (table[nodes][None, :] - table[:nodes]) / (nodes - levels)
    per_node = ratios.min(axis=0)
    end = int(np.argmax(per_node))
    mean = float(per_node[end])

    walk = [end]
    for j in range(nodes, 0, -1):
        walk.append(int(back[j, walk[-1]]))
    walk.reverse()

    best: Optional[Tuple[float, Word]] = None
    for cycle in _decompose_cycles(walk):
        cycle_mean = float(np.mean([_edge_weight(graph, weights, u, v) for u, v in zip(cycle, cycle[1:] + cycle[:1])]))
        symbols = canonical_rotation(graph.cycle_symbols(cycle))
        if best is None or cycle_mean > best[0] + DEFAULT_TOL or (
            abs(cycle_mean - best[0]) <= DEFAULT_TOL and (len(symbols), symbols) < (len(best[1]), best[1])
        ):
            best = (cycle_mean, symbols)
    if best is None or abs(best[0] - mean) > 1e-6 * max(1.0, abs(mean)):
        logger.warning(f"Karp witness mean {best and best[0]} differs from the cycle mean {mean}")
    return mean, PeriodicOrbit(best[1])


def min_mean_cycle(graph: WordGraph, weights: np.ndarray, cap: Optional[int] = None) -> Tuple[float, PeriodicOrbit]:
    mean, orbit = max_mean_cycle(graph, -np.asarray(weights, dtype=np.float64), cap)
    return -mean, orbit


def simple_cycle_means(graph: WordGraph, weights: np.ndarray, max_length: Optional[int] = None) -> List[Tuple[float, PeriodicOrbit]]:
    """Mean of every simple cycle (exhaustive oracle for max_mean_cycle)."""
    nx_graph = graph.to_networkx(weights)
    means = []
    for cycle in nx.simple_cycles(nx_graph, length_bound=max_length):
        total = sum(nx_graph[u][v]["weight"] for u, v in zip(cycle, cycle[1:] + cycle[:1]))
        means.append((total / len(cycle), PeriodicOrbit(canonical_rotation(graph.cycle_symbols(cycle)))))
    return means


# --- quotient seminorm ---------------------------------------------------------


def quotient_seminorm(f: LocallyConstantPotential, cap: Optional[int] = None) -> SeminormReport:
    """‖f‖_* = max(MMC(f), -MMC(-f)) = sup over invariant measures of |∫f dμ|."""
    graph = word_graph(f.sft, f.depth, cap)
    weights = f.edge_weights(graph)
    max_mean, max_cycle = max_mean_cycle(graph, weights, cap)
    min_mean, min_cycle = min_mean_cycle(graph, weights, cap)
    value = max(max_mean, -min_mean, 0.0)
    return SeminormReport(value, max_mean, min_mean, (max_cycle, min_cycle))


def invariant_average_range(f: LocallyConstantPotential, cap: Optional[int] = None) -> Tuple[float, float]:
    report = quotient_seminorm(f, cap)
    return report.min_mean, report.max_mean


def coboundary(h: LocallyConstantPotential) -> LocallyConstantPotential:
    """h - h∘T at depth k+1."""
    depth = h.depth + 1
    head = h.values[prefix_index(h.sft, depth, h.depth)]
    tail = h.values[window_index(h.sft, depth, 1, h.depth)]
    return LocallyConstantPotential(h.sft, depth, head - tail)


def quotient_distance(f: LocallyConstantPotential, g: LocallyConstantPotential, cap: Optional[int] = None) -> float:
    return quotient_seminorm(f - g, cap).value


def seminorm_convergence_trace(f: LocallyConstantPotential, n_max: int, cap: Optional[int] = None) -> SeminormReport:
    """Seminorm together with (1/n)‖S_n f‖∞ for n = 1..n_max."""
    if n_max < 1:
        raise DomainError(f"n_max must be at least 1, got {n_max}")
    report = quotient_seminorm(f, cap)
    report.birkhoff_trace = [(n, max(abs(lo), abs(hi)) / n) for n, lo, hi in birkhoff_trace(f, n_max, cap)]
    logger.debug(f"Seminorm {report.value:.6g}, trace gap at n={n_max}: {report.gap:.3g}")
    return report
