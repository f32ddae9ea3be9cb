#!/usr/bin/env python3
"""
Potential sequences F = (f_n)

Every sequence answers two questions exactly:
  - bounds(n, m): inf and sup of f_n over each admissible m-cylinder
  - rank(n): a cylinder rank on which f_n is constant (None when unknown)

All sup-norm defects below (almost additivity, asymptotic defects, increment
defects, variations) are built from these two, so they stay exact whenever
the ranks are known and are reported as upper bounds otherwise.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from potential_core import DEFAULT_TOL, LocallyConstantPotential, birkhoff_cylinder_bounds
from shift_core import (
    DomainError,
    Sft,
    count_words,
    group_reduce,
    prefix_index,
    window_index,
    word_index,
    word_table,
    word_to_str,
)

logger = logging.getLogger(__name__)

NORM_KINDS = ("entry_sum", "operator_two")
STOCHASTIC_TOL = 1e-9


class PotentialSequence:
    """Base class for the sequence kinds; subclasses supply rank() and either values() or bounds()."""

    kind = "abstract"

    def __init__(self, sft: Sft):
        self.sft = sft

    def rank(self, n: int) -> Optional[int]:
        return None

    def values(self, n: int, cap: Optional[int] = None) -> np.ndarray:
        """f_n on the cylinders of rank(n), indexed like word_table(rank(n))."""
        raise NotImplementedError(f"{self.kind} sequences have no cylinder-constant values")

    def bounds(self, n: int, m: int, cap: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        _check_horizon(n)
        r = self.rank(n)
        values = self.values(n, cap)
        if m >= r:
            lifted = values[prefix_index(self.sft, m, r, cap)] if m > r else values
            return lifted, lifted
        return (
            group_reduce(self.sft, values, r, m, np.minimum, cap),
            group_reduce(self.sft, values, r, m, np.maximum, cap),
        )

    def evaluate(self, word: Sequence[int], cap: Optional[int] = None) -> float:
        """Constant value of f_n on the cylinder of `word`, n = len(word)."""
        word = self.sft.check_word(word)
        n = len(word)
        lower, upper = self.bounds(n, n, cap)
        i = word_index(self.sft, [word])[0]
        if not np.isfinite(lower[i]):
            raise DomainError(f"f_{n} is not finite on the cylinder {word_to_str(word)}", witness=word)
        if upper[i] - lower[i] > DEFAULT_TOL * max(1.0, abs(upper[i])):
            raise DomainError(f"f_{n} is not constant on the cylinder {word_to_str(word)}", witness=word)
        return float(upper[i])

    def __repr__(self) -> str:
        return f"{type(self).__name__}(alphabet_size={self.sft.alphabet_size})"


def _check_horizon(n: int) -> None:
    if n < 1:
        raise DomainError(f"sequence index must be at least 1, got {n}")


class AdditiveSequence(PotentialSequence):
    kind = "additive"

    def __init__(self, generator: LocallyConstantPotential):
        super().__init__(generator.sft)
        self.generator = generator

    def rank(self, n: int) -> int:
        return n + self.generator.depth - 1

    def values(self, n: int, cap: Optional[int] = None) -> np.ndarray:
        _check_horizon(n)
        return self.bounds(n, self.rank(n), cap)[1]

    def bounds(self, n: int, m: int, cap: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        _check_horizon(n)
        return birkhoff_cylinder_bounds(self.generator, n, m, cap)

    def evaluate(self, word: Sequence[int], cap: Optional[int] = None) -> float:
        """Path sum of the generator along `word`, i.e. S_n f with n = len(word) - depth + 1."""
        word = self.sft.check_word(word)
        k = self.generator.depth
        if len(word) < k:
            raise DomainError(f"word {word_to_str(word)} is shorter than the generator depth {k}", witness=word)
        windows = [word[i:i + k] for i in range(len(word) - k + 1)]
        return float(np.sum(self.generator.values[word_index(self.sft, windows)]))


# --- matrix cocycles -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MatrixCocycle:
    """One strictly positive d×d matrix per symbol; f_n(x) = log‖M_{x_1}···M_{x_n}‖."""

    matrices: np.ndarray
    norm_kind: str = "entry_sum"
    _cache: Dict[Tuple[Sft, int], Tuple[np.ndarray, np.ndarray]] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        matrices = np.array(self.matrices, dtype=np.float64)
        if matrices.ndim != 3 or matrices.shape[1] != matrices.shape[2] or matrices.shape[1] < 1:
            raise DomainError(f"cocycle needs one square matrix per symbol, got shape {matrices.shape}")
        if self.norm_kind not in NORM_KINDS:
            raise DomainError(f"unknown norm kind {self.norm_kind!r}, expected one of {NORM_KINDS}")
        if not np.all(np.isfinite(matrices)) or not np.all(matrices > 0):
            symbol = int(np.argwhere(~(np.isfinite(matrices) & (matrices > 0)))[0][0])
            raise DomainError(f"cocycle matrix for symbol {symbol} must have strictly positive entries", witness=symbol)
        matrices.setflags(write=False)
        object.__setattr__(self, "matrices", matrices)

    @property
    def dimension(self) -> int:
        return self.matrices.shape[1]

    @property
    def alphabet_size(self) -> int:
        return self.matrices.shape[0]

    def _normalized_products(self, sft: Sft, n: int, cap: Optional[int]) -> Tuple[np.ndarray, np.ndarray]:
        """Products scaled to entry sum 1 and their log scales, one per admissible n-word."""
        word_table(sft, n, cap)
        known = [j for s, j in self._cache if s == sft and j <= n]
        if known:
            start = max(known)
            products, log_scale = self._cache[(sft, start)]
        else:
            start = 1
            products = self.matrices / self.matrices.sum(axis=(1, 2))[:, None, None]
            log_scale = np.log(self.matrices.sum(axis=(1, 2)))
        for j in range(start + 1, n + 1):
            parent = prefix_index(sft, j, j - 1, cap)
            last = word_table(sft, j, cap)[:, -1]
            grown = products[parent] @ self.matrices[last]
            total = grown.sum(axis=(1, 2))
            products = grown / total[:, None, None]
            log_scale = log_scale[parent] + np.log(total)
        self._cache[(sft, n)] = (products, log_scale)
        return products, log_scale

    def log_norms(self, sft: Sft, n: int, cap: Optional[int] = None) -> np.ndarray:
        products, log_scale = self._normalized_products(sft, n, cap)
        if self.norm_kind == "entry_sum":
            return log_scale.copy()
        return log_scale + np.log(np.linalg.norm(products, ord=2, axis=(1, 2)))

    @classmethod
    def from_json(cls, data: Dict[str, Any], alphabet_size: int) -> "MatrixCocycle":
        mats = data["matrices"]
        if isinstance(mats, dict):
            missing = [str(a) for a in range(alphabet_size) if str(a) not in mats]
            if missing:
                raise DomainError(f"cocycle has no matrix for symbol {missing[0]}", witness=missing[0])
            mats = [mats[str(a)] for a in range(alphabet_size)]
        cocycle = cls(np.array(mats, dtype=np.float64), data.get("norm", "entry_sum"))
        if "dimension" in data and int(data["dimension"]) != cocycle.dimension:
            raise DomainError(f"dimension {data['dimension']} does not match the {cocycle.dimension}x{cocycle.dimension} matrices")
        return cocycle


class CocycleSequence(PotentialSequence):
    kind = "cocycle"

    def __init__(self, sft: Sft, cocycle: MatrixCocycle):
        super().__init__(sft)
        if cocycle.alphabet_size != sft.alphabet_size:
            raise DomainError(f"cocycle has {cocycle.alphabet_size} matrices for an alphabet of size {sft.alphabet_size}")
        self.cocycle = cocycle

    def rank(self, n: int) -> int:
        return n

    def values(self, n: int, cap: Optional[int] = None) -> np.ndarray:
        _check_horizon(n)
        return self.cocycle.log_norms(self.sft, n, cap)


# --- hidden-Markov measures ----------------------------------------------------


def stationary_distribution(kernel: np.ndarray) -> np.ndarray:
    """Stationary vector of an irreducible row-stochastic kernel by Grassmann-Taksar-Heyman elimination."""
    work = np.array(kernel, dtype=np.float64)
    size = len(work)
    for n in range(size - 1, 0, -1):
        scale = work[n, :n].sum()
        if scale <= 0:
            raise DomainError("transition kernel is reducible", witness=n)
        work[:n, n] /= scale
        work[:n, :n] += np.outer(work[:n, n], work[n, :n])
    pi = np.zeros(size)
    pi[0] = 1.0
    for n in range(1, size):
        pi[n] = pi[:n] @ work[:n, n]
    return pi / pi.sum()


@dataclass(frozen=True, eq=False)
class CylinderMeasure:
    """μ_n(a_1..a_n) = p N_{a_1}···N_{a_n} 1 with Σ_a N_a stochastic and p stationary."""

    sft: Sft
    initial: np.ndarray
    matrices: np.ndarray
    _cache: Dict[int, Tuple[np.ndarray, np.ndarray]] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        p = np.array(self.initial, dtype=np.float64).reshape(-1)
        mats = np.array(self.matrices, dtype=np.float64)
        d = len(p)
        if mats.shape != (self.sft.alphabet_size, d, d):
            raise DomainError(
                f"hidden-Markov measure needs {self.sft.alphabet_size} matrices of size {d}x{d}, got shape {mats.shape}"
            )
        if np.any(mats < 0) or np.any(p < 0):
            raise DomainError("hidden-Markov weights must be nonnegative")
        q = mats.sum(axis=0)
        if not np.allclose(q.sum(axis=1), 1.0, atol=STOCHASTIC_TOL):
            raise DomainError("the matrices N_a must sum to a stochastic matrix")
        if abs(p.sum() - 1.0) > STOCHASTIC_TOL or not np.allclose(p @ q, p, atol=STOCHASTIC_TOL):
            raise DomainError("the initial vector must be a stationary distribution of the summed matrices")
        for a in range(self.sft.alphabet_size):
            for b in range(self.sft.alphabet_size):
                if not self.sft.transitions[a][b] and p @ mats[a] @ mats[b] @ np.ones(d) > 0:
                    raise DomainError(f"measure charges the forbidden word {a}{b}", witness=(a, b))
        p.setflags(write=False)
        mats.setflags(write=False)
        object.__setattr__(self, "initial", p)
        object.__setattr__(self, "matrices", mats)

    @property
    def hidden_dimension(self) -> int:
        return len(self.initial)

    @classmethod
    def bernoulli(cls, sft: Sft, probabilities: Sequence[float]) -> "CylinderMeasure":
        probs = np.asarray(probabilities, dtype=np.float64)
        return cls(sft, np.ones(1), probs.reshape(-1, 1, 1))

    @classmethod
    def from_markov(cls, sft: Sft, kernel: np.ndarray, stationary: Optional[np.ndarray] = None) -> "CylinderMeasure":
        """First-order Markov chain on symbols as a hidden-Markov measure with the symbol as hidden state."""
        kernel = np.asarray(kernel, dtype=np.float64)
        size = sft.alphabet_size
        if stationary is None:
            stationary = stationary_distribution(kernel)
        mats = np.zeros((size, size, size))
        for a in range(size):
            mats[a, :, a] = kernel[:, a]
        return cls(sft, np.asarray(stationary, dtype=np.float64), mats)

    @classmethod
    def from_json(cls, sft: Sft, data: Dict[str, Any]) -> "CylinderMeasure":
        if "bernoulli" in data:
            return cls.bernoulli(sft, data["bernoulli"])
        mats = data["N"]
        if isinstance(mats, dict):
            mats = [mats[str(a)] for a in range(sft.alphabet_size)]
        return cls(sft, np.array(data["p"], dtype=np.float64), np.array(mats, dtype=np.float64))

    def to_json(self) -> Dict[str, Any]:
        return {
            "p": self.initial.tolist(),
            "N": {str(a): self.matrices[a].tolist() for a in range(self.sft.alphabet_size)},
        }

    def _row_vectors(self, n: int, cap: Optional[int]) -> Tuple[np.ndarray, np.ndarray]:
        word_table(self.sft, n, cap)
        known = [j for j in self._cache if j <= n]
        if known:
            start = max(known)
            vectors, log_scale = self._cache[start]
        else:
            start = 1
            vectors = self.initial @ self.matrices
            log_scale = np.zeros(len(vectors))
        for j in range(start + 1, n + 1):
            parent = prefix_index(self.sft, j, j - 1, cap)
            last = word_table(self.sft, j, cap)[:, -1]
            grown = np.einsum("wi,wij->wj", vectors[parent], self.matrices[last])
            total = grown.sum(axis=1)
            safe = np.where(total > 0, total, 1.0)
            vectors = grown / safe[:, None]
            log_scale = log_scale[parent] + np.log(safe)
        self._cache[n] = (vectors, log_scale)
        return vectors, log_scale

    def log_probabilities(self, n: int, cap: Optional[int] = None) -> np.ndarray:
        """log μ_n per admissible n-word; -inf on null cylinders."""
        vectors, log_scale = self._row_vectors(n, cap)
        totals = vectors.sum(axis=1)
        with np.errstate(divide="ignore"):
            return np.where(totals > 0, log_scale + np.log(totals), -np.inf)

    def probabilities(self, n: int, cap: Optional[int] = None) -> np.ndarray:
        return np.exp(self.log_probabilities(n, cap))

    def consistency_defect(self, n: int, cap: Optional[int] = None) -> float:
        """max |μ_n(w) - Σ_a μ_{n+1}(wa)| together with |Σ μ_n - 1|."""
        coarse = self.probabilities(n, cap)
        fine = group_reduce(self.sft, self.probabilities(n + 1, cap), n + 1, n, np.add, cap)
        return float(max(np.max(np.abs(coarse - fine)), abs(coarse.sum() - 1.0)))


class MeasureLogSequence(PotentialSequence):
    """f_n(x) = log μ_n(x_1..x_n)"""

    kind = "measure_log"

    def __init__(self, measure: CylinderMeasure):
        super().__init__(measure.sft)
        self.measure = measure

    def rank(self, n: int) -> int:
        return n

    def values(self, n: int, cap: Optional[int] = None) -> np.ndarray:
        _check_horizon(n)
        return self.measure.log_probabilities(n, cap)


# --- user-supplied and combined sequences --------------------------------------

CylinderCallback = Callable[[int, np.ndarray], Tuple[np.ndarray, np.ndarray]]


class CustomSequence(PotentialSequence):
    """Caller supplies exact inf and sup of f_n over each m-cylinder: callback(n, words) -> (lower, upper)."""

    kind = "custom"

    def __init__(self, sft: Sft, callback: CylinderCallback, rank: Optional[Callable[[int], int]] = None):
        super().__init__(sft)
        self.callback = callback
        self._rank = rank

    def rank(self, n: int) -> Optional[int]:
        return None if self._rank is None else self._rank(n)

    def bounds(self, n: int, m: int, cap: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        _check_horizon(n)
        words = word_table(self.sft, m, cap)
        lower, upper = self.callback(n, words)
        lower = np.asarray(lower, dtype=np.float64).reshape(-1)
        upper = np.asarray(upper, dtype=np.float64).reshape(-1)
        if lower.shape != (len(words),) or upper.shape != (len(words),):
            raise DomainError(f"custom callback returned {lower.shape}/{upper.shape} bounds for {len(words)} cylinders")
        bad = np.flatnonzero(lower > upper + DEFAULT_TOL)
        if len(bad):
            witness = tuple(int(a) for a in words[bad[0]])
            raise DomainError(f"custom callback gave inf > sup on {word_to_str(witness)}", witness=witness)
        return lower, upper

    def values(self, n: int, cap: Optional[int] = None) -> np.ndarray:
        r = self.rank(n)
        if r is None:
            raise DomainError("custom sequence without a declared rank has no cylinder-constant values")
        return self.bounds(n, r, cap)[1]


class ScaledSumSequence(PotentialSequence):
    """Σ c_i f_n^(i)"""

    kind = "scaled_sum"

    def __init__(self, terms: Sequence[Tuple[float, PotentialSequence]]):
        if not terms:
            raise DomainError("scale_and_add needs at least one sequence")
        sft = terms[0][1].sft
        if any(seq.sft != sft for _, seq in terms):
            raise DomainError("scale_and_add received sequences on different shifts")
        super().__init__(sft)
        self.terms = [(float(c), seq) for c, seq in terms]

    def rank(self, n: int) -> Optional[int]:
        ranks = [seq.rank(n) for _, seq in self.terms]
        return None if any(r is None for r in ranks) else max(ranks)

    def values(self, n: int, cap: Optional[int] = None) -> np.ndarray:
        r = self.rank(n)
        if r is None:
            raise DomainError("sum contains a sequence without a declared rank")
        total = np.zeros(count_words(self.sft, r))
        for c, seq in self.terms:
            if c != 0.0:
                total += c * seq.bounds(n, r, cap)[1]
        return total

    def bounds(self, n: int, m: int, cap: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        if self.rank(n) is not None:
            return super().bounds(n, m, cap)
        lower = np.zeros(count_words(self.sft, m))
        upper = np.zeros_like(lower)
        for c, seq in self.terms:
            lo, hi = seq.bounds(n, m, cap)
            lower += c * (lo if c >= 0 else hi)
            upper += c * (hi if c >= 0 else lo)
        return lower, upper


def sequence_from_json(sft: Sft, data: Dict[str, Any]) -> PotentialSequence:
    kind = data.get("kind")
    if kind == "additive":
        return AdditiveSequence(LocallyConstantPotential.from_json(sft, data["potential"]))
    if kind == "cocycle":
        return CocycleSequence(sft, MatrixCocycle.from_json(data, sft.alphabet_size))
    if kind == "measure_log":
        return MeasureLogSequence(CylinderMeasure.from_json(sft, data))
    raise DomainError(f"unknown sequence kind {kind!r}")


def evaluate(seq: PotentialSequence, word: Sequence[int], cap: Optional[int] = None) -> float:
    return seq.evaluate(word, cap)


def scale_and_add(terms: Sequence[Tuple[float, PotentialSequence]]) -> ScaledSumSequence:
    return ScaledSumSequence(terms)


# --- sup-norm defects ------------------------------------------------------------

Term = Tuple[float, PotentialSequence, int, int]


def combination_extrema(sft: Sft, terms: Sequence[Term], cap: Optional[int] = None) -> Tuple[float, float, bool]:
    """
    min and max over X of Σ c · f_n∘T^s for terms (c, seq, n, s).

    One unshifted term is left free: its exact inf and sup over the common
    cylinders come from its own bounds(), and every other term is constant
    there. When some other term has no known rank the result is an interval
    bound instead, flagged by the third return value.
    """
    terms = [t for t in terms if t[0] != 0.0]
    if not terms:
        return 0.0, 0.0, True
    ranks = [seq.rank(n) for _, seq, n, _ in terms]
    widths = [None if r is None else s + r for (_, _, _, s), r in zip(terms, ranks)]
    unshifted = [i for i, t in enumerate(terms) if t[3] == 0]
    free = max(unshifted, key=lambda i: np.inf if widths[i] is None else widths[i]) if unshifted else None
    exact = all(widths[i] is not None for i in range(len(terms)) if i != free)
    if exact:
        common = max([widths[i] for i in range(len(terms)) if i != free] + [1])
    else:
        common = max(s + n for _, _, n, s in terms)

    lower = np.zeros(count_words(sft, common))
    upper = np.zeros_like(lower)
    for i, (c, seq, n, s) in enumerate(terms):
        if not exact:
            width = n
        elif i == free:
            width = common
        else:
            width = ranks[i]
        lo, hi = seq.bounds(n, width, cap)
        if s == 0 and width == common:
            idx = slice(None)
        else:
            idx = window_index(sft, common, s, width, cap)
        lower += c * (lo if c >= 0 else hi)[idx]
        upper += c * (hi if c >= 0 else lo)[idx]
    bad = np.flatnonzero(~np.isfinite(lower) | ~np.isfinite(upper))
    if len(bad):
        witness = tuple(int(a) for a in word_table(sft, common)[bad[0]])
        raise DomainError(f"defect is infinite on the cylinder {word_to_str(witness)}", witness=witness)
    return float(lower.min()), float(upper.max()), exact


def combination_sup(sft: Sft, terms: Sequence[Term], cap: Optional[int] = None) -> Tuple[float, bool]:
    lo, hi, exact = combination_extrema(sft, terms, cap)
    return max(abs(lo), abs(hi)), exact


@dataclass
class AdditivityReport:
    horizon: int
    c_estimate: float
    table: Dict[Tuple[int, int], float]
    c_by_horizon: List[float]
    classification: str
    exact: bool = True
    tolerance: float = DEFAULT_TOL

    def rows(self) -> List[Dict[str, Any]]:
        return [{"n": n, "m": m, "defect": v} for (n, m), v in sorted(self.table.items())]

    def to_json(self) -> Dict[str, Any]:
        return {
            "horizon": self.horizon,
            "c_estimate": self.c_estimate,
            "classification": self.classification,
            "exact": self.exact,
            "tolerance": self.tolerance,
            "c_by_horizon": [{"N": i + 2, "c": c} for i, c in enumerate(self.c_by_horizon)],
            "table": self.rows(),
        }


def almost_additivity_constant(
    seq: PotentialSequence, N: int, tol: float = DEFAULT_TOL, cap: Optional[int] = None
) -> AdditivityReport:
    """C_N = max over n+m ≤ N of ‖f_{n+m} - f_n - f_m∘T^n‖∞."""
    if N < 2:
        raise DomainError(f"additivity horizon must be at least 2, got {N}")
    table: Dict[Tuple[int, int], float] = {}
    c_by_horizon = []
    running = 0.0
    exact = True
    for total in range(2, N + 1):
        for n in range(1, total):
            m = total - n
            value, is_exact = combination_sup(seq.sft, [(1.0, seq, total, 0), (-1.0, seq, n, 0), (-1.0, seq, m, n)], cap)
            table[(n, m)] = value
            exact &= is_exact
            running = max(running, value)
        c_by_horizon.append(running)
        logger.debug(f"Additivity defect up to N={total}: {running:.6g}")

    half = c_by_horizon[max(0, N // 2 - 2)]
    if running <= tol:
        classification = "additive"
    elif running - half <= max(tol, 0.01 * running):
        classification = "almost_additive_evidence"
    else:
        classification = "inconclusive"
    logger.info(f"Almost additivity constant at N={N}: {running:.6g} ({classification})")
    return AdditivityReport(N, running, table, c_by_horizon, classification, exact, tol)


def asymptotic_defect(
    seq: PotentialSequence, f: LocallyConstantPotential, n_list: Sequence[int], cap: Optional[int] = None
) -> List[Tuple[int, float]]:
    """δ_n = (1/n)‖f_n - S_n f‖∞ per requested n."""
    additive = AdditiveSequence(f)
    trace = []
    for n in n_list:
        _check_horizon(n)
        value, _ = combination_sup(seq.sft, [(1.0, seq, n, 0), (-1.0, additive, n, 0)], cap)
        trace.append((n, value / n))
    return trace


def tail_maximum(trace: Sequence[Tuple[int, float]]) -> List[Tuple[int, float]]:
    """max over the tail n' ≥ n of a (n, δ_n) trace."""
    result = []
    running = -np.inf
    for n, value in reversed(list(trace)):
        running = max(running, value)
        result.append((n, running))
    return result[::-1]


def sequence_distance(
    F: PotentialSequence, G: PotentialSequence, n_list: Sequence[int], cap: Optional[int] = None
) -> List[Tuple[int, float]]:
    """(1/n)‖f_n - g_n‖∞; tends to 0 exactly when F and G are physically equivalent."""
    if F.sft != G.sft:
        raise DomainError("sequences live on different shifts")
    return [(n, combination_sup(F.sft, [(1.0, F, n, 0), (-1.0, G, n, 0)], cap)[0] / n) for n in n_list]


def increment_defects(seq: PotentialSequence, N: int, cap: Optional[int] = None) -> List[Tuple[int, float]]:
    """‖d_{n+1} - d_n‖∞ with d_n = f_{n+1} - f_n∘T, for n = 1..N-1."""
    rows = []
    for n in range(1, N):
        terms = [(1.0, seq, n + 2, 0), (-1.0, seq, n + 1, 1), (-1.0, seq, n + 1, 0), (1.0, seq, n, 1)]
        rows.append((n, combination_sup(seq.sft, terms, cap)[0]))
    return rows


@dataclass
class VariationReport:
    horizon: int
    var_n: List[float]
    bounded_flag: bool
    moderate_trend: List[float]

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {"n": n, "variation": v, "normalized": t}
            for n, (v, t) in enumerate(zip(self.var_n, self.moderate_trend), start=1)
        ]

    def to_json(self) -> Dict[str, Any]:
        return {"horizon": self.horizon, "bounded": self.bounded_flag, "table": self.rows()}


def variation_profile(seq: PotentialSequence, N: int, tol: float = DEFAULT_TOL, cap: Optional[int] = None) -> VariationReport:
    """var_n = sup |f_n(x) - f_n(y)| over pairs sharing their first n symbols."""
    if N < 1:
        raise DomainError(f"variation horizon must be at least 1, got {N}")
    variations = []
    for n in range(1, N + 1):
        r = seq.rank(n)
        if r is not None and r <= n:
            variations.append(0.0)
            continue
        lower, upper = seq.bounds(n, n, cap)
        variations.append(float(np.max(upper - lower)))
    half = max(variations[: max(1, N // 2)])
    bounded = max(variations) <= 1.01 * half + tol
    return VariationReport(N, variations, bounded, [v / n for n, v in enumerate(variations, start=1)])
