#!/usr/bin/env python3
"""
Thermodynamic quantities on subshifts of finite type

Pressure of additive potentials from the Perron root of the transfer matrix,
RPF equilibrium states as Markov measures on k-words, entropy, the
variational residual, cylinder pressures of potential sequences with Fekete
enclosures, Lyapunov averages, Gibbs constants K_n and quasi-Bernoulli
constants D_n.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import entr, logsumexp

from potential_core import LocallyConstantPotential
from sequence_core import (
    AdditiveSequence,
    CylinderMeasure,
    PotentialSequence,
    stationary_distribution,
)
from shift_core import (
    DomainError,
    Sft,
    count_words,
    prefix_index,
    window_index,
    word_graph,
    word_table,
    word_to_str,
)

logger = logging.getLogger(__name__)

PERRON_TOL = 1e-13
PERRON_RESIDUAL = 1e-12
PERRON_MAX_ITER = 100_000
KERNEL_TOL = 1e-12
GIBBS_GROWTH = 0.01
WEAK_DECAY = 0.5

FINITE_HORIZON_WARNING = "limsup estimated at finite horizon"
GIBBS_OPEN_QUESTION = (
    "whether every quasi-Bernoulli measure is Gibbs for some continuous potential is open; "
    "K_n is reported for the supplied candidate potential only"
)


# --- Perron data -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PerronData:
    root: float
    left: np.ndarray
    right: np.ndarray
    iterations: int
    residual: float


def perron_data(
    matrix: np.ndarray, tol: float = PERRON_TOL, max_iter: int = PERRON_MAX_ITER
) -> PerronData:
    """Perron root and positive left/right vectors of a primitive nonnegative matrix by power iteration."""
    matrix = np.asarray(matrix, dtype=np.float64)
    size = len(matrix)
    right = np.ones(size) / size
    left = np.ones(size) / size
    previous = np.inf
    residual = np.inf
    for iteration in range(1, max_iter + 1):
        right = matrix @ right
        right /= right.sum()
        left = left @ matrix
        left /= left.sum()
        image = matrix @ right
        root = float(left @ image / (left @ right))
        residual = float(np.max(np.abs(image - root * right)) / np.max(right))
        if abs(root - previous) < tol * max(1.0, root) and residual <= PERRON_RESIDUAL * max(1.0, root):
            break
        previous = root
    else:
        logger.warning(f"Power iteration stopped after {max_iter} iterations (residual {residual:.3g})")
    return PerronData(root, left, right, iteration, residual)


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """Entries e^{f(w) - shift} on the edges w -> w' of the depth-k word graph."""

    depth: int
    matrix: np.ndarray
    shift: float
    perron: PerronData

    @property
    def log_root(self) -> float:
        return self.shift + float(np.log(self.perron.root))

    @property
    def root(self) -> float:
        return float(np.exp(self.log_root))


def transfer_matrix(f: LocallyConstantPotential, cap: Optional[int] = None) -> TransferMatrix:
    graph = word_graph(f.sft, f.depth, cap)
    shift = float(f.values.max())
    matrix = np.zeros((graph.node_count, graph.node_count))
    matrix[graph.edge_src, graph.edge_dst] = np.exp(f.values[graph.edge_src] - shift)
    perron = perron_data(matrix)
    logger.debug(f"Perron root found in {perron.iterations} iterations, residual {perron.residual:.3g}")
    return TransferMatrix(f.depth, matrix, shift, perron)


def pressure_additive(f: LocallyConstantPotential, cap: Optional[int] = None) -> float:
    """P(f) = log of the Perron root of the transfer matrix."""
    return transfer_matrix(f, cap).log_root


# --- Markov measures -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MarkovMeasure:
    """Shift-invariant Markov measure whose states are the admissible words of length `order`."""

    sft: Sft
    order: int
    kernel: np.ndarray
    stationary: np.ndarray
    _cylinder: Dict[str, CylinderMeasure] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        states = count_words(self.sft, self.order)
        kernel = np.array(self.kernel, dtype=np.float64)
        pi = np.array(self.stationary, dtype=np.float64).reshape(-1)
        if kernel.shape != (states, states) or pi.shape != (states,):
            raise DomainError(f"order-{self.order} Markov measure needs a {states}x{states} kernel")
        graph = word_graph(self.sft, self.order)
        allowed = np.zeros((states, states), dtype=bool)
        allowed[graph.edge_src, graph.edge_dst] = True
        if np.any(kernel[~allowed] != 0) or np.any(kernel < 0):
            raise DomainError("kernel charges transitions outside the word graph")
        if not np.allclose(kernel.sum(axis=1), 1.0, atol=KERNEL_TOL, rtol=0):
            raise DomainError("kernel rows must sum to one")
        if np.any(pi < 0) or not np.allclose(pi @ kernel, pi, atol=KERNEL_TOL, rtol=0):
            raise DomainError("distribution is not stationary for the kernel")
        kernel.setflags(write=False)
        pi.setflags(write=False)
        object.__setattr__(self, "kernel", kernel)
        object.__setattr__(self, "stationary", pi)

    @classmethod
    def from_kernel(cls, sft: Sft, order: int, kernel: np.ndarray) -> "MarkovMeasure":
        kernel = np.asarray(kernel, dtype=np.float64)
        return cls(sft, order, kernel, stationary_distribution(kernel))

    @classmethod
    def bernoulli(cls, sft: Sft, probabilities: Sequence[float]) -> "MarkovMeasure":
        if not sft.full_shift:
            raise DomainError("Bernoulli measures live on full shifts")
        probs = np.asarray(probabilities, dtype=np.float64)
        if probs.shape != (sft.alphabet_size,) or np.any(probs < 0) or abs(probs.sum() - 1) > KERNEL_TOL:
            raise DomainError(f"Bernoulli weights must be a probability vector of length {sft.alphabet_size}")
        return cls(sft, 1, np.tile(probs, (sft.alphabet_size, 1)), probs)

    @classmethod
    def from_json(cls, sft: Sft, data: Dict[str, Any]) -> "MarkovMeasure":
        if "bernoulli" in data:
            return cls.bernoulli(sft, data["bernoulli"])
        return cls.from_kernel(sft, int(data.get("order", 1)), np.array(data["kernel"], dtype=np.float64))

    def to_json(self) -> Dict[str, Any]:
        return {"order": self.order, "kernel": self.kernel.tolist(), "stationary": self.stationary.tolist()}

    def to_cylinder_measure(self) -> CylinderMeasure:
        """Hidden-Markov form: hidden state is the current order-word, emitted symbol its first letter."""
        if "hmm" not in self._cylinder:
            first = word_table(self.sft, self.order)[:, 0]
            mats = np.zeros((self.sft.alphabet_size,) + self.kernel.shape)
            for a in range(self.sft.alphabet_size):
                mats[a, first == a] = self.kernel[first == a]
            self._cylinder["hmm"] = CylinderMeasure(self.sft, self.stationary, mats)
        return self._cylinder["hmm"]

    def cylinder_probabilities(self, n: int, cap: Optional[int] = None) -> np.ndarray:
        if n == self.order:
            return self.stationary.copy()
        return self.to_cylinder_measure().probabilities(n, cap)

    def expectation(self, f: LocallyConstantPotential, cap: Optional[int] = None) -> float:
        """∫ f dμ."""
        if f.sft != self.sft:
            raise DomainError("potential and measure live on different shifts")
        depth = max(self.order, f.depth)
        return float(self.cylinder_probabilities(depth, cap) @ f.lift(depth).values)


AnyMeasure = Union[MarkovMeasure, CylinderMeasure]


def as_cylinder_measure(mu: AnyMeasure) -> CylinderMeasure:
    return mu.to_cylinder_measure() if isinstance(mu, MarkovMeasure) else mu


def equilibrium_state(f: LocallyConstantPotential, cap: Optional[int] = None) -> MarkovMeasure:
    """RPF equilibrium state: P(w -> w') = e^{f(w)} r(w') / (λ r(w)) on the depth-k graph."""
    transfer = transfer_matrix(f, cap)
    right = transfer.perron.right
    kernel = transfer.matrix * right[None, :] / (transfer.perron.root * right[:, None])
    kernel /= kernel.sum(axis=1, keepdims=True)
    return MarkovMeasure.from_kernel(f.sft, f.depth, kernel)


def entropy(mu: MarkovMeasure) -> float:
    """h(μ) = -Σ_w π(w) Σ P(w, ·) log P(w, ·), with 0 log 0 = 0."""
    return float(mu.stationary @ entr(mu.kernel).sum(axis=1))


def variational_check(f: LocallyConstantPotential, cap: Optional[int] = None) -> float:
    """|P(f) - h(μ*) - ∫f dμ*| for the equilibrium state μ*."""
    mu = equilibrium_state(f, cap)
    residual = abs(pressure_additive(f, cap) - entropy(mu) - mu.expectation(f, cap))
    logger.debug(f"Variational residual {residual:.3g}")
    return residual


# --- potential sequences ---------------------------------------------------------


@dataclass
class PressureEstimate:
    values: List[Tuple[int, float]]
    point: float
    lower: Optional[float] = None
    upper: Optional[float] = None
    constant: Optional[float] = None
    warnings: List[str] = field(default_factory=lambda: [FINITE_HORIZON_WARNING])

    @property
    def width(self) -> Optional[float]:
        return None if self.lower is None else self.upper - self.lower

    def rows(self) -> List[Dict[str, Any]]:
        return [{"n": n, "normalized_log_partition": v} for n, v in self.values]

    def to_json(self) -> Dict[str, Any]:
        return {
            "point": self.point,
            "enclosure": None if self.lower is None else {"lower": self.lower, "upper": self.upper, "C": self.constant},
            "values": self.rows(),
            "warnings": list(self.warnings),
        }


def log_partition(seq: PotentialSequence, n: int, cap: Optional[int] = None) -> float:
    """log Z_n with Z_n = Σ over n-cylinders of sup e^{f_n}."""
    _, upper = seq.bounds(n, n, cap)
    return float(logsumexp(upper))


def pressure_sequence(
    seq: PotentialSequence, n_max: int, C: Optional[float] = None, cap: Optional[int] = None
) -> PressureEstimate:
    if n_max < 1:
        raise DomainError(f"pressure horizon must be at least 1, got {n_max}")
    logs = [(n, log_partition(seq, n, cap)) for n in range(1, n_max + 1)]
    estimate = PressureEstimate([(n, z / n) for n, z in logs], logs[-1][1] / n_max)
    if C is None:
        return estimate

    cylinder_constant = all(seq.rank(n) is not None and seq.rank(n) <= n for n, _ in logs)
    if not (seq.sft.full_shift and cylinder_constant):
        estimate.warnings.append(
            "Fekete enclosure omitted: it needs a full shift and f_n constant on n-cylinders"
        )
        return estimate
    estimate.constant = float(C)
    estimate.lower = max((z - C) / n for n, z in logs)
    estimate.upper = min((z + C) / n for n, z in logs)
    logger.info(f"Pressure enclosure [{estimate.lower:.6g}, {estimate.upper:.6g}] at n={n_max}")
    return estimate


@dataclass
class LyapunovEstimate:
    point: float
    trace: List[Tuple[int, float]]
    exact: bool


def lyapunov_exponent(seq: PotentialSequence, mu: AnyMeasure, n_max: int, cap: Optional[int] = None) -> LyapunovEstimate:
    """(1/n) ∫ f_n dμ for n ≤ n_max; exact ∫ f dμ for additive sequences."""
    cylinder = as_cylinder_measure(mu)
    trace = []
    for n in range(1, n_max + 1):
        r = seq.rank(n)
        if r is None:
            lower, upper = seq.bounds(n, n, cap)
            values, width = 0.5 * (lower + upper), n
        else:
            values, width = seq.values(n, cap), r
        probs = cylinder.probabilities(width, cap)
        charged = probs > 0
        trace.append((n, float(probs[charged] @ values[charged]) / n))
    if isinstance(seq, AdditiveSequence):
        measure = mu if isinstance(mu, MarkovMeasure) else None
        if measure is not None:
            return LyapunovEstimate(measure.expectation(seq.generator, cap), trace, True)
        depth = seq.generator.depth
        return LyapunovEstimate(float(cylinder.probabilities(depth, cap) @ seq.generator.values), trace, True)
    return LyapunovEstimate(trace[-1][1], trace, False)


# --- Gibbs and quasi-Bernoulli constants -------------------------------------------


@dataclass
class GibbsReport:
    K_n: List[float]
    log_K: List[float]
    trend: List[float]
    verdict: str
    p_target: float
    witness: Optional[str] = None
    growth_threshold: float = GIBBS_GROWTH
    decay_ratio: float = WEAK_DECAY
    warnings: List[str] = field(default_factory=lambda: [FINITE_HORIZON_WARNING, GIBBS_OPEN_QUESTION])

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {"n": n, "K_n": k, "log_K_n": lk, "trend": t}
            for n, (k, lk, t) in enumerate(zip(self.K_n, self.log_K, self.trend), start=1)
        ]

    def to_json(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict,
            "witness": self.witness,
            "p_target": self.p_target,
            "thresholds": {"growth": self.growth_threshold, "decay_ratio": self.decay_ratio},
            "table": self.rows(),
            "warnings": list(self.warnings),
        }


def _growth_verdict(logs: List[float], growth: float, decay: float) -> str:
    """'bounded' when the running max grows by less than `growth` over the second half, 'decaying' when (1/n)·log halves."""
    horizon = len(logs)
    half = max(1, horizon // 2)
    first = max(np.exp(logs[:half]))
    if max(np.exp(logs)) <= (1.0 + growth) * first:
        return "bounded"
    if logs[-1] / horizon < decay * logs[half - 1] / half:
        return "decaying"
    return "growing"


def gibbs_constants(
    mu: AnyMeasure,
    potential: Union[LocallyConstantPotential, PotentialSequence],
    p_target: float,
    n_max: int,
    growth_threshold: float = GIBBS_GROWTH,
    decay_ratio: float = WEAK_DECAY,
    cap: Optional[int] = None,
) -> GibbsReport:
    """log K_n = sup_x |log μ_n(x_1..x_n) - f_n(x) + n·p_target|."""
    seq = AdditiveSequence(potential) if isinstance(potential, LocallyConstantPotential) else potential
    cylinder = as_cylinder_measure(mu)
    if seq.sft != cylinder.sft:
        raise DomainError("measure and potential live on different shifts")

    log_k: List[float] = []
    for n in range(1, n_max + 1):
        log_mu = cylinder.log_probabilities(n, cap)
        null = np.flatnonzero(~np.isfinite(log_mu))
        if len(null):
            witness = word_to_str(word_table(seq.sft, n)[null[0]])
            logger.info(f"Gibbs check fails: null cylinder {witness}")
            k_values = [float(np.exp(v)) for v in log_k]
            return GibbsReport(k_values, log_k, [v / i for i, v in enumerate(log_k, 1)], "fails", p_target, witness,
                               growth_threshold, decay_ratio)
        lower, upper = seq.bounds(n, n, cap)
        shifted = log_mu + n * p_target
        log_k.append(float(max(np.max(np.abs(shifted - lower)), np.max(np.abs(shifted - upper)))))

    verdict = {
        "bounded": "gibbs_evidence",
        "decaying": "weak_gibbs_evidence",
        "growing": "fails",
    }[_growth_verdict(log_k, growth_threshold, decay_ratio)]
    logger.info(f"Gibbs constants up to n={n_max}: K_max={np.exp(max(log_k)):.6g} ({verdict})")
    return GibbsReport(
        [float(np.exp(v)) for v in log_k],
        log_k,
        [v / n for n, v in enumerate(log_k, start=1)],
        verdict,
        p_target,
        None,
        growth_threshold,
        decay_ratio,
    )


@dataclass
class QuasiBernoulliReport:
    D_n: List[float]
    log_D: List[float]
    verdict: str
    horizon: int
    witness: Optional[str] = None

    def rows(self) -> List[Dict[str, Any]]:
        return [{"n": n, "D_n": d, "log_D_n": ld} for n, (d, ld) in enumerate(zip(self.D_n, self.log_D), start=1)]

    def to_json(self) -> Dict[str, Any]:
        return {"verdict": self.verdict, "witness": self.witness, "horizon": self.horizon, "table": self.rows()}


def quasi_bernoulli_constants(
    mu: AnyMeasure, N: int, growth_threshold: float = GIBBS_GROWTH, cap: Optional[int] = None
) -> QuasiBernoulliReport:
    """log D_n = max over m ≤ N-n and split words uv of |log μ_{n+m}(uv) - log μ_n(u) - log μ_m(v)|."""
    if N < 2:
        raise DomainError(f"quasi-Bernoulli horizon must be at least 2, got {N}")
    cylinder = as_cylinder_measure(mu)
    sft = cylinder.sft
    marginal = cylinder.probabilities(1, cap)
    if np.any(marginal <= 0):
        symbol = int(np.flatnonzero(marginal <= 0)[0])
        return QuasiBernoulliReport([], [], "fails", N, str(symbol))

    logs = {n: cylinder.log_probabilities(n, cap) for n in range(1, N + 1)}
    log_d: List[float] = []
    for n in range(1, N):
        worst = 0.0
        for m in range(1, N - n + 1):
            joint = logs[n + m]
            head = logs[n][prefix_index(sft, n + m, n, cap)]
            tail = logs[m][window_index(sft, n + m, n, m, cap)]
            product_null = ~np.isfinite(head) | ~np.isfinite(tail)
            broken = np.flatnonzero(~np.isfinite(joint) & ~product_null)
            if len(broken):
                witness = word_to_str(word_table(sft, n + m)[broken[0]])
                logger.info(f"Quasi-Bernoulli check fails: null cylinder {witness} with charged halves")
                return QuasiBernoulliReport([float(np.exp(v)) for v in log_d], log_d, "fails", N, witness)
            charged = ~product_null
            if charged.any():
                worst = max(worst, float(np.max(np.abs(joint[charged] - head[charged] - tail[charged]))))
        log_d.append(worst)

    trend = [v / n for n, v in enumerate(log_d, start=1)]
    half = max(1, len(log_d) // 2)
    if max(log_d) <= np.log1p(growth_threshold) + max(log_d[:half]):
        verdict = "quasi_bernoulli_evidence"
    elif trend[-1] <= trend[half - 1]:
        verdict = "weakly_coupled_evidence"
    else:
        verdict = "fails"
    logger.info(f"Quasi-Bernoulli constants up to N={N}: D_max={np.exp(max(log_d)):.6g} ({verdict})")
    return QuasiBernoulliReport([float(np.exp(v)) for v in log_d], log_d, verdict, N)
