#!/usr/bin/env python3
"""
Additive representatives of almost / asymptotically additive sequences

Builds the approximants f_k/k and f_{k+1} - f_k∘T, measures their pairwise
quotient distances (the Cauchy table), picks a representative f and certifies
it with the measured defects δ_n = (1/n)‖f_n - S_n f‖∞. The resulting
tail_bound is an empirical bound at finite horizon, not a proof.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from potential_core import DEFAULT_TOL, LocallyConstantPotential, quotient_distance
from sequence_core import (
    AdditiveSequence,
    PotentialSequence,
    asymptotic_defect,
    combination_extrema,
)
from shift_core import DomainError, Sft, prefix_index, window_index

logger = logging.getLogger(__name__)

CERT_VERSION = "cert_v1"
DEFAULT_GRID = (2, 4, 8)
DEFAULT_HORIZON = 16
DEFAULT_SEQUENCE_TOL = 1e-2
METHODS = ("increment", "average")
TAIL_BOUND_NOTE = "tail_bound is an empirical bound measured at finite horizon; no a-priori rate is known"


def approximant(seq: PotentialSequence, k: int, cap: Optional[int] = None) -> LocallyConstantPotential:
    """f_k / k as a potential of depth rank(k); midpoint of the cylinder bounds when the rank is unknown."""
    if k < 1:
        raise DomainError(f"approximant depth must be at least 1, got {k}")
    r = seq.rank(k)
    if r is None:
        lower, upper = seq.bounds(k, k, cap)
        return LocallyConstantPotential(seq.sft, k, 0.5 * (lower + upper) / k)
    return LocallyConstantPotential(seq.sft, r, seq.values(k, cap) / k)


def increment_approximant(seq: PotentialSequence, k: int, cap: Optional[int] = None) -> LocallyConstantPotential:
    """f_{k+1} - f_k∘T; equals the generator for additive input and log p(x_1) for product measures."""
    if k < 1:
        raise DomainError(f"approximant depth must be at least 1, got {k}")
    sft = seq.sft
    r_next, r_this = seq.rank(k + 1), seq.rank(k)
    if r_next is None or r_this is None:
        lo_next, hi_next = seq.bounds(k + 1, k + 1, cap)
        lo_this, hi_this = seq.bounds(k, k, cap)
        shifted = window_index(sft, k + 1, 1, k, cap)
        values = 0.5 * (lo_next + hi_next) - 0.5 * (lo_this + hi_this)[shifted]
        return LocallyConstantPotential(sft, k + 1, values)

    depth = max(r_next, r_this + 1)
    head = seq.values(k + 1, cap)
    if depth > r_next:
        head = head[prefix_index(sft, depth, r_next, cap)]
    tail = seq.values(k, cap)[window_index(sft, depth, 1, r_this, cap)]
    return LocallyConstantPotential(sft, depth, head - tail)


def _pairwise(potentials: Sequence[LocallyConstantPotential], workers: int, cap: Optional[int]) -> np.ndarray:
    size = len(potentials)
    pairs = [(i, j) for i in range(size) for j in range(i + 1, size)]

    def distance(ij: Tuple[int, int]) -> float:
        return quotient_distance(potentials[ij[0]], potentials[ij[1]], cap)

    if workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            distances = list(executor.map(distance, pairs))
    else:
        distances = [distance(ij) for ij in pairs]
    table = np.zeros((size, size))
    for (i, j), d in zip(pairs, distances):
        table[i, j] = table[j, i] = d
    return table


def _check_grid(k_grid: Sequence[int]) -> List[int]:
    grid = [int(k) for k in k_grid]
    if not grid:
        raise DomainError("the k-grid is empty")
    if any(k < 1 for k in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError(f"the k-grid must be positive and strictly ascending, got {grid}")
    return grid


def cauchy_table(
    seq: PotentialSequence, k_grid: Sequence[int], workers: int = 1, cap: Optional[int] = None
) -> np.ndarray:
    """quotient_distance(f_k/k, f_l/l) over the grid."""
    grid = _check_grid(k_grid)
    return _pairwise([approximant(seq, k, cap) for k in grid], workers, cap)


@dataclass(frozen=True)
class CorrectionTerm:
    """u_n = f_n - S_n f"""

    n: int
    u_min: float
    u_max: float

    @property
    def sup_norm(self) -> float:
        return max(abs(self.u_min), abs(self.u_max))


def correction_terms(
    seq: PotentialSequence, f: LocallyConstantPotential, n_list: Sequence[int], cap: Optional[int] = None
) -> List[CorrectionTerm]:
    additive = AdditiveSequence(f)
    terms = []
    for n in n_list:
        lo, hi, _ = combination_extrema(seq.sft, [(1.0, seq, n, 0), (-1.0, additive, n, 0)], cap)
        terms.append(CorrectionTerm(n, lo, hi))
    return terms


@dataclass
class EquivalenceCertificate:
    representative: LocallyConstantPotential
    k_star: int
    k_grid: List[int]
    cauchy_table: np.ndarray
    defect_trace: List[Tuple[int, float]]
    tail_bound: float
    tolerance: float
    tolerance_met: bool
    method: str = "increment"
    notes: List[str] = field(default_factory=lambda: [TAIL_BOUND_NOTE])
    version: str = CERT_VERSION

    def to_json(self) -> Dict[str, Any]:
        return {
            "version": self.version,
            "method": self.method,
            "k_star": self.k_star,
            "k_grid": list(self.k_grid),
            "tolerance": self.tolerance,
            "tolerance_met": self.tolerance_met,
            "tail_bound": self.tail_bound,
            "cauchy_table": self.cauchy_table.tolist(),
            "defect_trace": [{"n": n, "delta": d} for n, d in self.defect_trace],
            "representative": self.representative.to_json(),
            "notes": list(self.notes),
        }

    @classmethod
    def from_json(cls, sft: Sft, data: Dict[str, Any]) -> "EquivalenceCertificate":
        if data.get("version") != CERT_VERSION:
            raise DomainError(f"unsupported certificate version {data.get('version')!r}")
        return cls(
            representative=LocallyConstantPotential.from_json(sft, data["representative"]),
            k_star=int(data["k_star"]),
            k_grid=[int(k) for k in data["k_grid"]],
            cauchy_table=np.array(data["cauchy_table"], dtype=np.float64),
            defect_trace=[(int(row["n"]), float(row["delta"])) for row in data["defect_trace"]],
            tail_bound=float(data["tail_bound"]),
            tolerance=float(data["tolerance"]),
            tolerance_met=bool(data["tolerance_met"]),
            method=data.get("method", "increment"),
            notes=list(data.get("notes", [])),
        )


def default_tolerance(seq: PotentialSequence) -> float:
    return DEFAULT_TOL if isinstance(seq, AdditiveSequence) else DEFAULT_SEQUENCE_TOL


def construct_equivalent(
    seq: PotentialSequence,
    k_grid: Sequence[int] = DEFAULT_GRID,
    defect_horizon: int = DEFAULT_HORIZON,
    tol: Optional[float] = None,
    method: str = "increment",
    workers: int = 1,
    cap: Optional[int] = None,
) -> EquivalenceCertificate:
    """Representative f with lim (1/n)‖f_n - S_n f‖∞ = 0, certified up to the measured tail bound."""
    grid = _check_grid(k_grid)
    if method not in METHODS:
        raise DomainError(f"unknown representative method {method!r}, expected one of {METHODS}")
    if defect_horizon < 1:
        raise DomainError(f"defect horizon must be at least 1, got {defect_horizon}")
    tol = default_tolerance(seq) if tol is None else tol
    k_star = grid[-1]

    if method == "increment":
        representative = increment_approximant(seq, k_star, cap)
    else:
        representative = approximant(seq, k_star, cap)
    logger.info(f"Representative at k*={k_star} ({method}): depth {representative.depth}")

    table = cauchy_table(seq, grid, workers, cap)

    # k* is the largest grid point, so no Cauchy term remains beyond it
    defect_trace = asymptotic_defect(seq, representative, range(1, defect_horizon + 1), cap)
    tail_bound = float(defect_trace[-1][1])
    met = tail_bound <= tol
    logger.info(f"Certificate tail bound {tail_bound:.6g} against tolerance {tol:g}: {'met' if met else 'not met'}")

    return EquivalenceCertificate(representative, k_star, grid, table, defect_trace, tail_bound, tol, met, method)


def normalized_class_trace(
    seq: PotentialSequence, f: LocallyConstantPotential, n_list: Sequence[int], cap: Optional[int] = None
) -> List[Tuple[int, float]]:
    """quotient_distance(f_n/n, f) per n."""
    return [(n, quotient_distance(approximant(seq, n, cap), f, cap)) for n in n_list]


@dataclass(frozen=True)
class DefectProbe:
    horizon: int
    sup_defect: float
    argmax_n: int
    trace: List[Tuple[int, float]]


def bounded_defect_probe(
    seq: PotentialSequence, f: LocallyConstantPotential, n_max: int, cap: Optional[int] = None
) -> DefectProbe:
    """max over n ≤ n_max of ‖f_n - S_n f‖∞; reported over the computed horizon only."""
    trace = [(t.n, t.sup_norm) for t in correction_terms(seq, f, range(1, n_max + 1), cap)]
    n_best, best = max(trace, key=lambda row: row[1])
    return DefectProbe(n_max, best, n_best, trace)
