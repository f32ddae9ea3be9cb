#!/usr/bin/env python3
"""
Pressure curves, entropy spectra and large-deviation rate functions

Everything goes through additive representatives: P(q) = P(q·f), the level-set
entropy E(α) = min_q P(q) - qα and the rate function
I(x) = sup_α αx - P(g + αf) + P(g). Both transforms are computed per grid
point by a coarse grid search, bound expansion when the minimizer sits on the
edge, and a bounded scalar refinement.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from potential_core import DEFAULT_TOL, LocallyConstantPotential, invariant_average_range
from shift_core import DomainError
from thermo import equilibrium_state, pressure_additive

logger = logging.getLogger(__name__)

GRID_POINTS = 33
GRID_BOUND = 8.0
GRID_LIMIT = 64.0
REFINE_XTOL = 1e-10
LEGENDRE_NOTE = "Legendre side computed unconditionally; the variational identity is not asserted at non-generic α"


def _memoized(fn: Callable[[float], float]) -> Callable[[float], float]:
    cache: Dict[float, float] = {}

    def wrapper(t: float) -> float:
        t = float(t)
        if t not in cache:
            cache[t] = fn(t)
        return cache[t]

    return wrapper


def conjugate_minimum(fn: Callable[[float], float], slope: float) -> Tuple[float, float]:
    """min over t of fn(t) - slope·t for convex fn, with its minimizer."""
    objective = lambda t: fn(t) - slope * t
    lo, hi = -GRID_BOUND, GRID_BOUND
    while True:
        grid = np.linspace(lo, hi, GRID_POINTS)
        values = np.array([objective(t) for t in grid])
        i = int(np.argmin(values))
        if i == 0 and lo > -GRID_LIMIT:
            lo = max(2 * lo, -GRID_LIMIT)
        elif i == GRID_POINTS - 1 and hi < GRID_LIMIT:
            hi = min(2 * hi, GRID_LIMIT)
        else:
            break

    a, b = grid[max(i - 1, 0)], grid[min(i + 1, GRID_POINTS - 1)]
    result = minimize_scalar(objective, bounds=(a, b), method="bounded", options={"xatol": REFINE_XTOL})
    if result.fun < values[i]:
        return float(result.fun), float(result.x)
    return float(values[i]), float(grid[i])


def discrete_legendre(xs: Sequence[float], values: Sequence[float], slopes: Sequence[float]) -> np.ndarray:
    """max over grid points x of s·x - v(x), for each slope s."""
    xs = np.asarray(xs, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    slopes = np.asarray(slopes, dtype=np.float64)
    return np.max(slopes[:, None] * xs[None, :] - values[None, :], axis=1)


def _check_grid(grid: Sequence[float], name: str) -> np.ndarray:
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or len(grid) == 0 or not np.all(np.isfinite(grid)):
        raise DomainError(f"{name} must be a non-empty list of finite numbers")
    if np.any(np.diff(grid) < 0):
        raise DomainError(f"{name} must be sorted ascending")
    return grid


def _map(fn: Callable[[float], Any], grid: Sequence[float], workers: int) -> List[Any]:
    if workers > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(fn, grid))
    return [fn(x) for x in grid]


@dataclass
class PressureCurve:
    q_grid: np.ndarray
    values: np.ndarray
    derivatives: np.ndarray

    def rows(self) -> List[Dict[str, float]]:
        return [{"q": q, "P": p, "dP": d} for q, p, d in zip(self.q_grid.tolist(), self.values.tolist(), self.derivatives.tolist())]


def pressure_curve(
    f: LocallyConstantPotential, q_grid: Sequence[float], workers: int = 1, cap: Optional[int] = None
) -> PressureCurve:
    grid = _check_grid(q_grid, "q_grid")

    def point(q: float) -> Tuple[float, float]:
        scaled = q * f
        return pressure_additive(scaled, cap), equilibrium_state(scaled, cap).expectation(f, cap)

    results = _map(point, grid, workers)
    return PressureCurve(grid, np.array([r[0] for r in results]), np.array([r[1] for r in results]))


@dataclass
class SpectrumResult:
    alpha_grid: np.ndarray
    values: np.ndarray
    domain: Tuple[float, float]
    q_star: np.ndarray
    band: float = 0.0
    degenerate: bool = False
    notes: List[str] = field(default_factory=lambda: [LEGENDRE_NOTE])

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {"alpha": a, "E": e, "band": self.band, "q_star": q}
            for a, e, q in zip(self.alpha_grid.tolist(), self.values.tolist(), self.q_star.tolist())
        ]


def entropy_spectrum(
    f: LocallyConstantPotential,
    alpha_grid: Sequence[float],
    band: float = 0.0,
    tol: float = DEFAULT_TOL,
    workers: int = 1,
    cap: Optional[int] = None,
) -> SpectrumResult:
    """E(α) = min_q P(q·f) - qα on [α_min, α_max], -inf outside."""
    grid = _check_grid(alpha_grid, "alpha_grid")
    lo, hi = invariant_average_range(f, cap)
    pressure = _memoized(lambda q: pressure_additive(q * f, cap))

    if hi - lo <= tol:
        logger.info(f"Potential is cohomologous to the constant {hi:.6g}; spectrum is a single point")
        values = np.where(np.abs(grid - hi) <= tol, pressure(0.0), -np.inf)
        return SpectrumResult(grid, values, (lo, hi), np.zeros(len(grid)), band, degenerate=True)

    def point(alpha: float) -> Tuple[float, float]:
        if alpha < lo - tol or alpha > hi + tol:
            return -np.inf, np.nan
        return conjugate_minimum(pressure, alpha)

    results = _map(point, grid, workers)
    values = np.array([r[0] for r in results])
    logger.info(f"Entropy spectrum on [{lo:.6g}, {hi:.6g}], max E = {np.max(values):.6g}")
    return SpectrumResult(grid, values, (lo, hi), np.array([r[1] for r in results]), band)


@dataclass
class RateFunction:
    x_grid: np.ndarray
    values: np.ndarray
    minimizer: float
    alpha_star: np.ndarray
    band: float = 0.0

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {"x": x, "I": i, "alpha_star": a}
            for x, i, a in zip(self.x_grid.tolist(), self.values.tolist(), self.alpha_star.tolist())
        ]


def rate_function(
    f: LocallyConstantPotential,
    g: LocallyConstantPotential,
    x_grid: Sequence[float],
    band: float = 0.0,
    tol: float = DEFAULT_TOL,
    workers: int = 1,
    cap: Optional[int] = None,
) -> RateFunction:
    """I(x) = sup_α αx - P(g + αf) + P(g); +inf outside the range of invariant averages of f."""
    if f.sft != g.sft:
        raise DomainError("rate function needs both representatives on one shift")
    grid = _check_grid(x_grid, "x_grid")
    base = pressure_additive(g, cap)
    shifted = _memoized(lambda a: pressure_additive(g + a * f, cap) - base)
    lo, hi = invariant_average_range(f, cap)
    minimizer = equilibrium_state(g, cap).expectation(f, cap)

    def point(x: float) -> Tuple[float, float]:
        if x < lo - tol or x > hi + tol:
            return np.inf, np.nan
        value, alpha = conjugate_minimum(shifted, x)
        return max(-value, 0.0), alpha

    results = _map(point, grid, workers)
    return RateFunction(grid, np.array([r[0] for r in results]), minimizer, np.array([r[1] for r in results]), band)


def derivative_check(f: LocallyConstantPotential, q: float, h: float, cap: Optional[int] = None) -> Tuple[float, float, float]:
    """∫f dμ_q against the central difference of P at q."""
    if h <= 0:
        raise DomainError(f"finite-difference step must be positive, got {h}")
    analytic = equilibrium_state(q * f, cap).expectation(f, cap)
    numeric = (pressure_additive((q + h) * f, cap) - pressure_additive((q - h) * f, cap)) / (2 * h)
    return analytic, numeric, abs(analytic - numeric)
