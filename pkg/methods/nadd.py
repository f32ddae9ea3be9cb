#!/usr/bin/env python3
"""
nadd - non-additive thermodynamic formalism on subshifts of finite type

Reads a JSON analysis config, runs one command and writes
<command>.report.json plus one CSV per table into the output directory.

Usage:
    nadd <command> --config <path> [--out <dir>] [--tol <float>] [--cap <int>] [-v]
    nadd validate --config <path>

Exit codes: 0 success, 2 verdict "fails", 1 error.
"""

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import jsonschema
import numpy as np

from equivalence import (
    EquivalenceCertificate,
    bounded_defect_probe,
    construct_equivalent,
    default_tolerance,
    normalized_class_trace,
)
from multifractal_ldp import discrete_legendre, entropy_spectrum, pressure_curve, rate_function
from potential_core import DEFAULT_TOL, LocallyConstantPotential, invariant_average_range, seminorm_convergence_trace
from reports import ReportDocument
from sequence_core import (
    CylinderMeasure,
    MeasureLogSequence,
    PotentialSequence,
    almost_additivity_constant,
    sequence_from_json,
    variation_profile,
)
from shift_core import DEFAULT_CAP, DomainError, EnumerationLimitError, Sft
from thermo import (
    gibbs_constants,
    lyapunov_exponent,
    pressure_additive,
    pressure_sequence,
    quasi_bernoulli_constants,
    variational_check,
)

logger = logging.getLogger(__name__)

ROOT = Path(__file__).resolve().parents[1]
SCHEMA_PATH = Path(__file__).resolve().parent / "analysis_config.schema.json"
RESULTS_DIR = ROOT / "results"

COMMANDS = (
    "seminorm",
    "equivalent-potential",
    "pressure",
    "variational-check",
    "gibbs-check",
    "quasi-bernoulli",
    "spectrum",
    "ldp",
    "additivity",
    "variation",
)

DEFAULT_PARAMETERS: Dict[str, Any] = {
    "k_grid": [2, 4, 8],
    "n_max": 16,
    "horizon": 12,
    "q_grid": np.linspace(-4.0, 4.0, 17).tolist(),
    "alpha_grid": None,
    "x_grid": None,
    "method": "increment",
    "p_target": 0.0,
    "enclosure": True,
    "tol": None,
    "cap": DEFAULT_CAP,
    "workers": 1,
    "growth_threshold": 0.01,
    "decay_ratio": 0.5,
}
SPECTRUM_POINTS = 21
VARIATIONAL_CONTRACT = 1e-8


class ConfigError(ValueError):
    """Config rejected; each diagnostic names a path into the config"""

    def __init__(self, diagnostics: List[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics


def load_config(config_path: Path) -> Dict[str, Any]:
    config_path = Path(config_path)
    if not config_path.exists():
        raise FileNotFoundError(f"Config file not found: {config_path}")
    with open(config_path) as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError([f"<root>: not valid JSON ({e})"]) from e


def schema_diagnostics(raw: Dict[str, Any]) -> List[str]:
    with open(SCHEMA_PATH) as f:
        schema = json.load(f)
    validator = jsonschema.Draft7Validator(schema)
    diagnostics = []
    for error in sorted(validator.iter_errors(raw), key=lambda e: list(map(str, e.absolute_path))):
        path = "/".join(str(p) for p in error.absolute_path) or "<root>"
        diagnostics.append(f"{path}: {error.message}")
    return diagnostics


@dataclass
class AnalysisConfig:
    raw: Dict[str, Any]
    sft: Sft
    parameters: Dict[str, Any]
    potential: Optional[LocallyConstantPotential] = None
    potential_g: Optional[LocallyConstantPotential] = None
    sequence: Optional[PotentialSequence] = None
    measure: Optional[CylinderMeasure] = None
    output_dir: Optional[Path] = None
    _certificate: Optional[EquivalenceCertificate] = field(default=None, repr=False)

    @classmethod
    def from_dict(
        cls, raw: Dict[str, Any], tol: Optional[float] = None, cap: Optional[int] = None, name: str = "analysis"
    ) -> "AnalysisConfig":
        diagnostics = schema_diagnostics(raw)
        if diagnostics:
            raise ConfigError(diagnostics)
        built, diagnostics = build_objects(raw)
        if diagnostics:
            raise ConfigError(diagnostics)

        parameters = dict(DEFAULT_PARAMETERS)
        parameters.update(raw.get("parameters", {}))
        if tol is not None:
            parameters["tol"] = tol
        if cap is not None:
            parameters["cap"] = cap
        output_dir = Path(raw["output_dir"]) if "output_dir" in raw else RESULTS_DIR / name
        return cls(raw, parameters=parameters, output_dir=output_dir, **built)

    @classmethod
    def from_file(cls, config_path: Path, tol: Optional[float] = None, cap: Optional[int] = None) -> "AnalysisConfig":
        config_path = Path(config_path)
        return cls.from_dict(load_config(config_path), tol, cap, name=config_path.stem)

    @property
    def cap(self) -> int:
        return int(self.parameters["cap"])

    def tolerance(self, fallback: float = DEFAULT_TOL) -> float:
        tol = self.parameters["tol"]
        return fallback if tol is None else float(tol)

    def require(self, component: str, command: str) -> Any:
        value = getattr(self, component)
        if value is None:
            raise ConfigError([f"{component}: required by the {command} command"])
        return value

    def effective(self, tol: float) -> Dict[str, Any]:
        echo = {key: value for key, value in self.raw.items() if key != "parameters"}
        echo["parameters"] = dict(self.parameters, tol=tol)
        echo["output_dir"] = str(self.output_dir)
        return echo

    def certificate(self, seq: PotentialSequence) -> EquivalenceCertificate:
        if self._certificate is None:
            p = self.parameters
            self._certificate = construct_equivalent(
                seq,
                p["k_grid"],
                p["n_max"],
                self.tolerance(default_tolerance(seq)),
                p["method"],
                p["workers"],
                self.cap,
            )
        return self._certificate


def build_objects(raw: Dict[str, Any]) -> Tuple[Dict[str, Any], List[str]]:
    """Construct every object the config names; stop at the first mathematical error."""
    built: Dict[str, Any] = {}
    steps: List[Tuple[str, Callable[[Sft], Any]]] = [
        ("potential", lambda sft: LocallyConstantPotential.from_json(sft, raw["potential"])),
        ("potential_g", lambda sft: LocallyConstantPotential.from_json(sft, raw["potential_g"])),
        ("sequence", lambda sft: sequence_from_json(sft, raw["sequence"])),
        ("measure", lambda sft: CylinderMeasure.from_json(sft, raw["measure"])),
    ]
    try:
        sft = Sft.from_json(raw["sft"])
    except DomainError as e:
        return built, [f"sft: {e}"]
    built["sft"] = sft
    for key, build in steps:
        if key not in raw:
            continue
        try:
            built[key] = build(sft)
        except DomainError as e:
            return built, [f"{key}: {e}"]
        except (KeyError, TypeError, ValueError) as e:
            return built, [f"{key}: malformed entry ({e})"]
    return built, []


def validate(config_path: Path) -> List[str]:
    """Schema and invariant diagnostics; an empty list means the config is runnable."""
    raw = load_config(config_path)
    diagnostics = schema_diagnostics(raw)
    if diagnostics:
        return diagnostics
    return build_objects(raw)[1]


# --- commands ----------------------------------------------------------------------


def _additive_view(cfg: AnalysisConfig, command: str) -> Tuple[LocallyConstantPotential, float, List[str]]:
    """The potential itself, or the certified representative of the sequence with its tail bound."""
    if cfg.potential is not None:
        return cfg.potential, 0.0, []
    seq = cfg.require("sequence", command)
    cert = cfg.certificate(seq)
    return cert.representative, cert.tail_bound, list(cert.notes)


def _default_grid(f: LocallyConstantPotential, cfg: AnalysisConfig, key: str) -> List[float]:
    if cfg.parameters[key] is not None:
        return list(cfg.parameters[key])
    lo, hi = invariant_average_range(f, cfg.cap)
    return np.linspace(lo, hi, SPECTRUM_POINTS).tolist()


def run_seminorm(cfg: AnalysisConfig) -> ReportDocument:
    f = cfg.require("potential", "seminorm")
    report = seminorm_convergence_trace(f, cfg.parameters["n_max"], cfg.cap)
    results = report.to_json()
    results["invariant_average_range"] = [report.min_mean, report.max_mean]
    results["headline"] = f"seminorm {report.value:.10g}"
    rows = [{"n": n, "normalized_sup": v} for n, v in report.birkhoff_trace]
    return ReportDocument("seminorm", {}, results, {"trace": rows})


def run_equivalent_potential(cfg: AnalysisConfig) -> ReportDocument:
    seq = cfg.require("sequence", "equivalent-potential")
    cert = cfg.certificate(seq)
    grid = cert.k_grid
    results = {"certificate": cert.to_json(), "headline": f"tail_bound {cert.tail_bound:.6g}"}
    results["class_trace"] = [
        {"n": n, "distance": d} for n, d in normalized_class_trace(seq, cert.representative, grid, cfg.cap)
    ]
    probe = bounded_defect_probe(seq, cert.representative, cfg.parameters["n_max"], cfg.cap)
    results["bounded_defect_probe"] = {"horizon": probe.horizon, "sup_defect": probe.sup_defect, "argmax_n": probe.argmax_n}

    warnings = list(cert.notes)
    if not cert.tolerance_met:
        warnings.append(f"tail_bound {cert.tail_bound:.6g} exceeds the tolerance {cert.tolerance:g}")
    if cfg.measure is not None:
        lyap = lyapunov_exponent(seq, cfg.measure, cfg.parameters["horizon"], cfg.cap)
        rep = cert.representative
        average = float(cfg.measure.probabilities(rep.depth, cfg.cap) @ rep.values)
        results["lyapunov"] = {
            "sequence_estimate": lyap.point,
            "representative_average": average,
            "gap": abs(lyap.point - average),
            "trace": [{"n": n, "value": v} for n, v in lyap.trace],
        }
        warnings.append("Lyapunov exponent: limit estimated at finite horizon")

    tables = {
        "cauchy_table": [
            {"k": grid[i], "l": grid[j], "distance": float(cert.cauchy_table[i, j])}
            for i in range(len(grid))
            for j in range(len(grid))
        ],
        "defect_trace": [{"n": n, "delta": d} for n, d in cert.defect_trace],
    }
    return ReportDocument("equivalent-potential", {}, results, tables, warnings)


def run_pressure(cfg: AnalysisConfig) -> ReportDocument:
    results: Dict[str, Any] = {}
    tables: Dict[str, List[Dict[str, Any]]] = {}
    warnings: List[str] = []
    if cfg.potential is not None:
        results["additive"] = pressure_additive(cfg.potential, cfg.cap)
        results["headline"] = f"pressure {results['additive']:.10g}"
    if cfg.sequence is not None:
        n_max = cfg.parameters["n_max"]
        C = None
        if cfg.parameters["enclosure"] and n_max >= 2:
            C = almost_additivity_constant(cfg.sequence, n_max, cfg.tolerance(), cfg.cap).c_estimate
        estimate = pressure_sequence(cfg.sequence, n_max, C, cfg.cap)
        results["sequence"] = estimate.to_json()
        results["headline"] = f"pressure {estimate.point:.10g} at n={n_max}"
        tables["partition"] = estimate.rows()
        warnings.extend(estimate.warnings)
    if not results:
        raise ConfigError(["potential: the pressure command needs a potential or a sequence"])
    return ReportDocument("pressure", {}, results, tables, warnings)


def run_variational_check(cfg: AnalysisConfig) -> ReportDocument:
    f = cfg.require("potential", "variational-check")
    residual = variational_check(f, cfg.cap)
    verdict = "passes" if residual <= VARIATIONAL_CONTRACT else "fails"
    results = {"residual": residual, "contract": VARIATIONAL_CONTRACT, "headline": f"residual {residual:.3g}"}
    return ReportDocument("variational-check", {}, results, verdict=verdict)


def run_gibbs_check(cfg: AnalysisConfig) -> ReportDocument:
    mu = cfg.require("measure", "gibbs-check")
    warnings: List[str] = []
    if cfg.potential is not None:
        candidate = cfg.potential
    else:
        seq = cfg.sequence if cfg.sequence is not None else MeasureLogSequence(mu)
        cert = cfg.certificate(seq)
        candidate = cert.representative
        warnings.extend(cert.notes)
    p = cfg.parameters
    report = gibbs_constants(
        mu, candidate, p["p_target"], p["n_max"], p["growth_threshold"], p["decay_ratio"], cfg.cap
    )
    warnings.extend(report.warnings)
    results = report.to_json()
    results["candidate_depth"] = candidate.depth
    results["headline"] = f"max K_n {max(report.K_n) if report.K_n else float('inf'):.6g}"
    return ReportDocument("gibbs-check", {}, results, {"gibbs": report.rows()}, warnings, report.verdict)


def run_quasi_bernoulli(cfg: AnalysisConfig) -> ReportDocument:
    mu = cfg.require("measure", "quasi-bernoulli")
    report = quasi_bernoulli_constants(mu, cfg.parameters["horizon"], cfg.parameters["growth_threshold"], cfg.cap)
    results = report.to_json()
    results["headline"] = f"max D_n {max(report.D_n) if report.D_n else float('inf'):.6g}"
    return ReportDocument("quasi-bernoulli", {}, results, {"coupling": report.rows()}, verdict=report.verdict)


def run_spectrum(cfg: AnalysisConfig) -> ReportDocument:
    f, band, warnings = _additive_view(cfg, "spectrum")
    p = cfg.parameters
    curve = pressure_curve(f, p["q_grid"], p["workers"], cfg.cap)
    spectrum = entropy_spectrum(f, _default_grid(f, cfg, "alpha_grid"), band, cfg.tolerance(), p["workers"], cfg.cap)
    finite = np.isfinite(spectrum.values)
    results = {
        "domain": list(spectrum.domain),
        "degenerate": spectrum.degenerate,
        "band": band,
        "peak": float(np.max(spectrum.values)) if finite.any() else float("-inf"),
        "legendre_check": discrete_legendre(curve.q_grid, curve.values, spectrum.alpha_grid[finite]).tolist(),
        "headline": f"spectrum on [{spectrum.domain[0]:.6g}, {spectrum.domain[1]:.6g}]",
    }
    warnings = warnings + list(spectrum.notes)
    tables = {"pressure_curve": curve.rows(), "spectrum": spectrum.rows()}
    return ReportDocument("spectrum", {}, results, tables, warnings)


def run_ldp(cfg: AnalysisConfig) -> ReportDocument:
    f, band, warnings = _additive_view(cfg, "ldp")
    if cfg.potential_g is not None:
        g = cfg.potential_g
    elif cfg.measure is not None:
        cert = construct_equivalent(
            MeasureLogSequence(cfg.measure),
            cfg.parameters["k_grid"],
            cfg.parameters["n_max"],
            cfg.tolerance(default_tolerance(MeasureLogSequence(cfg.measure))),
            cfg.parameters["method"],
            cfg.parameters["workers"],
            cfg.cap,
        )
        g = cert.representative
        band += cert.tail_bound
    else:
        g = LocallyConstantPotential.constant(f.sft, 0.0)
    rate = rate_function(f, g, _default_grid(f, cfg, "x_grid"), band, cfg.tolerance(), cfg.parameters["workers"], cfg.cap)
    results = {"minimizer": rate.minimizer, "band": band, "headline": f"rate function minimized at {rate.minimizer:.6g}"}
    return ReportDocument("ldp", {}, results, {"rate": rate.rows()}, warnings)


def run_additivity(cfg: AnalysisConfig) -> ReportDocument:
    seq = cfg.require("sequence", "additivity")
    report = almost_additivity_constant(seq, cfg.parameters["horizon"], cfg.tolerance(), cfg.cap)
    results = {
        "c_estimate": report.c_estimate,
        "classification": report.classification,
        "exact": report.exact,
        "c_by_horizon": report.to_json()["c_by_horizon"],
        "headline": f"C {report.c_estimate:.6g} ({report.classification})",
    }
    warnings = [] if report.exact else ["defects are upper bounds: the sequence has no known constancy rank"]
    return ReportDocument("additivity", {}, results, {"defects": report.rows()}, warnings)


def run_variation(cfg: AnalysisConfig) -> ReportDocument:
    seq = cfg.require("sequence", "variation")
    report = variation_profile(seq, cfg.parameters["horizon"], cfg.tolerance(), cfg.cap)
    results = {"bounded": report.bounded_flag, "headline": f"max variation {max(report.var_n):.6g}"}
    return ReportDocument("variation", {}, results, {"variation": report.rows()})


RUNNERS: Dict[str, Callable[[AnalysisConfig], ReportDocument]] = {
    "seminorm": run_seminorm,
    "equivalent-potential": run_equivalent_potential,
    "pressure": run_pressure,
    "variational-check": run_variational_check,
    "gibbs-check": run_gibbs_check,
    "quasi-bernoulli": run_quasi_bernoulli,
    "spectrum": run_spectrum,
    "ldp": run_ldp,
    "additivity": run_additivity,
    "variation": run_variation,
}


def run(cfg: AnalysisConfig, command: str, output_dir: Optional[Path] = None) -> ReportDocument:
    if command not in RUNNERS:
        raise ConfigError([f"<command>: unknown command {command!r}, expected one of {', '.join(COMMANDS)}"])
    logger.info(f"Running {command}")
    start = time.perf_counter()
    document = RUNNERS[command](cfg)
    tol = cfg.tolerance(default_tolerance(cfg.sequence)) if command == "equivalent-potential" else cfg.tolerance()
    document.config = cfg.effective(tol)
    document.stamp(time.perf_counter() - start, tol, cfg.cap)
    document.export(Path(output_dir) if output_dir is not None else cfg.output_dir)
    return document


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="Non-additive thermodynamic formalism on subshifts of finite type")
    parser.add_argument("command", choices=COMMANDS + ("validate",), help="Analysis to run, or validate")
    parser.add_argument("--config", required=True, help="AnalysisConfig JSON file")
    parser.add_argument("--out", help="Output directory (default: config output_dir or results/<config name>)")
    parser.add_argument("--tol", type=float, help="Absolute tolerance override")
    parser.add_argument("--cap", type=int, help="Enumeration cap override")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s [%(filename)s:%(lineno)s] %(message)s",
    )

    try:
        if args.command == "validate":
            diagnostics = validate(Path(args.config))
            for diagnostic in diagnostics:
                print(diagnostic)
            return 0 if not diagnostics else 1

        cfg = AnalysisConfig.from_file(Path(args.config), args.tol, args.cap)
        output_dir = Path(args.out) if args.out else cfg.output_dir
        document = run(cfg, args.command, output_dir)
        print(f"Wrote {output_dir / (args.command + '.report.json')}")
        document.print_summary()
        return document.exit_code
    except ConfigError as e:
        for diagnostic in e.diagnostics:
            logger.error(f"Config error: {diagnostic}")
        return 1
    except EnumerationLimitError as e:
        logger.error(f"Enumeration limit: {e}")
        return 1
    except (DomainError, OSError, ValueError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
