"""Experiment configs and the task pipelines behind the command line."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .expr import SymbolSyntaxError, parse_symbol
from .fredholm import index_report
from .lattice import LatticeBox, LatticeFunction
from .quantize import (
    adjoint_asymptotic,
    compose_asymptotic,
    materialize,
    parametrix,
    transpose_asymptotic,
)
from .sobolev import (
    SobolevSpec,
    apriori_probe,
    compactness_probe,
    isometry_error,
    lambda_power_symbol,
    sobolev_norm,
)
from .sources import (
    TabulatedFormatError,
    builtin_expression,
    read_tabulated,
    symbol_from_expression,
)
from .symbols import SymbolGrid, class_report, m_ellipticity
from .weights import STABILITY_GROWTH, validate_weight, weight_from_descriptor

__all__ = ["ConfigError", "ExperimentConfig", "TASKS", "run_task", "default_config", "SCHEMA"]

SCHEMA = "lattice-pdo-report/1"
TASKS = ("validate-weight", "check-symbol", "calculus", "parametrix", "index", "sobolev")

ORACLE_TOL = 1e-10
SLOPE_TOL = 0.3
TAIL_TOL = 0.1
INDEX_TOL = 1e-8
ISOMETRY_TOL = 1e-12


class ConfigError(ValueError):
    """Invalid experiment configuration (exit code 1)."""


RUNNING = "Lambda + 0.5*expi(1)"

_DEFAULTS = {
    "validate-weight": {"lattice": {"n": 1}, "params": {"window": 256}},
    "check-symbol": {"lattice": {"n": 1, "K": [16, 32]}, "symbols": ["Lambda"], "params": {"m": 1}},
    "calculus": {"lattice": {"n": 1, "K": [32]}, "symbols": [RUNNING], "params": {"m": 1, "N": 3}},
    "parametrix": {"lattice": {"n": 1, "K": [16, 32]}, "symbols": [RUNNING], "params": {"m": 1, "N": 3}},
    "index": {
        "lattice": {"n": 1, "K": [16]},
        "symbols": [f"({RUNNING})/Lambda"],
        "params": {"m": 0, "N": 3},
    },
    "sobolev": {"lattice": {"n": 1, "K": [16, 32]}, "symbols": [RUNNING], "params": {"m": 1}},
}


def default_config(task: str) -> dict:
    cfg = copy.deepcopy(_DEFAULTS[task])
    cfg["task"] = task
    return cfg


@dataclass
class ExperimentConfig:
    task: str
    n: int
    Ks: list
    weight_desc: dict
    sources: list
    params: dict = field(default_factory=dict)
    seed: int = 0

    @classmethod
    def from_dict(cls, raw: dict, task: str | None = None, seed: int | None = None) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        cfg_task = raw.get("task")
        if task is not None and cfg_task is not None and cfg_task != task:
            raise ConfigError(f"config is for task {cfg_task!r}, invoked as {task!r}")
        task = task or cfg_task
        if task not in TASKS:
            raise ConfigError(f"unknown task {task!r}; expected one of {', '.join(TASKS)}")
        lattice = raw.get("lattice", {})
        try:
            n = int(lattice.get("n", 1))
            Ks = lattice.get("K", [16])
            Ks = [int(K) for K in (Ks if isinstance(Ks, list) else [Ks])]
        except (TypeError, ValueError) as err:
            raise ConfigError(f"bad lattice section: {err}") from None
        if n < 1 or any(K < 1 for K in Ks) or not Ks:
            raise ConfigError("lattice needs n >= 1 and at least one K >= 1")
        params = dict(raw.get("params", {}))
        if seed is None:
            seed = int(params.get("seed", raw.get("seed", 0)))
        params["seed"] = seed
        sources = raw.get("symbols", [])
        if not isinstance(sources, list):
            sources = [sources]
        cfg = cls(task, n, sorted(Ks), raw.get("weight", {"kind": "standard", "m": 1}), sources, params, seed)
        cfg.validate()
        return cfg

    @property
    def weight(self):
        try:
            return weight_from_descriptor(self.weight_desc)
        except (KeyError, ValueError, TypeError) as err:
            raise ConfigError(f"bad weight descriptor {self.weight_desc!r}: {err}") from None

    @property
    def rho(self) -> float:
        return float(self.params.get("rho", 1.0 / self.weight.mu))

    def validate(self):
        weight = self.weight
        if weight.n is not None and weight.n != self.n:
            raise ConfigError(f"weight is defined on Z^{weight.n} but lattice has n={self.n}")
        if not 0 < self.rho <= 1.0 / weight.mu + 1e-12:
            raise ConfigError(f"rho={self.rho} must lie in (0, 1/mu] = (0, {1.0 / weight.mu:g}]")
        if self.task not in ("validate-weight", "sobolev") and not self.sources:
            raise ConfigError(f"task {self.task} needs at least one symbol")
        self._parsed = [self._parse_source(src) for src in self.sources]

    def _parse_source(self, src):
        if isinstance(src, str):
            src = {"expr": src}
        if not isinstance(src, dict) or len(src) != 1:
            raise ConfigError(f"symbol source must be a string or a one-key object, got {src!r}")
        (kind, value), = src.items()
        try:
            if kind == "expr":
                return ("expr", parse_symbol(value, self.n))
            if kind == "builtin":
                return ("expr", parse_symbol(builtin_expression(value, self.n), self.n))
            if kind == "file":
                path = Path(value)
                if not path.is_file():
                    raise ConfigError(f"tabulated symbol file {value!r} not found")
                return ("file", path)
        except SymbolSyntaxError as err:
            raise ConfigError(f"symbol {value!r}: {err}") from None
        except KeyError as err:
            raise ConfigError(str(err)) from None
        raise ConfigError(f"unknown symbol source kind {kind!r}")

    def symbol(self, index: int, K: int, order: float | None = None) -> SymbolGrid:
        kind, payload = self._parsed[index]
        order = float(self.params.get("m", 0.0)) if order is None else order
        box = LatticeBox(self.n, K)
        if kind == "expr":
            return symbol_from_expression(payload, box, self.weight, order, self.rho)
        try:
            sigma = read_tabulated(payload, self.weight, order, self.rho)
        except (TabulatedFormatError, ValueError) as err:
            raise ConfigError(str(err)) from None
        if sigma.box != box:
            raise ConfigError(f"{payload} is tabulated on n={sigma.n}, K={sigma.box.K}; config asks K={K}")
        return sigma

    def describe_sources(self) -> list:
        return [str(p) if kind == "expr" else f"file:{p}" for kind, p in self._parsed]

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "lattice": {"n": self.n, "K": list(self.Ks)},
            "weight": self.weight_desc,
            "symbols": self.describe_sources(),
            "params": self.params,
        }


@dataclass
class TaskOutcome:
    report: dict
    violations: list
    matrices: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return 2 if self.violations else 0


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def dumps_report(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _slope_violations(label, slopes: dict, predicted: dict, K: int, violations: list):
    for N, s in slopes.items():
        if s > predicted[N] + SLOPE_TOL:
            violations.append(
                f"K={K}: {label} remainder slope at N={N} is {s:.4g} > predicted {predicted[N]:g} + {SLOPE_TOL}"
            )


def _task_validate_weight(cfg: ExperimentConfig) -> TaskOutcome:
    window = int(cfg.params.get("window", 256))
    alpha_max = int(cfg.params.get("alpha_max", 2))
    rep = validate_weight(cfg.weight, cfg.n, window, alpha_max)
    violations = [f"weight validation: {msg}" for msg in rep.failures]
    return TaskOutcome(
        {"results": {"validation": rep.to_dict()}, "tolerances": {"stability_growth": STABILITY_GROWTH}},
        violations,
    )


def _task_check_symbol(cfg: ExperimentConfig) -> TaskOutcome:
    alpha_max = int(cfg.params.get("alpha_max", 2))
    beta_max = int(cfg.params.get("beta_max", 2))
    variants = tuple(cfg.params.get("variants", ["S", "M"]))
    results, violations = {}, []
    for i, name in enumerate(cfg.describe_sources()):
        grids = [cfg.symbol(i, K) for K in cfg.Ks]
        rep = class_report(grids, alpha_max, beta_max, variants)
        results[name] = rep.to_dict()
        members = [v for v in ("M0", "M", "S") if rep.verdicts.get(v) == "member"]
        results[name]["verdict"] = f"member-of-{members[0]}^{rep.order:g}" if members else "not-established"
        for variant, verdict in rep.verdicts.items():
            if verdict == "not-member":
                violations.append(f"{name}: not a member of {variant}^{rep.order:g} ({'; '.join(rep.failures[:3])})")
    return TaskOutcome(
        {"results": results, "tolerances": {"stability_growth": STABILITY_GROWTH}}, violations
    )


def _task_calculus(cfg: ExperimentConfig) -> TaskOutcome:
    N = int(cfg.params.get("N", 3))
    m1 = float(cfg.params.get("m", 0.0))
    m2 = float(cfg.params.get("m2", m1))
    results, violations, matrices = {}, [], {}
    for K in cfg.Ks:
        sigma = cfg.symbol(0, K, m1)
        tau = cfg.symbol(1, K, m2) if len(cfg.sources) > 1 else sigma.with_order(m2)
        Ks_, Kt = materialize(sigma).kernel, materialize(tau).kernel
        comp = compose_asymptotic(sigma, tau, N)
        adj = adjoint_asymptotic(sigma, N)
        tra = transpose_asymptotic(sigma, N)
        oracle = {
            "compose": float(np.abs(materialize(comp.exact).kernel - Ks_ @ Kt).max()),
            "adjoint": float(np.abs(materialize(adj.exact).kernel - Ks_.conj().T).max()),
            "transpose": float(np.abs(materialize(tra.exact).kernel - Ks_.T).max()),
        }
        for name, err in oracle.items():
            if err > ORACLE_TOL:
                violations.append(f"K={K}: exact {name} symbol misses the kernel identity by {err:.3g}")
        for name, res in (("composition", comp), ("adjoint", adj), ("transpose", tra)):
            _slope_violations(name, res.slopes, res.predicted, K, violations)
        results[str(K)] = {
            "oracle_errors": oracle,
            "composition": comp.to_dict(),
            "adjoint": adj.to_dict(),
            "transpose": tra.to_dict(),
        }
        matrices[K] = sigma
    return TaskOutcome(
        {"results": results, "tolerances": {"oracle": ORACLE_TOL, "slope": SLOPE_TOL}}, violations, matrices
    )


def _task_parametrix(cfg: ExperimentConfig) -> TaskOutcome:
    N = int(cfg.params.get("N", 3))
    R1 = float(cfg.params.get("R1", 0.0))
    tail_tol = float(cfg.params.get("tail_tol", TAIL_TOL))
    results, violations, matrices = {}, [], {}
    for K in cfg.Ks:
        sigma = cfg.symbol(0, K)
        try:
            par = parametrix(sigma, N, R1)
        except ValueError as err:
            violations.append(f"K={K}: {err}")
            continue
        info = par.to_dict()
        results[str(K)] = info
        for side, s in par.slopes.items():
            if s > par.predicted_slope + SLOPE_TOL:
                violations.append(
                    f"K={K}: {side} parametrix remainder slope {s:.4g} > {par.predicted_slope:g} + {SLOPE_TOL}"
                )
        for side, v in info["tail_norms"].items():
            if v > tail_tol:
                violations.append(f"K={K}: {side} remainder tail norm {v:.3g} > {tail_tol}")
        matrices[K] = par.tau
    return TaskOutcome(
        {"results": results, "tolerances": {"slope": SLOPE_TOL, "tail_norm": tail_tol, "tail_k_min": "K/2"}},
        violations,
        matrices,
    )


def _task_index(cfg: ExperimentConfig) -> TaskOutcome:
    N = int(cfg.params.get("N", 3))
    R1 = float(cfg.params.get("R1", 0.0))
    results, violations, matrices = {}, [], {}
    for K in cfg.Ks:
        sigma = cfg.symbol(0, K)
        try:
            rep = index_report(sigma, N, R1)
        except ValueError as err:
            violations.append(f"K={K}: {err}")
            continue
        info = rep.to_dict()
        trace_gap = max(
            abs(rep.trace_T1 - rep.matrix_trace_T1), abs(rep.trace_T2 - rep.matrix_trace_T2)
        )
        info["symbol_vs_matrix_trace"] = float(trace_gap)
        results[str(K)] = info
        if rep.index_kernels != 0 or rep.dim_null != rep.dim_null_transpose:
            violations.append(f"K={K}: nullspace dimensions {rep.dim_null}, {rep.dim_null_transpose} differ")
        if abs(rep.index_traces) > INDEX_TOL:
            violations.append(f"K={K}: trace index {abs(rep.index_traces):.3g} exceeds {INDEX_TOL}")
        if not rep.consistent:
            violations.append(f"K={K}: index formulas disagree by more than 0.5")
        if trace_gap > ORACLE_TOL:
            violations.append(f"K={K}: symbol trace misses matrix trace by {trace_gap:.3g}")
        for name, check in rep.decay.items():
            if not check["passed"]:
                violations.append(f"K={K}: remainder {name} fails the rapid-decay check")
        matrices[K] = sigma
    return TaskOutcome(
        {
            "results": results,
            "tolerances": {"index_traces": INDEX_TOL, "trace_oracle": ORACLE_TOL, "slope": SLOPE_TOL},
        },
        violations,
        matrices,
    )


def _task_sobolev(cfg: ExperimentConfig) -> TaskOutcome:
    samples = int(cfg.params.get("samples", 100))
    pairs = [tuple(p) for p in cfg.params.get("embedding_pairs", [[0, 1], [1, 2]])]
    s_iso = float(cfg.params.get("s", 1.0))
    eps = float(cfg.params.get("eps", 1.0))
    bounds = cfg.params.get("apriori_bounds", [0.4, 3.0])
    weight = cfg.weight
    rng = np.random.default_rng(cfg.seed)
    results, violations = {}, []
    apriori = {}
    for K in cfg.Ks:
        box = LatticeBox(cfg.n, K)
        info = {}
        worst = 0
        for m1, m2 in pairs:
            fails = 0
            for _ in range(samples):
                w = LatticeFunction(box, rng.standard_normal(box.shape) + 1j * rng.standard_normal(box.shape))
                if sobolev_norm(SobolevSpec(weight, m1), w) > sobolev_norm(SobolevSpec(weight, m2), w):
                    fails += 1
            info[f"embedding_{m1:g}_{m2:g}_failures"] = fails
            worst = max(worst, fails)
        if worst:
            violations.append(f"K={K}: embedding inequality failed on {worst} random vectors")
        w = LatticeFunction(box, rng.standard_normal(box.shape) + 1j * rng.standard_normal(box.shape))
        iso = isometry_error(SobolevSpec(weight, s_iso), w)
        info["isometry_error"] = iso
        if iso > ISOMETRY_TOL:
            violations.append(f"K={K}: Lambda(D)^s Lambda(D)^-s misses the identity by {iso:.3g}")

        smoothing = lambda_power_symbol(box, weight, -eps, cfg.rho)
        sv = np.linalg.svd(materialize(smoothing).kernel, compute_uv=False)
        expected = np.sort(weight.on_box(box).ravel() ** -eps)[::-1]
        info["smoothing_singular_value_error"] = float(np.abs(sv - expected).max())
        tails = compactness_probe(smoothing)
        info["compactness_tail_norms"] = tails
        vals = list(tails.values())
        if any(b > a + 1e-14 for a, b in zip(vals, vals[1:])):
            violations.append(f"K={K}: compactness tail norms are not decreasing: {vals}")
        if cfg.sources:
            sigma = cfg.symbol(0, K)
            _, elliptic = m_ellipticity(sigma, float(cfg.params.get("R1", 0.0)))
            if elliptic:
                c_min, c_max = apriori_probe(sigma, samples, cfg.seed, float(cfg.params.get("R1", 0.0)))
                info["apriori"] = {"c_min": c_min, "c_max": c_max}
                apriori[K] = (c_min, c_max)
                if c_min < bounds[0] or c_max > bounds[1]:
                    violations.append(f"K={K}: a-priori ratio range [{c_min:.4g}, {c_max:.4g}] leaves {bounds}")
            else:
                info["apriori"] = "skipped: symbol is not M-elliptic"
        results[str(K)] = info
    keys = sorted(apriori)
    for K1, K2 in zip(keys, keys[1:]):
        (a1, b1), (a2, b2) = apriori[K1], apriori[K2]
        if a2 < a1 / (1 + STABILITY_GROWTH) or b2 > b1 * (1 + STABILITY_GROWTH):
            violations.append(f"a-priori constants unstable between K={K1} and K={K2}")
    return TaskOutcome(
        {
            "results": results,
            "tolerances": {
                "isometry": ISOMETRY_TOL,
                "apriori_bounds": bounds,
                "stability_growth": STABILITY_GROWTH,
            },
        },
        violations,
    )


_RUNNERS = {
    "validate-weight": _task_validate_weight,
    "check-symbol": _task_check_symbol,
    "calculus": _task_calculus,
    "parametrix": _task_parametrix,
    "index": _task_index,
    "sobolev": _task_sobolev,
}


def run_task(cfg: ExperimentConfig) -> TaskOutcome:
    outcome = _RUNNERS[cfg.task](cfg)
    report = {
        "schema": SCHEMA,
        "task": cfg.task,
        "inputs": cfg.to_dict(),
        "seed": cfg.seed,
        "box_sizes": list(cfg.Ks),
        "versions": {"lattice_pdo": __version__, "numpy": np.__version__},
        "violations": list(outcome.violations),
        "verdict": "pass" if not outcome.violations else "violation",
    }
    report.update(outcome.report)
    outcome.report = report
    return outcome

