"""Weight functions on Z^n and empirical validation of their estimates."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .lattice import multi_indices

__all__ = [
    "WeightFunction",
    "WeightValidationReport",
    "make_standard_weight",
    "make_anisotropic_weight",
    "make_constant_weight",
    "weight_from_descriptor",
    "validate_weight",
    "STABILITY_GROWTH",
]

#: relative growth allowed for a measured constant when the window doubles
STABILITY_GROWTH = 0.05


@dataclass(frozen=True)
class WeightFunction:
    """A positive weight ``Lambda`` with declared growth exponents.

    ``evaluator`` takes an integer coordinate array of shape ``(n, ...)`` and
    returns ``Lambda`` with shape ``(...)``.  ``C0``/``C1`` are the claimed
    sandwich constants; validation measures the tightest ones and only uses
    the declared values as metadata.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    mu0: float
    mu1: float
    mu: float
    descriptor: dict
    C0: float = 1.0
    C1: float = 1.0
    n: int | None = None

    def __post_init__(self):
        if not (0 < self.mu0 <= self.mu1 <= self.mu):
            raise ValueError(
                f"need 0 < mu0 <= mu1 <= mu, got {self.mu0}, {self.mu1}, {self.mu}"
            )

    def __call__(self, k) -> np.ndarray:
        k = np.asarray(k)
        if self.n is not None and k.shape[0] != self.n:
            raise ValueError(f"weight {self.name} is defined on Z^{self.n}, got Z^{k.shape[0]}")
        return self.evaluator(k)

    @property
    def name(self) -> str:
        return self.descriptor.get("kind", "custom")

    def on_box(self, box) -> np.ndarray:
        """Weight values on a lattice window, shape ``box.shape``."""
        return self(box.k_grid())


def make_standard_weight(m: float) -> WeightFunction:
    """``Lambda_m(k) = sqrt(1 + k_1^{2m} + ... + k_n^{2m})``."""
    m = float(m)
    if not m > 0:
        raise ValueError(f"weight exponent must be positive, got {m}")

    def evaluate(k):
        k = np.abs(np.asarray(k, dtype=float))
        return np.sqrt(1.0 + (k ** (2 * m)).sum(axis=0))

    return WeightFunction(evaluate, m, m, m, {"kind": "standard", "m": m})


def make_anisotropic_weight(m_vec) -> WeightFunction:
    """``sqrt(1 + k_1^{2 m_1} + ... + k_n^{2 m_n})`` with every ``m_j >= 1``."""
    m_vec = [int(v) for v in m_vec]
    if not m_vec or any(v < 1 for v in m_vec):
        raise ValueError(f"anisotropic exponents must all be >= 1, got {m_vec}")
    exps = np.array(m_vec, dtype=float)

    def evaluate(k):
        k = np.abs(np.asarray(k, dtype=float))
        powers = k ** (2 * exps.reshape((-1,) + (1,) * (k.ndim - 1)))
        return np.sqrt(1.0 + powers.sum(axis=0))

    return WeightFunction(
        evaluate,
        float(min(m_vec)),
        float(max(m_vec)),
        float(max(m_vec)),
        {"kind": "anisotropic", "m": m_vec},
        n=len(m_vec),
    )


def make_constant_weight(value: float = 1.0, mu: float = 1.0) -> WeightFunction:
    """A constant function with falsely declared growth; a negative control."""

    def evaluate(k):
        return np.full(np.asarray(k).shape[1:], float(value))

    return WeightFunction(
        evaluate, mu, mu, mu, {"kind": "constant", "value": float(value), "mu": float(mu)}
    )


def weight_from_descriptor(desc: dict) -> WeightFunction:
    kind = desc.get("kind")
    if kind == "standard":
        return make_standard_weight(desc["m"])
    if kind == "anisotropic":
        return make_anisotropic_weight(desc["m"])
    if kind == "constant":
        return make_constant_weight(desc.get("value", 1.0), desc.get("mu", 1.0))
    raise ValueError(f"unknown weight kind {kind!r}")


@dataclass
class WeightValidationReport:
    window: int
    C0: float
    C1: float
    difference_constants: dict = field(default_factory=dict)
    peetre_constants: dict = field(default_factory=dict)
    doubled: "WeightValidationReport | None" = None
    positive: bool = True
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        out = {
            "window": self.window,
            "C0": self.C0,
            "C1": self.C1,
            "difference_constants": self.difference_constants,
            "peetre_constants": self.peetre_constants,
            "positive": self.positive,
        }
        if self.doubled is not None:
            out["doubled"] = self.doubled.to_dict()
            out["passed"] = self.passed
            out["failures"] = list(self.failures)
        return out


def _key(alpha, gamma=None) -> str:
    a = ",".join(map(str, alpha))
    return a if gamma is None else f"{a}|{','.join(map(str, gamma))}"


def _scan(weight: WeightFunction, n: int, window: int, alpha_max: int, gammas) -> WeightValidationReport:
    pad = alpha_max + n
    axis = np.arange(-window, window + pad + 1)
    k = np.array(np.meshgrid(*([axis] * n), indexing="ij"))
    lam = np.asarray(weight(k), dtype=float)
    core = (slice(0, 2 * window + 1),) * n
    kc = k[(slice(None),) + core]
    lam_c = lam[core]
    one_plus = 1.0 + np.sqrt((kc.astype(float) ** 2).sum(axis=0))

    report = WeightValidationReport(
        window=window,
        C0=float(np.min(lam_c / one_plus**weight.mu0)),
        C1=float(np.max(lam_c / one_plus**weight.mu1)),
        positive=bool(np.all(lam > 0)),
    )
    for alpha in multi_indices(n, alpha_max):
        for gamma in gammas:
            diff = lam
            for ax, order in enumerate(np.add(alpha, gamma)):
                for _ in range(order):
                    diff = np.diff(diff, axis=ax)
            diff = diff[core]
            kg = np.prod([kc[j] ** g for j, g in enumerate(gamma)], axis=0)
            scale = lam_c ** (1.0 - sum(alpha) / weight.mu)
            report.difference_constants[_key(alpha, gamma)] = float(np.max(np.abs(kg * diff) / scale))
    for order in range(1, n + 1):
        report.peetre_constants[str(order)] = float(
            np.max(one_plus**order / lam_c ** (order / weight.mu0))
        )
    return report


def validate_weight(
    weight: WeightFunction,
    n: int,
    window: int = 256,
    alpha_max: int = 2,
    gamma_set=None,
) -> WeightValidationReport:
    """Measure the growth and difference constants on ``[-window, window]^n``.

    The scan is repeated on the doubled window; the weight passes when it is
    positive, every constant is finite, and no upper constant grows (and no
    lower constant shrinks) by more than 5 % under doubling.
    """
    if window < 8:
        raise ValueError("window must be at least 8")
    if alpha_max < 2:
        raise ValueError("alpha_max must be at least 2")
    if weight.n is not None and weight.n != n:
        raise ValueError(f"weight is defined on Z^{weight.n}, requested n={n}")
    gammas = [tuple(g) for g in (gamma_set or multi_indices(n, n, binary=True))]

    first = _scan(weight, n, window, alpha_max, gammas)
    second = _scan(weight, n, 2 * window, alpha_max, gammas)
    first.doubled = second

    growth = 1.0 + STABILITY_GROWTH
    if not (first.positive and second.positive):
        first.failures.append("weight is not strictly positive on the window")
    if not np.isfinite(second.C0) or second.C0 < first.C0 / growth:
        first.failures.append(
            f"lower growth constant C0 shrinks from {first.C0:.6g} to {second.C0:.6g}"
        )
    if not np.isfinite(second.C1) or second.C1 > first.C1 * growth:
        first.failures.append(
            f"upper growth constant C1 grows from {first.C1:.6g} to {second.C1:.6g}"
        )
    for label, a, b in (
        ("difference constant", first.difference_constants, second.difference_constants),
        ("peetre constant", first.peetre_constants, second.peetre_constants),
    ):
        for key, c1 in a.items():
            c2 = b[key]
            if not (np.isfinite(c1) and np.isfinite(c2)) or c2 > c1 * growth + 1e-12:
                first.failures.append(f"{label} [{key}] grows from {c1:.6g} to {c2:.6g}")
    return first
