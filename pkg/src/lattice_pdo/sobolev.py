"""Weighted Sobolev scale on the lattice window.

``Lambda(D)^s`` is the pseudo-difference operator with x-independent symbol
``Lambda(k)^s``, i.e. pointwise multiplication by ``Lambda(k)^s``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lattice import LatticeBox, LatticeFunction
from .quantize import materialize
from .symbols import NotEllipticError, SymbolGrid, m_ellipticity
from .weights import STABILITY_GROWTH, WeightFunction

__all__ = [
    "SobolevSpec",
    "lambda_power_apply",
    "lambda_power_symbol",
    "sobolev_norm",
    "isometry_error",
    "apriori_probe",
    "scale_boundedness_probe",
    "compactness_probe",
]


@dataclass(frozen=True)
class SobolevSpec:
    weight: WeightFunction
    s: float


def lambda_power_apply(spec: SobolevSpec, w: LatticeFunction) -> LatticeFunction:
    return LatticeFunction(w.box, spec.weight.on_box(w.box) ** spec.s * w.values)


def lambda_power_symbol(box: LatticeBox, weight: WeightFunction, s: float, rho: float = 1.0) -> SymbolGrid:
    """``Lambda(k)^s`` as an x-independent symbol of order ``s``."""
    lam = weight.on_box(box) ** s
    return SymbolGrid.from_function(
        box, weight, lambda k, x: lam.reshape(box.shape + (1,) * box.n), s, rho, f"Lambda^{s:g}"
    )


def sobolev_norm(spec: SobolevSpec, w: LatticeFunction) -> float:
    """``||Lambda(D)^s w||_l2``."""
    return lambda_power_apply(spec, w).norm()


def isometry_error(spec: SobolevSpec, w: LatticeFunction) -> float:
    """Relative error of ``Lambda(D)^-s Lambda(D)^s w = w``."""
    back = lambda_power_apply(SobolevSpec(spec.weight, -spec.s), lambda_power_apply(spec, w))
    return float(np.abs(back.values - w.values).max() / max(np.abs(w.values).max(), 1e-300))


def _random_functions(box: LatticeBox, samples: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal((samples, box.size)) + 1j * rng.standard_normal((samples, box.size))


def apriori_probe(
    sigma: SymbolGrid, samples: int = 200, seed: int = 0, R1: float = 0.0
) -> tuple[float, float]:
    """Extremes of ``(||T u||_0 + ||u||_0) / ||u||_m`` over seeded random ``u``.

    The probe set also contains every unit vector, so localized inputs at
    high and low frequencies are always covered.
    """
    _, elliptic = m_ellipticity(sigma, R1)
    if not elliptic:
        raise NotEllipticError(f"symbol is not M-elliptic beyond R1={R1}")
    box = sigma.box
    kernel = materialize(sigma).kernel
    lam_m = sigma.weight.on_box(box).ravel() ** sigma.order
    probes = np.concatenate([_random_functions(box, samples, seed), np.eye(box.size)])
    Tu = probes @ kernel.T
    num = np.linalg.norm(Tu, axis=1) + np.linalg.norm(probes, axis=1)
    den = np.linalg.norm(probes * lam_m, axis=1)
    ratios = num / den
    return float(ratios.min()), float(ratios.max())


def scale_boundedness_probe(sigmas: Sequence[SymbolGrid], s: float) -> tuple[dict, bool]:
    """Norm of ``Lambda(D)^s T_sigma Lambda(D)^{-s-m}`` per box size and whether it is stable."""
    if isinstance(sigmas, SymbolGrid):
        sigmas = [sigmas]
    norms = {}
    for sigma in sorted(sigmas, key=lambda v: v.box.K):
        lam = sigma.weight.on_box(sigma.box).ravel()
        kernel = materialize(sigma).kernel
        conj = (lam**s)[:, None] * kernel * (lam ** (-s - sigma.order))[None, :]
        norms[sigma.box.K] = float(np.linalg.norm(conj, 2))
    values = list(norms.values())
    stable = all(b <= (1 + STABILITY_GROWTH) * a + 1e-12 for a, b in zip(values, values[1:]))
    return norms, stable


def compactness_probe(sigma: SymbolGrid, cutoffs: Sequence[float] | None = None) -> dict:
    """Operator norms of the tail ``T - chi_{|k| <= k1} T`` for ``k1 = K/8, K/4, K/2``.

    ``chi`` is the sharp indicator of ``|k|_inf <= k1`` acting on the output
    index, so the tail keeps the rows with ``|k|_inf > k1``.
    """
    box = sigma.box
    if cutoffs is None:
        cutoffs = (box.K // 8, box.K // 4, box.K // 2)
    kernel = materialize(sigma).kernel
    sup = box.sup_norm().ravel()
    out = {}
    for k1 in cutoffs:
        rows = sup > k1
        out[int(k1)] = float(np.linalg.norm(kernel[rows], 2)) if rows.any() else 0.0
    return out
