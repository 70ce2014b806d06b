"""Kernels of lattice pseudo-difference operators and their symbolic calculus.

On the box the operator with symbol ``sigma`` is the matrix

    K(k, l) = M^-n sum_j exp(2 pi i (k - l).x_j) sigma(k, x_j),

i.e. row ``k`` holds the partial Fourier coefficient of ``sigma(k, .)`` at
frequency ``l - k`` (wrapped into {-K..K}).  Exact composed, adjoint and
transposed symbols are read back off kernel products, and serve as oracles
for the asymptotic expansions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .lattice import LatticeBox, LatticeFunction, dft, multi_indices
from .symbols import (
    NotEllipticError,
    SymbolGrid,
    _check_nonvanishing,
    delta_k_symbol,
    dx_falling_derivative,
    fit_decay_slope,
    m_ellipticity,
    sup_over_x,
)
from .weights import STABILITY_GROWTH

__all__ = [
    "OperatorMatrix",
    "CalculusResult",
    "ParametrixResult",
    "materialize",
    "kernel_symbol",
    "apply",
    "compose_exact",
    "compose_partial",
    "compose_asymptotic",
    "adjoint_exact",
    "adjoint_asymptotic",
    "transpose_exact",
    "transpose_asymptotic",
    "toroidal_duality_check",
    "parametrix",
    "boundedness_probe",
    "restricted_norm",
]


@lru_cache(maxsize=32)
def _frequency_index(box: LatticeBox) -> np.ndarray:
    """``idx[a, b]`` = flat coefficient index of the frequency ``l_b - k_a`` (wrapped)."""
    pts = box.points()
    diff = box.wrap(pts[None, :, :] - pts[:, None, :]) + box.K
    idx = np.ravel_multi_index(tuple(np.moveaxis(diff, -1, 0)), box.shape)
    idx.setflags(write=False)
    return idx


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Materialized kernel ``K(k, l)`` on the flattened (row-major) window."""

    box: LatticeBox
    kernel: np.ndarray
    provenance: str = ""

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.box, self.kernel @ other.kernel, f"({self.provenance})@({other.provenance})")

    def apply(self, f: LatticeFunction) -> LatticeFunction:
        return LatticeFunction(self.box, (self.kernel @ f.values.ravel()).reshape(self.box.shape))

    def norm(self) -> float:
        return float(np.linalg.norm(self.kernel, 2))


def materialize(sigma: SymbolGrid) -> OperatorMatrix:
    box = sigma.box
    N = box.size
    coef = sigma.coefficients().reshape(N, N)
    kernel = coef[np.arange(N)[:, None], _frequency_index(box)]
    return OperatorMatrix(box, kernel, sigma.label or f"symbol of order {sigma.order:g}")


def kernel_symbol(kernel, like: SymbolGrid, order: float | None = None, label: str = "") -> SymbolGrid:
    """Inverse of :func:`materialize`: the symbol whose kernel is ``kernel``."""
    if isinstance(kernel, OperatorMatrix):
        kernel = kernel.kernel
    box = like.box
    N = box.size
    coef = np.empty((N, N), dtype=complex)
    coef[np.arange(N)[:, None], _frequency_index(box)] = kernel
    return SymbolGrid.from_coefficients(
        box,
        like.weight,
        coef.reshape(box.shape * 2),
        like.order if order is None else order,
        like.rho,
        label,
    )


def apply(sigma: SymbolGrid, f: LatticeFunction) -> LatticeFunction:
    """``T f(k) = M^-n sum_j exp(2 pi i k.x_j) sigma(k, x_j) f^(x_j)`` by quadrature."""
    if f.box != sigma.box:
        raise ValueError("function and symbol live on different boxes")
    box = sigma.box
    n = box.n
    k = box.k_grid().reshape((n,) + box.shape + (1,) * n)
    x = box.x_grid().reshape((n,) + (1,) * n + box.shape)
    phase = np.exp(2j * np.pi * (k * x).sum(axis=0))
    fhat = dft(f).values.reshape((1,) * n + box.shape)
    out = (phase * sigma.values * fhat).sum(axis=sigma.x_axes) / box.size
    return LatticeFunction(box, out)


def compose_exact(sigma: SymbolGrid, tau: SymbolGrid) -> SymbolGrid:
    """Symbol of ``T_sigma T_tau`` read off the kernel product."""
    sigma._check_compatible(tau)
    prod = materialize(sigma).kernel @ materialize(tau).kernel
    return kernel_symbol(prod, sigma, sigma.order + tau.order, "compose")


def adjoint_exact(sigma: SymbolGrid) -> SymbolGrid:
    return kernel_symbol(materialize(sigma).kernel.conj().T, sigma, label="adjoint")


def transpose_exact(sigma: SymbolGrid) -> SymbolGrid:
    return kernel_symbol(materialize(sigma).kernel.T, sigma, label="transpose")


def _alpha_factorial(alpha) -> int:
    return math.prod(math.factorial(a) for a in alpha)


def _graded_terms(n: int, N: int):
    """Multi-indices grouped by order ``0..N-1``."""
    by_order = {j: [] for j in range(N)}
    for alpha in multi_indices(n, N - 1):
        by_order[sum(alpha)].append(alpha)
    return by_order


def compose_partial(sigma: SymbolGrid, tau: SymbolGrid, N: int) -> SymbolGrid:
    """``sum_{|a|<N} (1/a!) D_x^(a) sigma * Delta_k^a tau``, declared order ``m1 + m2``."""
    sigma._check_compatible(tau)
    total = np.zeros_like(sigma.values)
    for alpha in multi_indices(sigma.n, N - 1):
        d_sigma = dx_falling_derivative(sigma, alpha).values
        if not np.any(d_sigma):
            continue
        total = total + d_sigma * delta_k_symbol(tau, alpha).values / _alpha_factorial(alpha)
    return sigma.replace(values=total, order=sigma.order + tau.order, label="")


def _adjoint_like_partial(base: SymbolGrid, N: int) -> np.ndarray:
    total = np.zeros_like(base.values)
    for alpha in multi_indices(base.n, N - 1):
        term = delta_k_symbol(dx_falling_derivative(base, alpha), alpha).values
        total = total + term / _alpha_factorial(alpha)
    return total


@dataclass
class CalculusResult:
    """Exact symbol, partial sums of its expansion, and remainder decay fits."""

    exact: SymbolGrid
    partial_sums: dict
    remainders: dict
    slopes: dict
    predicted: dict
    floor: float

    @property
    def depth(self) -> int:
        return max(self.partial_sums)

    @property
    def partial(self) -> SymbolGrid:
        return self.partial_sums[self.depth]

    def interior_error(self, N: int | None = None) -> float:
        """Max interior |exact - partial sum| at depth ``N``."""
        N = self.depth if N is None else N
        box = self.exact.box
        mask = box.interior_mask()
        return float(sup_over_x(self.remainders[N], box.n)[mask].max())

    def slopes_ok(self, tolerance: float = 0.3) -> bool:
        return all(self.slopes[N] <= self.predicted[N] + tolerance for N in self.slopes)

    def to_dict(self) -> dict:
        return {
            "depths": sorted(self.partial_sums),
            "slopes": {str(N): _finite_or_str(s) for N, s in self.slopes.items()},
            "predicted_slopes": {str(N): p for N, p in self.predicted.items()},
            "interior_errors": {str(N): self.interior_error(N) for N in self.partial_sums},
            "exact_floor": self.floor,
        }


def _finite_or_str(v: float):
    return v if np.isfinite(v) else ("-inf" if v < 0 else "inf")


def _calculus_result(exact: SymbolGrid, partials: dict, order: float, rho: float) -> CalculusResult:
    box = exact.box
    mask = box.interior_mask()
    scale = float(sup_over_x(exact.values, box.n)[mask].max())
    floor = 1e-12 * max(1.0, scale)
    remainders, slopes, predicted = {}, {}, {}
    for N, part in partials.items():
        rem = exact.values - part.values
        remainders[N] = rem
        slopes[N] = fit_decay_slope(rem, box, exact.weight, floor=floor)
        predicted[N] = order - rho * N
    return CalculusResult(exact, partials, remainders, slopes, predicted, floor)


def compose_asymptotic(sigma: SymbolGrid, tau: SymbolGrid, N: int) -> CalculusResult:
    if not 1 <= N <= 6:
        raise ValueError("expansion depth must lie in 1..6")
    exact = compose_exact(sigma, tau)
    partials = {j: compose_partial(sigma, tau, j) for j in range(1, N + 1)}
    return _calculus_result(exact, partials, sigma.order + tau.order, min(sigma.rho, tau.rho))


def adjoint_asymptotic(sigma: SymbolGrid, N: int) -> CalculusResult:
    """Expansion ``sum (1/a!) Delta_k^a D_x^(a) conj(sigma)`` against :func:`adjoint_exact`."""
    if not 1 <= N <= 6:
        raise ValueError("expansion depth must lie in 1..6")
    base = sigma.conj()
    partials = {j: sigma.replace(values=_adjoint_like_partial(base, j), label="") for j in range(1, N + 1)}
    return _calculus_result(adjoint_exact(sigma), partials, sigma.order, sigma.rho)


def transpose_asymptotic(sigma: SymbolGrid, N: int) -> CalculusResult:
    """Expansion ``sum (1/a!) Delta_k^a D_x^(a) sigma(k, -x)`` against :func:`transpose_exact`."""
    if not 1 <= N <= 6:
        raise ValueError("expansion depth must lie in 1..6")
    base = sigma.reflect_x()
    partials = {j: sigma.replace(values=_adjoint_like_partial(base, j), label="") for j in range(1, N + 1)}
    return _calculus_result(transpose_exact(sigma), partials, sigma.order, sigma.rho)


def toroidal_duality_check(sigma: SymbolGrid) -> float:
    """Max-entry distance between ``K_sigma`` and ``F^-1 (T_tau)^* F``.

    ``T_tau`` is the toroidal operator with symbol ``tau(x, k) = conj sigma(-k, x)``,
    ``(T_tau u)(x) = sum_k exp(2 pi i k.x) tau(x, k) u^(k)``, realized on the
    frequency grid; ``F`` is the lattice-to-grid Fourier matrix.
    """
    box = sigma.box
    N = box.size
    pts = box.points()
    xs = box.x_grid().reshape(box.n, -1).T
    E = np.exp(2j * np.pi * xs @ pts.T)  # E[j, k] = exp(2 pi i k.x_j)
    flat = sigma.values.reshape(N, N)  # [k, j]
    # row-major flattening of a symmetric window sends -k to N - 1 - idx(k)
    tau = np.conj(flat[::-1, :]).T  # tau[j, k] = conj sigma(-k, x_j)
    toroidal = (E * tau) @ E.conj().T / N
    F = E.conj()
    F_inv = E.T / N
    dual = F_inv @ toroidal.conj().T @ F
    return float(np.abs(dual - materialize(sigma).kernel).max())


def restricted_norm(kernel: np.ndarray, box: LatticeBox, k_min: float) -> float:
    """Operator norm of ``P K P`` where ``P`` projects onto modes with ``|k|_inf >= k_min``."""
    keep = box.sup_norm().ravel() >= k_min
    if not keep.any():
        return 0.0
    return float(np.linalg.norm(kernel[np.ix_(keep, keep)], 2))


@dataclass
class ParametrixResult:
    sigma: SymbolGrid
    reciprocal: SymbolGrid
    tau: SymbolGrid
    depth: int
    left_remainder: np.ndarray
    right_remainder: np.ndarray
    left_symbol: SymbolGrid
    right_symbol: SymbolGrid
    expansion_remainder: SymbolGrid
    slopes: dict = field(default_factory=dict)
    predicted_slope: float = 0.0

    def slopes_ok(self, tolerance: float = 0.3) -> bool:
        return all(s <= self.predicted_slope + tolerance for s in self.slopes.values())

    def tail_norms(self, k_min: float | None = None) -> dict:
        box = self.sigma.box
        k_min = box.K / 2 if k_min is None else k_min
        return {
            "left": restricted_norm(self.left_remainder, box, k_min),
            "right": restricted_norm(self.right_remainder, box, k_min),
        }

    def to_dict(self) -> dict:
        box = self.sigma.box
        mask = box.interior_mask()
        return {
            "K": box.K,
            "depth": self.depth,
            "tau_order": self.tau.order,
            "slopes": {key: _finite_or_str(v) for key, v in self.slopes.items()},
            "predicted_slope": self.predicted_slope,
            "interior_sup": {
                "left": float(sup_over_x(self.left_symbol.values, box.n)[mask].max()),
                "right": float(sup_over_x(self.right_symbol.values, box.n)[mask].max()),
                "expansion": float(sup_over_x(self.expansion_remainder.values, box.n)[mask].max()),
            },
            "tail_norms": self.tail_norms(),
            "full_norms": {
                "left": float(np.linalg.norm(self.left_remainder, 2)),
                "right": float(np.linalg.norm(self.right_remainder, 2)),
            },
        }


def parametrix(sigma: SymbolGrid, N: int = 3, R1: float = 0.0) -> ParametrixResult:
    """Parametrix of an M-elliptic symbol via the truncated Neumann series.

    ``sigma0 = 1/sigma``; ``r = 1 - (sigma0 o sigma)_N``; ``tau = (sum_{j<N} r^j)_N o sigma0``
    with every composition truncated at depth ``N``.  The remainders
    ``T_tau T_sigma - I`` and ``T_sigma T_tau - I`` are formed exactly from kernels.
    """
    _, elliptic = m_ellipticity(sigma, R1)
    if not elliptic:
        raise NotEllipticError(f"symbol is not M-elliptic beyond R1={R1}")
    _check_nonvanishing(sigma)
    box = sigma.box

    sigma0 = sigma.replace(values=1.0 / sigma.values, order=-sigma.order, label="reciprocal")
    one = sigma.replace(values=np.ones_like(sigma.values), order=0.0, label="one")
    r = (one - compose_partial(sigma0, sigma, N)).with_order(-sigma.rho)
    power = one
    neumann = one
    for _ in range(1, N):
        power = compose_partial(power, r, N)
        neumann = (neumann + power).with_order(0.0)
    tau = compose_partial(neumann, sigma0, N).replace(order=-sigma.order, label="parametrix")

    K_sigma = materialize(sigma).kernel
    K_tau = materialize(tau).kernel
    eye = np.eye(box.size)
    left = K_tau @ K_sigma - eye
    right = K_sigma @ K_tau - eye
    predicted = -sigma.rho * N
    left_sym = kernel_symbol(left, sigma, predicted, "tau o sigma - 1")
    right_sym = kernel_symbol(right, sigma, predicted, "sigma o tau - 1")
    expansion = (compose_partial(tau, sigma, N) - one).with_order(predicted)

    floor = 1e-12
    slopes = {
        "left": fit_decay_slope(left_sym.values, box, sigma.weight, floor=floor),
        "right": fit_decay_slope(right_sym.values, box, sigma.weight, floor=floor),
    }
    return ParametrixResult(
        sigma, sigma0, tau, N, left, right, left_sym, right_sym, expansion, slopes, predicted
    )


def boundedness_probe(sigmas: Sequence[SymbolGrid]) -> tuple[dict, bool]:
    """Largest singular value of the kernel per box size and whether it stays bounded.

    Bounded means growth of at most 5 % between consecutive sizes.
    """
    if isinstance(sigmas, SymbolGrid):
        sigmas = [sigmas]
    sigmas = sorted(sigmas, key=lambda s: s.box.K)
    norms = {}
    for s in sigmas:
        if s.order != 0:
            raise ValueError(f"boundedness probe needs an order-0 symbol, got order {s.order:g}")
        norms[s.box.K] = materialize(s).norm()
    values = list(norms.values())
    stable = all(b <= (1 + STABILITY_GROWTH) * a + 1e-12 for a, b in zip(values, values[1:]))
    return norms, stable
