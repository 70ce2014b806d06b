"""Sampled symbols sigma(k, x) and their class/ellipticity diagnostics.

A :class:`SymbolGrid` stores ``sigma`` on the lattice window times the
frequency grid as an array of shape ``(M,)*n + (M,)*n``: the first ``n``
axes are lattice coordinates, the last ``n`` are frequency-grid coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .lattice import (
    LatticeBox,
    as_multi_index,
    difference_array,
    falling_factorial_array,
    multi_indices,
    shift_array,
)
from .weights import STABILITY_GROWTH, WeightFunction

__all__ = [
    "SymbolGrid",
    "PartialFourierSymbol",
    "ClassReport",
    "QuotientTable",
    "AsymptoticSumPlan",
    "SymbolZeroError",
    "NotEllipticError",
    "dx_falling_derivative",
    "delta_k_symbol",
    "seminorm_profile",
    "class_report",
    "m_ellipticity",
    "quotient_symbol",
    "cutoff_profile",
    "asymptotic_sum",
    "sup_over_x",
    "fit_decay_slope",
    "ELLIPTICITY_FLOOR",
]

ELLIPTICITY_FLOOR = 1e-9
SEMINORM_NOISE = 1e-7


class SymbolZeroError(ValueError):
    """A symbol used as a denominator vanishes at a grid point."""

    def __init__(self, k, x, label=""):
        self.k = tuple(int(v) for v in k)
        self.x = tuple(float(v) for v in x)
        super().__init__(f"symbol {label or ''} vanishes at k={self.k}, x={self.x}".replace("  ", " "))


class NotEllipticError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SymbolGrid:
    """A symbol sampled on lattice window x frequency grid, with declared order."""

    box: LatticeBox
    weight: WeightFunction
    values: np.ndarray
    order: float
    rho: float = 1.0
    label: str = ""

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if values.shape != self.box.shape * 2:
            raise ValueError(f"symbol values have shape {values.shape}, expected {self.box.shape * 2}")
        if not 0 < self.rho <= 1.0 / self.weight.mu + 1e-12:
            raise ValueError(f"rho={self.rho} must lie in (0, 1/mu] = (0, {1.0 / self.weight.mu:g}]")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "order", float(self.order))

    # construction -------------------------------------------------------

    @classmethod
    def from_function(
        cls,
        box: LatticeBox,
        weight: WeightFunction,
        func: Callable[[np.ndarray, np.ndarray], np.ndarray],
        order: float,
        rho: float = 1.0,
        label: str = "",
    ) -> "SymbolGrid":
        """Sample ``func(k, x)``; ``k`` and ``x`` have shape ``(n, ...)`` and broadcast."""
        k, x = symbol_coordinates(box)
        values = np.broadcast_to(func(k, x), box.shape * 2)
        return cls(box, weight, values, order, rho, label)

    @classmethod
    def from_coefficients(cls, box, weight, coefficients, order, rho=1.0, label="") -> "SymbolGrid":
        return cls(box, weight, PartialFourierSymbol(box, coefficients).sample(), order, rho, label)

    def replace(self, **changes) -> "SymbolGrid":
        kwargs = dict(
            box=self.box,
            weight=self.weight,
            values=self.values,
            order=self.order,
            rho=self.rho,
            label=self.label,
        )
        kwargs.update(changes)
        return SymbolGrid(**kwargs)

    # geometry helpers ---------------------------------------------------

    @property
    def n(self) -> int:
        return self.box.n

    @property
    def k_axes(self) -> tuple[int, ...]:
        return tuple(range(self.n))

    @property
    def x_axes(self) -> tuple[int, ...]:
        return tuple(range(self.n, 2 * self.n))

    def weight_values(self) -> np.ndarray:
        """``Lambda(k)`` broadcastable against :attr:`values`."""
        return self.weight.on_box(self.box).reshape(self.box.shape + (1,) * self.n)

    def coefficients(self) -> np.ndarray:
        """Partial Fourier coefficients in x, frequency axes ordered -K..K."""
        return PartialFourierSymbol.from_values(self.box, self.values).coefficients

    def partial_fourier(self) -> "PartialFourierSymbol":
        return PartialFourierSymbol.from_values(self.box, self.values)

    def at(self, k: Sequence[int]) -> np.ndarray:
        """The x-profile ``sigma(k, .)`` at lattice point ``k``."""
        return self.values[self.box.index_of(k)]

    # pointwise algebra --------------------------------------------------

    def _check_compatible(self, other: "SymbolGrid"):
        if other.box != self.box:
            raise ValueError("symbols live on different boxes")

    def __add__(self, other):
        if isinstance(other, SymbolGrid):
            self._check_compatible(other)
            return self.replace(values=self.values + other.values, order=max(self.order, other.order), label="")
        return self.replace(values=self.values + other, order=max(self.order, 0.0), label="")

    __radd__ = __add__

    def __neg__(self):
        return self.replace(values=-self.values)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, SymbolGrid):
            self._check_compatible(other)
            return self.replace(values=self.values * other.values, order=self.order + other.order, label="")
        return self.replace(values=self.values * other, label="")

    __rmul__ = __mul__

    def conj(self) -> "SymbolGrid":
        return self.replace(values=np.conj(self.values))

    def reflect_x(self) -> "SymbolGrid":
        """``sigma(k, -x)`` on the grid (index j -> -j mod M on every x axis)."""
        vals = self.values
        for ax in self.x_axes:
            vals = np.roll(np.flip(vals, axis=ax), 1, axis=ax)
        return self.replace(values=vals)

    def with_order(self, order: float) -> "SymbolGrid":
        return self.replace(order=order)


def symbol_coordinates(box: LatticeBox) -> tuple[np.ndarray, np.ndarray]:
    """``k`` and ``x`` arrays of shape ``(n,) + (M,)*n + (1,)*n`` and ``(n,) + (1,)*n + (M,)*n``."""
    n = box.n
    k = box.k_grid().reshape((n,) + box.shape + (1,) * n)
    x = box.x_grid().reshape((n,) + (1,) * n + box.shape)
    return k, x


@dataclass(frozen=True)
class PartialFourierSymbol:
    """Coefficients ``c(k, m)`` with ``sigma(k, x_j) = sum_m c(k, m) exp(2 pi i m.x_j)``."""

    box: LatticeBox
    coefficients: np.ndarray

    @classmethod
    def from_values(cls, box: LatticeBox, values: np.ndarray) -> "PartialFourierSymbol":
        x_axes = tuple(range(box.n, 2 * box.n))
        coef = np.fft.fftshift(np.fft.fftn(values, axes=x_axes, norm="forward"), axes=x_axes)
        return cls(box, coef)

    def sample(self) -> np.ndarray:
        x_axes = tuple(range(self.box.n, 2 * self.box.n))
        return np.fft.ifftn(np.fft.ifftshift(self.coefficients, axes=x_axes), axes=x_axes, norm="forward")


def _falling_multiplier(box: LatticeBox, beta: Sequence[int]) -> np.ndarray:
    """``m^(beta)`` on the coefficient axes, broadcast shape ``(1,)*n + (M,)*n``."""
    n = box.n
    mult = np.ones((1,) * n + box.shape)
    m = box.axis_points
    for j, b in enumerate(beta):
        if b:
            shape = [1] * (2 * n)
            shape[n + j] = box.M
            mult = mult * falling_factorial_array(m.astype(float), b).reshape(shape)
    return mult


def _apply_dx(box: LatticeBox, coef: np.ndarray, beta: Sequence[int]) -> np.ndarray:
    if not any(beta):
        return coef
    return coef * _falling_multiplier(box, beta)


def dx_falling_derivative(sigma: SymbolGrid, beta) -> SymbolGrid:
    """``D_x^(beta) sigma``: multiply each x-mode ``m`` by the falling factorial ``m^(beta)``.

    ``D_x^(l)`` has exactly ``l`` factors ``(2 pi i)^-1 d/dx - j`` for
    ``j = 0..l-1``, so ``exp(2 pi i m x)`` is an eigenfunction with eigenvalue
    ``m (m-1) ... (m-l+1)``.
    """
    beta = as_multi_index(beta, sigma.n)
    coef = _apply_dx(sigma.box, sigma.coefficients(), beta)
    return SymbolGrid.from_coefficients(sigma.box, sigma.weight, coef, sigma.order, sigma.rho)


def _k_power(box: LatticeBox, gamma: Sequence[int], extra_axes: int) -> np.ndarray:
    k = box.k_grid()
    out = np.ones(box.shape)
    for j, g in enumerate(gamma):
        if g:
            out = out * k[j] ** g
    return out.reshape(box.shape + (1,) * extra_axes)


def delta_k_symbol(sigma: SymbolGrid, alpha, gamma=None) -> SymbolGrid:
    """``k^gamma Delta_k^{alpha+gamma} sigma`` with periodic differences.

    ``gamma`` must lie in {0,1}^n.  Values near the wrap seam are polluted by
    periodicity; restrict to ``box.interior_mask()`` when measuring.
    """
    n = sigma.n
    alpha = as_multi_index(alpha, n)
    gamma = as_multi_index(gamma if gamma is not None else (0,) * n, n)
    if any(g > 1 for g in gamma):
        raise ValueError(f"gamma must lie in {{0,1}}^n, got {gamma}")
    total = tuple(a + g for a, g in zip(alpha, gamma))
    vals = difference_array(sigma.values, total, axes=sigma.k_axes)
    vals = vals * _k_power(sigma.box, gamma, n)
    return sigma.replace(values=vals, order=sigma.order - sigma.rho * sum(alpha), label="")


def sup_over_x(values: np.ndarray, n: int) -> np.ndarray:
    """``sup_x |v(k, x)|`` for an array with n lattice and n frequency axes."""
    return np.abs(values).max(axis=tuple(range(n, 2 * n)))


def _seam_free(box: LatticeBox, order: Sequence[int]) -> np.ndarray:
    """Lattice points whose forward differences of the given order do not wrap."""
    k = box.k_grid()
    mask = np.ones(box.shape, dtype=bool)
    for j, d in enumerate(order):
        mask &= k[j] + d <= box.K
    return mask


def _combo_key(alpha, beta, gamma) -> str:
    return "|".join(",".join(map(str, t)) for t in (alpha, beta, gamma))


def seminorm_profile(sigma: SymbolGrid, alpha, beta, gamma) -> tuple[np.ndarray, np.ndarray]:
    """Return ``C(k) = sup_x |k^gamma D_x^(beta) Delta_k^{alpha+gamma} sigma| / Lambda^{m - rho|alpha|}``.

    The second array is the mask of lattice points where the periodic
    differences involved do not cross the wrap seam.
    """
    n = sigma.n
    box = sigma.box
    total = tuple(a + g for a, g in zip(alpha, gamma))
    coef = difference_array(sigma.coefficients(), total, axes=sigma.k_axes)
    coef = _apply_dx(box, coef, beta) * _k_power(box, gamma, n)
    vals = PartialFourierSymbol(box, coef).sample()
    lam = sigma.weight.on_box(box)
    prof = sup_over_x(vals, n) / lam ** (sigma.order - sigma.rho * sum(alpha))
    return prof, _seam_free(box, total)


@dataclass
class ClassReport:
    """Windowed seminorm evidence for S^m, M^m and M^m_0 membership."""

    order: float
    rho: float
    n: int
    N0: float
    alpha_max: int
    beta_max: int
    box_sizes: list
    seminorms: dict
    m0_tail: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def member(self, variant: str = "M") -> bool:
        return self.verdicts.get(variant) == "member"

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "rho": self.rho,
            "n": self.n,
            "N0": self.N0,
            "alpha_max": self.alpha_max,
            "beta_max": self.beta_max,
            "box_sizes": list(self.box_sizes),
            "seminorms": self.seminorms,
            "m0_tail": self.m0_tail,
            "verdicts": self.verdicts,
            "failures": list(self.failures),
            "stability_growth": STABILITY_GROWTH,
        }


def class_report(
    sigmas: SymbolGrid | Sequence[SymbolGrid],
    alpha_max: int = 2,
    beta_max: int = 2,
    variants: Sequence[str] = ("S", "M"),
    order: float | None = None,
) -> ClassReport:
    """Measure seminorms of a symbol sampled on one or more box sizes.

    ``sigmas`` are samples of the same symbol on increasing ``K``.  Sups run
    over the interior window ``|k|_inf <= K/2``.  A class verdict is
    ``"member"`` when every seminorm is finite and grows by at most 5 %
    from one box size to the next, ``"inconclusive"`` with a single box, and
    ``"not-member"`` otherwise.  ``order`` overrides the declared order.
    """
    if isinstance(sigmas, SymbolGrid):
        sigmas = [sigmas]
    sigmas = sorted(sigmas, key=lambda s: s.box.K)
    if alpha_max > 4 or beta_max > 4:
        raise ValueError("alpha_max and beta_max are capped at 4")
    first = sigmas[0]
    n = first.n
    m = first.order if order is None else float(order)
    if order is not None:
        sigmas = [s.with_order(m) for s in sigmas]
    for s in sigmas[1:]:
        if s.n != n or s.rho != first.rho:
            raise ValueError("all samples must share dimension and rho")

    variants = tuple(variants)
    report = ClassReport(
        order=m,
        rho=first.rho,
        n=n,
        N0=n * (1.0 / first.weight.mu0 - first.rho),
        alpha_max=alpha_max,
        beta_max=beta_max,
        box_sizes=[s.box.K for s in sigmas],
        seminorms={},
    )
    gammas = list(multi_indices(n, n, binary=True))
    m0_ok = True
    for s in sigmas:
        box = s.box
        table = {}
        tails = {}
        interior = box.interior_mask()
        sup = box.sup_norm()
        for alpha in multi_indices(n, alpha_max):
            for beta in multi_indices(n, beta_max):
                for gamma in gammas:
                    prof, seam_free = seminorm_profile(s, alpha, beta, gamma)
                    key = _combo_key(alpha, beta, gamma)
                    table[key] = float(prof[interior & seam_free].max())
                    if "M0" in variants:
                        head = float(prof[sup <= box.K // 4].max())
                        tail_mask = (sup >= box.K // 2) & seam_free
                        tail = float(prof[tail_mask].max()) if tail_mask.any() else 0.0
                        tails[key] = {"head": head, "tail": tail}
                        if tail > 0.5 * head + 1e-12:
                            m0_ok = False
                            report.failures.append(
                                f"K={box.K}: M0 tail constant [{key}] {tail:.6g} exceeds half of head {head:.6g}"
                            )
        report.seminorms[str(box.K)] = table
        if tails:
            report.m0_tail[str(box.K)] = tails

    def judge(keys) -> str:
        finite = all(np.isfinite(report.seminorms[str(K)][key]) for K in report.box_sizes for key in keys)
        if not finite:
            report.failures.append("non-finite seminorm")
            return "not-member"
        if len(sigmas) < 2:
            return "inconclusive"
        ok = True
        for K1, K2 in zip(report.box_sizes, report.box_sizes[1:]):
            t1, t2 = report.seminorms[str(K1)], report.seminorms[str(K2)]
            # weighted differences of exact symbols are round-off; ignore growth below this floor
            noise = SEMINORM_NOISE * max(1.0, max(t2.values()))
            for key in keys:
                if t2[key] > (1 + STABILITY_GROWTH) * t1[key] + noise:
                    ok = False
                    msg = f"seminorm [{key}] grows from {t1[key]:.6g} (K={K1}) to {t2[key]:.6g} (K={K2})"
                    if msg not in report.failures:
                        report.failures.append(msg)
        return "member" if ok else "not-member"

    all_keys = list(report.seminorms[str(report.box_sizes[0])])
    s_keys = [key for key in all_keys if key.endswith("|" + ",".join(["0"] * n))]
    m_verdict = judge(all_keys)
    if "S" in variants:
        report.verdicts["S"] = "member" if m_verdict == "member" else judge(s_keys)
    if "M" in variants or "M0" in variants:
        report.verdicts["M"] = m_verdict
    if "M0" in variants:
        if not m0_ok:
            report.verdicts["M0"] = "not-member"
        else:
            report.verdicts["M0"] = m_verdict
    return report


def _refined_inf_abs(sigma: SymbolGrid, chunk: int = 64) -> np.ndarray:
    """``inf_x |sigma(k, x)|`` over the trigonometric interpolant on the doubled grid.

    The grid ``j / M`` has odd length and never contains ``x = 1/2``, so a
    symbol like ``1 + exp(2 pi i x)`` would look bounded away from zero.  The
    doubled grid ``j / (2M)`` contains every half-integer point.
    """
    box = sigma.box
    n = box.n
    M, K = box.M, box.K
    x_axes = tuple(range(1, n + 1))
    flat = sigma.coefficients().reshape((box.size,) + box.shape)
    out = np.empty(box.size)
    for start in range(0, box.size, chunk):
        coef = flat[start : start + chunk]
        padded = np.zeros((coef.shape[0],) + (2 * M,) * n, dtype=complex)
        padded[(slice(None),) + (slice(M - K, M + K + 1),) * n] = coef
        fine = np.fft.ifftn(np.fft.ifftshift(padded, axes=x_axes), axes=x_axes, norm="forward")
        out[start : start + chunk] = np.abs(fine).reshape(coef.shape[0], -1).min(axis=1)
    return out.reshape(box.shape)


def m_ellipticity(sigma: SymbolGrid, R1: float = 0.0, order: float | None = None) -> tuple[float, bool]:
    """``C = inf_{|k| >= R1, x} |sigma(k, x)| / Lambda(k)^m`` and whether ``C > 1e-9``.

    The infimum over ``x`` runs over the trigonometric interpolant of each row
    on a doubled grid, see :func:`_refined_inf_abs`.
    """
    if not 0 <= R1 < sigma.box.K:
        raise ValueError(f"R1={R1} must lie in [0, K={sigma.box.K})")
    m = sigma.order if order is None else order
    inf_abs = _refined_inf_abs(sigma)
    lam = sigma.weight.on_box(sigma.box)
    mask = sigma.box.euclidean_norm() >= R1
    C = float((inf_abs / lam**m)[mask].min())
    return C, C > ELLIPTICITY_FLOOR


def _check_nonvanishing(sigma: SymbolGrid, tol: float = 0.0):
    absval = np.abs(sigma.values)
    bad = absval <= tol * max(1.0, float(absval.max()))
    if bad.any():
        idx = np.argwhere(bad)[0]
        n = sigma.n
        k = idx[:n] - sigma.box.K
        x = idx[n:] / sigma.box.M
        raise SymbolZeroError(k, x, sigma.label)


@dataclass
class QuotientTable:
    """Numerator/denominator symbols with ``D_x^(b) Delta^a (s/t) = num[a,b] / den[a,b]``."""

    numerators: dict
    denominators: dict
    max_identity_error: float = 0.0

    @property
    def identity_verified(self) -> bool:
        return self.max_identity_error <= 1e-10


def _dx_values(box: LatticeBox, values: np.ndarray, axis: int) -> np.ndarray:
    """Plain ``(2 pi i)^-1 d/dx_axis`` computed spectrally on the grid."""
    beta = [0] * box.n
    beta[axis] = 1
    coef = PartialFourierSymbol.from_values(box, values).coefficients
    return PartialFourierSymbol(box, _apply_dx(box, coef, beta)).sample()


def quotient_symbol(
    sigma: SymbolGrid,
    tau: SymbolGrid,
    alpha_max: int = 1,
    beta_max: int = 1,
    R1: float = 0.0,
) -> tuple[SymbolGrid, QuotientTable]:
    """``sigma / tau`` with declared order ``m1 - m2`` and its recursion table.

    The table is generated by the quotient rules for one difference step
    and one falling-derivative step,

        s' = t Delta_j s - s Delta_j t,     t' = t * t(k + e_j)
        s' = t D_i s - s D_i t - b_i s t,   t' = t**2

    where ``b_i`` is the current derivative order on axis ``i`` (so that
    the falling factor ``D_i - b_i`` is realized).  Differences are applied
    before derivatives.  Every entry is checked against direct evaluation.
    """
    sigma._check_compatible(tau)
    _, elliptic = m_ellipticity(tau, R1)
    if not elliptic:
        raise NotEllipticError(f"denominator is not M-elliptic beyond R1={R1}")
    _check_nonvanishing(tau)

    n = sigma.n
    box = sigma.box
    quotient = sigma.replace(values=sigma.values / tau.values, order=sigma.order - tau.order, label="")

    num = {((0,) * n, (0,) * n): sigma.values}
    den = {((0,) * n, (0,) * n): tau.values}
    k_axes = tuple(range(n))
    alphas = sorted(multi_indices(n, alpha_max), key=lambda a: (sum(a), a))
    betas = sorted(multi_indices(n, beta_max), key=lambda b: (sum(b), b))
    zero = (0,) * n
    for alpha in alphas:
        if alpha != zero:
            j = max(i for i, a in enumerate(alpha) if a)
            prev = tuple(a - (i == j) for i, a in enumerate(alpha))
            s, t = num[(prev, zero)], den[(prev, zero)]
            e = [0] * n
            e[j] = 1
            ds = difference_array(s, e, axes=k_axes)
            dt = difference_array(t, e, axes=k_axes)
            num[(alpha, zero)] = t * ds - s * dt
            den[(alpha, zero)] = t * shift_array(t, e, k_axes)
        for beta in betas:
            if beta == zero:
                continue
            i = max(q for q, b in enumerate(beta) if b)
            prev = tuple(b - (q == i) for q, b in enumerate(beta))
            s, t = num[(alpha, prev)], den[(alpha, prev)]
            num[(alpha, beta)] = t * _dx_values(box, s, i) - s * _dx_values(box, t, i) - prev[i] * s * t
            den[(alpha, beta)] = t * t

    err = 0.0
    interior = box.interior_mask().reshape(box.shape + (1,) * n)
    for (alpha, beta), s in num.items():
        direct = dx_falling_derivative(delta_k_symbol(quotient, alpha), beta).values
        diff = np.abs(direct - s / den[(alpha, beta)])
        scale = max(1.0, float(np.abs(direct).max()))
        err = max(err, float(np.where(interior, diff, 0).max()) / scale)
    return quotient, QuotientTable(num, den, err)


def cutoff_profile(t) -> np.ndarray:
    """Smooth ramp: 0 for ``t <= 1/2``, 1 for ``t >= 1``."""
    t = np.asarray(t, dtype=float)

    def h(s):
        out = np.zeros_like(s)
        pos = s > 0
        out[pos] = np.exp(-1.0 / s[pos])
        return out

    a = h(2 * t - 1)
    b = h(2 - 2 * t)
    return a / (a + b)


@dataclass
class AsymptoticSumPlan:
    """Terms ``sigma_j`` of strictly decreasing order and cutoff scales ``eps_j``."""

    terms: Sequence[SymbolGrid]
    eps: Sequence[float] | None = None

    def __post_init__(self):
        if not self.terms:
            raise ValueError("at least one term is required")
        orders = [t.order for t in self.terms]
        if any(b >= a for a, b in zip(orders, orders[1:])):
            raise ValueError(f"term orders must be strictly decreasing, got {orders}")
        if self.eps is None:
            self.eps = [2.0**-j for j in range(len(self.terms))]
        eps = list(self.eps)
        if len(eps) != len(self.terms):
            raise ValueError("need one scale per term")
        if any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("scales must be positive and strictly decreasing")

    @property
    def orders(self) -> list[float]:
        return [t.order for t in self.terms]

    def cutoff(self, j: int, box: LatticeBox) -> np.ndarray:
        """``phi_j(k) = psi(eps_j |k|)`` on the box."""
        return cutoff_profile(self.eps[j] * box.euclidean_norm())


def asymptotic_sum(plan: AsymptoticSumPlan) -> SymbolGrid:
    """``sigma = sum_j phi_j(k) sigma_j(k, x)`` with declared order ``m_0``."""
    first = plan.terms[0]
    n = first.n
    total = np.zeros_like(first.values)
    for j, term in enumerate(plan.terms):
        first._check_compatible(term)
        phi = plan.cutoff(j, first.box).reshape(first.box.shape + (1,) * n)
        total = total + phi * term.values
    return first.replace(values=total, order=plan.orders[0], label="asymptotic-sum")


def fit_decay_slope(
    values: np.ndarray,
    box: LatticeBox,
    weight: WeightFunction,
    floor: float = 1e-11,
    lo: int | None = None,
    hi: int | None = None,
) -> float:
    """Least-squares slope of ``log sup_x |v(k, .)|`` against ``log Lambda(k)``.

    Fitted over ``K/8 <= |k|_inf <= K/2``.  Points at or below ``floor`` are
    treated as exact zeros and dropped; if fewer than two points remain the
    remainder is exact on the window and ``-inf`` is returned.
    """
    n = box.n
    lo = max(1, box.K // 8) if lo is None else lo
    hi = box.K // 2 if hi is None else hi
    sup = box.sup_norm()
    mask = (sup >= lo) & (sup <= hi)
    prof = sup_over_x(values, n)[mask]
    lam = weight.on_box(box)[mask]
    keep = prof > floor
    if keep.sum() < 2:
        return float("-inf")
    log_lam = np.log(lam[keep])
    if np.ptp(log_lam) == 0:
        return float("-inf")
    slope, _ = np.polyfit(log_lam, np.log(prof[keep]), 1)
    return float(slope)
