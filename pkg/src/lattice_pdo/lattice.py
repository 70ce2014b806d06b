"""Truncated periodic lattice, lattice/torus functions and difference calculus.

The lattice Z^n is realized as the window {-K, ..., K}^n with periodic
wrap-around, i.e. the discrete torus Z_M^n with M = 2K + 1.  The dual torus
T^n is sampled on the grid {j/M : j = 0, ..., M-1}^n.  Array axes are always
ordered so that array index ``i`` on a lattice axis stands for ``k = i - K``
and array index ``j`` on a frequency axis stands for ``x = j / M``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "LatticeBox",
    "LatticeFunction",
    "TorusFunction",
    "as_multi_index",
    "multi_indices",
    "dft",
    "idft",
    "difference",
    "difference_array",
    "shift_array",
    "falling_factorial",
    "falling_factorial_array",
    "binomial_difference",
]


@dataclass(frozen=True)
class LatticeBox:
    """Geometry of the window {-K..K}^n and its frequency grid."""

    n: int
    K: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.n}")
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"half-width must be a positive integer, got {self.K}")

    @property
    def M(self) -> int:
        return 2 * self.K + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.M,) * self.n

    @property
    def size(self) -> int:
        return self.M**self.n

    @property
    def axis_points(self) -> np.ndarray:
        return np.arange(-self.K, self.K + 1)

    @property
    def axis_frequencies(self) -> np.ndarray:
        return np.arange(self.M) / self.M

    def k_grid(self) -> np.ndarray:
        """Integer coordinates, shape ``(n, M, ..., M)``."""
        return np.array(np.meshgrid(*([self.axis_points] * self.n), indexing="ij"))

    def x_grid(self) -> np.ndarray:
        """Frequency coordinates, shape ``(n, M, ..., M)``."""
        return np.array(np.meshgrid(*([self.axis_frequencies] * self.n), indexing="ij"))

    def points(self) -> np.ndarray:
        """All lattice points in row-major order, shape ``(M**n, n)``."""
        return self.k_grid().reshape(self.n, -1).T

    def sup_norm(self) -> np.ndarray:
        """``|k|_inf`` on the window, shape ``(M,)*n``."""
        return np.abs(self.k_grid()).max(axis=0)

    def euclidean_norm(self) -> np.ndarray:
        return np.sqrt((self.k_grid().astype(float) ** 2).sum(axis=0))

    def interior_mask(self) -> np.ndarray:
        """Points with ``|k|_inf <= K/2``, away from the wrap seam."""
        return self.sup_norm() <= self.K // 2

    def wrap(self, k: np.ndarray) -> np.ndarray:
        """Map integer coordinates into {-K..K} modulo M."""
        return (np.asarray(k) + self.K) % self.M - self.K

    def index_of(self, k: Sequence[int]) -> tuple[int, ...]:
        """Array index of lattice point ``k`` (wrapped)."""
        return tuple(int(v) for v in self.wrap(np.asarray(k)) + self.K)


@dataclass(frozen=True)
class LatticeFunction:
    """A complex function on the lattice window."""

    box: LatticeBox
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.box.shape:
            raise ValueError(f"values shape {values.shape} does not match box {self.box.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def at(self, k: Sequence[int]) -> complex:
        return complex(self.values[self.box.index_of(k)])

    @classmethod
    def from_callable(cls, box: LatticeBox, func) -> "LatticeFunction":
        """``func(k_1, ..., k_n)`` on coordinate arrays; scalar results are broadcast."""
        return cls(box, np.broadcast_to(func(*box.k_grid()), box.shape))

    @classmethod
    def delta(cls, box: LatticeBox, k: Sequence[int] | None = None) -> "LatticeFunction":
        values = np.zeros(box.shape, dtype=complex)
        values[box.index_of(k if k is not None else [0] * box.n)] = 1.0
        return cls(box, values)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values.ravel()))


@dataclass(frozen=True)
class TorusFunction:
    """A complex function sampled on the frequency grid."""

    box: LatticeBox
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.box.shape:
            raise ValueError(f"values shape {values.shape} does not match box {self.box.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, box: LatticeBox, func) -> "TorusFunction":
        return cls(box, np.broadcast_to(func(*box.x_grid()), box.shape))


def as_multi_index(alpha, n: int) -> tuple[int, ...]:
    """Normalize an int or sequence to a length-``n`` tuple of nonnegative ints."""
    if np.isscalar(alpha):
        alpha = (int(alpha),) if n == 1 else None
        if alpha is None:
            raise ValueError("scalar multi-index only allowed when n == 1")
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != n:
        raise ValueError(f"multi-index {alpha} has length {len(alpha)}, expected {n}")
    if any(a < 0 for a in alpha):
        raise ValueError(f"multi-index {alpha} has negative entries")
    return alpha


def multi_indices(n: int, max_order: int, *, binary: bool = False) -> Iterator[tuple[int, ...]]:
    """All multi-indices of length ``n`` with ``|alpha| <= max_order``.

    With ``binary=True`` the entries are restricted to {0, 1}.
    """
    top = 1 if binary else max_order
    for alpha in itertools.product(range(top + 1), repeat=n):
        if sum(alpha) <= max_order:
            yield alpha


def dft(f: LatticeFunction) -> TorusFunction:
    """``f^(x_j) = sum_k exp(-2 pi i k.x_j) f(k)`` on the frequency grid."""
    # ifftshift puts k = 0 at array index 0; then index p stands for k = p mod M
    return TorusFunction(f.box, np.fft.fftn(np.fft.ifftshift(f.values)))


def idft(g: TorusFunction) -> LatticeFunction:
    """Inverse of :func:`dft`: ``f(k) = M^-n sum_j exp(2 pi i k.x_j) g(x_j)``."""
    return LatticeFunction(g.box, np.fft.fftshift(np.fft.ifftn(g.values)))


def shift_array(values: np.ndarray, offset: Sequence[int], axes: Sequence[int]) -> np.ndarray:
    """Periodic shift ``v(k) -> v(k + offset)`` along the given lattice axes."""
    out = values
    for off, ax in zip(offset, axes):
        if off:
            out = np.roll(out, -int(off), axis=ax)
    return out


def difference_array(
    values: np.ndarray,
    alpha: Sequence[int],
    axes: Sequence[int] | None = None,
    direction: str = "forward",
) -> np.ndarray:
    """Iterated periodic differences of an array along lattice axes.

    ``forward`` is ``f(k + e_j) - f(k)``, ``backward`` is ``f(k) - f(k - e_j)``.
    """
    if axes is None:
        axes = tuple(range(len(alpha)))
    if direction not in ("forward", "backward"):
        raise ValueError(f"unknown difference direction {direction!r}")
    step = -1 if direction == "forward" else 1
    out = np.asarray(values)
    for a, ax in zip(alpha, axes):
        for _ in range(a):
            if direction == "forward":
                out = np.roll(out, step, axis=ax) - out
            else:
                out = out - np.roll(out, step, axis=ax)
    return out


def difference(f: LatticeFunction, alpha, direction: str = "forward") -> LatticeFunction:
    """``Delta_k^alpha f`` (or the backward variant) with periodic wrap."""
    alpha = as_multi_index(alpha, f.box.n)
    return LatticeFunction(f.box, difference_array(f.values, alpha, direction=direction))


def binomial_difference(f: LatticeFunction, alpha) -> LatticeFunction:
    """Forward difference through the expansion ``sum_b (-1)^|a-b| C(a,b) f(k+b)``."""
    alpha = as_multi_index(alpha, f.box.n)
    axes = tuple(range(f.box.n))
    out = np.zeros_like(f.values)
    for beta in itertools.product(*(range(a + 1) for a in alpha)):
        coeff = 1
        for a, b in zip(alpha, beta):
            coeff *= (-1) ** (a - b) * comb(a, b)
        out = out + coeff * shift_array(f.values, beta, axes)
    return LatticeFunction(f.box, out)


def falling_factorial(k, alpha) -> int:
    """``k^(alpha) = prod_j k_j (k_j - 1) ... (k_j - alpha_j + 1)``."""
    k = np.atleast_1d(np.asarray(k, dtype=np.int64))
    alpha = as_multi_index(alpha, k.size)
    out = 1
    for kj, aj in zip(k.tolist(), alpha):
        for i in range(aj):
            out *= kj - i
    return out


def falling_factorial_array(values: np.ndarray, order: int) -> np.ndarray:
    """Elementwise one-axis falling factorial ``v (v-1) ... (v-order+1)``."""
    values = np.asarray(values)
    out = np.ones(values.shape, dtype=values.dtype if values.dtype.kind == "f" else np.int64)
    for i in range(order):
        out = out * (values - i)
    return out
