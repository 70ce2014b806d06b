"""Shared builders for the test suite."""

import numpy as np

from lattice_pdo.lattice import LatticeBox
from lattice_pdo.symbols import SymbolGrid
from lattice_pdo.weights import make_standard_weight

LAMBDA1 = make_standard_weight(1)


def random_trig_symbol(box: LatticeBox, rng, degree: int = 2, order: float = 0.0, weight=LAMBDA1) -> SymbolGrid:
    """``sum_{|c|_inf <= degree} a_c(k) exp(2 pi i c.x)`` with random complex ``a_c``."""
    n = box.n
    x = box.x_grid().reshape((n,) + (1,) * n + box.shape)
    values = np.zeros(box.shape * 2, dtype=complex)
    for c in np.ndindex(*([2 * degree + 1] * n)):
        c = np.array(c) - degree
        amp = rng.standard_normal(box.shape) + 1j * rng.standard_normal(box.shape)
        phase = np.exp(2j * np.pi * np.tensordot(c, x, axes=(0, 0)))
        values = values + amp.reshape(box.shape + (1,) * n) * phase
    return SymbolGrid(box, weight, values, order, 1.0, "random")


def from_func(box, func, order, weight=LAMBDA1, rho=1.0, label=""):
    return SymbolGrid.from_function(box, weight, func, order, rho, label)


def running(box, weight=LAMBDA1):
    """``Lambda_1 + exp(2 pi i x_1) / 2``."""
    return from_func(box, lambda k, x: weight(k) + 0.5 * np.exp(2j * np.pi * x[0]), 1.0, weight, label="running")
