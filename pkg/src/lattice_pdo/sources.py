"""Symbol sources (expressions, builtin catalog, tabulated files) and CSV export."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .expr import SymbolExpression, evaluate, parse_symbol
from .lattice import LatticeBox
from .quantize import OperatorMatrix
from .symbols import SymbolGrid
from .weights import WeightFunction

__all__ = [
    "builtin_expression",
    "BUILTIN_IDS",
    "symbol_from_expression",
    "read_tabulated",
    "write_tabulated",
    "write_matrix_csv",
    "TabulatedFormatError",
]

BUILTIN_IDS = ("one", "lambda", "shift", "running", "running0", "inverse-lambda")


class TabulatedFormatError(ValueError):
    pass


def builtin_expression(name: str, n: int) -> str:
    """Expression text for a catalog symbol on Z^n.

    ``shift`` is ``exp(2 pi i x_1)``; ``running`` is ``Lambda + shift/2``;
    ``running0`` is ``running / Lambda``.
    """
    shift = "expi(" + ", ".join(["1"] + ["0"] * (n - 1)) + ")"
    catalog = {
        "one": "1",
        "lambda": "Lambda",
        "shift": shift,
        "running": f"Lambda + 0.5*{shift}",
        "running0": f"(Lambda + 0.5*{shift})/Lambda",
        "inverse-lambda": "pow(Lambda, -1)",
    }
    if name not in catalog:
        raise KeyError(f"unknown builtin symbol {name!r}; known: {', '.join(BUILTIN_IDS)}")
    return catalog[name]


def symbol_from_expression(
    expr: SymbolExpression | str,
    box: LatticeBox,
    weight: WeightFunction,
    order: float,
    rho: float = 1.0,
) -> SymbolGrid:
    if isinstance(expr, str):
        expr = parse_symbol(expr, box.n)
    return SymbolGrid.from_function(
        box, weight, lambda k, x: evaluate(expr, k, x, weight), order, rho, str(expr)
    )


def read_tabulated(path, weight: WeightFunction, order: float, rho: float = 1.0) -> SymbolGrid:
    """Load ``n K`` header plus ``M^n * M^n`` lines ``k_1..k_n j_1..j_n re im``."""
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise TabulatedFormatError(f"{path}: header must be 'n K'")
        n, K = int(header[0]), int(header[1])
        box = LatticeBox(n, K)
        data = np.loadtxt(fh, ndmin=2)
    expected = box.size**2
    if data.shape != (expected, 2 * n + 2):
        raise TabulatedFormatError(
            f"{path}: expected {expected} rows of {2 * n + 2} columns, got {data.shape}"
        )
    ks = data[:, :n].astype(int)
    js = data[:, n : 2 * n].astype(int)
    if np.any(np.abs(ks) > K) or np.any((js < 0) | (js >= box.M)):
        raise TabulatedFormatError(f"{path}: lattice or grid index out of range")
    values = np.full(box.shape * 2, np.nan, dtype=complex)
    idx = tuple((ks + K).T) + tuple(js.T)
    values[idx] = data[:, -2] + 1j * data[:, -1]
    if np.isnan(values).any():
        raise TabulatedFormatError(f"{path}: some (k, x_j) pairs are missing")
    return SymbolGrid(box, weight, values, order, rho, f"file:{path.name}")


def write_tabulated(sigma: SymbolGrid, path) -> None:
    box = sigma.box
    n = box.n
    with Path(path).open("w") as fh:
        fh.write(f"{n} {box.K}\n")
        for idx in np.ndindex(*(box.shape * 2)):
            k = [i - box.K for i in idx[:n]]
            v = sigma.values[idx]
            fh.write(" ".join(map(str, k + list(idx[n:]))) + f" {float(v.real)!r} {float(v.imag)!r}\n")


def _complex_row(row) -> str:
    return ",".join(f"{z.real!r},{z.imag!r}" for z in row.tolist())


def write_matrix_csv(matrix, path) -> None:
    """Row-major CSV with ``re,im`` pairs; rows are lattice points ``k``."""
    if isinstance(matrix, OperatorMatrix):
        matrix = matrix.kernel
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2:
        matrix = matrix.reshape(int(np.sqrt(matrix.size)), -1)
    with Path(path).open("w") as fh:
        for row in matrix:
            fh.write(_complex_row(row) + "\n")
