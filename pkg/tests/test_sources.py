import numpy as np
import pytest

from _support import LAMBDA1, random_trig_symbol
from lattice_pdo.lattice import LatticeBox
from lattice_pdo.quantize import materialize
from lattice_pdo.sources import (
    BUILTIN_IDS,
    TabulatedFormatError,
    builtin_expression,
    read_tabulated,
    symbol_from_expression,
    write_matrix_csv,
    write_tabulated,
)


def test_builtin_catalog():
    assert builtin_expression("shift", 2) == "expi(1, 0)"
    for name in BUILTIN_IDS:
        sigma = symbol_from_expression(builtin_expression(name, 1), LatticeBox(1, 4), LAMBDA1, 0.0)
        assert np.all(np.isfinite(sigma.values))
    with pytest.raises(KeyError):
        builtin_expression("nope", 1)


def test_tabulated_round_trip(tmp_path):
    box = LatticeBox(2, 2)
    sigma = random_trig_symbol(box, np.random.default_rng(3), degree=1)
    path = tmp_path / "sigma.tab"
    write_tabulated(sigma, path)
    back = read_tabulated(path, LAMBDA1, 0.0)
    np.testing.assert_array_equal(back.values, sigma.values)


def test_tabulated_rejects_missing_rows(tmp_path):
    path = tmp_path / "short.tab"
    path.write_text("1 1\n-1 0 1.0 0.0\n")
    with pytest.raises(TabulatedFormatError):
        read_tabulated(path, LAMBDA1, 0.0)


def test_matrix_csv_is_exact(tmp_path):
    box = LatticeBox(1, 3)
    T = materialize(random_trig_symbol(box, np.random.default_rng(4)))
    path = tmp_path / "T.csv"
    write_matrix_csv(T, path)
    raw = np.loadtxt(path, delimiter=",")
    np.testing.assert_array_equal(raw[:, 0::2] + 1j * raw[:, 1::2], T.kernel)
