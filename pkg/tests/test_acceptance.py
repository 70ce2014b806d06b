"""Acceptance criteria 1-12 at their stated sizes and tolerances.

Each test prints one ``criterion N: PASS/FAIL`` line; the lines are also
collected into a summary section at the end of the pytest run.
"""

import json

import numpy as np
import pytest

from _support import LAMBDA1, from_func, random_trig_symbol, running
from conftest import record
from lattice_pdo import cli
from lattice_pdo.fredholm import index_report, trace_via_symbol
from lattice_pdo.lattice import LatticeBox, LatticeFunction, dft, idft
from lattice_pdo.quantize import (
    adjoint_asymptotic,
    adjoint_exact,
    compose_asymptotic,
    compose_exact,
    compose_partial,
    materialize,
    parametrix,
    toroidal_duality_check,
    transpose_exact,
)
from lattice_pdo.sobolev import (
    SobolevSpec,
    apriori_probe,
    compactness_probe,
    isometry_error,
    lambda_power_symbol,
    sobolev_norm,
)
from lattice_pdo.symbols import class_report
from lattice_pdo.tasks import TASKS, default_config
from lattice_pdo.weights import make_anisotropic_weight, make_standard_weight, validate_weight

SIZES = [(1, 16), (2, 6), (1, 32), (1, 8), (2, 4), (1, 64)]


def expi(k, x):
    return np.exp(2j * np.pi * x[0]) + 0 * k[0]


def test_criterion_01_exact_oracles():
    rng = np.random.default_rng(20240101)
    worst = 0.0
    for n, K in [(1, 16), (2, 6)]:
        box = LatticeBox(n, K)
        for _ in range(20):
            s = random_trig_symbol(box, rng)
            t = random_trig_symbol(box, rng)
            Ks, Kt = materialize(s).kernel, materialize(t).kernel
            worst = max(
                worst,
                np.abs(materialize(compose_exact(s, t)).kernel - Ks @ Kt).max(),
                np.abs(materialize(adjoint_exact(s)).kernel - Ks.conj().T).max(),
                np.abs(materialize(transpose_exact(s)).kernel - Ks.T).max(),
            )
    ok = worst <= 1e-10
    record(1, ok, f"max oracle error {worst:.2e} (tol 1e-10)")
    assert ok


def test_criterion_02_composition_termination():
    box = LatticeBox(1, 16)
    a = LAMBDA1
    sigma = from_func(box, lambda k, x: a(k) * np.exp(2j * np.pi * x[0]), 1.0)
    err_sigma = np.abs(compose_partial(sigma, sigma, 2).values - compose_exact(sigma, sigma).values).max()

    shift = from_func(box, expi, 0.0)
    mult = from_func(box, lambda k, x: a(k) + 0 * x[0], 1.0)
    exact = compose_exact(shift, mult)
    err_shift = np.abs(compose_partial(shift, mult, 2).values - exact.values).max()
    # hand-derived lambda(k, x) = a(k + 1) exp(2 pi i x), with k + 1 read on the periodic lattice
    hand = from_func(box, lambda k, x: a(box.wrap(k + 1)) * np.exp(2j * np.pi * x[0]), 1.0)
    err_hand = np.abs(exact.values - hand.values).max()
    worst = max(err_sigma, err_shift, err_hand)
    ok = worst <= 1e-10
    record(2, ok, f"N=2 partial vs exact {max(err_sigma, err_shift):.2e}, hand form {err_hand:.2e}")
    assert ok


def test_criterion_03_asymptotic_order():
    box = LatticeBox(1, 32)
    sigma = running(box)
    lines, ok = [], True
    for N in (1, 2, 3):
        comp = compose_asymptotic(sigma, sigma, N)
        adj = adjoint_asymptotic(sigma, N)
        for name, res, pred in (("compose", comp, 2.0 - N), ("adjoint", adj, 1.0 - N)):
            slope = res.slopes[N]
            ok &= bool(slope <= pred + 0.3)
            lines.append(f"{name} N={N} slope {slope:.3g} <= {pred:g}+0.3")
    record(3, ok, "; ".join(lines))
    assert ok


def test_criterion_04_parametrix():
    box = LatticeBox(1, 32)
    par = parametrix(running(box), N=3)
    slope = par.slopes["left"]
    tail = par.tail_norms()["left"]
    ok = bool(slope <= -3 + 0.3 and tail <= 0.1)
    record(4, ok, f"remainder slope {slope:.3g} (<= -2.7), tail norm |k|>=K/2 {tail:.2e} (<= 0.1)")
    assert ok


def test_criterion_05_duality():
    rng = np.random.default_rng(5)
    worst = 0.0
    for n, K in [(1, 8), (2, 4)]:
        box = LatticeBox(n, K)
        for _ in range(10):
            worst = max(worst, toroidal_duality_check(random_trig_symbol(box, rng)))
    ok = worst <= 1e-10
    record(5, ok, f"max duality error {worst:.2e} (tol 1e-10)")
    assert ok


def test_criterion_06_plancherel():
    rng = np.random.default_rng(6)
    worst = 0.0
    for n, K in SIZES:
        box = LatticeBox(n, K)
        f = LatticeFunction(box, rng.standard_normal(box.shape) + 1j * rng.standard_normal(box.shape))
        g = dft(f)
        roundtrip = np.abs(idft(g).values - f.values).max()
        plancherel = abs(np.sum(np.abs(g.values) ** 2) / box.size - np.sum(np.abs(f.values) ** 2))
        worst = max(worst, roundtrip, plancherel / np.sum(np.abs(f.values) ** 2))
    ok = worst <= 1e-12
    record(6, ok, f"max round-trip/Plancherel error {worst:.2e} (tol 1e-12)")
    assert ok


def test_criterion_07_weight_validation():
    cases = [
        ("Lambda_1", make_standard_weight(1), 1),
        ("Lambda_2", make_standard_weight(2), 1),
        ("anisotropic(1,2)", make_anisotropic_weight([1, 2]), 2),
    ]
    ok, parts = True, []
    for name, weight, n in cases:
        rep = validate_weight(weight, n, 256)
        ok &= rep.passed
        parts.append(f"{name} {'ok' if rep.passed else 'FAILED'}")
    C0 = validate_weight(make_standard_weight(1), 1, 256).C0
    ok &= bool(0.70 <= C0 <= 0.71)
    record(7, ok, ", ".join(parts) + f"; C0(Lambda_1) = {C0:.5f}")
    assert ok


def test_criterion_08_class_machinery():
    boxes = [LatticeBox(1, K) for K in (16, 32)]
    lam = [from_func(b, lambda k, x: LAMBDA1(k) + 0 * x[0], 1.0) for b in boxes]
    prod = [from_func(b, lambda k, x: LAMBDA1(k) * (2 + np.exp(2j * np.pi * x[0])), 1.0) for b in boxes]
    rho, m = 0.5, 1.0
    N0 = 1 * (1.0 / LAMBDA1.mu0 - rho)
    shifted = [from_func(b, lambda k, x: LAMBDA1(k) ** (m - N0) + 0 * x[0], m, rho=rho) for b in boxes]
    verdicts = {
        "Lambda_1": class_report(lam).verdicts["M"],
        "Lambda_1*(2+expi)": class_report(prod).verdicts["M"],
        f"Lambda^(m-N0), N0={N0:g}": class_report(shifted).verdicts["M"],
    }
    ok = all(v == "member" for v in verdicts.values())
    record(8, ok, ", ".join(f"{k}: {v}" for k, v in verdicts.items()))
    assert ok


def test_criterion_09_sobolev_scale():
    rng = np.random.default_rng(9)
    box = LatticeBox(1, 16)
    failures = 0
    for m1, m2 in [(0, 1), (1, 2)]:
        for _ in range(100):
            w = LatticeFunction(box, rng.standard_normal(box.shape) + 1j * rng.standard_normal(box.shape))
            failures += sobolev_norm(SobolevSpec(LAMBDA1, m1), w) > sobolev_norm(SobolevSpec(LAMBDA1, m2), w)
    w = LatticeFunction(box, rng.standard_normal(box.shape) + 1j * rng.standard_normal(box.shape))
    iso = isometry_error(SobolevSpec(LAMBDA1, 1.7), w)
    ratios = {K: apriori_probe(running(LatticeBox(1, K)), samples=100, seed=9) for K in (16, 32)}
    in_range = all(0.4 <= lo and hi <= 3.0 for lo, hi in ratios.values())
    big = LatticeBox(1, 64)
    sv = np.linalg.svd(materialize(lambda_power_symbol(big, LAMBDA1, -1.0)).kernel, compute_uv=False)
    expected = np.sort((1.0 + big.axis_points ** 2.0) ** -0.5)[::-1]
    sv_err = np.abs(sv - expected).max()
    ok = failures == 0 and iso <= 1e-12 and in_range and sv_err <= 1e-12
    ok &= bool(abs(sv[0] - 1) <= 1e-12 and abs(sv[-1] - (1 + 64**2) ** -0.5) <= 1e-12)
    span = ", ".join(f"K={K}: [{lo:.3f}, {hi:.3f}]" for K, (lo, hi) in ratios.items())
    record(9, ok, f"embedding failures {failures}, isometry {iso:.1e}, a-priori {span}, sv error {sv_err:.1e}")
    assert ok


def test_criterion_10_compactness():
    box = LatticeBox(1, 32)
    tails = compactness_probe(lambda_power_symbol(box, LAMBDA1, -1.0))
    bounded = all(v <= LAMBDA1(np.array([k1 + 1])) ** -1 + 1e-14 for k1, v in tails.items())
    values = list(tails.values())
    decreasing = all(b < a for a, b in zip(values, values[1:]))
    control = compactness_probe(from_func(box, lambda k, x: 1.0 + 0 * k[0] + 0 * x[0], 0.0))
    no_decay = all(abs(v - 1.0) <= 1e-12 for v in control.values())
    ok = bool(bounded and decreasing and no_decay)
    record(10, ok, f"tails {[f'{v:.4f}' for v in values]}, control {[f'{v:.3f}' for v in control.values()]}")
    assert ok


def test_criterion_11_fredholm():
    rng = np.random.default_rng(11)
    box = LatticeBox(1, 16)
    trace_err = max(
        abs(trace_via_symbol(s) - np.trace(materialize(s).kernel))
        for s in (random_trig_symbol(box, rng) for _ in range(10))
    )
    cases = {
        "one": from_func(box, lambda k, x: 1.0 + 0 * k[0] + 0 * x[0], 0.0),
        "expi(1)": from_func(box, expi, 0.0),
        "running/Lambda": from_func(box, lambda k, x: 1 + 0.5 * np.exp(2j * np.pi * x[0]) / LAMBDA1(k), 0.0),
    }
    ok = trace_err <= 1e-10
    parts = [f"trace error {trace_err:.1e}"]
    for name, sigma in cases.items():
        rep = index_report(sigma, N=3)
        good = (
            rep.index_kernels == 0
            and abs(rep.index_traces) <= 1e-8
            and rep.decay["tau1"]["passed"]
            and rep.decay["tau2"]["passed"]
        )
        ok &= bool(good)
        parts.append(f"{name}: index {rep.index_kernels}/{abs(rep.index_traces):.1e}")
    record(11, ok, ", ".join(parts))
    assert ok


def test_criterion_12_cli_determinism(tmp_path, capsys):
    ok, parts = True, []
    for task in TASKS:
        cfg = tmp_path / f"{task}.json"
        cfg.write_text(json.dumps(default_config(task)))
        codes, blobs = [], []
        for run in ("a", "b"):
            out = tmp_path / run
            codes.append(cli.main([task, "--config", str(cfg), "--out", str(out), "--seed", "7"]))
            blobs.append((out / f"{task}.json").read_bytes())
        same = blobs[0] == blobs[1] and codes == [0, 0]
        ok &= same
        parts.append(f"{task} {'identical' if same else 'DIFFERENT'}")

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"task": "calculus", "symbols": ["sin("]}))
    usage = cli.main(["calculus", "--config", str(bad), "--out", str(tmp_path / "c")])
    with pytest.raises(SystemExit) as exc:
        cli.main(["no-such-task"])
    weak = tmp_path / "weak.json"
    weak.write_text(json.dumps({"weight": {"kind": "constant", "value": 1.0}}))
    violation = cli.main(["validate-weight", "--config", str(weak), "--out", str(tmp_path / "d")])
    codes_ok = usage == 1 and exc.value.code == 1 and violation == 2
    ok &= codes_ok
    capsys.readouterr()
    record(12, ok, ", ".join(parts) + f"; exit codes config={usage} usage={exc.value.code} violation={violation}")
    assert ok
