"""Nullspaces, symbol traces and the index of M-elliptic order-zero operators.

On a finite square truncation the index is always zero by rank-nullity; the
interesting content is that the trace of the parametrix remainders computed
from symbols matches the matrix computation, and that those remainders decay
rapidly in ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quantize import OperatorMatrix, ParametrixResult, materialize, parametrix, restricted_norm
from .symbols import SymbolGrid, fit_decay_slope, sup_over_x

__all__ = [
    "FredholmReport",
    "RANK_EPS",
    "nullspace_dims",
    "trace_via_symbol",
    "rapid_decay_check",
    "index_report",
]

RANK_EPS = 1e-8


def nullspace_dims(T: OperatorMatrix | np.ndarray, eps_rank: float = RANK_EPS) -> tuple[int, int]:
    """``(dim N(T), dim N(T^t))`` from singular values below ``eps_rank * s_max``."""
    kernel = T.kernel if isinstance(T, OperatorMatrix) else np.asarray(T)
    if kernel.ndim != 2 or kernel.shape[0] != kernel.shape[1]:
        raise ValueError("nullspace dimensions need a square kernel")

    def nullity(A):
        sv = np.linalg.svd(A, compute_uv=False)
        if sv.size == 0 or sv[0] == 0:
            return A.shape[1]
        return int(np.sum(sv <= eps_rank * sv[0]))

    return nullity(kernel), nullity(kernel.T)


def trace_via_symbol(tau: SymbolGrid) -> complex:
    """``sum_k M^-n sum_j tau(k, x_j)``: lattice sum of the torus mean."""
    return complex(tau.values.sum() / tau.box.size)


def rapid_decay_check(tau: SymbolGrid, depth: int, tolerance: float = 0.3) -> dict:
    """Spot check that a remainder symbol decays at least like ``Lambda^{-rho depth}``.

    Also records ``sup (1+|k|)^a sup_x |tau|`` for ``a <= 3`` on the interior.
    """
    box = tau.box
    floor = 1e-12
    slope = fit_decay_slope(tau.values, box, tau.weight, floor=floor)
    mask = box.interior_mask()
    prof = sup_over_x(tau.values, box.n)[mask]
    one_plus = 1.0 + box.euclidean_norm()[mask]
    weighted = {str(a): float((one_plus**a * prof).max()) for a in range(4)}
    predicted = -tau.rho * depth
    return {
        "slope": slope if np.isfinite(slope) else "-inf",
        "predicted_slope": predicted,
        "weighted_sups": weighted,
        "passed": bool(slope <= predicted + tolerance),
    }


@dataclass
class FredholmReport:
    dim_null: int
    dim_null_transpose: int
    trace_T1: complex
    trace_T2: complex
    matrix_trace_T1: complex
    matrix_trace_T2: complex
    rank_eps: float
    depth: int
    decay: dict = field(default_factory=dict)
    tail_norms: dict = field(default_factory=dict)
    parametrix: ParametrixResult | None = None

    @property
    def index_kernels(self) -> int:
        return self.dim_null - self.dim_null_transpose

    @property
    def index_traces(self) -> complex:
        return self.trace_T1 - self.trace_T2

    @property
    def consistent(self) -> bool:
        return abs(self.index_traces - self.index_kernels) <= 0.5

    def to_dict(self) -> dict:
        def cplx(z):
            return [float(z.real), float(z.imag)]

        return {
            "dim_null": self.dim_null,
            "dim_null_transpose": self.dim_null_transpose,
            "index_kernels": self.index_kernels,
            "trace_T1": cplx(self.trace_T1),
            "trace_T2": cplx(self.trace_T2),
            "matrix_trace_T1": cplx(self.matrix_trace_T1),
            "matrix_trace_T2": cplx(self.matrix_trace_T2),
            "index_traces": cplx(self.index_traces),
            "consistent": self.consistent,
            "rank_eps": self.rank_eps,
            "depth": self.depth,
            "remainder_decay": self.decay,
            "remainder_tail_norms": self.tail_norms,
        }


def index_report(sigma: SymbolGrid, N: int = 3, R1: float = 0.0, eps_rank: float = RANK_EPS) -> FredholmReport:
    """Index of ``T_sigma`` by nullspace dimensions and by parametrix remainder traces.

    ``T_1 = I - T_tau T_sigma`` and ``T_2 = I - T_sigma T_tau`` for the
    parametrix ``tau``; their symbols are read off the exact kernels.
    """
    if sigma.order != 0:
        raise ValueError(f"index report needs an order-0 symbol, got order {sigma.order:g}")
    par = parametrix(sigma, N, R1)
    dims = nullspace_dims(materialize(sigma), eps_rank)
    tau1 = -par.left_symbol
    tau2 = -par.right_symbol
    box = sigma.box
    tail_min = box.K / 2
    return FredholmReport(
        dim_null=dims[0],
        dim_null_transpose=dims[1],
        trace_T1=trace_via_symbol(tau1),
        trace_T2=trace_via_symbol(tau2),
        matrix_trace_T1=complex(np.trace(-par.left_remainder)),
        matrix_trace_T2=complex(np.trace(-par.right_remainder)),
        rank_eps=eps_rank,
        depth=N,
        decay={"tau1": rapid_decay_check(tau1, N), "tau2": rapid_decay_check(tau2, N)},
        tail_norms={
            "k_min": tail_min,
            "tau1": restricted_norm(par.left_remainder, box, tail_min),
            "tau2": restricted_norm(par.right_remainder, box, tail_min),
        },
        parametrix=par,
    )
