"""Linearized system about the dominant mode: solve for the pair (A, B).

The scalar operator is L w = lam sin(y) dx w + (-Delta)^m w.  In sine
amplitudes it preserves the x-frequency l and acts tridiagonally in the
y-frequency j with couplings +l*lam/2 from j-1 and -l*lam/2 from j+1, so it is
solved row by row with the elimination sweep.  B solves L B = lam sin x and
A solves L A = -lam cos(y) B, both supported on the l = 1 block family;
cos(y) multiplication is the exact banded shift j -> j +- 1 with factor 1/2,
truncated at the lattice edge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import (
    GridParams,
    SineField,
    VectorField,
    advect,
    laplacian_symbol,
    norm_l1,
    norm_l1_1,
    norm_linf,
)
from .tridiag import fit_loglog_slope, thomas_solve


def multiply_cos_y(w: SineField) -> SineField:
    """cos(y) * w as the exact coefficient shift j -> j +- 1 (factor 1/2 each)."""
    s = w.s
    out = np.zeros_like(s)
    out[:, 1:] += 0.5 * s[:, :-1]
    out[:, :-1] += 0.5 * s[:, 1:]
    return SineField.fold(w.N, out)


def apply_linear_operator(w: SineField, params: GridParams) -> SineField:
    """lam sin(y) dx w + (-Delta)^m w, Galerkin-truncated."""
    N = w.N
    s = w.s
    k1 = np.arange(-N, N + 1, dtype=float)[:, None]
    out = laplacian_symbol(params) * s
    shift = np.zeros_like(s)
    shift[:, 1:] += s[:, :-1]
    shift[:, :-1] -= s[:, 1:]
    out += 0.5 * params.lam * k1 * shift
    return SineField.fold(N, out)


def solve_linear_operator(rhs: SineField, params: GridParams) -> SineField:
    """Apply L^{-1} blockwise: one elimination sweep per x-frequency row."""
    N = rhs.N
    if rhs.coeff(0, 0) != 0.0:
        raise ValueError("zero mode present in right-hand side")
    out = np.zeros_like(rhs.s)
    m2 = 2 * params.m
    # l = 0 block: the operator is diagonal on x-independent modes
    j = np.arange(1, N + 1, dtype=float)
    out[N, N + 1 :] = rhs.s[N, N + 1 :] / j**m2
    # l >= 1 rows: tridiagonal in j over the full range -N..N
    for l in range(1, N + 1):
        if params.variant == "split":
            diag = float(l) ** m2 + np.abs(np.arange(-N, N + 1, dtype=float)) ** m2
        else:
            diag = (float(l) ** 2 + np.arange(-N, N + 1, dtype=float) ** 2) ** params.m
        off = 0.5 * params.lam * l
        out[N + l, :] = thomas_solve(+off, diag, -off, rhs.s[N + l, :])
    return SineField.fold(N, out)


@dataclass(frozen=True)
class LinearizationPair:
    A: SineField
    B: SineField
    params: GridParams
    residual_a_l1: float
    residual_b_l1: float


def _siny_unit(params: GridParams) -> VectorField:
    u1 = SineField.from_modes(params.N, {(0, 1): 1.0})
    return VectorField(u1, SineField(params.N), params)


def linear_residual(w: SineField, rhs: SineField, params: GridParams) -> float:
    """l1 residual of L w = rhs, with L evaluated through the convolution path.

    sin(y) dx w is computed as an advection by (sin y, 0), which is independent
    of the banded representation used by the solver.
    """
    lw = params.lam * advect(_siny_unit(params), w) + SineField(
        w.N, laplacian_symbol(params) * w.s
    )
    return norm_l1(lw - rhs)


def solve_linearization(params: GridParams) -> LinearizationPair:
    if params.N < 2:
        raise ValueError("linearization needs N >= 2 (cos y coupling uses j +- 1)")
    N = params.N
    if params.lam == 0.0:
        z = SineField(N)
        return LinearizationPair(A=z, B=z.copy(), params=params, residual_a_l1=0.0, residual_b_l1=0.0)
    rhs_b = SineField.from_modes(N, {(1, 0): params.lam})
    B = solve_linear_operator(rhs_b, params)
    rhs_a = -params.lam * multiply_cos_y(B)
    A = solve_linear_operator(rhs_a, params)
    return LinearizationPair(
        A=A,
        B=B,
        params=params,
        residual_a_l1=linear_residual(A, rhs_a, params),
        residual_b_l1=linear_residual(B, rhs_b, params),
    )


# ---------------------------------------------------------------------------
# lambda-scaling of (A, B)

SCALING_PREDICTIONS = {
    "B_l1": lambda m: 1.0 / (2 * m),
    "A_l1": lambda m: 1.0 / m,
    "B_l1_1": lambda m: 1.0 / m,
    "A_l1_1": lambda m: 1.5 / m,
    "B_linf": lambda m: 0.0,
    "A_linf": lambda m: 0.5 / m,
    "ABgradA_l1": lambda m: 2.5 / m,
    "ABgradB_l1": lambda m: 2.0 / m,
    "ABgradA_linf": lambda m: 2.0 / m,
}


@dataclass(frozen=True)
class ScalingReport:
    m: float
    N: int
    rows: list

    def to_dict(self) -> dict:
        return {"m": self.m, "N": self.N, "rows": self.rows}


def scaling_table(params_list) -> ScalingReport:
    """Fitted vs predicted log-log slopes for the norms of (A, B) and their products.

    The predictions are upper bounds: growth slower than predicted is fine.
    """
    params_list = list(params_list)
    if len(params_list) < 4:
        raise ValueError("scaling table needs at least 4 lambda values")
    lams = [p.lam for p in params_list]
    if min(lams) <= 0 or max(lams) / min(lams) < 1e3:
        raise ValueError("lambda values must be positive and span at least 3 decades")
    base = params_list[0]
    if any(p.m != base.m or p.N != base.N for p in params_list):
        raise ValueError("scaling table requires fixed (m, N) across the sweep")

    values = {name: [] for name in SCALING_PREDICTIONS}
    for p in sorted(params_list, key=lambda q: q.lam):
        pair = solve_linearization(p)
        AB = VectorField(pair.A, pair.B, p)
        values["B_l1"].append(norm_l1(pair.B))
        values["A_l1"].append(norm_l1(pair.A))
        values["B_l1_1"].append(norm_l1_1(pair.B))
        values["A_l1_1"].append(norm_l1_1(pair.A))
        values["B_linf"].append(norm_linf(pair.B))
        values["A_linf"].append(norm_linf(pair.A))
        values["ABgradA_l1"].append(norm_l1(advect(AB, pair.A)))
        values["ABgradB_l1"].append(norm_l1(advect(AB, pair.B)))
        values["ABgradA_linf"].append(norm_linf(advect(AB, pair.A)))

    lams_sorted = sorted(lams)
    rows = []
    for name, vals in values.items():
        predicted = SCALING_PREDICTIONS[name](base.m)
        fitted = fit_loglog_slope(lams_sorted, vals)
        rows.append(
            {
                "norm_name": name,
                "predicted_exponent": predicted,
                "fitted_exponent": fitted,
                "lambdas": lams_sorted,
                "values": vals,
            }
        )
    return ScalingReport(m=base.m, N=base.N, rows=rows)
