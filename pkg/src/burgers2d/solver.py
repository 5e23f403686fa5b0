"""Construction of the two solutions by fixed-point iteration on the remainder.

The ansatz is u = lam (sin y, 0) + (A, B) + (a, b) with (A, B) from the
linearization.  Each iteration step solves, on the fixed lattice,

    L b_{n+1} = -(a_n + A, b_n + B) . grad (b_n + B)
    L a_{n+1} = -lam cos(y) b_{n+1} - (a_n + A, b_n + B) . grad (a_n + A)

starting from (a_0, b_0) = (0, 0); the second system is solved first since its
solution feeds the first.  The trace records the plain and the
lambda^{-2/m}-weighted difference metrics, the a-priori norms, and the
x-independent content of b (which stays at round-off level).  Newton polishing
with the analytically assembled Jacobian brings the converged iterate, and its
image under the component/coordinate swap S, to machine-accuracy roots.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .fields import (
    PART_D,
    PART_R,
    SYM_S,
    GridParams,
    SineField,
    VectorField,
    _wavenumbers,
    advect,
    apply_symmetry,
    dominant_part,
    half_modes,
    laplacian_symbol,
    make_force,
    nonlinear_term,
    norm_l1,
    norm_l1_1,
    project_field,
    vector_norm_l1,
)
from .linearize import LinearizationPair, multiply_cos_y, solve_linear_operator, solve_linearization


def laplacian_apply(u: VectorField, params: GridParams) -> VectorField:
    ev = laplacian_symbol(params)
    return VectorField(
        SineField(params.N, ev * u.u1.s), SineField(params.N, ev * u.u2.s), params
    )


def residual(u: VectorField, params: GridParams) -> VectorField:
    """G_N(u) = Nonl(u) + (-Delta)^m u - lam F as a field."""
    out = nonlinear_term(u.with_params(params)) + laplacian_apply(u, params)
    return out - params.lam * make_force(params)


def residual_l1(u: VectorField, params: GridParams) -> float:
    return vector_norm_l1(residual(u, params))


def linearized_apply(u: VectorField, v: VectorField, params: GridParams) -> VectorField:
    """Directional derivative of G_N at u: Nonl(u, v) + Nonl(v, u) + (-Delta)^m v."""
    w1 = advect(u, v.u1) + advect(v, u.u1)
    w2 = advect(u, v.u2) + advect(v, u.u2)
    return VectorField(w1, w2, params) + laplacian_apply(v, params)


# ---------------------------------------------------------------------------
# Flattening and the analytic Jacobian


@lru_cache(maxsize=None)
def _flatten_ops(N: int):
    """Extension (half -> full, odd) and restriction (full -> half) matrices."""
    size = 2 * N + 1
    modes = half_modes(N)
    M = len(modes)
    E = np.zeros((size * size, M))
    for i, (k1, k2) in enumerate(modes):
        E[(k1 + N) * size + (k2 + N), i] = 1.0
        E[(-k1 + N) * size + (-k2 + N), i] = -1.0
    R = np.zeros((M, size * size))
    for i, (k1, k2) in enumerate(modes):
        R[i, (k1 + N) * size + (k2 + N)] = 1.0
    return E, R


@lru_cache(maxsize=None)
def _conv_index(N: int):
    """Index pairs (q - k) for the dense convolution-by-f matrix on the lattice."""
    size = 2 * N + 1
    k = np.arange(-N, N + 1)
    K1, K2 = np.meshgrid(k, k, indexing="ij")
    P1, P2 = K1.ravel(), K2.ravel()
    D1 = P1[:, None] - P1[None, :] + 2 * N
    D2 = P2[:, None] - P2[None, :] + 2 * N
    return D1, D2


def _conv_matrix(f: np.ndarray, N: int) -> np.ndarray:
    """Matrix of g -> conv(f, g) restricted to the lattice: C[q, k] = f[q - k]."""
    pad = np.zeros((4 * N + 1, 4 * N + 1))
    pad[N : 3 * N + 1, N : 3 * N + 1] = f
    D1, D2 = _conv_index(N)
    return pad[D1, D2]


def n_unknowns(N: int) -> int:
    return 2 * len(half_modes(N))


def flatten(u: VectorField) -> np.ndarray:
    _, R = _flatten_ops(u.params.N)
    return np.concatenate([R @ u.u1.s.ravel(), R @ u.u2.s.ravel()])


def unflatten(x: np.ndarray, params: GridParams) -> VectorField:
    size = 2 * params.N + 1
    E, _ = _flatten_ops(params.N)
    M = E.shape[1]
    s1 = (E @ x[:M]).reshape(size, size)
    s2 = (E @ x[M:]).reshape(size, size)
    return VectorField(SineField(params.N, s1), SineField(params.N, s2), params)


def jacobian(u: VectorField, params: GridParams) -> np.ndarray:
    """dG_N/du at u, assembled analytically from the bilinear convolution."""
    N = params.N
    E, R = _flatten_ops(N)
    K1, K2 = _wavenumbers(N)
    d1 = K1.ravel().astype(float)
    d2 = K2.ravel().astype(float)
    ev = laplacian_symbol(params).ravel()

    s1, s2 = u.u1.s, u.u2.s
    C1 = _conv_matrix(s1, N)
    C2 = _conv_matrix(s2, N)
    # advect(u, v^j): 0.5 * (conv(s1, k1 v) + conv(s2, k2 v))
    A_u = 0.5 * (C1 * d1[None, :] + C2 * d2[None, :])
    # advect(v, u^j): 0.5 * (conv(v1, k1 u^j) + conv(v2, k2 u^j))
    B11 = 0.5 * _conv_matrix((K1 * s1), N)
    B21 = 0.5 * _conv_matrix((K2 * s1), N)
    B12 = 0.5 * _conv_matrix((K1 * s2), N)
    B22 = 0.5 * _conv_matrix((K2 * s2), N)

    lap = np.diag(ev)
    J11 = A_u + B11 + lap
    J12 = B21
    J21 = B12
    J22 = A_u + B22 + lap
    top = np.hstack([R @ J11 @ E, R @ J12 @ E])
    bot = np.hstack([R @ J21 @ E, R @ J22 @ E])
    return np.vstack([top, bot])


# ---------------------------------------------------------------------------
# Newton polishing


def newton_refine(
    u0: VectorField, params: GridParams, tol: float, max_iter: int = 50
) -> VectorField:
    """Polish u0 to a root of G_N with ||residual||_l1 <= tol.

    Raises LinAlgError on a singular Jacobian (proximity to the bifurcation)
    and RuntimeError when the start is outside the Newton basin.
    """
    u = u0
    res = residual(u, params)
    rnorm = vector_norm_l1(res)
    if rnorm <= tol:
        return u
    for _ in range(max_iter):
        J = jacobian(u, params)
        try:
            step = np.linalg.solve(J, -flatten(res.with_params(params)))
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError(
                f"singular Jacobian at lambda={params.lam}: likely near the bifurcation point ({exc})"
            ) from exc
        u = unflatten(flatten(u) + step, params)
        res = residual(u, params)
        rnorm = vector_norm_l1(res)
        if rnorm <= tol:
            return u
    raise RuntimeError(
        f"Newton did not reach tol={tol} in {max_iter} steps (last residual {rnorm:.3e})"
    )


def newton_refine_with_history(
    u0: VectorField, params: GridParams, tol: float, max_iter: int = 50
):
    """Like newton_refine but also returns the residual-norm history."""
    u = u0
    history = [residual_l1(u, params)]
    while history[-1] > tol:
        if len(history) > max_iter:
            raise RuntimeError(f"Newton did not converge (history {history[-3:]})")
        J = jacobian(u, params)
        step = np.linalg.solve(J, -flatten(residual(u, params)))
        u = unflatten(flatten(u) + step, params)
        history.append(residual_l1(u, params))
    return u, history


# ---------------------------------------------------------------------------
# Fixed-point iteration on the remainder


@dataclass(frozen=True)
class RemainderPair:
    a: SineField
    b: SineField
    params: GridParams


@dataclass
class IterationTrace:
    steps: list = field(default_factory=list)
    converged: bool = False
    diverged: bool = False
    tol: float = 0.0

    def to_dict(self) -> dict:
        return {
            "steps": self.steps,
            "converged": self.converged,
            "diverged": self.diverged,
            "tol": self.tol,
        }


def default_fp_tol(params: GridParams) -> float:
    """1e-10 scaled to the standing-assumption magnitude lam^{1-1/m}."""
    return 1e-10 * params.lam ** (1.0 - 1.0 / params.m) if params.lam > 0 else 0.0


def fixed_point_iterate(
    params: GridParams,
    max_iter: int = 100,
    tol: float | None = None,
    lin: LinearizationPair | None = None,
):
    """Iterate the remainder system from (a_0, b_0) = (0, 0).

    Returns (RemainderPair, IterationTrace).  Divergence (the difference metric
    increasing over 5 consecutive steps) is reported on the trace, not raised:
    it is the expected outcome for small lambda or weak regularization.
    """
    if lin is None:
        lin = solve_linearization(params)
    if tol is None:
        tol = default_fp_tol(params)
    N = params.N
    A, B = lin.A, lin.B
    pd_weight = params.lam ** (-2.0 / params.m) if params.lam > 0 else 1.0

    a = SineField(N)
    b = SineField(N)
    trace = IterationTrace(tol=tol)
    prev_weighted = None
    increases = 0
    for n in range(1, max_iter + 1):
        V = VectorField(A + a, B + b, params)
        b_new = solve_linear_operator(-advect(V, B + b), params)
        rhs_a = -params.lam * multiply_cos_y(b_new) - advect(V, A + a)
        a_new = solve_linear_operator(rhs_a, params)

        da, db = a_new - a, b_new - b
        diff = norm_l1_1(da) + norm_l1_1(db)
        weighted = (
            norm_l1_1(project_field(da, PART_R))
            + norm_l1_1(db)
            + pd_weight * norm_l1_1(project_field(da, PART_D))
        )
        ratio = weighted / prev_weighted if prev_weighted else None
        a, b = a_new, b_new
        trace.steps.append(
            {
                "n": n,
                "diff_l1_1": diff,
                "weighted_diff": weighted,
                "contraction_ratio": ratio,
                "apriori": {
                    "norm_b_l1_1": norm_l1_1(b),
                    "norm_PRa_l1_1": norm_l1_1(project_field(a, PART_R)),
                    "norm_PDa_l1_1": norm_l1_1(project_field(a, PART_D)),
                },
                "pd_b_l1": norm_l1(project_field(b, PART_D)),
            }
        )
        if diff <= tol:
            trace.converged = True
            break
        if prev_weighted is not None and weighted > prev_weighted:
            increases += 1
            if increases >= 5:
                trace.diverged = True
                break
        else:
            increases = 0
        prev_weighted = weighted
    return RemainderPair(a=a, b=b, params=params), trace


# ---------------------------------------------------------------------------
# A-priori monitoring

APRIORI_EXPONENTS = {
    "norm_b_l1_1": lambda m: -1.0 + 4.0 / m,
    "norm_PRa_l1_1": lambda m: -1.0 + 4.5 / m,
    "norm_PDa_l1_1": lambda m: 2.0 / m,
}


@dataclass(frozen=True)
class AprioriReport:
    lam: float
    m: float
    norms: dict
    normalized: dict
    pr_a_l1: float
    pr_a_l1_ok: bool
    m_above_threshold: bool

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "m": self.m,
            "norms": self.norms,
            "normalized": self.normalized,
            "pr_a_l1": self.pr_a_l1,
            "pr_a_l1_ok": self.pr_a_l1_ok,
            "m_above_threshold": self.m_above_threshold,
        }


def apriori_monitor(r: RemainderPair) -> AprioriReport:
    """Report the three a-priori norms and their lambda-normalized ratios."""
    p = r.params
    norms = {
        "norm_b_l1_1": norm_l1_1(r.b),
        "norm_PRa_l1_1": norm_l1_1(project_field(r.a, PART_R)),
        "norm_PDa_l1_1": norm_l1_1(project_field(r.a, PART_D)),
    }
    normalized = {}
    for k, v in norms.items():
        if p.lam > 0:
            normalized[k] = v / p.lam ** APRIORI_EXPONENTS[k](p.m)
        else:
            normalized[k] = None
    pr_a_l1 = norm_l1(project_field(r.a, PART_R))
    return AprioriReport(
        lam=p.lam,
        m=p.m,
        norms=norms,
        normalized=normalized,
        pr_a_l1=pr_a_l1,
        pr_a_l1_ok=pr_a_l1 <= 1.0,
        m_above_threshold=p.m > 4.5,
    )


def apriori_slopes(reports) -> dict:
    """Fitted log-log slopes of the three norms across a lambda sweep."""
    from .tridiag import fit_loglog_slope

    reports = sorted(reports, key=lambda r: r.lam)
    if len(reports) < 2:
        raise ValueError("slope fit needs at least two lambda values")
    lams = [r.lam for r in reports]
    out = {}
    for key in APRIORI_EXPONENTS:
        vals = [r.norms[key] for r in reports]
        out[key] = {
            "fitted": fit_loglog_slope(lams, vals),
            "predicted": APRIORI_EXPONENTS[key](reports[0].m),
            "lambdas": lams,
            "values": vals,
        }
    return out


# ---------------------------------------------------------------------------
# Assembling the two solutions


@dataclass(frozen=True)
class SolutionPair:
    u1: VectorField
    u2: VectorField
    residual1_l1: float
    residual2_l1: float
    separation_l1: float
    status: str  # "distinct" | "merged" | "zero"
    trace: IterationTrace
    apriori: AprioriReport


class DivergenceError(RuntimeError):
    pass


def assemble_solutions(
    params: GridParams,
    max_iter: int = 100,
    tol: float | None = None,
    newton_tol: float | None = None,
) -> SolutionPair:
    """Run linearization -> fixed point -> Newton, then reflect by S and re-polish.

    Returns the pair with status "distinct" when the l1 gap is at least lam/2,
    "merged" when the reflected solution collapses back (the small-lambda
    regime), and "zero" for lam = 0.
    """
    if params.lam == 0.0:
        z = VectorField(SineField(params.N), SineField(params.N), params)
        trace = IterationTrace(converged=True, tol=0.0)
        rep = apriori_monitor(RemainderPair(SineField(params.N), SineField(params.N), params))
        return SolutionPair(z, z.copy(), 0.0, 0.0, 0.0, "zero", trace, rep)
    if newton_tol is None:
        newton_tol = 1e-10 * params.lam
    lin = solve_linearization(params)
    remainder, trace = fixed_point_iterate(params, max_iter=max_iter, tol=tol, lin=lin)
    if trace.diverged or not trace.converged:
        raise DivergenceError(
            f"fixed-point iteration did not contract at lambda={params.lam}, m={params.m}"
        )
    rep = apriori_monitor(remainder)

    base = dominant_part(params)
    u1 = base + VectorField(lin.A + remainder.a, lin.B + remainder.b, params)
    u1 = newton_refine(u1, params, tol=newton_tol)
    u2 = newton_refine(apply_symmetry(u1, SYM_S), params, tol=newton_tol)
    sep = vector_norm_l1(u1 - u2)
    if sep >= params.lam / 2:
        status = "distinct"
    elif sep <= 1e-6 * max(1.0, params.lam):
        status = "merged"
    else:
        warnings.warn(
            f"ambiguous separation {sep:.3e} at lambda={params.lam}; reporting merged"
        )
        status = "merged"
    return SolutionPair(
        u1=u1,
        u2=u2,
        residual1_l1=residual_l1(u1, params),
        residual2_l1=residual_l1(u2, params),
        separation_l1=sep,
        status=status,
        trace=trace,
        apriori=rep,
    )
