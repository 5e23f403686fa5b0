"""Self-contained property suite behind the `verify` subcommand.

Each check returns (name, passed, detail).  The random inputs are drawn from a
seeded generator so runs are reproducible.
"""

from __future__ import annotations

import numpy as np

from .fields import (
    PART_D,
    PART_R,
    SYM_S,
    SYM_SPRIME,
    GridParams,
    VectorField,
    apply_symmetry,
    nonlinear_term,
    project,
    random_field,
    random_vector_field,
    vector_norm_l1,
)
from .solver import flatten, jacobian, linearized_apply, n_unknowns, residual, unflatten
from .tridiag import (
    bound_sequences,
    build_block,
    inverse_columns,
    solve_block,
    solve_block_dense,
)


def _max_field_diff(u: VectorField, v: VectorField) -> float:
    return max(np.max(np.abs(u.u1.s - v.u1.s)), np.max(np.abs(u.u2.s - v.u2.s)))


def check_nonlinearity_symmetry(rng, n_fields=100, N=4) -> tuple:
    worst = 0.0
    p = GridParams(N, 2.0, 1.0)
    for _ in range(n_fields):
        u = random_vector_field(p, rng)
        for sym in (SYM_S, SYM_SPRIME):
            d = _max_field_diff(nonlinear_term(apply_symmetry(u, sym)),
                                apply_symmetry(nonlinear_term(u), sym))
            worst = max(worst, d)
    return "nonlinearity-symmetry", worst <= 1e-12, f"max abs diff {worst:.3e} (tol 1e-12)"


def check_young_inequality(rng, n_pairs=100, N=4) -> tuple:
    ok = True
    margin = 0.0
    from scipy.signal import convolve2d

    for _ in range(n_pairs):
        f = random_field(N, rng)
        g = random_field(N, rng)
        conv = convolve2d(f.exp_coeffs(), g.exp_coeffs(), mode="full")
        l1 = np.sum(np.abs(conv))
        linf = np.max(np.abs(conv))
        f1 = np.sum(np.abs(f.exp_coeffs()))
        g1 = np.sum(np.abs(g.exp_coeffs()))
        finf = np.max(np.abs(f.exp_coeffs()))
        slack1 = f1 * g1 - l1
        slackinf = finf * g1 - linf
        margin = min(margin, slack1, slackinf) if margin else min(slack1, slackinf)
        if slack1 < -1e-12 or slackinf < -1e-12:
            ok = False
    return "young-inequality", ok, f"min slack {margin:.3e}"


def check_projection_algebra(rng, N=5) -> tuple:
    p = GridParams(N, 2.0, 1.0)
    u = random_vector_field(p, rng)
    r = project(u, PART_R)
    d = project(u, PART_D)
    checks = [
        _max_field_diff(project(r, PART_R), r),
        _max_field_diff(project(d, PART_D), d),
        vector_norm_l1(project(r, PART_D)),
        _max_field_diff(r + d, u),
    ]
    worst = max(checks)
    return "projection-algebra", worst == 0.0, f"max defect {worst:.3e}"


def check_tridiag_vs_dense(rng, sizes=(16, 64, 128)) -> tuple:
    worst = 0.0
    for N in sizes:
        for l, m, lam in ((1, 1.0, 10.0), (2, 2.0, 1e3), (1, 6.0, 0.0)):
            p = GridParams(N, m, lam)
            block = build_block(l, p)
            rhs = rng.standard_normal(block.size)
            x = solve_block(block, rhs)
            y = solve_block_dense(block, rhs)
            worst = max(worst, np.max(np.abs(x - y)) / max(np.max(np.abs(y)), 1e-300))
    return "tridiag-vs-dense", worst <= 1e-10, f"max rel err {worst:.3e} (tol 1e-10)"


def check_jacobian_vs_fd(rng, N=4, step=1e-5) -> tuple:
    p = GridParams(N, 2.0, 3.0)
    u = random_vector_field(p, rng, scale=0.5)
    J = jacobian(u, p)
    x0 = flatten(u)
    M = n_unknowns(N)
    fd = np.zeros_like(J)
    for i in range(M):
        e = np.zeros(M)
        e[i] = step
        rp = flatten(residual(unflatten(x0 + e, p), p))
        rm = flatten(residual(unflatten(x0 - e, p), p))
        fd[:, i] = (rp - rm) / (2 * step)
    scale = np.max(np.abs(J))
    rel = np.max(np.abs(J - fd)) / scale
    return "jacobian-vs-fd", rel <= 1e-6, f"max rel err {rel:.3e} (tol 1e-6)"


def check_sequences_bounds(_rng) -> tuple:
    worst_margin = np.inf
    try:
        for m in (2.0, 4.0, 6.0):
            for l in (1, 2, 4):
                for lam in (1e2, 1e3, 1e4):
                    for N in (32, 64):
                        seq = bound_sequences(l, GridParams(N, m, lam))
                        worst_margin = min(
                            worst_margin,
                            seq.bound_a - np.max(seq.a),
                            seq.bound_b - np.max(seq.b),
                        )
    except AssertionError as exc:
        return "certificate-sequences", False, str(exc)
    return "certificate-sequences", True, f"min bound margin {worst_margin:.3e}"


def check_entrywise_bound(_rng) -> tuple:
    worst_ratio = 0.0
    for m in (2.0, 4.0, 6.0):
        for l in (1, 2, 4):
            for lam in (1e2, 1e3, 1e4):
                for N in (32, 64):
                    p = GridParams(N, m, lam)
                    inv = inverse_columns(build_block(l, p))
                    bound = 2.0 ** (2 * m) / (l * lam)
                    worst_ratio = max(worst_ratio, float(np.max(np.abs(inv))) / bound)
    return "entrywise-bound", worst_ratio <= 1.0, f"max |inv|/bound = {worst_ratio:.6f}"


def check_linearized_apply_consistency(rng, N=4) -> tuple:
    p = GridParams(N, 2.0, 2.0)
    u = random_vector_field(p, rng)
    v = random_vector_field(p, rng)
    lhs = jacobian(u, p) @ flatten(v)
    rhs = flatten(linearized_apply(u, v, p))
    worst = np.max(np.abs(lhs - rhs))
    return "jacobian-vs-bilinear", worst <= 1e-10, f"max abs diff {worst:.3e}"


ALL_CHECKS = [
    check_nonlinearity_symmetry,
    check_young_inequality,
    check_projection_algebra,
    check_tridiag_vs_dense,
    check_jacobian_vs_fd,
    check_sequences_bounds,
    check_entrywise_bound,
    check_linearized_apply_consistency,
]


def run_checks(seed: int = 0, fast: bool = False) -> list:
    rng = np.random.default_rng(seed)
    results = []
    for fn in ALL_CHECKS:
        if fast and fn is check_nonlinearity_symmetry:
            results.append(fn(rng, n_fields=20))
        elif fast and fn is check_young_inequality:
            results.append(fn(rng, n_pairs=20))
        else:
            results.append(fn(rng))
    return results
