"""Tridiagonal blocks of the linearized operator and their inverse-bound certification.

On each invariant subspace H^l the idealized linearized operator is the
tridiagonal matrix with diagonal d_j = l^{2m} + j^{2m} (j = 0..N for l >= 1),
constant sub-diagonal +l*lam and super-diagonal -l*lam.  The skew off-diagonal
part makes the inverse uniformly small: every entry of the inverse is bounded
by 2^{2m}/(l*lam), column sums scale like (l*lam)^{-1+1/2m}, and the
derivative-weighted column sums (the gradient norm) like (l*lam)^{-1+1/m},
independent of the dimension.  This module builds the blocks, solves them with
an elimination sweep, evaluates the recursive certificate sequences {a_j},
{b_j}, and checks all of the above numerically over parameter grids.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .fields import SPLIT, GridParams

SLOPE_TOL = 0.05  # asymptotic-regime tolerance on fitted log-log exponents


@dataclass(frozen=True)
class TridiagonalBlock:
    l: int
    diag: np.ndarray
    sub: float
    sup: float
    params: GridParams

    @property
    def size(self) -> int:
        return len(self.diag)

    def dense(self) -> np.ndarray:
        n = self.size
        a = np.diag(self.diag)
        idx = np.arange(n - 1)
        a[idx + 1, idx] = self.sub
        a[idx, idx + 1] = self.sup
        return a


def _eigenvalue(l: int, j: np.ndarray, params: GridParams) -> np.ndarray:
    if params.variant == SPLIT:
        return float(l) ** (2 * params.m) + j.astype(float) ** (2 * params.m)
    return (float(l) ** 2 + j.astype(float) ** 2) ** params.m


def build_block(l: int, params: GridParams, size: int | None = None) -> TridiagonalBlock:
    """Block acting on the sin(lx + jy) amplitudes, j = 0..N (j = 1..N for l = 0)."""
    if l < 0 or l > params.N:
        raise IndexError(f"block frequency l={l} outside 0..{params.N}")
    if l == 0:
        expected = params.N
        j = np.arange(1, params.N + 1)
    else:
        expected = params.N + 1
        j = np.arange(0, params.N + 1)
    if size is None:
        size = expected
    if size != expected:
        raise ValueError(f"block l={l} at N={params.N} has size {expected}, got {size}")
    diag = _eigenvalue(l, j, params)
    off = l * params.lam
    return TridiagonalBlock(l=l, diag=diag, sub=+off, sup=-off, params=params)


def build_operator(params: GridParams) -> list:
    """The block-diagonal operator restricted to l = 1..N."""
    return [build_block(l, params) for l in range(1, params.N + 1)]


# ---------------------------------------------------------------------------
# Solves


def thomas_solve(sub, diag, sup, rhs) -> np.ndarray:
    """Tridiagonal elimination sweep; rhs may be a vector or a matrix of columns.

    sub[i] multiplies x[i] in row i+1, sup[i] multiplies x[i+1] in row i.
    Raises on a pivot below 1e-13 * max|diag| (the blocks are provably
    invertible, so this flags parameter misuse).
    """
    n = len(diag)
    d0 = np.asarray(diag, dtype=float)
    d = d0.copy()
    b = np.array(rhs, dtype=float, copy=True)
    sub = np.broadcast_to(np.asarray(sub, dtype=float), (max(n - 1, 0),))
    sup = np.broadcast_to(np.asarray(sup, dtype=float), (max(n - 1, 0),))
    # pivots of this family only grow (d'_j >= d_j); judge each against its row scale
    tol = 1e-13 * np.maximum(np.abs(d0), 1.0)
    for i in range(n - 1):
        if abs(d[i]) <= tol[i]:
            raise np.linalg.LinAlgError(f"near-zero pivot {d[i]!r} at row {i}")
        w = sub[i] / d[i]
        d[i + 1] -= w * sup[i]
        b[i + 1] -= w * b[i]
    if n and abs(d[n - 1]) <= tol[n - 1]:
        raise np.linalg.LinAlgError(f"near-zero pivot {d[n - 1]!r} at row {n - 1}")
    b[n - 1] /= d[n - 1]
    for i in range(n - 2, -1, -1):
        b[i] = (b[i] - sup[i] * b[i + 1]) / d[i]
    return b


def solve_block(block: TridiagonalBlock, rhs) -> np.ndarray:
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != block.size:
        raise ValueError(f"rhs length {rhs.shape[0]} != block size {block.size}")
    return thomas_solve(block.sub, block.diag, block.sup, rhs)


def solve_block_dense(block: TridiagonalBlock, rhs) -> np.ndarray:
    """Dense pivoted factorization; the cross-check oracle for the sweep."""
    return np.linalg.solve(block.dense(), np.asarray(rhs, dtype=float))


def inverse_columns(block: TridiagonalBlock) -> np.ndarray:
    """The full inverse, column by column against unit vectors."""
    return solve_block(block, np.eye(block.size))


# ---------------------------------------------------------------------------
# Certificate sequences


@dataclass(frozen=True)
class BoundSequences:
    l: int
    a: np.ndarray
    b: np.ndarray
    bound_a: float
    bound_b: float


def bound_sequences(l: int, params: GridParams, n: int | None = None) -> BoundSequences:
    """Recursive sequences {a_j}, {b_j} for the size-n matrix, with certified bounds.

    Indexing follows d_j = l^{2m} + (j-1)^{2m}, j = 1..n, with n = params.N by
    default; n must be even.  Both sequences run j = 0..n/2 with a_0 = b_0 = 0,

        a_j = (d_{n-2j+2} + a_{j-1} L2) / (d_{n-2j+1} d_{n-2j+2} + a_{j-1} d_{n-2j+1} L2 + L2)
        b_j = (d_{2j-1}   + b_{j-1} L2) / (d_{2j} d_{2j-1}       + b_{j-1} d_{2j}     L2 + L2)

    where L2 = (l*lam)^2.  Violation of 0 <= a_j <= 2^{2m}/(l*lam) or
    0 <= b_j <= 1/(l*lam) raises, certification style.
    """
    if l < 1:
        raise ValueError("certificate sequences are defined for integer l >= 1")
    if params.lam <= 0:
        raise ValueError("certificate sequences require lambda > 0")
    if n is None:
        n = params.N
    if n % 2 != 0 or n < 2:
        raise ValueError(f"sequence length must be even and >= 2, got {n}")
    m = params.m
    llam = l * params.lam
    L2 = llam**2
    d = float(l) ** (2 * m) + np.arange(0, n, dtype=float) ** (2 * m)  # d[j-1] = d_j

    half = n // 2
    a = np.zeros(half + 1)
    b = np.zeros(half + 1)
    for j in range(1, half + 1):
        dn2, dn1 = d[n - 2 * j + 1], d[n - 2 * j]  # d_{n-2j+2}, d_{n-2j+1}
        a[j] = (dn2 + a[j - 1] * L2) / (dn1 * dn2 + a[j - 1] * dn1 * L2 + L2)
        d2j, d2j1 = d[2 * j - 1], d[2 * j - 2]  # d_{2j}, d_{2j-1}
        b[j] = (d2j1 + b[j - 1] * L2) / (d2j * d2j1 + b[j - 1] * d2j * L2 + L2)

    bound_a = 2.0 ** (2 * m) / llam
    bound_b = 1.0 / llam
    if np.any(a < 0) or np.any(a > bound_a):
        raise AssertionError(
            f"certificate failure: a_j outside [0, 2^(2m)/(l lam)] at l={l}, m={m}, "
            f"lam={params.lam}, n={n}"
        )
    if np.any(b < 0) or np.any(b > bound_b):
        raise AssertionError(
            f"certificate failure: b_j outside [0, 1/(l lam)] at l={l}, m={m}, "
            f"lam={params.lam}, n={n}"
        )
    return BoundSequences(l=l, a=a, b=b, bound_a=bound_a, bound_b=bound_b)


# ---------------------------------------------------------------------------
# Norms of the inverse


@dataclass(frozen=True)
class OperatorNorms:
    l1_to_l1: float
    l1_to_linf: float
    l1_to_l1_1: float


def norms_of_inverse(inv: np.ndarray, l: int) -> OperatorNorms:
    """Column-sum, max-entry and gradient norms of an inverse block.

    The gradient norm weights row k (1-based) by (l + k), the degree of the
    corresponding mode sin(lx + (k-1)y) rounded up by one.
    """
    absinv = np.abs(inv)
    l1 = float(np.max(absinv.sum(axis=0)))
    linf = float(np.max(absinv))
    weights = l + np.arange(1, inv.shape[0] + 1)
    grad = float(np.max((weights[:, None] * absinv).sum(axis=0)))
    return OperatorNorms(l1_to_l1=l1, l1_to_linf=linf, l1_to_l1_1=grad)


def operator_norms(block_or_list) -> OperatorNorms:
    """Norms of the block inverse; for a list of blocks, the max over l = 1..N."""
    if isinstance(block_or_list, TridiagonalBlock):
        blocks = [block_or_list]
    else:
        blocks = list(block_or_list)
    per = [norms_of_inverse(inverse_columns(b), b.l) for b in blocks]
    return OperatorNorms(
        l1_to_l1=max(p.l1_to_l1 for p in per),
        l1_to_linf=max(p.l1_to_linf for p in per),
        l1_to_l1_1=max(p.l1_to_l1_1 for p in per),
    )


def geometric_decay_start(l: int, lam: float, m: float) -> int:
    """First 1-based row index past which column entries decay by >= 1/2 per row."""
    return int(np.ceil(2.0 ** ((2 * m + 1) / (2 * m)) * (l * lam) ** (1.0 / (2 * m))))


# ---------------------------------------------------------------------------
# Certification over grids

EXPECTED_EXPONENTS = {
    "l1": lambda m: -1.0 + 1.0 / (2 * m),
    "linf": lambda m: -1.0,
    "grad": lambda m: -1.0 + 1.0 / m,
}


def fit_loglog_slope(x, y) -> float:
    x = np.log(np.asarray(x, dtype=float))
    y = np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


@dataclass
class CertificationReport:
    points: list = field(default_factory=list)
    slopes: list = field(default_factory=list)
    n_independence: list = field(default_factory=list)
    slope_tol: float = SLOPE_TOL
    overall_pass: bool = True
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "points": self.points,
            "summary": {
                "fitted_slopes": self.slopes,
                "n_independence": self.n_independence,
                "tolerance": self.slope_tol,
                "overall_pass": self.overall_pass,
                "warnings": self.warnings,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _parity_pattern(inv: np.ndarray, refined_bound: float) -> dict:
    """How the 1/(l lam) refinement distributes over 2x2 diagonal blocks.

    Blocks are counted from the top-left corner, rows/cols (2j+1, 2j+2)
    1-based; position "11" is the odd-odd diagonal entry.
    """
    n = inv.shape[0]
    counts = {"11": 0, "12": 0, "21": 0, "22": 0}
    total = 0
    for j in range(n // 2):
        r = 2 * j
        total += 1
        for key, (i, k) in {"11": (r, r), "12": (r, r + 1), "21": (r + 1, r), "22": (r + 1, r + 1)}.items():
            if abs(inv[i, k]) <= refined_bound:
                counts[key] += 1
    return {"blocks": total, "within_refined_bound": counts}


def certify_bounds(grid, slope_tol: float = SLOPE_TOL) -> CertificationReport:
    """Certify inverse bounds over a grid of (GridParams, l) points.

    Hard checks (failures flip overall_pass): the entrywise bound
    |inv_{jk}| <= 2^{2m}/(l lam) and the certificate-sequence bounds.  Soft
    checks (reported as warnings): fitted lambda-scaling exponents within
    slope_tol of -1 (l1->linf), -1+1/2m (l1->l1), -1+1/m (gradient), taken per
    fixed (m, l, N) group, and sub-1% relative drift of the l1 and gradient
    norms between N and 2N at fixed (m, l, lambda).
    """
    report = CertificationReport(slope_tol=slope_tol)
    records = {}
    for params, l in grid:
        if params.lam <= 1:
            raise ValueError("certification requires lambda > 1 at every grid point")
        block = build_block(l, params)
        inv = inverse_columns(block)
        nrm = norms_of_inverse(inv, l)
        bound = 2.0 ** (2 * params.m) / (l * params.lam)
        max_entry = float(np.max(np.abs(inv)))
        entry_pass = max_entry <= bound
        seq_n = block.size if block.size % 2 == 0 else block.size + 1
        try:
            bound_sequences(l, params, n=seq_n)
            seq_pass = True
        except AssertionError:
            seq_pass = False
        point = {
            "l": l,
            "m": params.m,
            "lambda": params.lam,
            "N": params.N,
            "max_entry": max_entry,
            "bound": bound,
            "l1_norm": nrm.l1_to_l1,
            "linf_norm": nrm.l1_to_linf,
            "grad_norm": nrm.l1_to_l1_1,
            "sequences_pass": seq_pass,
            "parity_pattern": _parity_pattern(inv, 1.0 / (l * params.lam)),
            "pass": entry_pass and seq_pass,
        }
        report.points.append(point)
        if not point["pass"]:
            report.overall_pass = False
        records[(params.m, l, params.N, params.lam)] = nrm

    # slope fits per fixed (m, l, N) across lambda
    groups = {}
    for (m, l, N, lam), nrm in records.items():
        groups.setdefault((m, l, N), []).append((lam, nrm))
    for (m, l, N), rows in groups.items():
        if len(rows) < 2:
            continue
        rows.sort()
        lams = [r[0] for r in rows]
        for name, values in (
            ("l1", [r[1].l1_to_l1 for r in rows]),
            ("linf", [r[1].l1_to_linf for r in rows]),
            ("grad", [r[1].l1_to_l1_1 for r in rows]),
        ):
            fitted = fit_loglog_slope(lams, values)
            expected = EXPECTED_EXPONENTS[name](m)
            within = abs(fitted - expected) <= slope_tol
            report.slopes.append(
                {"m": m, "l": l, "N": N, "norm": name, "fitted": fitted,
                 "expected": expected, "within_tol": within}
            )
            if not within:
                report.warnings.append(
                    f"slope {name} at (m={m}, l={l}, N={N}): fitted {fitted:.4f} "
                    f"vs expected {expected:.4f}"
                )

    # N-independence rows: same (m, l, lambda), N vs 2N
    for (m, l, N, lam), nrm in sorted(records.items()):
        twin = records.get((m, l, 2 * N, lam))
        if twin is None:
            continue
        rel_l1 = abs(nrm.l1_to_l1 - twin.l1_to_l1) / twin.l1_to_l1
        rel_grad = abs(nrm.l1_to_l1_1 - twin.l1_to_l1_1) / twin.l1_to_l1_1
        report.n_independence.append(
            {"m": m, "l": l, "lambda": lam, "N": N, "N2": 2 * N,
             "rel_diff_l1": rel_l1, "rel_diff_grad": rel_grad}
        )
        if max(rel_l1, rel_grad) > 0.01:
            report.warnings.append(
                f"N-dependence at (m={m}, l={l}, lam={lam}): rel diffs "
                f"{rel_l1:.3g}, {rel_grad:.3g}"
            )
    return report
