"""Path following in lambda with eigenvalue monitoring and pitchfork handling.

A steady state is declared stable when every eigenvalue of -dG_N/du has
negative real part (the descent flow associated with G_N); leading_eig_real is
the largest real part of that spectrum, so stability flips exactly where it
crosses zero.  The trivial branch starts at lambda = 0, u = 0, where the
spectrum of -(-Delta)^m is negative.  Branch switching perturbs along the
critical eigenvector, which is antisymmetric under the component/coordinate
swap S: the bifurcation is the point where S is broken and the two emerging
branches are S-images of each other.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .fields import (
    SYM_S,
    GridParams,
    VectorField,
    apply_symmetry,
    vector_norm_l1,
    vector_norm_l1_1,
    zero_field,
)
from .solver import flatten, jacobian, newton_refine, unflatten

BRANCH_SYMMETRIC = "symmetric"
BRANCH_PLUS = "pitchfork_plus"
BRANCH_MINUS = "pitchfork_minus"


class NoBifurcationError(RuntimeError):
    pass


class StepUnderflowError(RuntimeError):
    def __init__(self, message, last_point=None):
        super().__init__(message)
        self.last_point = last_point


@dataclass(frozen=True)
class BranchPoint:
    lam: float
    u: VectorField
    norm_l1: float
    norm_l1_1: float
    leading_eig_real: float
    stable: bool


@dataclass
class Branch:
    id: str
    points: list = field(default_factory=list)


@dataclass(frozen=True)
class StepOptions:
    initial: float = 0.1
    min_step: float = 1e-8
    grow_after: int = 5
    newton_tol_scale: float = 1e-10
    newton_max_iter: int = 25


def _spectrum(u: VectorField, params: GridParams) -> np.ndarray:
    return np.linalg.eigvals(-jacobian(u, params))


def leading_eig_real(u: VectorField, params: GridParams) -> float:
    """Largest real part of the spectrum of -dG_N/du."""
    return float(np.max(_spectrum(u, params).real))


def _make_point(u: VectorField, params: GridParams) -> BranchPoint:
    eigs = _spectrum(u, params)
    lead = float(np.max(eigs.real))
    return BranchPoint(
        lam=params.lam,
        u=u,
        norm_l1=vector_norm_l1(u),
        norm_l1_1=vector_norm_l1_1(u),
        leading_eig_real=lead,
        stable=lead < 0.0,
    )


def critical_eigvector(u: VectorField, params: GridParams) -> np.ndarray:
    """Unit eigenvector of dG_N/du for the eigenvalue closest to zero."""
    vals, vecs = np.linalg.eig(jacobian(u, params))
    i = int(np.argmin(np.abs(vals)))
    v = np.real(vecs[:, i])
    n = np.linalg.norm(v)
    if n == 0:
        raise np.linalg.LinAlgError("degenerate critical eigenvector")
    return v / n


def _newton_tol(lam: float, opts: StepOptions) -> float:
    return opts.newton_tol_scale * max(1.0, lam)


def continue_branch(
    params: GridParams,
    lambda_range,
    step_opts: StepOptions = StepOptions(),
    start: BranchPoint | None = None,
    branch_id: str = BRANCH_SYMMETRIC,
    stop_after_unstable: bool = False,
) -> Branch:
    """Natural-parameter continuation with a secant predictor and Newton corrector.

    Starts from u = 0 at the low end of lambda_range unless a start point is
    supplied.  The step halves on corrector failure down to min_step (raising
    StepUnderflowError with the last good point) and doubles back toward the
    initial step after grow_after consecutive successes.  The final step is
    clamped so the branch ends exactly at the top of the range.
    """
    lam_lo, lam_hi = float(lambda_range[0]), float(lambda_range[1])
    if lam_hi <= lam_lo:
        raise ValueError("lambda_range must be increasing")
    branch = Branch(id=branch_id)
    if start is None:
        p0 = params.with_lambda(lam_lo)
        u0 = newton_refine(zero_field(p0), p0, tol=_newton_tol(lam_lo, step_opts))
        branch.points.append(_make_point(u0, p0))
    else:
        branch.points.append(start)

    step = step_opts.initial
    successes = 0
    while branch.points[-1].lam < lam_hi - 1e-12:
        prev = branch.points[-1]
        lam_new = min(prev.lam + step, lam_hi)
        p_new = params.with_lambda(lam_new)
        if len(branch.points) >= 2:
            older = branch.points[-2]
            dl = prev.lam - older.lam
            frac = (lam_new - prev.lam) / dl if dl > 0 else 0.0
            x_pred = flatten(prev.u) + frac * (flatten(prev.u) - flatten(older.u))
            u_pred = unflatten(x_pred, p_new)
        else:
            u_pred = prev.u.with_params(p_new)
        try:
            u_new = newton_refine(
                u_pred, p_new, tol=_newton_tol(lam_new, step_opts),
                max_iter=step_opts.newton_max_iter,
            )
        except (RuntimeError, np.linalg.LinAlgError):
            step /= 2
            successes = 0
            if step < step_opts.min_step:
                raise StepUnderflowError(
                    f"continuation step underflow near lambda={prev.lam}",
                    last_point=prev,
                )
            continue
        point = _make_point(u_new, p_new)
        branch.points.append(point)
        if stop_after_unstable and not point.stable:
            break
        successes += 1
        if successes >= step_opts.grow_after and step < step_opts.initial:
            step = min(2 * step, step_opts.initial)
            successes = 0
    return branch


def detect_pitchfork(
    branch: Branch,
    params: GridParams,
    bracket: float = 1e-4,
    step_opts: StepOptions = StepOptions(),
) -> float:
    """Bisect the leading-eigenvalue sign change along the branch to width bracket."""
    points = branch.points
    lo = hi = None
    for a, b in zip(points, points[1:]):
        if a.leading_eig_real < 0.0 <= b.leading_eig_real:
            lo, hi = a, b
            break
    if lo is None:
        raise NoBifurcationError("no leading-eigenvalue sign change in the branch")
    u_lo, lam_lo = lo.u, lo.lam
    lam_hi = hi.lam
    while lam_hi - lam_lo > bracket:
        lam_mid = 0.5 * (lam_lo + lam_hi)
        p_mid = params.with_lambda(lam_mid)
        u_mid = newton_refine(
            u_lo.with_params(p_mid), p_mid, tol=_newton_tol(lam_mid, step_opts)
        )
        lead = float(np.max(_spectrum(u_mid, p_mid).real))
        if lead < 0.0:
            lam_lo, u_lo = lam_mid, u_mid
        else:
            lam_hi = lam_mid
    return 0.5 * (lam_lo + lam_hi)


def switch_branch(
    at: BranchPoint,
    params: GridParams,
    lambda_max: float,
    step_opts: StepOptions = StepOptions(),
    delta: float | None = None,
):
    """Perturb along +-the critical eigenvector at `at` and follow both branches.

    The corrector falling back onto the symmetric branch triggers up to three
    retries with doubled perturbation before failing.  Returns the pair
    (plus, minus) labeled by the sign of the S-antisymmetric part of the
    dominant mode: c1_{(0,1)} - c2_{(1,0)}.
    """
    p_at = params.with_lambda(at.lam)
    if delta is None:
        delta = 1e-3 * max(1.0, at.lam)
    v = critical_eigvector(at.u, p_at)
    x_sym = flatten(at.u)
    tol = _newton_tol(at.lam, step_opts)
    branches = {}
    for sign in (+1.0, -1.0):
        d = delta
        u_off = None
        for _ in range(4):
            try:
                cand = newton_refine(
                    unflatten(x_sym + sign * d * v, p_at), p_at, tol=tol
                )
            except (RuntimeError, np.linalg.LinAlgError):
                d *= 2
                continue
            # back on the symmetric root means agreement to solver accuracy
            if vector_norm_l1(cand - at.u) > 1e3 * tol:
                u_off = cand
                break
            d *= 2
        if u_off is None:
            raise RuntimeError(
                f"branch switching failed at lambda={at.lam}: corrector kept "
                f"returning to the symmetric branch (final delta={d})"
            )
        start = _make_point(u_off, p_at)
        br = continue_branch(
            params, (at.lam, lambda_max), step_opts=step_opts, start=start,
            branch_id="pending",
        )
        asym = u_off.u1.coeff(0, 1) - u_off.u2.coeff(1, 0)
        branches[np.sign(asym)] = br
    if set(branches) != {1.0, -1.0}:
        raise RuntimeError("both perturbations landed on the same side of the pitchfork")
    plus, minus = branches[1.0], branches[-1.0]
    plus.id = BRANCH_PLUS
    minus.id = BRANCH_MINUS
    _check_branch_symmetry(plus, minus)
    return plus, minus


def _check_branch_symmetry(plus: Branch, minus: Branch, tol: float = 1e-8) -> None:
    n = min(len(plus.points), len(minus.points))
    for a, b in zip(plus.points[:n], minus.points[:n]):
        if abs(a.lam - b.lam) > 1e-12:
            continue
        scale = max(1.0, a.norm_l1)
        if abs(a.norm_l1 - b.norm_l1) > tol * scale:
            warnings.warn(
                f"bifurcated branches differ in norm at lambda={a.lam}: "
                f"{a.norm_l1} vs {b.norm_l1}"
            )
            return


def s_image_defect(plus: Branch, minus: Branch) -> float:
    """Max l1 distance between S(plus) points and minus points at shared lambdas."""
    by_lam = {round(p.lam, 12): p for p in minus.points}
    worst = 0.0
    for a in plus.points:
        b = by_lam.get(round(a.lam, 12))
        if b is None:
            continue
        worst = max(worst, vector_norm_l1(apply_symmetry(a.u, SYM_S) - b.u))
    return worst


# ---------------------------------------------------------------------------
# Diagram output


CSV_COLUMNS = ["lambda", "branch_id", "norm_l1", "norm_l1_1", "leading_eig_real", "stable"]


def emit_diagram(branches, path, config_digest: str | None = None) -> None:
    """CSV rows (one per branch point) in documented column order."""
    with open(path, "w", newline="") as fh:
        if config_digest:
            fh.write(f"# config_digest={config_digest}\n")
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for branch in branches:
            for pt in branch.points:
                writer.writerow(
                    [
                        repr(pt.lam),
                        branch.id,
                        repr(pt.norm_l1),
                        repr(pt.norm_l1_1),
                        repr(pt.leading_eig_real),
                        str(pt.stable).lower(),
                    ]
                )
