import json

import numpy as np
import pytest

from burgers2d.fields import GridParams
from burgers2d.tridiag import (
    BoundSequences,
    TridiagonalBlock,
    bound_sequences,
    build_block,
    build_operator,
    certify_bounds,
    fit_loglog_slope,
    geometric_decay_start,
    inverse_columns,
    norms_of_inverse,
    operator_norms,
    solve_block,
    solve_block_dense,
    thomas_solve,
)


class TestBuildBlock:
    def test_example(self):
        b = build_block(1, GridParams(2, 1.0, 2.0))
        assert np.array_equal(b.diag, [1.0, 2.0, 5.0])
        assert b.sub == 2.0 and b.sup == -2.0

    def test_l0_is_diagonal(self):
        b = build_block(0, GridParams(4, 3.0, 7.0))
        assert b.sub == 0.0 and b.sup == 0.0
        assert np.array_equal(b.diag, np.arange(1, 5, dtype=float) ** 6)

    def test_lambda_zero_decouples(self):
        b = build_block(2, GridParams(3, 2.0, 0.0))
        inv = inverse_columns(b)
        assert np.allclose(inv, np.diag(1.0 / b.diag))

    def test_euclidean_variant(self):
        b = build_block(1, GridParams(2, 2.0, 1.0, "euclidean"))
        assert np.array_equal(b.diag, [(1.0) ** 2.0**1, (1 + 1) ** 2, (1 + 4) ** 2])

    def test_index_errors(self):
        with pytest.raises(IndexError):
            build_block(5, GridParams(4, 2.0, 1.0))
        with pytest.raises(IndexError):
            build_block(-1, GridParams(4, 2.0, 1.0))
        with pytest.raises(ValueError):
            build_block(1, GridParams(4, 2.0, 1.0), size=3)

    def test_dense_layout(self):
        b = build_block(1, GridParams(2, 1.0, 2.0))
        expected = np.array([[1, -2, 0], [2, 2, -2], [0, 2, 5]], dtype=float)
        assert np.array_equal(b.dense(), expected)


class TestSolveBlock:
    def test_analytic_2x2(self):
        # [[1, -2], [2, 2]] x = (1, 0) has det 6, x = (1/3, -1/3)
        p = GridParams(1, 1.0, 2.0)
        block = TridiagonalBlock(1, np.array([1.0, 2.0]), 2.0, -2.0, p)
        x = solve_block(block, np.array([1.0, 0.0]))
        assert np.allclose(x, [1 / 3, -1 / 3], rtol=1e-14)

    def test_diagonal_case(self):
        b = build_block(1, GridParams(4, 2.0, 0.0))
        for j in range(b.size):
            e = np.zeros(b.size)
            e[j] = 1.0
            x = solve_block(b, e)
            assert x[j] == pytest.approx(1.0 / b.diag[j], rel=1e-15)

    def test_rhs_length_check(self):
        b = build_block(1, GridParams(4, 2.0, 1.0))
        with pytest.raises(ValueError):
            solve_block(b, np.zeros(3))

    @pytest.mark.parametrize("N", [16, 64, 128])
    @pytest.mark.parametrize("l,m,lam", [(1, 1.0, 10.0), (2, 2.0, 1e3), (1, 6.0, 1e2), (3, 2.0, 0.0)])
    def test_vs_dense_oracle(self, rng, N, l, m, lam):
        p = GridParams(N, m, lam)
        b = build_block(l, p)
        r = rng.standard_normal(b.size)
        x = solve_block(b, r)
        y = solve_block_dense(b, r)
        assert np.max(np.abs(x - y)) <= 1e-10 * max(1.0, np.max(np.abs(y)))

    def test_matrix_rhs(self, rng):
        b = build_block(1, GridParams(8, 2.0, 5.0))
        R = rng.standard_normal((b.size, 4))
        X = solve_block(b, R)
        assert np.allclose(b.dense() @ X, R, atol=1e-12)

    def test_zero_pivot_guard(self):
        with pytest.raises(np.linalg.LinAlgError):
            thomas_solve(1.0, np.array([0.0, 1.0]), -1.0, np.array([1.0, 1.0]))


class TestInverseColumns:
    def test_analytic_2x2(self):
        # [[1, -1], [1, 2]]: det 3, inverse [[2/3, 1/3], [-1/3, 1/3]]
        p = GridParams(1, 1.0, 1.0)
        block = TridiagonalBlock(1, np.array([1.0, 2.0]), 1.0, -1.0, p)
        inv = inverse_columns(block)
        assert np.allclose(inv, [[2 / 3, 1 / 3], [-1 / 3, 1 / 3]], rtol=1e-14)

    def test_lambda_zero(self):
        b = build_block(2, GridParams(5, 2.0, 0.0))
        assert np.allclose(inverse_columns(b), np.diag(1.0 / b.diag))

    def test_uniform_bound_example(self):
        b = build_block(1, GridParams(32, 2.0, 1e3))
        inv = inverse_columns(b)
        assert np.max(np.abs(inv)) <= 2.0**4 / 1e3

    def test_vs_dense(self):
        b = build_block(2, GridParams(64, 2.0, 50.0))
        inv = inverse_columns(b)
        dense_inv = np.linalg.inv(b.dense())
        assert np.max(np.abs(inv - dense_inv)) <= 1e-10 * np.max(np.abs(dense_inv))

    def test_identity_products(self):
        for l, m, lam, N in ((1, 2.0, 10.0, 32), (2, 1.0, 1e3, 64)):
            b = build_block(l, GridParams(N, m, lam))
            inv = inverse_columns(b)
            dense = b.dense()
            eye = np.eye(b.size)
            assert np.max(np.abs(dense @ inv - eye)) <= 1e-10
            assert np.max(np.abs(inv @ dense - eye)) <= 1e-10

    def test_skew_offdiagonal_part(self):
        b = build_block(3, GridParams(16, 2.0, 7.0))
        A = b.dense() - np.diag(b.diag)
        assert np.array_equal(A.T, -A)


class TestBoundSequences:
    def test_spot_values(self):
        seq = bound_sequences(1, GridParams(4, 2.0, 10.0))
        assert seq.a[1] == pytest.approx(82.0 / 1494.0, rel=1e-14)
        assert seq.b[1] == pytest.approx(1.0 / 102.0, rel=1e-14)

    def test_paper_bounds_at_example(self):
        seq = bound_sequences(1, GridParams(4, 2.0, 10.0))
        assert seq.bound_a == 2.0**4 / 10.0
        assert seq.bound_b == 0.1
        assert np.all(seq.a <= seq.bound_a) and np.all(seq.a >= 0)
        assert np.all(seq.b <= seq.bound_b) and np.all(seq.b >= 0)

    def test_decrease_in_lambda(self):
        prev_a = prev_b = np.inf
        for lam in (1e2, 1e3, 1e4):
            seq = bound_sequences(1, GridParams(8, 2.0, lam))
            assert np.max(seq.a) < prev_a
            assert np.max(seq.b[1:]) < prev_b
            prev_a, prev_b = np.max(seq.a), np.max(seq.b[1:])

    def test_validation(self):
        with pytest.raises(ValueError):
            bound_sequences(0, GridParams(4, 2.0, 10.0))
        with pytest.raises(ValueError):
            bound_sequences(1, GridParams(4, 2.0, 0.0))
        with pytest.raises(ValueError):
            bound_sequences(1, GridParams(5, 2.0, 10.0))

    def test_explicit_length_override(self):
        seq = bound_sequences(1, GridParams(5, 2.0, 10.0), n=6)
        assert len(seq.a) == 4  # j = 0..3


class TestOperatorNorms:
    def test_gradient_norm_identity(self):
        n = norms_of_inverse(np.eye(2), l=1)
        assert n.l1_to_l1_1 == 3.0
        assert n.l1_to_l1 == 1.0
        assert n.l1_to_linf == 1.0

    def test_diagonal_case(self):
        b = build_block(1, GridParams(4, 1.0, 0.0))
        n = operator_norms(b)
        assert n.l1_to_linf == pytest.approx(1.0 / b.diag[0])

    def test_uniform_linf_bound(self):
        b = build_block(1, GridParams(64, 2.0, 1e3))
        n = operator_norms(b)
        assert n.l1_to_linf <= 2.0**4 / 1e3

    def test_linf_below_l1(self):
        for l in (1, 2):
            n = operator_norms(build_block(l, GridParams(32, 2.0, 100.0)))
            assert n.l1_to_linf <= n.l1_to_l1

    def test_full_operator_max_over_blocks(self):
        p = GridParams(6, 2.0, 50.0)
        blocks = build_operator(p)
        full = operator_norms(blocks)
        per = [operator_norms(b) for b in blocks]
        assert full.l1_to_l1 == max(x.l1_to_l1 for x in per)
        assert full.l1_to_l1_1 == max(x.l1_to_l1_1 for x in per)


class TestInverseBoundStructure:
    @pytest.mark.parametrize("m,l,lam,N", [(2.0, 1, 100.0, 32), (4.0, 2, 1e3, 32), (6.0, 1, 100.0, 64)])
    def test_parity_refined_bound(self, m, l, lam, N):
        # within each 2x2 diagonal block (rows 2j+1, 2j+2 from the top,
        # 1-based) the off-diagonal and even-even entries obey 1/(l lam);
        # the odd-odd entry only obeys the uniform 2^{2m}/(l lam) bound
        inv = inverse_columns(build_block(l, GridParams(N, m, lam)))
        llam = l * lam
        n = inv.shape[0]
        for j in range(n // 2):
            r = 2 * j
            assert abs(inv[r, r]) <= 2.0 ** (2 * m) / llam
            assert abs(inv[r, r + 1]) <= 1.0 / llam * (1 + 1e-12)
            assert abs(inv[r + 1, r]) <= 1.0 / llam * (1 + 1e-12)
            assert abs(inv[r + 1, r + 1]) <= 1.0 / llam * (1 + 1e-12)

    @pytest.mark.parametrize("m,l,lam,N", [(2.0, 1, 100.0, 32), (2.0, 1, 1e3, 64), (4.0, 1, 100.0, 32)])
    def test_geometric_decay_regime(self, m, l, lam, N):
        b = build_block(l, GridParams(N, m, lam))
        inv = inverse_columns(b)
        n0 = geometric_decay_start(l, lam, m)
        assert n0 < b.size
        for j in (0, 1, n0 // 2, n0):
            if j >= b.size:
                continue
            col = np.abs(inv[:, j])
            for i in range(max(n0, j + 1), b.size - 1):
                if col[i] < 1e-280:
                    break
                assert col[i + 1] / col[i] <= 0.5 + 1e-9

    def test_scaling_exponents_respect_certified_bounds(self):
        # the certified decay rates are upper bounds: the measured norms may
        # fall faster (they do for the column sums and the gradient norm) but
        # never slower; the max-entry rate -1 is sharp
        lams = [1e2, 10**2.5, 1e3, 10**3.5, 1e4, 10**4.5, 1e5]
        vals = {"l1": [], "linf": [], "grad": []}
        for lam in lams:
            n = norms_of_inverse(inverse_columns(build_block(1, GridParams(64, 2.0, lam))), 1)
            vals["l1"].append(n.l1_to_l1)
            vals["linf"].append(n.l1_to_linf)
            vals["grad"].append(n.l1_to_l1_1)
        assert abs(fit_loglog_slope(lams, vals["linf"]) - (-1.0)) <= 0.05
        assert fit_loglog_slope(lams, vals["l1"]) <= -0.75 + 0.05
        assert fit_loglog_slope(lams, vals["grad"]) <= -0.5 + 0.05


class TestCertifyBounds:
    def test_small_grid_passes(self):
        grid = []
        for lam in (1e2, 1e3, 1e4):
            for N in (32, 64):
                grid.append((GridParams(N, 2.0, lam), 1))
        report = certify_bounds(grid)
        assert report.overall_pass
        assert all(pt["pass"] for pt in report.points)
        # slope rows present for both N groups, all three norms
        norms = {(s["N"], s["norm"]) for s in report.slopes}
        assert norms == {(32, "l1"), (32, "linf"), (32, "grad"), (64, "l1"), (64, "linf"), (64, "grad")}
        by_norm = {(s["N"], s["norm"]): s for s in report.slopes}
        # the max-entry exponent -1 is sharp; the faster-decaying column-sum
        # and gradient norms are flagged as soft warnings, not hard failures
        for N in (32, 64):
            assert by_norm[(N, "linf")]["within_tol"]
            assert by_norm[(N, "grad")]["within_tol"] is False
            assert by_norm[(N, "grad")]["fitted"] < by_norm[(N, "grad")]["expected"]
        assert report.warnings
        # N-independence rows: 32 vs 64 at each lambda
        assert len(report.n_independence) == 3
        for row in report.n_independence:
            assert row["rel_diff_l1"] <= 0.01
            assert row["rel_diff_grad"] <= 0.01

    def test_report_json_serializable(self):
        report = certify_bounds([(GridParams(16, 2.0, 100.0), 1), (GridParams(16, 2.0, 1e3), 1)])
        parsed = json.loads(report.to_json())
        assert parsed["summary"]["overall_pass"] is True
        assert parsed["points"][0]["bound"] == 2.0**4 / 100.0

    def test_lambda_guard(self):
        with pytest.raises(ValueError):
            certify_bounds([(GridParams(16, 2.0, 1.0), 1)])

    def test_parity_pattern_reported(self):
        report = certify_bounds([(GridParams(16, 2.0, 100.0), 1)])
        pat = report.points[0]["parity_pattern"]
        assert pat["blocks"] == 8
        counts = pat["within_refined_bound"]
        assert counts["12"] == counts["21"] == counts["22"] == 8


class TestEdgeSizes:
    def test_thomas_one_by_one(self):
        x = thomas_solve(np.zeros(0), np.array([4.0]), np.zeros(0), np.array([8.0]))
        assert x[0] == 2.0

    def test_l0_block_at_n1(self):
        b = build_block(0, GridParams(1, 2.0, 5.0))
        assert b.size == 1
        assert solve_block(b, np.array([2.0]))[0] == 2.0
