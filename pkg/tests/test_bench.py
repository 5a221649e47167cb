import numpy as np
import pytest
import scipy.linalg as sl

from mgnlra.bench import (A_STAR, GAP_N, aggregate, ar1_path, equidistant_grid,
                          gap_mask, gap_signal, gap_signal_glrr, gap_weight,
                          make_gap_instance, make_quadratic, quadratic_signal,
                          rank_residual_share, repeat_seed, run_comparison,
                          run_gap_experiment, tangent_basis)
from mgnlra.core import embed, glrr_residual, self_convolve
from mgnlra.subspace import basis_Z
from mgnlra.weights import ar_precision
from oracles import ar_covariance_dense, nullspace_basis, orth_projector

# evaluated at 30 digits with mpmath
S1 = 0.833115294937452681692064075465


def test_grid_includes_endpoints():
    t = equidistant_grid(5)
    np.testing.assert_array_equal(t, [-1, -0.5, 0, 0.5, 1])


def test_quadratic_n3():
    Y, b = quadratic_signal(3)
    np.testing.assert_allclose(Y, np.array([1, 0, 1]) / np.sqrt(2), atol=1e-16)
    assert b == pytest.approx(1 / np.sqrt(2))


@pytest.mark.parametrize("N", [7, 60, 1000])
def test_quadratic_instance_invariants(N):
    inst = make_quadratic(N)
    assert np.linalg.norm(inst.signal) == pytest.approx(1.0)
    assert np.linalg.norm(inst.residual_raw) == pytest.approx(1.0)
    assert np.max(np.abs(glrr_residual(A_STAR, inst.signal))) <= 1e-12
    np.testing.assert_allclose(inst.observed, inst.signal + inst.residual)


def test_residual_orthogonal_to_tangent_space():
    N = 60
    inst = make_quadratic(N)
    Z = basis_Z(self_convolve(A_STAR), N).Z
    assert np.max(np.abs(Z.conj().T @ inst.residual)) <= 1e-9


def test_tangent_basis_spans_squared_glrr_space():
    N = 40
    np.testing.assert_allclose(orth_projector(tangent_basis(N)),
                               orth_projector(nullspace_basis(self_convolve(A_STAR), N)),
                               atol=1e-10)


def test_quadratic_is_deterministic():
    w = ar_precision([0.9], 1.0, 80)
    np.testing.assert_array_equal(make_quadratic(80, w).observed, make_quadratic(80, w).observed)


def test_quadratic_needs_seven_points():
    with pytest.raises(ValueError):
        make_quadratic(6)


class TestGapInstance:
    def test_first_value(self):
        assert gap_signal()[0] == pytest.approx(S1, abs=1e-15)

    def test_signal_rank_four(self):
        S = gap_signal()
        assert rank_residual_share(S, 4) <= 1e-12
        assert np.max(np.abs(glrr_residual(gap_signal_glrr(), S))) <= 1e-12

    @pytest.mark.parametrize("noise", ["white", "ar1"])
    def test_noise_level(self, noise):
        inst = make_gap_instance(noise, True, 7)
        rel = np.linalg.norm(inst.noisy - inst.signal) / np.linalg.norm(inst.signal)
        assert rel == pytest.approx(0.2, abs=1e-14)

    def test_gap_positions(self):
        m = gap_mask()
        assert (~m).sum() == 15
        assert np.flatnonzero(~m).tolist() == list(range(9, 19)) + list(range(34, 39))
        inst = make_gap_instance("white", True, 0)
        assert np.array_equal(inst.gaps, ~m)
        assert make_gap_instance("white", False, 0).series.complete

    def test_seeded(self):
        a = make_gap_instance("ar1", True, 5).noisy
        b = make_gap_instance("ar1", True, 5).noisy
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, make_gap_instance("ar1", True, 6).noisy)

    def test_bad_noise(self):
        with pytest.raises(ValueError):
            make_gap_instance("pink")

    def test_ar1_path_is_stationary(self):
        rng = np.random.default_rng(0)
        paths = np.array([ar1_path(rng, 6) for _ in range(40000)])
        emp = np.cov(paths, rowvar=False)
        ref = ar_covariance_dense([0.9], 1.0, 6)
        assert np.max(np.abs(emp - ref) / ref.max()) < 0.05

    def test_weights(self):
        m = gap_mask()
        assert gap_weight("identity").N == GAP_N
        W = gap_weight("ar1", m).dense()
        assert np.all(W[~m] == 0)
        with pytest.raises(ValueError):
            gap_weight("bogus")


class TestRankShare:
    def test_exact_rank(self):
        n = np.arange(80)
        y = np.cos(0.2 * n) + 0.5 * 0.97 ** n
        assert rank_residual_share(y, 3) <= 1e-12

    def test_rank_zero(self):
        y = np.random.default_rng(0).standard_normal(40)
        assert rank_residual_share(y, 0) == 1.0

    def test_quadratic(self):
        Y, _ = quadratic_signal(101)
        assert rank_residual_share(Y, 3) <= 1e-12
        assert rank_residual_share(Y, 2) > 0.01

    def test_matches_dense_svd_for_long_series(self):
        rng = np.random.default_rng(1)
        N = 1500
        n = np.arange(N)
        y = np.cos(0.01 * n) + 1e-3 * rng.standard_normal(N)
        s = sl.svdvals(embed(y, N // 2))
        ref = np.sqrt(np.sum(s[2:] ** 2)) / np.linalg.norm(s)
        assert rank_residual_share(y, 2) == pytest.approx(ref, rel=1e-8)


class TestHarness:
    def test_repeat_seeds_are_distinct_and_stable(self):
        a = np.random.default_rng(repeat_seed(3, 0)).random()
        assert a == np.random.default_rng(repeat_seed(3, 0)).random()
        assert a != np.random.default_rng(repeat_seed(3, 1)).random()

    def test_comparison_rows(self):
        rows = run_comparison([100], ["mgn"], repeats=3, seed=0)
        assert len(rows) == 3
        assert {r["repeat"] for r in rows} == {0, 1, 2}
        assert all(r["monotone"] for r in rows)
        agg = aggregate(rows)
        assert len(agg) == 1 and agg[0]["repeats"] == 3
        assert agg[0]["mean_distance"] <= 1e-6

    def test_rows_independent_of_worker_count(self):
        keys = ("distance", "rank_share", "iterations")
        seq = run_comparison([30], ["mgn"], repeats=2, seed=4)
        par = run_comparison([30], ["mgn"], repeats=2, seed=4, workers=2)
        assert [[r[k] for k in keys] for r in seq] == [[r[k] for k in keys] for r in par]

    def test_aggregate_groups(self):
        rows = run_comparison([30, 40], ["mgn", "fdvpgn"], repeats=1, seed=0,
                              max_iterations=3)
        assert [(r["N"], r["method"]) for r in aggregate(rows)] == [
            (30, "mgn"), (30, "fdvpgn"), (40, "mgn"), (40, "fdvpgn")]

    def test_gap_experiment_rows(self):
        rows = run_gap_experiment(repeats=2, seed=10)
        assert [r["seed"] for r in rows] == [10, 11]
        assert all(r["identity"] > 0 and r["ar1"] > 0 for r in rows)
