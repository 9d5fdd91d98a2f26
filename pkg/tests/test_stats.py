import numpy as np
import pytest

from saakiqa import (
    DegenerateVarianceError,
    DimensionMismatchError,
    LengthMismatchError,
    kendall_tau_b,
    logistic5_eval,
    logistic5_fit,
    pearson,
    plcc_after_regression,
    psnr,
    rankdata,
    spearman,
)


def _rank_oracle(v):
    """Average ranks by brute force: mean 1-based position among equals."""
    v = np.asarray(v, dtype=float)
    out = np.empty(v.size)
    srt = np.sort(v)
    for i, value in enumerate(v):
        positions = np.nonzero(srt == value)[0] + 1
        out[i] = positions.mean()
    return out


def _pearson_oracle(x, y):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    dx, dy = x - x.mean(), y - y.mean()
    return float(np.sum(dx * dy) / np.sqrt(np.sum(dx * dx) * np.sum(dy * dy)))


def _kendall_oracle(x, y):
    """Brute-force tau-b over all pairs."""
    n = len(x)
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = x[i] - x[j]
            dy = y[i] - y[j]
            if dx == 0:
                ties_x += 1
            if dy == 0:
                ties_y += 1
            if dx * dy > 0:
                concordant += 1
            elif dx * dy < 0:
                discordant += 1
    n0 = n * (n - 1) / 2
    return (concordant - discordant) / np.sqrt((n0 - ties_x) * (n0 - ties_y))


class TestPearson:
    def test_identical(self):
        assert pearson([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)

    def test_negated(self):
        assert pearson([1, 2, 3], [-1, -2, -3]) == pytest.approx(-1.0)

    def test_four_point_hand_value(self):
        x, y = [1, 2, 3, 4], [2, 1, 4, 3]
        assert _pearson_oracle(x, y) == pytest.approx(0.6)
        assert pearson(x, y) == pytest.approx(0.6, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            pearson([1, 2], [1, 2, 3])
        with pytest.raises(LengthMismatchError):
            pearson([1], [1])

    def test_degenerate(self):
        with pytest.raises(DegenerateVarianceError):
            pearson([5, 5, 5], [1, 2, 3])

    def test_affine_invariance(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=40)
        y = rng.normal(size=40)
        r = pearson(x, y)
        assert pearson(3.0 * x + 7.0, y) == pytest.approx(r, abs=1e-12)
        assert pearson(-2.0 * x, y) == pytest.approx(-r, abs=1e-12)


class TestSpearman:
    def test_monotone_agreement(self):
        assert spearman([1, 5, 9, 10], [0.1, 0.2, 0.7, 3.0]) == pytest.approx(1.0)

    def test_monotone_reversal(self):
        assert spearman([1, 2, 3], [9, 4, 1]) == pytest.approx(-1.0)

    def test_tie_handling_against_oracle(self):
        x, y = [1, 1, 2], [3, 5, 4]
        np.testing.assert_array_equal(rankdata(x), [1.5, 1.5, 3.0])
        np.testing.assert_array_equal(rankdata(y), [1.0, 3.0, 2.0])
        expected = _pearson_oracle(_rank_oracle(x), _rank_oracle(y))
        assert spearman(x, y) == pytest.approx(expected, abs=1e-12)

    def test_is_pearson_of_ranks_by_construction(self):
        rng = np.random.default_rng(1)
        x = rng.integers(0, 6, size=25).astype(float)
        y = rng.integers(0, 6, size=25).astype(float)
        assert spearman(x, y) == pearson(rankdata(x), rankdata(y))

    def test_all_tied(self):
        with pytest.raises(DegenerateVarianceError):
            spearman([2, 2, 2], [1, 2, 3])


class TestKendall:
    def test_concordant(self):
        assert kendall_tau_b([1, 2, 3, 4], [10, 20, 30, 40]) == pytest.approx(1.0)

    def test_four_point_hand_value(self):
        x, y = [1, 2, 3, 4], [1, 3, 2, 4]
        assert _kendall_oracle(x, y) == pytest.approx(4.0 / 6.0)
        assert kendall_tau_b(x, y) == pytest.approx(4.0 / 6.0, abs=1e-12)

    def test_constant_degenerate(self):
        with pytest.raises(DegenerateVarianceError):
            kendall_tau_b([3, 3, 3], [1, 2, 3])

    def test_matches_bruteforce_with_ties(self):
        rng = np.random.default_rng(2)
        for _ in range(60):
            n = int(rng.integers(3, 21))
            x = rng.integers(0, 6, size=n).astype(float)
            y = rng.integers(0, 6, size=n).astype(float)
            if np.all(x == x[0]) or np.all(y == y[0]):
                continue
            assert kendall_tau_b(x, y) == pytest.approx(
                _kendall_oracle(x, y), abs=1e-12)

    def test_negation_flips_sign(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=15)
        y = rng.normal(size=15)
        assert kendall_tau_b(-x, y) == pytest.approx(
            -kendall_tau_b(x, y), abs=1e-12)


class TestPsnr:
    def test_identical_is_infinite(self):
        img = np.arange(16.0).reshape(4, 4)
        assert psnr(img, img) == float("inf")

    def test_uniform_unit_error(self):
        ref = np.full((8, 8), 100.0)
        assert psnr(ref, ref + 1.0) == pytest.approx(10 * np.log10(65025.0))
        assert psnr(ref, ref + 1.0) == pytest.approx(48.1308, abs=1e-4)

    def test_checkerboard_zero_db(self):
        ref = np.indices((8, 8)).sum(axis=0) % 2 * 255.0
        assert psnr(ref, 255.0 - ref) == pytest.approx(0.0, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            psnr(np.zeros((4, 4)), np.zeros((4, 5)))


class TestLogisticEval:
    def test_center_point(self):
        beta = [2.0, 1.5, 0.7, 0.3, -1.0]
        assert logistic5_eval(beta, 0.7) == pytest.approx(0.3 * 0.7 - 1.0)

    def test_linear_degenerate(self):
        beta = [0.0, 1.0, 0.0, 1.0, 0.0]
        x = np.linspace(-5, 5, 11)
        np.testing.assert_allclose(logistic5_eval(beta, x), x)

    def test_saturation(self):
        beta = [2.0, 1.0, 0.0, 0.0, 0.0]
        assert logistic5_eval(beta, 1e9) == pytest.approx(1.0)
        assert logistic5_eval(beta, -1e9) == pytest.approx(-1.0)

    def test_no_overflow_warning(self):
        with np.errstate(over="raise"):
            logistic5_eval([1.0, 50.0, 0.0, 0.0, 0.0], np.array([-1e8, 1e8]))


class TestLogisticFit:
    def test_exact_recovery(self):
        beta_true = np.array([2.0, 1.0, 0.5, 0.1, 3.0])
        x = np.linspace(-3.0, 4.0, 50)
        y = logistic5_eval(beta_true, x)
        fit = logistic5_fit(x, y)
        assert fit.sse <= 1e-10
        assert pearson(logistic5_eval(fit.beta, x), y) >= 1.0 - 1e-9

    def test_linear_subfamily(self):
        x = np.linspace(0, 10, 30)
        y = 2.0 * x + 1.0
        fit = logistic5_fit(x, y)
        assert fit.sse <= 1e-10

    def test_deterministic(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=40)
        y = np.tanh(x) + 0.1 * rng.normal(size=40)
        f1 = logistic5_fit(x, y)
        f2 = logistic5_fit(x, y)
        np.testing.assert_array_equal(f1.beta, f2.beta)
        assert f1.sse == f2.sse
        assert f1.iterations == f2.iterations

    def test_never_worse_than_initial(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=25)
        y = rng.normal(size=25)
        fit = logistic5_fit(x, y)
        resid = y - y.mean()
        assert fit.sse <= float(resid @ resid) + 1e-9

    def test_constant_scores(self):
        with pytest.raises(DegenerateVarianceError):
            logistic5_fit(np.ones(20), np.arange(20.0))

    def test_too_few_points(self):
        with pytest.raises(LengthMismatchError):
            logistic5_fit(np.arange(5.0), np.arange(5.0))


class TestPlccAfterRegression:
    def test_perfect_fit(self):
        beta = np.array([1.5, 2.0, 0.0, -0.2, 4.0])
        x = np.linspace(-2, 2, 40)
        assert plcc_after_regression(x, logistic5_eval(beta, x)) >= 1 - 1e-9

    def test_noise_is_uncorrelated(self):
        rng = np.random.default_rng(42)
        x = rng.normal(size=1000)
        y = rng.normal(size=1000)
        assert abs(plcc_after_regression(x, y)) < 0.1

    def test_beats_raw_pearson_on_monotone_nonlinearity(self):
        rng = np.random.default_rng(7)
        x = np.sort(rng.normal(0, 2.0, size=200))
        y = np.tanh(x)
        assert plcc_after_regression(x, y) > pearson(x, y)

    def test_at_least_absolute_pearson(self):
        for seed in (8, 9, 10):
            rng = np.random.default_rng(seed)
            x = rng.normal(size=60)
            y = 0.5 * x + rng.normal(size=60)
            assert plcc_after_regression(x, y) >= abs(pearson(x, y)) - 1e-9
