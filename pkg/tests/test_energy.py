import numpy as np
import pytest

from lsvi.data import synth_dataset
from lsvi.energy import (
    GlmDataset,
    LinearRegressionEnergy,
    LogisticRegressionEnergy,
    QuadraticEnergy,
    expected_grad,
    gaussian_target,
    linreg_expected,
    logreg_expected,
    quadratic_expected,
    smoothness_constant,
)
from lsvi.exceptions import DataError, GridRangeError
from lsvi.locscale import FULL, LOWER_TRIANGULAR, Params, sample, standard_gaussian
from lsvi.verify import finite_diff_grad, sample_pair

from conftest import rand_lower


def mc_expected(model, w, n=1_000_000, seed=123):
    """Monte-Carlo oracle for the expected energy."""
    zs = sample(w, standard_gaussian(w.d), seed=seed, n=n)
    vals = np.array([model.value(z) for z in zs[:0]])  # keep dtype
    # vectorized paths for speed where the model allows it
    if isinstance(model, QuadraticEnergy):
        r = zs - model.z_star
        vals = 0.5 * model.a * np.sum(r * r, axis=1) + model.constant
    elif isinstance(model, LinearRegressionEnergy):
        resid = model.data.y[None, :] - zs @ model.data.X.T
        vals = (
            0.5 * np.sum(zs * zs, axis=1)
            + 0.5 * np.sum(resid * resid, axis=1)
            + model._const
        )
    else:
        raise NotImplementedError
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(n))


class TestGlmDataset:
    def test_row_mismatch(self):
        with pytest.raises(DataError):
            GlmDataset(X=np.zeros((3, 2)), y=np.zeros(4), kind="linear")

    def test_logistic_label_check(self):
        with pytest.raises(DataError):
            GlmDataset(X=np.zeros((2, 2)), y=np.array([0.0, 1.0]), kind="logistic")

    def test_ok(self):
        data = GlmDataset(X=np.ones((2, 3)), y=np.array([-1.0, 1.0]), kind="logistic")
        assert data.n == 2 and data.dim == 3


class TestQuadratic:
    def test_direct_substitution(self):
        q = QuadraticEnergy(1.0, np.zeros(2))
        w = Params(np.array([1.0, 0.0]), np.eye(2))
        assert quadratic_expected(q, w) == pytest.approx(1.5, abs=1e-14)

    def test_minimum_is_zero(self):
        q = QuadraticEnergy(3.7, np.array([2.0, -1.0, 0.5]))
        w = Params(q.z_star, np.zeros((3, 3)), LOWER_TRIANGULAR)
        assert quadratic_expected(q, w) == 0.0

    def test_matches_monte_carlo(self):
        rng = np.random.default_rng(4)
        q = QuadraticEnergy(2.5, rng.normal(size=3))
        w = Params(rng.normal(size=3), rand_lower(rng, 3), LOWER_TRIANGULAR)
        mc, se = mc_expected(q, w)
        exact = quadratic_expected(q, w)
        assert abs(mc - exact) < max(4 * se, 1e-3 * abs(exact))

    def test_gradient_stationary_at_minimum(self):
        q = QuadraticEnergy(2.0, np.array([1.0, 2.0]))
        w = Params(q.z_star, np.zeros((2, 2)), LOWER_TRIANGULAR)
        g = expected_grad(q, w)
        assert g.norm() == 0.0

    def test_gradient_closed_form(self):
        rng = np.random.default_rng(5)
        q = QuadraticEnergy(1.7, rng.normal(size=3))
        w = Params(rng.normal(size=3), rng.normal(size=(3, 3)), FULL)
        g = expected_grad(q, w)
        assert np.allclose(g.m, q.a * (w.m - q.z_star))
        assert np.allclose(g.C, q.a * w.C)

    def test_gaussian_target_constants(self):
        t = gaussian_target(0.25, np.zeros(3))
        assert t.a == 4.0
        assert t.smoothness_M == 4.0
        assert t.strong_convexity_c == 4.0
        # value at the mode is the Gaussian normalizer
        assert t.value(np.zeros(3)) == pytest.approx(1.5 * np.log(2 * np.pi * 0.25))


class TestLinearRegression:
    def test_empty_rows_reduce_to_prior(self):
        # zero-row design: prior-only objective equals the a=1 quadratic plus constants
        data = GlmDataset(X=np.zeros((0, 2)).reshape(0, 2), y=np.zeros(0), kind="linear")
        w = Params(np.array([0.5, -1.0]), 0.3 * np.eye(2), LOWER_TRIANGULAR)
        model = LinearRegressionEnergy(data)
        q = QuadraticEnergy(1.0, np.zeros(2))
        want = quadratic_expected(q, w) + np.log(2 * np.pi)
        assert model.expected(w) == pytest.approx(want, abs=1e-12)

    def test_point_mass_is_map_objective(self):
        data = synth_dataset("linear", 6, 2, seed=2)
        w = Params(np.array([0.3, -0.7]), np.zeros((2, 2)), LOWER_TRIANGULAR)
        resid = data.y - data.X @ w.m
        want = (
            0.5 * w.m @ w.m
            + 0.5 * resid @ resid
            + np.log(2 * np.pi)
            + 3.0 * np.log(2 * np.pi)
        )
        assert linreg_expected(data, w) == pytest.approx(want, abs=1e-12)

    def test_matches_monte_carlo(self):
        data = synth_dataset("linear", 5, 2, seed=3)
        model = LinearRegressionEnergy(data)
        rng = np.random.default_rng(6)
        w = Params(rng.normal(size=2), rand_lower(rng, 2), LOWER_TRIANGULAR)
        mc, se = mc_expected(model, w)
        exact = model.expected(w)
        assert abs(mc - exact) < max(4 * se, 1e-3 * abs(exact))

    def test_kind_mismatch(self):
        data = synth_dataset("logistic", 5, 2, seed=3)
        with pytest.raises(DataError):
            linreg_expected(data, Params(np.zeros(2), np.eye(2)))

    @pytest.mark.parametrize("tag", [FULL, LOWER_TRIANGULAR])
    def test_gradient_matches_finite_differences(self, tag):
        data = synth_dataset("linear", 8, 3, seed=4)
        model = LinearRegressionEnergy(data)
        rng = np.random.default_rng(7)
        C = rand_lower(rng, 3) if tag == LOWER_TRIANGULAR else rng.normal(size=(3, 3))
        w = Params(rng.normal(size=3), C, tag)
        fd = finite_diff_grad(model.expected, w, h_step=1e-5)
        an = model.expected_grad(w)
        assert (fd - an).norm() / max(1.0, an.norm()) < 1e-5


class TestLogisticRegression:
    def test_zero_params_value(self, default_grid):
        data = synth_dataset("logistic", 7, 2, seed=5)
        w = Params(np.zeros(2), np.zeros((2, 2)), LOWER_TRIANGULAR)
        want = np.log(2 * np.pi) + 7 * np.log(2.0)
        assert logreg_expected(data, w, default_grid) == pytest.approx(want, abs=1e-9)

    def test_single_point_degenerate_scale(self, default_grid):
        data = GlmDataset(X=np.array([[0.5, -1.0]]), y=np.array([1.0]), kind="logistic")
        m = np.array([0.4, 0.2])
        w = Params(m, np.zeros((2, 2)), LOWER_TRIANGULAR)
        margin = data.y[0] * (data.X[0] @ m)
        want = 0.5 * m @ m + np.log(2 * np.pi) + np.log1p(np.exp(-margin))
        assert logreg_expected(data, w, default_grid) == pytest.approx(want, abs=1e-9)

    def test_grid_matches_direct_quadrature(self, default_grid):
        data = synth_dataset("logistic", 20, 3, seed=6)
        gridded = LogisticRegressionEnergy(data, grid=default_grid)
        direct = LogisticRegressionEnergy(data, quad_nodes=default_grid.quad_nodes)
        rng = np.random.default_rng(8)
        for _ in range(10):
            w = Params(0.5 * rng.normal(size=3), 0.4 * rand_lower(rng, 3), LOWER_TRIANGULAR)
            assert gridded.expected(w) == pytest.approx(direct.expected(w), abs=1e-6)

    def test_out_of_range_is_error(self, default_grid):
        data = synth_dataset("logistic", 5, 2, seed=7)
        w = Params(np.full(2, 100.0), np.eye(2), LOWER_TRIANGULAR)
        with pytest.raises(GridRangeError):
            logreg_expected(data, w, default_grid)

    def test_model_falls_back_to_quadrature_out_of_range(self, default_grid):
        data = synth_dataset("logistic", 5, 2, seed=7)
        gridded = LogisticRegressionEnergy(data, grid=default_grid)
        direct = LogisticRegressionEnergy(data, quad_nodes=default_grid.quad_nodes)
        w = Params(np.full(2, 100.0), 50.0 * np.eye(2), LOWER_TRIANGULAR)
        assert gridded.expected(w) == pytest.approx(direct.expected(w), rel=1e-12)

    @pytest.mark.parametrize("tag", [FULL, LOWER_TRIANGULAR])
    def test_gradient_matches_finite_differences(self, tag, logistic_model):
        rng = np.random.default_rng(9)
        d = logistic_model.dim
        C = rand_lower(rng, d) if tag == LOWER_TRIANGULAR else 0.5 * rng.normal(size=(d, d))
        w = Params(0.5 * rng.normal(size=d), 0.5 * C, tag)
        fd = finite_diff_grad(logistic_model.expected, w, h_step=1e-5)
        an = logistic_model.expected_grad(w)
        assert (fd - an).norm() / max(1.0, an.norm()) < 1e-5

    def test_pointwise_grad_matches_finite_differences(self):
        data = synth_dataset("logistic", 12, 3, seed=10)
        model = LogisticRegressionEnergy(data)
        rng = np.random.default_rng(11)
        z = rng.normal(size=3)
        h = 1e-6
        fd = np.array(
            [
                (model.value(z + h * e) - model.value(z - h * e)) / (2 * h)
                for e in np.eye(3)
            ]
        )
        assert np.allclose(model.grad(z), fd, rtol=1e-6, atol=1e-8)


class TestSmoothnessConstant:
    def test_identity_design(self):
        data = GlmDataset(X=np.eye(2), y=np.array([1.0, -1.0]), kind="linear")
        assert smoothness_constant(data) == pytest.approx(2.0)
        data = GlmDataset(X=np.eye(2), y=np.array([1.0, -1.0]), kind="logistic")
        assert smoothness_constant(data) == pytest.approx(1.25)

    @pytest.mark.parametrize("kind", ["linear", "logistic"])
    def test_dominates_pointwise_hessian(self, kind):
        data = synth_dataset(kind, 15, 3, seed=12)
        model = (
            LinearRegressionEnergy(data) if kind == "linear" else LogisticRegressionEnergy(data)
        )
        M = smoothness_constant(data)
        rng = np.random.default_rng(13)
        h = 1e-5
        for _ in range(50):
            z = rng.normal(size=3)
            H = np.array(
                [(model.grad(z + h * e) - model.grad(z - h * e)) / (2 * h) for e in np.eye(3)]
            )
            assert np.linalg.norm(H, 2) <= M * (1 + 1e-6)


class TestStructuralCertificatesPerModel:
    """Energy-level invariants: smoothness ratio, midpoint convexity, diagonal bound."""

    def _models(self, logistic_model):
        rng = np.random.default_rng(0)
        quad = QuadraticEnergy(2.0, rng.normal(size=3))
        lin = LinearRegressionEnergy(synth_dataset("linear", 30, 3, seed=14))
        return [quad, lin, logistic_model]

    def test_gradient_lipschitz_ratio(self, logistic_model):
        for model in self._models(logistic_model):
            rng = np.random.default_rng(15)
            base = standard_gaussian(model.dim)
            worst = 0.0
            for _ in range(1000):
                w, v = sample_pair(rng, model.dim)
                dist = (w - v).norm()
                if dist == 0:
                    continue
                ratio = (model.expected_grad(w, base) - model.expected_grad(v, base)).norm() / dist
                worst = max(worst, ratio)
            assert worst <= model.smoothness_M * (1 + 1e-9)

    def test_quadratic_ratio_is_exactly_curvature(self):
        q = QuadraticEnergy(2.0, np.array([1.0, 0.0, -1.0]))
        rng = np.random.default_rng(16)
        base = standard_gaussian(3)
        ratios = []
        for _ in range(200):
            w, v = sample_pair(rng, 3)
            dist = (w - v).norm()
            if dist == 0:
                continue
            ratios.append((q.expected_grad(w, base) - q.expected_grad(v, base)).norm() / dist)
        ratios = np.array(ratios)
        assert np.max(np.abs(ratios - q.a)) < 1e-6 * q.a

    def test_midpoint_convexity(self, logistic_model):
        for model in self._models(logistic_model):
            rng = np.random.default_rng(17)
            base = standard_gaussian(model.dim)
            c = model.strong_convexity_c
            for _ in range(200):
                w, v = sample_pair(rng, model.dim)
                alpha = rng.uniform()
                mid = alpha * w + (1 - alpha) * v

                def reduced(p):
                    return model.expected(p, base) - 0.5 * c * p.norm() ** 2

                gap = reduced(mid) - alpha * reduced(w) - (1 - alpha) * reduced(v)
                assert gap <= 1e-12

    def test_diagonal_scale_gradient_bound(self, logistic_model):
        for model in self._models(logistic_model):
            rng = np.random.default_rng(18)
            base = standard_gaussian(model.dim)
            M = model.smoothness_M
            for _ in range(100):
                diag = rng.uniform(0, 2, size=model.dim)
                diag[rng.random(model.dim) < 0.2] = 0.0
                w = Params(rng.uniform(-5, 5, size=model.dim), np.diag(diag), FULL)
                gC = model.expected_grad(w, base).C
                assert np.all(np.abs(np.diag(gC)) <= M * diag + 1e-9)

    def test_c_not_exceeding_m(self, logistic_model):
        for model in self._models(logistic_model):
            assert model.strong_convexity_c <= model.smoothness_M
