"""Tests for Gaussian-process fitting and prediction."""

import numpy as np
import pytest

from mobo.doe import BoxDomain, Dataset, lhs_sample
from mobo.surrogate import (
    KERNELS,
    FitError,
    GaussianProcess,
    GpConfig,
    SurrogateBundle,
    _assemble,
    fit,
    fit_bundle,
)


def training_design(count=12, d=2, seed=3):
    return lhs_sample(BoxDomain(np.zeros(d), np.ones(d)), count, seed)


class TestKernels:
    def test_unit_at_zero(self):
        for kern in KERNELS.values():
            assert kern(np.array(0.0)) == pytest.approx(1.0)

    def test_squared_exponential_hand_value(self):
        assert KERNELS["squared_exponential"](np.array(1.0)) == pytest.approx(np.exp(-0.5))

    def test_monotone_decay(self):
        r = np.linspace(0.0, 5.0, 50)
        for kern in KERNELS.values():
            v = kern(r)
            assert np.all(np.diff(v) <= 1e-15)
            assert np.all(v > 0)


class TestFit:
    def test_interpolation_within_nugget_tolerance(self):
        x = training_design()
        y = np.sin(3 * x[:, 0]) + x[:, 1] ** 2
        gp = fit(x, y, GpConfig(seed=0))
        mu, sd = gp.predict_batch(x)
        tol = np.sqrt(gp.nugget * gp.signal_variance) * gp.y_std * (1 + 1e-6)
        assert np.max(np.abs(mu - y)) <= 10 * tol
        # predictive sd at training points is bounded by the nugget floor
        assert np.all(sd <= np.sqrt(gp.nugget * gp.signal_variance) * gp.y_std * (1 + 1e-3))

    def test_prior_reversion_far_from_data(self):
        # All data in a small corner; predict far outside its range.
        x = 0.01 * training_design()
        y = 5.0 + np.sin(20 * x[:, 0])
        gp = fit(x, y, GpConfig(seed=1))
        mu, sd = gp.predict(np.array([1e3, -1e3]))
        trend = gp.y_mean + gp.y_std * gp.mean
        assert mu == pytest.approx(trend, abs=1e-6 * max(1, abs(trend)))
        assert sd == pytest.approx(np.sqrt(gp.signal_variance) * gp.y_std, rel=1e-6)

    def test_constant_targets_exact(self):
        x = training_design(8)
        y = np.full(8, 3.25)
        gp = fit(x, y, GpConfig(seed=2))
        mu, _ = gp.predict(np.array([0.3, 0.7]))
        assert mu == pytest.approx(3.25, abs=1e-7)

    def test_three_point_parabola_midpoint(self):
        # Small-data sanity: interpolating y = x^2 at {0, 1/2, 1} should put
        # the prediction at x = 1/4 near the true 1/16, not at the data mean.
        x = np.array([[0.0], [0.5], [1.0]])
        gp = fit(x, x[:, 0] ** 2, GpConfig(seed=0))
        mu, _ = gp.predict(np.array([0.25]))
        assert abs(mu - 0.0625) < 0.05

    def test_deterministic_per_seed(self):
        x = training_design()
        y = x[:, 0] * x[:, 1]
        a = fit(x, y, GpConfig(seed=7))
        b = fit(x, y, GpConfig(seed=7))
        np.testing.assert_array_equal(a.lengthscales, b.lengthscales)
        assert a.signal_variance == b.signal_variance

    def test_monotone_nugget_effect(self):
        x = training_design()
        y = np.cos(4 * x[:, 0])
        gp = fit(x, y, GpConfig(seed=4))
        kwargs = dict(kernel=gp.kernel, lengthscales=gp.lengthscales,
                      signal_variance=gp.signal_variance, mean=gp.mean,
                      x_lower=gp.x_lower, x_upper=gp.x_upper,
                      y_mean=gp.y_mean, y_std=gp.y_std,
                      x_train=gp.x_train, y_train=gp.y_train)
        small = _assemble(nugget=1e-8, **kwargs)
        large = _assemble(nugget=1e-4, **kwargs)
        pts = (gp.x_lower + (gp.x_upper - gp.x_lower) * gp.x_train)
        _, sd_small = small.predict_batch(pts)
        _, sd_large = large.predict_batch(pts)
        assert np.all(sd_large >= sd_small - 1e-15)

    def test_predictive_accuracy_between_points(self):
        x = training_design(25, seed=11)
        y = np.sin(4 * x[:, 0]) * np.cos(2 * x[:, 1])
        gp = fit(x, y, GpConfig(seed=5))
        probe = training_design(50, seed=99)
        truth = np.sin(4 * probe[:, 0]) * np.cos(2 * probe[:, 1])
        mu, _ = gp.predict_batch(probe)
        rmse = np.sqrt(np.mean((mu - truth) ** 2))
        assert rmse < 0.05

    def test_both_kernels_fit(self):
        x = training_design()
        y = x[:, 0] + x[:, 1]
        for kernel in ("matern52", "squared_exponential"):
            gp = fit(x, y, GpConfig(kernel=kernel, seed=0))
            assert gp.kernel == kernel

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            fit(np.array([[0.1, 0.2]]), np.array([1.0]))
        with pytest.raises(ValueError):
            fit(np.array([[0.1], [0.1]]), np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            fit(np.array([[0.1], [0.9]]), np.array([1.0, np.nan]))

    def test_json_round_trip(self):
        x = training_design()
        y = np.exp(x[:, 0]) - x[:, 1]
        gp = fit(x, y, GpConfig(seed=6))
        back = GaussianProcess.from_json(gp.to_json())
        probe = training_design(20, seed=42)
        mu_a, sd_a = gp.predict_batch(probe)
        mu_b, sd_b = back.predict_batch(probe)
        np.testing.assert_allclose(mu_b, mu_a, rtol=1e-12)
        np.testing.assert_allclose(sd_b, sd_a, rtol=1e-12)


class TestFitBundle:
    def make_dataset(self, rows=10):
        dom = BoxDomain(np.zeros(2), np.ones(2))
        pts = training_design(rows, seed=8)
        ds = Dataset.empty(dom, n=2, p=1, m=1)
        for p in pts:
            ds = ds.append(p, [p[0], p[0] * p[1]], g=[p[1] - 0.5], h=[p[0] - p[1]])
        return ds

    def test_shapes_and_moments(self):
        bundle = fit_bundle(self.make_dataset(), GpConfig(seed=0))
        assert isinstance(bundle, SurrogateBundle)
        assert len(bundle.objectives) == 2
        assert len(bundle.ineq_constraints) == 1
        assert len(bundle.eq_constraints) == 1
        x = np.array([0.4, 0.6])
        mu_f, sd_f = bundle.objective_moments(x)
        assert mu_f.shape == (2,) and np.all(sd_f >= 0)
        mu_g, _ = bundle.ineq_moments(x)
        assert mu_g.shape == (1,)

    def test_unconstrained_moments_empty(self):
        dom = BoxDomain(np.zeros(2), np.ones(2))
        ds = Dataset.empty(dom, n=2, p=0, m=0)
        for p in training_design(6, seed=1):
            ds = ds.append(p, [p[0], p[1]])
        bundle = fit_bundle(ds, GpConfig(seed=0))
        mu_g, sd_g = bundle.ineq_moments(np.array([0.5, 0.5]))
        assert mu_g.size == 0 and sd_g.size == 0

    def test_fit_error_identifies_output(self):
        ds = self.make_dataset()
        bad = Dataset(ds.domain, ds.points, ds.objectives,
                      np.full_like(ds.ineq_constraints, np.nan), ds.eq_constraints)
        with pytest.raises(FitError, match="g1"):
            fit_bundle(bad, GpConfig(seed=0))

    def test_deterministic(self):
        ds = self.make_dataset()
        a = fit_bundle(ds, GpConfig(seed=3))
        b = fit_bundle(ds, GpConfig(seed=3))
        for ga, gb in zip(a.all_gps, b.all_gps):
            np.testing.assert_array_equal(ga.lengthscales, gb.lengthscales)

    def test_too_small_dataset(self):
        dom = BoxDomain(np.zeros(2), np.ones(2))
        ds = Dataset.empty(dom, n=1).append([0.5, 0.5], [1.0])
        with pytest.raises(ValueError):
            fit_bundle(ds)
