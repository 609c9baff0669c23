import mpmath
import numpy as np
import pytest

from codlab.fooling import (
    FoolingFunction,
    FoolingSpec,
    eval_fooling,
    eval_fooling_batch,
    h_cut,
    k_const,
    k_theta,
    tau,
    verify_cr_norm,
    verify_integral,
    verify_vanishing,
)
from codlab.geometry import torus_distances, unit_ball_volume


def make_function(n=16, d=3, r=1, seed=0, theta=None, mc_samples=2048):
    rng = np.random.default_rng(seed)
    theta = tau(d, r) if theta is None else theta
    spec = FoolingSpec(points=rng.random((n, d)), d=d, r=r, theta=theta)
    return FoolingFunction(spec=spec, mc_samples=mc_samples, base_seed=seed)


class TestConstants:
    @pytest.mark.parametrize("d,expected", [
        (1, 1.0), (2, 4.0 / np.pi), (3, 1.5)])
    def test_k_const(self, d, expected):
        assert k_const(d) == pytest.approx(expected, rel=1e-14)

    def test_tau_d1(self):
        assert tau(1, 1) == pytest.approx(1.0 / 84.0, rel=1e-12)

    def test_tau_d3_high_precision(self):
        # independent high-precision evaluation of the defining minimum
        with mpmath.workprec(120):
            omega3 = mpmath.pi ** mpmath.mpf("1.5") / mpmath.gamma(mpmath.mpf("2.5"))
            first = (1 / mpmath.mpf(21)) * (1 / (2 * omega3)) ** (mpmath.mpf(1) / 3)
            expected = float(min(first, mpmath.mpf(3) / 2))
        assert tau(3, 1) == pytest.approx(expected, rel=1e-12)

    def test_tau_picks_first_branch_when_smaller(self):
        for d in (1, 2, 3, 5):
            first = (1.0 / 21) * (1.0 / (2 * unit_ball_volume(d))) ** (1.0 / d)
            if first < k_const(d):
                assert tau(d, 1) == pytest.approx(first)

    def test_k_theta_values(self):
        assert k_theta(1.0 / 84, 1, 1) == pytest.approx(1.0 / 168, rel=1e-12)
        t3 = tau(3, 1)
        assert k_theta(t3, 3, 1) == pytest.approx(t3 / 3.0, rel=1e-12)

    def test_k_theta_homogeneity(self):
        d, r = 5, 2
        theta = tau(d, r) / 2
        assert k_theta(2 * theta, d, r) == pytest.approx(
            2 ** r * k_theta(theta, d, r), rel=1e-12)

    def test_k_theta_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            k_theta(tau(3, 1) * 1.1, 3, 1)
        with pytest.raises(ValueError):
            k_theta(0.0, 3, 1)


class TestSpecValidation:
    def test_r_too_large(self):
        with pytest.raises(ValueError):
            FoolingSpec(points=np.random.default_rng(0).random((4, 3)),
                        d=3, r=2, theta=0.01)

    def test_theta_too_large(self):
        with pytest.raises(ValueError):
            FoolingSpec(points=np.random.default_rng(0).random((4, 3)),
                        d=3, r=1, theta=1.0)

    def test_radii_relations(self):
        f = make_function()
        spec = f.spec
        assert spec.rho == spec.eps_n
        assert spec.rho_prime == pytest.approx(3 * spec.eps_n)
        assert 2 * spec.rho_prime + spec.rho == pytest.approx(7 * spec.eps_n)


class TestHCut:
    def setup_method(self):
        rng = np.random.default_rng(1)
        self.spec = FoolingSpec(points=np.array([[0.5, 0.5, 0.5]]),
                                d=3, r=1, theta=tau(3, 1))

    def _at_distance(self, dist):
        return np.array([0.5 + dist, 0.5, 0.5])

    def test_zero_inside_cutoff_radius(self):
        assert h_cut(self._at_distance(0.5 * self.spec.rho_prime), self.spec) == 0.0

    def test_half_at_three_halves(self):
        x = self._at_distance(1.5 * self.spec.rho_prime)
        assert h_cut(x, self.spec) == pytest.approx(0.5, rel=1e-12)

    def test_clamps_to_one(self):
        assert h_cut(self._at_distance(2.5 * self.spec.rho_prime), self.spec) == 1.0


class TestEvalExactRegions:
    def test_vanishes_on_balls(self):
        f = make_function(n=8, seed=2)
        rng = np.random.default_rng(3)
        for center in f.spec.points:
            offset = rng.standard_normal(3)
            offset *= 0.9 * f.spec.rho / np.linalg.norm(offset)
            x = np.mod(center + offset, 1.0)
            assert eval_fooling(x, f) == 0.0

    def test_plateau_is_exact_scale(self):
        f = make_function(n=8, seed=2)
        rng = np.random.default_rng(4)
        pts = rng.random((4000, 3))
        mind = torus_distances(pts, f.spec.points).min(axis=1)
        far = pts[mind >= 2 * f.spec.rho_prime + f.spec.rho]
        assert far.shape[0] > 0
        for x in far[:20]:
            assert eval_fooling(x, f) == f.scale

    def test_range(self):
        f = make_function(n=8, seed=5)
        rng = np.random.default_rng(6)
        values = eval_fooling_batch(rng.random((500, 3)), f, rng=rng)
        assert np.all(values >= 0.0)
        assert np.all(values <= f.scale + 1e-15)

    def test_scale_bound_identity(self):
        # K * n^(-r/d) equals half the plateau value, exactly
        for n in (4, 16, 64):
            f = make_function(n=n, seed=7)
            spec = f.spec
            lhs = k_theta(spec.theta, spec.d, spec.r) * n ** (-spec.r / spec.d)
            assert lhs == pytest.approx(f.scale / 2.0, rel=1e-12)

    def test_determinism(self):
        f = make_function(n=8, seed=8)
        x = np.array([0.21, 0.43, 0.65])
        assert eval_fooling(x, f) == eval_fooling(x, f)

    def test_rejects_points_outside_cube(self):
        f = make_function(n=8, seed=8)
        with pytest.raises(ValueError):
            eval_fooling(np.array([1.2, 0.5, 0.5]), f)


class TestVerifiers:
    def test_vanishing_no_violations(self):
        f = make_function(n=8, seed=9)
        report = verify_vanishing(f, probes_per_ball=50,
                                  rng=np.random.default_rng(10))
        assert report["violations"] == 0

    def test_vanishing_single_point_spec(self):
        rng = np.random.default_rng(11)
        spec = FoolingSpec(points=rng.random((1, 3)), d=3, r=1, theta=tau(3, 1))
        f = FoolingFunction(spec=spec, mc_samples=512, base_seed=0)
        assert verify_vanishing(f, 100, rng)["violations"] == 0

    def test_vanishing_rejects_zero_probes(self):
        with pytest.raises(ValueError):
            verify_vanishing(make_function(), 0, np.random.default_rng(0))

    def test_integral_floor(self):
        f = make_function(n=16, seed=12)
        report = verify_integral(f, outer_samples=5000,
                                 rng=np.random.default_rng(13))
        assert report["estimate"] + 3 * report["stderr"] >= report["bound"]
        assert report["floor"] >= report["bound"] - 1e-15

    def test_integral_bound_value(self):
        f = make_function(n=64, seed=14)
        report = verify_integral(f, outer_samples=1000,
                                 rng=np.random.default_rng(15))
        assert report["bound"] == pytest.approx(
            k_theta(tau(3, 1), 3, 1) * 64 ** (-1.0 / 3.0), rel=1e-12)

    def test_excluded_volume_below_half(self):
        # the tau cap guarantees n * omega_d * (21 eps_n)^d <= 1/2
        for n in (1, 16, 256):
            f = make_function(n=n, seed=16)
            spec = f.spec
            excluded = n * unit_ball_volume(3) * (21 * spec.eps_n) ** 3
            assert excluded <= 0.5 + 1e-12

    def test_integral_rejects_small_budget(self):
        with pytest.raises(ValueError):
            verify_integral(make_function(), 10, np.random.default_rng(0))

    def test_cr_norm_below_one(self):
        f = make_function(n=16, seed=17)
        fd_step = 1e-3 * f.spec.rho
        report = verify_cr_norm(f, fd_step=fd_step, probe_count=30,
                                rng=np.random.default_rng(18))
        tol = 10 * fd_step / f.spec.rho
        assert report["max_derivative_estimate"] <= 1.0 + tol

    def test_cr_norm_plateau_derivatives_vanish(self):
        rng = np.random.default_rng(19)
        spec = FoolingSpec(points=np.array([[0.5, 0.5, 0.5]]),
                           d=3, r=1, theta=tau(3, 1))
        f = FoolingFunction(spec=spec, mc_samples=512, base_seed=1)
        # probes far from the single center sit on the constant plateau
        from codlab.fooling import kernel_shifts, _central_difference
        shifts = kernel_shifts(spec, 512, rng)
        probes = np.array([[0.0, 0.0, 0.0], [0.1, 0.9, 0.1]])

        def evaluate(pts):
            return eval_fooling_batch(pts, f, shifts=shifts)

        for beta in [(1, 0, 0), (0, 1, 0), (0, 0, 1)]:
            est = _central_difference(evaluate, probes, beta, 1e-4 * spec.rho)
            assert np.abs(est).max() == 0.0

    def test_cr_norm_rejects_bad_step(self):
        with pytest.raises(ValueError):
            verify_cr_norm(make_function(), 0.0, 10, np.random.default_rng(0))


class TestSerialization:
    def test_roundtrip(self):
        f = make_function(n=4, seed=20)
        g = FoolingFunction.from_json(f.to_json())
        np.testing.assert_array_equal(f.spec.points, g.spec.points)
        assert (f.spec.d, f.spec.r, f.spec.theta) == (g.spec.d, g.spec.r, g.spec.theta)
        assert (f.mc_samples, f.base_seed) == (g.mc_samples, g.base_seed)
        x = np.array([0.3, 0.3, 0.3])
        assert eval_fooling(x, f) == eval_fooling(x, g)
