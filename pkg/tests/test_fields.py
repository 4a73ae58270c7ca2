import math

import numpy as np
import pytest

from eulercert.catalog import ij_vortex, twin_wave
from eulercert.expressions import Jet2, eval_jet, parse
from eulercert.fields import (
    BlowupTime,
    FieldError,
    HalfSpaceBoundary,
    InadmissiblePointError,
    MovingLine,
    MovingPoint,
    SpaceTimePoint,
    pressure_value,
    radial_field_jet,
    vorticity,
)
from eulercert.verification import SampleRegion, sample_points


def pt(*x, t=0.0):
    return SpaceTimePoint(tuple(x), t)


class TestRadialFieldJet:
    def test_rigid_rotation(self):
        # phi == 1 gives the solid-body field (x2, -x1)
        Y = np.array([[0.0, 1.0]])
        r = np.array([1.0])
        phi = Jet2(np.array([1.0]), np.array([0.0]), np.array([0.0]))
        value, jac, lap = radial_field_jet(phi, Y, r)
        assert value[0].tolist() == [1.0, 0.0]
        assert jac[0].tolist() == [[0.0, 1.0], [-1.0, 0.0]]
        assert lap[0].tolist() == [0.0, 0.0]

    def test_inverse_square_profile_value(self):
        Y = np.array([[1.0, 0.0]])
        r = np.array([1.0])
        phi = Jet2(np.array([1.0]), np.array([-2.0]), np.array([6.0]))  # r^-2 jet at r=1
        value, _, _ = radial_field_jet(phi, Y, r)
        assert value[0].tolist() == [0.0, -1.0]

    def test_jacobian_matches_finite_differences(self):
        # phi = 1/(1+r^2)^2 at the point (0, 1)
        ast = parse("1/(1+r^2)^2", "r")

        def field(y1, y2):
            r = math.hypot(y1, y2)
            phi = eval_jet(ast, Jet2.variable(r)).value
            return np.array([phi * y2, -phi * y1])

        Y = np.array([[0.0, 1.0]])
        r = np.array([1.0])
        phi = eval_jet(ast, Jet2.variable(r))
        _, jac, _ = radial_field_jet(phi, Y, r)
        h = 1e-6
        fd = np.empty((2, 2))
        fd[:, 0] = (field(h, 1.0) - field(-h, 1.0)) / (2 * h)
        fd[:, 1] = (field(0.0, 1.0 + h) - field(0.0, 1.0 - h)) / (2 * h)
        assert np.max(np.abs(jac[0] - fd) / (1.0 + np.abs(fd))) <= 1e-6


class TestVorticity:
    def test_rigid_rotation_constant(self):
        sol = ij_vortex("0", "1")  # g == 1: solid-body rotation
        for p in (pt(0.0, 1.0), pt(2.0, -1.5, t=0.3), pt(-0.7, 0.4)):
            assert vorticity(sol, p) == pytest.approx(-2.0, abs=1e-12)

    def test_twin_wave_matches_profile_derivative(self):
        c1, c2, c3 = 1.0, 0.0, 2.0
        sol = twin_wave("1/(1+x^2)^2", c1, c2, c3)
        vp_ast = parse("1/(1+x^2)^2", "x")
        for p in (pt(0.5, 0.2, t=0.1), pt(-1.0, 2.0, t=0.7)):
            xi = c3 * p.x[0] - p.x[1] - (c3 * c1 - c2) * p.t
            vp = eval_jet(vp_ast, Jet2.variable(xi)).d1
            assert vorticity(sol, p) == pytest.approx((c3**2 + 1.0) * vp, rel=1e-12)

    def test_constant_field_has_zero_vorticity(self):
        sol = twin_wave("0", 1.0, 2.0, 1.0)
        assert vorticity(sol, pt(0.3, 0.4, t=0.2)) == 0.0

    def test_dimension_guard(self):
        from eulercert.catalog import linear3d

        sol = linear3d("1", np.diag([1.0, 1.0, -2.0]))
        with pytest.raises(FieldError):
            vorticity(sol, pt(1.0, 1.0, 1.0))


class TestPressureValue:
    def test_radial_antiderivative_closed_form(self):
        # g = 1/(1+r^2)^2 integrates to F(r) = -1/(6 (1+r^2)^3) + const
        sol = ij_vortex("1", "-1/r^2 + 1/(1+r^2)^2")
        p1 = pressure_value(sol, pt(0.0, 1.0)).value
        p2 = pressure_value(sol, pt(0.0, 2.0)).value
        assert p1 - p2 == pytest.approx(-1.0 / 48.0 + 1.0 / 750.0, abs=1e-10)

    def test_inverse_square_family_radial_part(self):
        # F(r, t) + (t-1)^2 / (2 r^2) is independent of r
        sol = ij_vortex("t", "-1/r^2")
        t = 0.25
        vals = []
        for r in (1.0, 1.5, 2.0):
            p = pressure_value(sol, SpaceTimePoint((0.0, r), t)).value
            vals.append(p + (t - 1.0) ** 2 / (2.0 * r * r))
        assert max(vals) - min(vals) <= 1e-10

    def test_constant_circulation_has_no_angular_part(self):
        sol = ij_vortex("1", "-1/r^2 + 1/(1+r^2)^2")
        r = 1.3
        a = pressure_value(sol, pt(r * math.sin(0.3), r * math.cos(0.3))).value
        b = pressure_value(sol, pt(r * math.sin(1.2), r * math.cos(1.2))).value
        assert a == pytest.approx(b, abs=1e-12)

    def test_value_consistent_with_gradient(self):
        sol = ij_vortex("t", "-1/r^2")
        x = np.array([0.8, 1.1])
        t = 0.4
        grad = sol.pressure_gradient(x[None, :], np.array([t]))[0]
        h = 1e-6
        for j in range(2):
            step = np.zeros(2)
            step[j] = h
            pp = sol.pressure_value((x + step)[None, :], np.array([t]))[0]
            pm = sol.pressure_value((x - step)[None, :], np.array([t]))[0]
            assert (pp - pm) / (2 * h) == pytest.approx(grad[j], rel=1e-6, abs=1e-7)

    def test_gradient_is_curl_free(self):
        sol = ij_vortex("t", "-1/r^2")
        rng = np.random.default_rng(5)
        for _ in range(50):
            x = rng.uniform(0.5, 3.0, size=2)
            t = rng.uniform(0.0, 1.0)
            h = 1e-5

            def grad(y1, y2):
                return sol.pressure_gradient(np.array([[y1, y2]]), np.array([t]))[0]

            d1_of_p2 = (grad(x[0] + h, x[1])[1] - grad(x[0] - h, x[1])[1]) / (2 * h)
            d2_of_p1 = (grad(x[0], x[1] + h)[0] - grad(x[0], x[1] - h)[0]) / (2 * h)
            assert abs(d1_of_p2 - d2_of_p1) <= 1e-6

    def test_branch_plane_rejected(self):
        sol = ij_vortex("t", "-1/r^2")
        with pytest.raises(InadmissiblePointError):
            pressure_value(sol, pt(1.0, 0.0))


class TestSpaceTimePoint:
    def test_dimension_validation(self):
        with pytest.raises(FieldError):
            SpaceTimePoint((1.0,), 0.0)
        with pytest.raises(FieldError):
            SpaceTimePoint((1.0, 2.0, 3.0, 4.0), 0.0)

    def test_finite_validation(self):
        with pytest.raises(FieldError):
            SpaceTimePoint((math.nan, 0.0), 0.0)


class TestSingularPrimitives:
    def test_moving_point_distance_zero_on_locus(self):
        p = MovingPoint((1.0, 0.0), (2.0, -1.0))
        X = np.array([[1.0 + 2.0 * 0.5, -0.5]])
        assert p.distance(X, np.array([0.5]))[0] == 0.0

    def test_moving_line_distance_is_euclidean(self):
        line = MovingLine((1.0, -1.0), 0.0, 0.0)
        X = np.array([[1.0, 0.0]])
        assert line.distance(X, np.array([0.0]))[0] == pytest.approx(math.sqrt(0.5))

    def test_blowup_time_excludes_beyond(self):
        b = BlowupTime(1.0)
        X = np.zeros((1, 2))
        assert bool(b.excludes(X, np.array([1.5]), 0.01)[0])
        assert bool(b.excludes(X, np.array([0.995]), 0.01)[0])
        assert not bool(b.excludes(X, np.array([0.9]), 0.01)[0])

    def test_halfspace_excludes_outside(self):
        hs = HalfSpaceBoundary((0.0, 0.0, 0.0))
        X = np.array([[-1.0, 0.0, 0.0], [1.0, 1.0, 1.0]])
        T = np.zeros(2)
        ex = hs.excludes(X, T, 0.01)
        assert bool(ex[0]) and not bool(ex[1])

    def test_boosted_line_follows_frame(self):
        line = MovingLine((0.0, 1.0), 0.0, 0.0).boosted(np.array([0.0, 2.0]))
        # locus x2 = 2t
        X = np.array([[5.0, 1.0]])
        assert line.distance(X, np.array([0.5]))[0] == 0.0


class TestSampling:
    def test_branch_cut_does_not_reject_samples(self):
        # the pressure-only cut must not shrink the certification region
        sol = ij_vortex("t", "-1/r^2")
        region = SampleRegion(box=((-3.0, 3.0), (-3.0, 3.0)), time=(0.0, 1.0),
                              count=500, seed=2)
        pts = sample_points(region, sol.singular, exclusion_radius=0.3)
        assert any(abs(p.x[1]) < 0.05 for p in pts)
        assert all(math.hypot(*p.x) >= 0.3 for p in pts)
