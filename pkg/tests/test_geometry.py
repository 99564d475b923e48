import cmath
import math

import numpy as np
import pytest

from cftbench.errors import InvalidArc, PoleError, SingularPoint
from cftbench.geometry import (
    Arc,
    MobiusElement,
    dilation,
    dilation_apply,
    dilation_cocycle,
    dilation_complex,
    exterior_strip_map,
    flow_orbit_point,
    strip_map,
    x_cocycle,
)

RNG = np.random.default_rng(20240 + 7)


def su11_matrix(g):
    return np.array([[g.a, np.conj(g.b)], [g.b, np.conj(g.a)]])


def cocycle_fd(gamma, theta, h=1e-5):
    """Finite-difference oracle for -i d/dtheta log gamma(e^{i theta})."""
    lo = cmath.log(gamma.apply(cmath.exp(1j * (theta - h))))
    hi = cmath.log(gamma.apply(cmath.exp(1j * (theta + h))))
    diff = hi - lo
    # unwrap a possible branch jump of the log
    if abs(diff.imag) > math.pi:
        diff -= 2j * math.pi * round(diff.imag / (2 * math.pi))
    return -1j * diff / (2 * h)


def random_element(rng):
    b = (rng.normal() + 1j * rng.normal()) * 0.4
    phase = cmath.exp(1j * rng.uniform(0, 2 * math.pi))
    a = phase * math.sqrt(1.0 + abs(b) ** 2)
    return MobiusElement(a, b)


class TestDilation:
    def test_t_zero_is_identity(self):
        g = dilation(0.0)
        assert g.approx_equal(MobiusElement.identity())
        for z in [1j, cmath.exp(0.3j), -1j]:
            assert abs(g.apply(z) - z) < 1e-15

    def test_fixes_plus_minus_one(self):
        g = dilation(0.7)
        assert abs(g.apply(1.0) - 1.0) < 1e-14
        assert abs(g.apply(-1.0) + 1.0) < 1e-14

    def test_group_law_matrix_oracle(self):
        s, t = 0.3, -1.1
        prod = dilation(s) @ dilation(t)
        oracle = su11_matrix(dilation(s)) @ su11_matrix(dilation(t))
        direct = su11_matrix(dilation(s + t))
        assert np.allclose(su11_matrix(prod), oracle, atol=1e-14)
        assert np.allclose(oracle, direct, atol=1e-12)

    @pytest.mark.parametrize("s", [-3.0, -0.4, 0.0, 0.9, 3.0])
    @pytest.mark.parametrize("t", [-2.5, 0.1, 2.0])
    def test_group_law_sweep(self, s, t):
        assert (dilation(s) @ dilation(t)).approx_equal(dilation(s + t), tol=1e-12)

    def test_boundary_preservation(self):
        thetas = RNG.uniform(0, 2 * math.pi, size=50)
        for t in [-3.0, -0.7, 0.3, 2.9]:
            z = dilation(t).apply(np.exp(1j * thetas))
            assert np.max(np.abs(np.abs(z) - 1.0)) < 1e-12

    def test_preserves_upper_semicircle(self):
        upper = Arc.upper()
        z = dilation(1.3).apply(np.exp(1j * upper.angles(40)))
        assert np.all(z.imag > 0)
        assert upper.map(dilation(1.3)).approx_equal(upper)


class TestDilationComplex:
    def test_ipi_is_inversion(self):
        # v_{i pi}(i) = 1/i = -i
        assert abs(dilation_complex(1j * math.pi, 1j) - (-1j)) < 1e-14
        zs = np.exp(1j * RNG.uniform(0, 2 * math.pi, size=20))
        vals = dilation_apply(1j * math.pi, zs)
        assert np.max(np.abs(vals - 1.0 / zs)) < 1e-13

    def test_real_tau_matches_dilation(self):
        t = -0.8
        zs = np.exp(1j * np.linspace(0, 2 * math.pi, 64, endpoint=False))
        assert np.max(np.abs(dilation_apply(t, zs) - dilation(t).apply(zs))) < 1e-13

    def test_minus_tau_maps_upper_arc_outside_disk(self):
        # 200 random (tau, z) with tau in the strip and z in the open upper semicircle
        taus = RNG.uniform(-2, 2, 200) + 1j * RNG.uniform(0, math.pi, 200)
        zs = np.exp(1j * RNG.uniform(1e-3, math.pi - 1e-3, 200))
        for tau, z in zip(taus, zs):
            w = dilation_complex(-tau, z)
            assert abs(w) >= 1.0 - 1e-12

    def test_pole_raises(self):
        # denominator -sinh(tau/2) z + cosh(tau/2) = 0 at z = coth(tau/2)
        tau = 0.6 + 0.4j
        z_pole = cmath.cosh(tau / 2) / cmath.sinh(tau / 2)
        with pytest.raises(PoleError):
            dilation_complex(tau, z_pole)

    def test_strip_consistency_shift_by_ipi(self):
        # v_{t + i pi}(z) = v_t(1/z)
        ts = RNG.uniform(-2, 2, size=10)
        zs = np.exp(1j * RNG.uniform(0, 2 * math.pi, size=10))
        for t in ts:
            lhs = dilation_apply(t + 1j * math.pi, zs)
            rhs = dilation(t).apply(1.0 / zs)
            assert np.max(np.abs(lhs - rhs)) < 1e-11


class TestCocycle:
    def test_rotation_is_one(self):
        g = MobiusElement.rotation(0.9)
        zs = np.exp(1j * RNG.uniform(0, 2 * math.pi, size=20))
        assert np.max(np.abs(x_cocycle(g, zs) - 1.0)) < 1e-14

    def test_dilation_closed_form(self):
        # X_{v_t}(v_{-t}(z)) = cosh(t) + Re(z) sinh(t)
        t, z = 0.5, cmath.exp(1j * math.pi / 3)
        lhs = x_cocycle(dilation(t), dilation(-t).apply(z))
        rhs = math.cosh(t) + z.real * math.sinh(t)
        assert abs(lhs - rhs) < 1e-13
        assert abs(dilation_cocycle(t, z) - rhs) < 1e-14

    def test_matches_finite_difference_oracle(self):
        for _ in range(25):
            g = random_element(RNG)
            theta = RNG.uniform(0, 2 * math.pi)
            exact = x_cocycle(g, cmath.exp(1j * theta))
            assert abs(exact - cocycle_fd(g, theta)) < 1e-8

    def test_chain_rule(self):
        for _ in range(30):
            g, d = random_element(RNG), random_element(RNG)
            z = cmath.exp(1j * RNG.uniform(0, 2 * math.pi))
            lhs = x_cocycle(g @ d, z)
            rhs = x_cocycle(g, d.apply(z)) * x_cocycle(d, z)
            assert abs(lhs - rhs) < 1e-11

    def test_positive_on_circle_for_real_elements(self):
        zs = np.exp(1j * RNG.uniform(0, 2 * math.pi, size=100))
        for t in [-2.0, -0.3, 1.1, 2.7]:
            vals = x_cocycle(dilation(t), zs)
            assert np.max(np.abs(vals.imag)) < 1e-12
            assert np.all(vals.real > 0)


class TestStripMap:
    def test_alpha_at_i_is_zero(self):
        assert abs(strip_map(1j)) < 1e-15

    def test_real_on_upper_semicircle(self):
        assert abs(strip_map(cmath.exp(1j * math.pi / 4)).imag) < 1e-14
        thetas = RNG.uniform(1e-3, math.pi - 1e-3, size=30)
        w = strip_map(np.exp(1j * thetas))
        assert np.max(np.abs(w.imag)) < 1e-12

    def test_i_pi_on_lower_semicircle(self):
        thetas = RNG.uniform(math.pi + 1e-3, 2 * math.pi - 1e-3, size=30)
        w = strip_map(np.exp(1j * thetas))
        assert np.max(np.abs(w.imag - math.pi)) < 1e-12

    def test_interior_lands_in_strip(self):
        r = RNG.uniform(0, 0.999, size=200)
        th = RNG.uniform(0, 2 * math.pi, size=200)
        w = strip_map(r * np.exp(1j * th))
        assert np.all(w.imag >= -1e-12) and np.all(w.imag <= math.pi + 1e-12)

    def test_flow_compatibility(self):
        # v_{alpha(z)}(i) = z on the open upper semicircle
        for _ in range(20):
            z = cmath.exp(1j * RNG.uniform(1e-2, math.pi - 1e-2))
            s = strip_map(z)
            assert abs(dilation_complex(s, 1j) - z) < 1e-12

    def test_singular_points_raise(self):
        with pytest.raises(SingularPoint):
            strip_map(1.0)
        with pytest.raises(SingularPoint):
            strip_map(-1.0)


class TestExteriorStripMap:
    def test_real_on_upper_lower_shifted(self):
        up = exterior_strip_map(np.exp(1j * RNG.uniform(1e-3, math.pi - 1e-3, 30)))
        assert np.max(np.abs(up.imag)) < 1e-12
        lo = exterior_strip_map(np.exp(1j * RNG.uniform(math.pi + 1e-3, 2 * math.pi - 1e-3, 30)))
        assert np.max(np.abs(lo.imag + math.pi)) < 1e-12

    def test_translates_under_flow(self):
        # A(v_s(z)) = A(z) + s for exterior points
        for _ in range(30):
            z = RNG.uniform(1.0, 4.0) * cmath.exp(1j * RNG.uniform(0, 2 * math.pi))
            s = RNG.uniform(-1.5, 1.5)
            assert abs(exterior_strip_map(dilation(s).apply(z)) - exterior_strip_map(z) - s) < 1e-10

    def test_orbit_point_inverts_map(self):
        ss = RNG.uniform(-2.5, 2.5, size=25)
        pts = flow_orbit_point(ss)
        assert np.max(np.abs(exterior_strip_map(pts) + ss)) < 1e-11
        assert np.max(np.abs(strip_map(pts) + ss)) < 1e-11

    def test_infinity(self):
        assert abs(exterior_strip_map(np.inf + 0j) - (-1j * math.pi / 2)) < 1e-14


class TestArc:
    def test_invalid(self):
        with pytest.raises(InvalidArc):
            Arc(0.3, 0.3)
        with pytest.raises(InvalidArc):
            Arc(0.0, 2.0 * math.pi)

    def test_membership_open(self):
        a = Arc(0.0, math.pi)
        assert a.contains_angle(math.pi / 2)
        assert not a.contains_angle(0.0)
        assert not a.contains_angle(math.pi)
        assert not a.contains_angle(3 * math.pi / 2)

    def test_subset_and_complement(self):
        a = Arc(0.2, 1.5)
        assert a.is_subset(Arc.upper())
        assert not Arc.upper().is_subset(a)
        assert a.complement().length == pytest.approx(2 * math.pi - a.length)
        assert Arc.upper().complement().approx_equal(Arc.lower())

    def test_map_under_rotation_and_dilation(self):
        a = Arc(0.3, 1.1)
        rot = a.map(MobiusElement.rotation(0.5))
        assert rot.approx_equal(Arc(0.8, 1.6))
        img = a.map(dilation(0.9))
        assert img.is_subset(Arc.upper())

    def test_conjugate(self):
        assert Arc(0.2, 0.9).conjugate().approx_equal(Arc(-0.9, -0.2))
