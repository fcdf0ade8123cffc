import math

import numpy as np
import pytest

from srbeam import SystemParams
from srbeam.errors import InfeasibleDetuning, NoSuperradiantSolution
from srbeam.params import ChiAngle
from srbeam.steady import (Branch, bloch_trace, pulling_coefficient,
                           solve_f, solve_steady_state,
                           solve_steady_state_groups, solve_xi,
                           threshold_collective_rate)


def bisect_xi_oracle(g, tol=1e-12):
    """Independent bisection for the largest root of x^2 = g sin^2(x/2)."""
    h = lambda x: g * math.sin(0.5 * x) ** 2 - x * x
    xs = np.linspace(2 * math.pi, 1e-6, 20001)
    lo = hi = None
    for i, x in enumerate(xs):
        if h(x) > 0:
            lo, hi = x, xs[i - 1]
            break
    assert lo is not None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if h(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestSolveXi:
    def test_near_threshold_small_root(self):
        xi = solve_xi(4.0 + 1e-3)
        assert 0 < xi < 1e-1

    def test_below_threshold(self):
        with pytest.raises(NoSuperradiantSolution):
            solve_xi(2.0)
        with pytest.raises(NoSuperradiantSolution):
            solve_xi(4.0)

    def test_against_bisection_oracle(self):
        for g in (4.5, 10.0, 20.0, 50.0, 200.0):
            assert solve_xi(g) == pytest.approx(bisect_xi_oracle(g), abs=1e-10)

    def test_newton_cross_check(self):
        for g in (6.0, 20.0, 80.0):
            xi = solve_xi(g)
            # one Newton step from the solution should not move it
            h = g * math.sin(0.5 * xi) ** 2 - xi * xi
            dh = 0.5 * g * math.sin(xi) - 2 * xi
            assert abs(h / dh) < 1e-12


class TestSolveF:
    def test_resonant_is_zero(self):
        xi = solve_xi(20.0)
        assert solve_f(20.0, ChiAngle(0.0), xi) == 0.0

    def test_closed_form_residual(self):
        g, dok = 20.0, 1.0
        chi = ChiAngle(math.atan(dok))
        xi = solve_xi(g, chi)
        f = solve_f(g, chi, xi)
        lhs = -xi * chi.tan
        rhs = 0.5 * g * (f / math.sqrt(1 + f * f)) * (1 - math.sin(xi) / xi)
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_sign_convention(self):
        # positive detuning -> f < 0 -> omega > 0
        st = solve_steady_state_groups(20.0, 1.0)
        assert st.f < 0
        assert st.omega > 0

    def test_infeasible(self):
        chi = ChiAngle(math.atan(2.0))
        xi = solve_xi(4.5, chi)
        with pytest.raises(InfeasibleDetuning):
            solve_f(4.5, chi, xi)


class TestSolveSteadyState:
    def test_resonant(self):
        st = solve_steady_state_groups(10.0, 0.0)
        assert st.is_superradiant
        assert st.omega == 0.0
        assert st.j0_par > 0

    def test_below_threshold_branch(self):
        st = solve_steady_state_groups(2.0, 0.0)
        assert st.branch is Branch.NON_SUPERRADIANT
        assert st.j0_par == 0.0
        assert st.omega is None

    def test_infeasible_maps_to_non_superradiant(self):
        st = solve_steady_state_groups(4.5, 2.0)
        assert st.branch is Branch.NON_SUPERRADIANT

    @pytest.mark.parametrize("g,expected_slope", [(20.0, 2.8), (50.0, 1.6)])
    def test_emission_slope(self, g, expected_slope):
        # omega tau ~ P * Delta with P*kappa*tau as published
        doks = np.linspace(0.2, 1.0, 5)
        omegas = [solve_steady_state_groups(g, d).omega for d in doks]
        slopes = [om / d * 2 for om, d in zip(omegas, doks)]
        assert np.ptp(slopes) < 1e-9  # linear in the detuning
        assert slopes[0] == pytest.approx(expected_slope, abs=0.2)

    def test_residuals_grid(self):
        for g in np.linspace(4.5, 60.0, 12):
            for dok in np.linspace(0.0, 5.0, 9):
                st = solve_steady_state_groups(g, dok)
                if st.is_superradiant:
                    r1, r2 = st.residuals()
                    assert abs(r1) <= 1e-10
                    assert abs(r2) <= 1e-10

    def test_threshold_continuity(self):
        st = solve_steady_state_groups(4.0 + 1e-3, 0.0)
        assert st.j0_par < 1e-1

    def test_pulling_ratio_constant_in_detuning(self):
        # omega/Delta constant to 1e-6 relative across the detuning range
        g = 30.0
        ratios = []
        for dok in np.linspace(0.1, 3.0, 12):
            st = solve_steady_state_groups(g, dok)
            ratios.append(st.omega / dok)
        ratios = np.array(ratios)
        assert np.all(np.abs(ratios / ratios[0] - 1) < 1e-6)


class TestBlochTrace:
    def test_entry_vector(self):
        st = solve_steady_state_groups(20.0, 1.0)
        p = SystemParams.from_dimensionless(20.0, 1.0)
        tr = bloch_trace(st, p, n_samples=101)
        assert np.allclose(tr.vectors[0], [0.0, 0.0, 1.0], atol=1e-12)
        assert tr.polar[0] == 0.0
        assert tr.azimuth[0] == pytest.approx(st.chi.chi)

    def test_unit_norm(self):
        st = solve_steady_state_groups(50.0, 1.5)
        p = SystemParams.from_dimensionless(50.0, 1.5)
        tr = bloch_trace(st, p, n_samples=1001)
        norms = np.linalg.norm(tr.vectors, axis=1)
        assert np.max(np.abs(norms - 1)) < 1e-12

    def test_resonant_stays_in_plane(self):
        st = solve_steady_state_groups(10.0, 0.0)
        p = SystemParams.from_dimensionless(10.0, 0.0)
        tr = bloch_trace(st, p, n_samples=501)
        assert np.all(tr.azimuth == 0.0)
        assert np.max(np.abs(tr.vectors[:, 1])) == 0.0

    @pytest.mark.parametrize("g,dok", [(10.0, 0.0), (20.0, 1.0), (50.0, 1.5),
                                       (8.0, 0.5)])
    def test_gauge_integrals(self, g, dok):
        # transverse component integrates to zero; parallel to J0 / rho
        st = solve_steady_state_groups(g, dok)
        p = SystemParams.from_dimensionless(g, dok)
        n = 20001
        tr = bloch_trace(st, p, n_samples=n)
        sin_k = np.sin(tr.polar)
        perp = np.trapz(sin_k * np.sin(tr.azimuth), tr.x)
        par = np.trapz(sin_k * np.cos(tr.azimuth), tr.x)
        # J0_par_total / rho = j0_par * N / (N / 2w) = 2 w j0_par
        assert abs(perp) < 1e-8
        assert par == pytest.approx(2 * p.w * st.j0_par, abs=1e-8)

    def test_endpoint_identity(self):
        st = solve_steady_state_groups(30.0, 2.0)
        p = SystemParams.from_dimensionless(30.0, 2.0)
        tr = bloch_trace(st, p, n_samples=21)
        lhs = math.sin(tr.polar[-1] / 2)
        rhs = math.sin(st.xi / 2) / math.sqrt(1 + st.f ** 2)
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_requires_superradiant_branch(self):
        st = solve_steady_state_groups(2.0, 0.0)
        p = SystemParams.from_dimensionless(2.0, 0.0)
        with pytest.raises(NoSuperradiantSolution):
            bloch_trace(st, p)


class TestPulling:
    def test_good_cavity_limit(self):
        p = SystemParams.from_dimensionless(20.0, kappa_tau=1e-2)
        assert pulling_coefficient(p) > 0.99

    def test_bad_cavity_limit(self):
        p = SystemParams.from_dimensionless(20.0, kappa_tau=1e5)
        assert pulling_coefficient(p) < 1e-3

    def test_published_products(self):
        p20 = SystemParams.from_dimensionless(20.0, kappa_tau=1e3)
        p50 = SystemParams.from_dimensionless(50.0, kappa_tau=1e3)
        assert pulling_coefficient(p20) * 1e3 == pytest.approx(2.8, abs=0.2)
        assert pulling_coefficient(p50) * 1e3 == pytest.approx(1.6, abs=0.2)

    def test_monotone_and_bounded(self):
        kts = np.geomspace(1e-3, 1e4, 15)
        ps = [pulling_coefficient(SystemParams.from_dimensionless(12.0, kappa_tau=k))
              for k in kts]
        assert all(0 < v <= 1 for v in ps)
        assert all(a > b for a, b in zip(ps, ps[1:]))

    def test_below_threshold(self):
        p = SystemParams.from_dimensionless(3.0)
        with pytest.raises(NoSuperradiantSolution):
            pulling_coefficient(p)


class TestThreshold:
    def test_resonant_value(self):
        assert threshold_collective_rate(0.0) == 4.0

    def test_monotone_in_detuning(self):
        values = [threshold_collective_rate(d) for d in (0.5, 1.0, 2.0)]
        assert values[0] < values[1] < values[2]
        assert values[0] > 4.0
