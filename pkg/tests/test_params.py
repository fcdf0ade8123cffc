import math

import numpy as np
import pytest

from srbeam import (ChiAngle, SystemParams, gamma_of_x, homogeneous_density,
                    mode_function)
from srbeam.steady import pulling_coefficient, solve_steady_state
from srbeam.stability import find_root_nonsr


def make(n_gamma_tau=20.0, dok=1.0, **kw):
    return SystemParams.from_dimensionless(n_gamma_tau, dok, **kw)


class TestModeFunction:
    def test_inside(self):
        p = make()
        assert mode_function(0.0, p) == 1.0

    def test_outside(self):
        p = make()
        assert mode_function(2.0 * p.w, p) == 0.0

    def test_entry_edge_half_open(self):
        p = make()
        assert mode_function(-p.w, p) == 1.0
        assert mode_function(p.w, p) == 0.0

    def test_integrates_to_width(self):
        p = make()
        x = np.linspace(-3 * p.w, 3 * p.w, 600001)
        integral = np.trapz(mode_function(x, p), x)
        assert integral == pytest.approx(2 * p.w, rel=1e-4)


class TestGammaOfX:
    def test_inside_resonant(self):
        p = make(dok=0.0)
        chi = p.bad_cavity_chi()
        assert gamma_of_x(0.0, chi, p) == pytest.approx(p.gamma_c)

    def test_outside(self):
        p = make()
        assert gamma_of_x(5.0, p.bad_cavity_chi(), p) == 0.0

    def test_unit_detuning(self):
        # cos(arctan 1) = 1/sqrt(2)
        p = make(dok=1.0)
        chi = p.bad_cavity_chi()
        assert gamma_of_x(0.0, chi, p) == pytest.approx(p.gamma_c / math.sqrt(2))


class TestHomogeneousDensity:
    @pytest.mark.parametrize("n,w,expect", [(4000, 1.0, 2000.0),
                                            (1, 0.5, 1.0),
                                            (500, 2.0, 125.0)])
    def test_values(self, n, w, expect):
        p = SystemParams.from_dimensionless(10.0, n_atoms=n, w=w)
        assert homogeneous_density(p) == pytest.approx(expect)


class TestChiAngle:
    def test_roundtrip(self):
        rng = np.random.default_rng(3)
        ratios = np.concatenate([rng.uniform(-1e3, 1e3, 200), [-1e3, 1e3, 0.0]])
        for r in ratios:
            chi = ChiAngle.bad_cavity(delta=r * 0.5, kappa=1.0)
            assert abs(chi.chi) < math.pi / 2
            if r != 0:
                assert chi.tan == pytest.approx(r, rel=1e-12)
            else:
                assert chi.tan == 0.0

    def test_retarded(self):
        chi = ChiAngle.retarded(delta=3.0, omega=1.0, kappa=4.0)
        assert chi.tan == pytest.approx(1.0, rel=1e-12)


class TestSystemParams:
    def test_transit_consistency_from_tau(self):
        p = SystemParams(delta=0.0, kappa=100.0, gamma_c=0.01, n_atoms=100,
                         tau=2.0, w=3.0)
        assert p.vx == pytest.approx(2 * p.w / p.tau)

    def test_transit_consistency_from_vx(self):
        p = SystemParams(delta=0.0, kappa=100.0, gamma_c=0.01, n_atoms=100,
                         tau=None, w=3.0, vx=1.5)
        assert p.tau == pytest.approx(2 * 3.0 / 1.5)

    def test_dt_guard(self):
        with pytest.raises(ValueError):
            SystemParams(delta=0.0, kappa=10.0, gamma_c=0.0, n_atoms=1,
                         tau=1.0, dt=0.5)

    @pytest.mark.parametrize("bad", [dict(kappa=-1.0), dict(gamma_c=-0.1),
                                     dict(n_atoms=0)])
    def test_invalid(self, bad):
        kw = dict(delta=0.0, kappa=10.0, gamma_c=0.01, n_atoms=10, tau=1.0)
        kw.update(bad)
        with pytest.raises(ValueError):
            SystemParams(**kw)

    def test_derived_groups(self):
        p = make(20.0, 1.5, kappa_tau=250.0, n_atoms=123)
        assert p.n_gamma_tau == pytest.approx(20.0)
        assert p.delta_over_halfkappa == pytest.approx(1.5)
        assert p.kappa_tau == pytest.approx(250.0)

    def test_seed_spawning_deterministic(self):
        p = make(rng_seed=99)
        a = p.spawn_trajectory_streams(4)
        b = p.spawn_trajectory_streams(4)
        for sa, sb in zip(a, b):
            for ca, cb in zip(sa, sb):
                assert ca.generate_state(4).tolist() == cb.generate_state(4).tolist()


class TestDimensionlessEquivalence:
    """Equal control groups => identical analytic outputs in transit units."""

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_analytic_ops_scale_invariant(self, seed):
        rng = np.random.default_rng(seed)
        g = rng.uniform(6.0, 40.0)
        dok = rng.uniform(0.0, 2.0)
        kt = rng.uniform(50.0, 500.0)
        scale = rng.uniform(0.1, 10.0)  # tau of the second system
        p1 = SystemParams.from_dimensionless(g, dok, kappa_tau=kt, n_atoms=300)
        p2 = SystemParams(delta=dok * 0.5 * kt / scale, kappa=kt / scale,
                          gamma_c=g / (300 * scale), n_atoms=300, tau=scale)
        s1 = solve_steady_state(p1)
        s2 = solve_steady_state(p2)
        assert s1.xi == pytest.approx(s2.xi, rel=1e-12)
        assert s1.f == pytest.approx(s2.f, rel=1e-12)
        assert s1.j0_par == pytest.approx(s2.j0_par, rel=1e-12)
        assert s1.omega * p1.tau == pytest.approx(s2.omega * p2.tau, rel=1e-12)
        assert pulling_coefficient(p1) == pytest.approx(
            pulling_coefficient(p2), rel=1e-12)
        r1 = find_root_nonsr(p1).nu * p1.tau
        r2 = find_root_nonsr(p2).nu * p2.tau
        assert r1.real == pytest.approx(r2.real, abs=1e-9)
        assert r1.imag == pytest.approx(r2.imag, abs=1e-9)
