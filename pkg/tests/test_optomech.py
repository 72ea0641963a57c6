import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tfrw.errors import (CollapseError, ConfigurationError, InvalidArgumentError,
                         InvalidRangeError, SingularityError)
from tfrw.evolution import BroadenedScaling
from tfrw.optomech import (CavityMode, DisplacementWavefunction, Harmonic, OptomechParams,
                           OptomechState, RotatingFrameConfig, a_om_of_x, conformal_trajectory,
                           displacement_packet, free_mirror_accel, hubble_mirror_velocity,
                           integrate_trajectory, mechanical_energy, mirror_posterior_update,
                           optical_energy_per_photon, rotating_frame_frequencies,
                           to_scale_factor, x_of_a_om)
from tfrw.pipeline import MeasurementEvent
from tfrw.profiles import Lorentzian, NearDelta


@pytest.fixture
def frame():
    return RotatingFrameConfig((CavityMode(10.0, 1.0, -1.0), CavityMode(20.0, 2.0, -2.0)),
                               (-5.0, 0.9))


class TestForces:
    def test_unit_acceleration(self):
        assert free_mirror_accel(OptomechState(1.0, 0.0), OptomechParams()) == pytest.approx(math.pi / 2)

    def test_no_photons(self):
        assert free_mirror_accel(OptomechState(1.3, 0.2), OptomechParams(photons=0.0)) == 0.0

    def test_inverse_square(self):
        p = OptomechParams()
        ratio = free_mirror_accel(OptomechState(2.0, 0.0), p) / free_mirror_accel(OptomechState(1.0, 0.0), p)
        assert ratio == pytest.approx(0.25, rel=1e-15)

    def test_constant_scales_with_mode_and_photons(self):
        p = OptomechParams(mass=2.0, x0=0.5, mode=3, photons=4.0, hbar=0.1, c_light=3.0)
        assert p.radiation_constant == pytest.approx(0.1 * 3 * math.pi * 3.0 * 4.0 / (2 * 0.125 * 2.0))

    def test_singularity(self):
        with pytest.raises(SingularityError):
            free_mirror_accel(OptomechState(0.0, 0.0), OptomechParams())

    def test_harmonic_restoring_force(self):
        p = OptomechParams(photons=0.0, potential=Harmonic(2.0, x_eq=1.0))
        assert free_mirror_accel(OptomechState(1.5, 0.0), p) == pytest.approx(-4.0 * 0.5)

    @pytest.mark.parametrize("bad", [dict(mass=0.0), dict(x0=-1.0), dict(mode=0), dict(mode=1.5),
                                     dict(photons=-1.0)])
    def test_parameter_validation(self, bad):
        with pytest.raises(InvalidArgumentError):
            OptomechParams(**bad)


class TestEnergy:
    def test_unit_energy(self):
        assert mechanical_energy(OptomechState(1.0, 0.0), OptomechParams()) == pytest.approx(math.pi / 2)

    def test_free_particle(self):
        p = OptomechParams(mass=3.0, x0=2.0, photons=0.0)
        assert mechanical_energy(OptomechState(1.0, 0.7), p) == pytest.approx(0.5 * 3 * 4 * 0.49)

    def test_force_is_minus_gradient(self):
        p = OptomechParams(mass=1.5, x0=0.8, photons=2.0, potential=Harmonic(0.7, 0.9))
        a, h = 1.3, 1e-6
        dE = (mechanical_energy(OptomechState(a + h, 0), p)
              - mechanical_energy(OptomechState(a - h, 0), p)) / (2 * h)
        assert -dE / (p.mass * p.x0 ** 2) == pytest.approx(free_mirror_accel(OptomechState(a, 0), p),
                                                           rel=1e-8)


class TestIntegration:
    def test_outward_motion(self, backend):
        tr = integrate_trajectory(OptomechState(1.0, 0.0), OptomechParams(), 1e-3, 20000)
        assert len(tr) == 20001
        assert np.all(np.diff(tr.a_om[1:]) > 0)
        acc = np.diff(tr.a_dot)
        assert np.all(acc > 0) and acc[-1] < acc[0] / 100

    @pytest.mark.parametrize("method", ["velocity-verlet", "rk4"])
    def test_free_particle_exact(self, backend, method):
        tr = integrate_trajectory(OptomechState(1.0, 0.3), OptomechParams(photons=0.0), 0.01, 1000,
                                  method)
        np.testing.assert_allclose(tr.a_om, 1 + 0.3 * tr.t, rtol=1e-13)
        np.testing.assert_allclose(tr.t, np.arange(1001) * 0.01, rtol=1e-15)

    def test_asymptotic_velocity(self, backend):
        p = OptomechParams()
        tr = integrate_trajectory(OptomechState(1.0, 0.0), p, 1e-3, 400000)
        # energy conservation with the cavity term -> 0 gives sqrt(2 E / M) / x0 = sqrt(pi)
        assert tr.a_dot[-1] == pytest.approx(math.sqrt(math.pi), rel=0.01)

    def test_drift_is_second_order_in_dt(self, backend):
        p = OptomechParams()
        drifts = []
        for dt in (4e-3, 2e-3, 1e-3):
            tr = integrate_trajectory(OptomechState(1.0, 0.0), p, dt, int(50 / dt))
            E = tr.energy(p)
            drifts.append(np.max(np.abs(E - E[0])) / E[0])
        assert drifts[0] / drifts[1] == pytest.approx(4.0, rel=0.05)
        assert drifts[1] / drifts[2] == pytest.approx(4.0, rel=0.05)

    def test_fine_step_conserves_energy(self, backend):
        # the relative drift bound is met once dt^2 * max|d a''/d a| is well below 1e-6
        p = OptomechParams()
        tr = integrate_trajectory(OptomechState(1.0, 0.0), p, 2.5e-4, 200000)
        E = tr.energy(p)
        assert np.max(np.abs(E - E[0])) / E[0] < 1e-8

    def test_harmonic_energy_conserved(self, backend):
        p = OptomechParams(photons=0.5, potential=Harmonic(1.0, x_eq=2.0))
        tr = integrate_trajectory(OptomechState(1.5, 0.0), p, 1e-4, 100000)
        E = tr.energy(p)
        assert np.max(np.abs(E - E[0])) / E[0] < 1e-8

    def test_rk4_agrees_with_verlet(self, backend):
        p = OptomechParams()
        v = integrate_trajectory(OptomechState(1.0, 0.0), p, 1e-3, 5000)
        r = integrate_trajectory(OptomechState(1.0, 0.0), p, 1e-3, 5000, "rk4")
        np.testing.assert_allclose(v.a_om, r.a_om, rtol=1e-6)

    def test_force_law_along_trajectory(self, backend):
        p = OptomechParams()
        tr = integrate_trajectory(OptomechState(1.0, 0.0), p, 1e-3, 10000)
        law = tr.accel(p) * tr.a_om ** 2
        assert np.max(np.abs(law / p.radiation_constant - 1)) < 1e-8

    @pytest.mark.parametrize("method", ["velocity-verlet", "rk4"])
    def test_collapse(self, backend, method):
        p = OptomechParams(photons=0.0)
        with pytest.raises(CollapseError) as info:
            integrate_trajectory(OptomechState(1.0, -1.05), p, 0.1, 100, method)
        assert info.value.step == 10

    def test_rejects_bad_inputs(self):
        p = OptomechParams()
        with pytest.raises(InvalidArgumentError):
            integrate_trajectory(OptomechState(1.0, 0.0), p, 0.0, 10)
        with pytest.raises(InvalidArgumentError):
            integrate_trajectory(OptomechState(1.0, 0.0), p, 0.1, 10, "euler")
        with pytest.raises(SingularityError):
            integrate_trajectory(OptomechState(-1.0, 0.0), p, 0.1, 10)

    def test_state_access(self):
        tr = integrate_trajectory(OptomechState(1.0, 0.5, 2.0), OptomechParams(), 0.1, 3)
        assert tr[0] == OptomechState(1.0, 0.5, 2.0)
        assert tr[3].t == pytest.approx(2.3)


class TestRotatingFrame:
    def test_reference_point(self, frame):
        assert a_om_of_x(0.0, frame) == 1.0

    def test_substitution(self, frame):
        assert a_om_of_x(0.5, frame) == pytest.approx(2.0, rel=1e-15)

    def test_round_trip(self, frame):
        x = np.linspace(-5, 0.9, 1000)
        np.testing.assert_allclose(x_of_a_om(a_om_of_x(x, frame), frame), x, rtol=0, atol=1e-12)

    def test_pole(self, frame):
        with pytest.raises(InvalidRangeError):
            a_om_of_x([0.5, 1.0], frame)
        with pytest.raises(InvalidRangeError):
            x_of_a_om(0.0, frame)

    def test_frequencies(self, frame):
        out = rotating_frame_frequencies(frame)
        np.testing.assert_allclose(out.nu, [10.0 - 1.0, 20.0 - 2.0])
        np.testing.assert_allclose(out.omega_tilde, [1.0, 2.0])

    def test_ratio_mismatch(self):
        cfg = RotatingFrameConfig((CavityMode(10, 1.0, -1.0), CavityMode(20, 2.0, -3.0)))
        with pytest.raises(ConfigurationError, match="-1.5"):
            rotating_frame_frequencies(cfg)
        assert any("ratio" in p for p in cfg.problems())

    def test_zero_detuning(self):
        cfg = RotatingFrameConfig((CavityMode(10, 1.0, -1.0), CavityMode(20, 0.0, 0.0)))
        with pytest.raises(ConfigurationError):
            rotating_frame_frequencies(cfg)

    def test_zero_effective_frequency(self):
        with pytest.raises(ConfigurationError, match="positive"):
            rotating_frame_frequencies(RotatingFrameConfig((CavityMode(10, 1.0, 0.0),)))

    def test_reference_needs_pull(self):
        with pytest.raises(ConfigurationError):
            RotatingFrameConfig((CavityMode(10, 0.0, 0.0),))

    def test_positive_detuning(self):
        cfg = RotatingFrameConfig((CavityMode(10, -1.0, 1.0),))
        with pytest.raises(ConfigurationError, match="positive"):
            rotating_frame_frequencies(cfg)

    def test_sign_violation_over_range(self):
        cfg = RotatingFrameConfig((CavityMode(10, 1.0, -1.0),), (-1.0, 2.0))
        assert any("negative" in p for p in cfg.problems())

    def test_energy_identity(self, frame):
        x = np.linspace(-5, 0.9, 1000)
        for k in range(2):
            lhs, rhs = optical_energy_per_photon(x, frame, k)
            np.testing.assert_allclose(lhs, rhs, rtol=1e-12)

    def test_hubble_velocity(self, frame):
        assert hubble_mirror_velocity(0.0, frame) == 0.0
        assert hubble_mirror_velocity(0.1, frame) == pytest.approx(0.1)

    def test_conformal_slope(self, frame):
        H = 0.1
        eta = np.linspace(0, 5, 101)
        tr = conformal_trajectory(H, frame, eta)
        h = 1e-3
        mid = eta[1:-1]
        fd = (conformal_trajectory(H, frame, mid + h).x - conformal_trajectory(H, frame, mid - h).x) / (2 * h)
        np.testing.assert_allclose(fd, hubble_mirror_velocity(H, frame), atol=1e-6)
        # a^-2 da/deta reproduces H
        da = np.gradient(tr.a_om, eta, edge_order=2)
        np.testing.assert_allclose((da / tr.a_om ** 2)[5:-5], H, rtol=1e-3)

    def test_conformal_divergence(self, frame):
        with pytest.raises(SingularityError):
            conformal_trajectory(0.5, frame, np.linspace(0, 3, 10))


@given(x=st.floats(-4.9, 0.89))
def test_map_identity_property(x):
    cfg = RotatingFrameConfig((CavityMode(10.0, 1.0, -1.0), CavityMode(20.0, 2.0, -2.0)))
    assert abs(x_of_a_om(a_om_of_x(x, cfg), cfg) - x) < 1e-12
    lhs, rhs = optical_energy_per_photon(x, cfg, 1)
    assert lhs == pytest.approx(rhs, rel=1e-12)


class TestMirrorUpdate:
    def test_change_of_variables_preserves_norm(self, frame):
        x = np.linspace(-0.9, 0.8, 2001)
        psi = displacement_packet(x, 0.1, 0.2)
        psi_a, _, _ = to_scale_factor(psi, frame)
        assert abs(psi_a.norm() - psi.norm()) < 1e-10

    def test_matched_lines_keep_prior_peak(self, frame):
        x = np.linspace(-0.9, 0.8, 2001)
        psi = displacement_packet(x, 0.0, 0.2)
        line = Lorentzian(1.0, 1.0, 5.0)
        out = mirror_posterior_update(psi, frame, MeasurementEvent(line, line))
        assert abs(x[np.argmax(out.posterior.density)] - x[np.argmax(psi.density)]) <= x[1] - x[0]

    def test_delta_lines_select_doubled_scale_factor(self, frame):
        x = np.linspace(-0.9, 0.8, 2001)
        psi = displacement_packet(x, 0.2, 0.3)
        ev = MeasurementEvent(NearDelta(10.0, 0.01), NearDelta(5.0, 0.005))
        out = mirror_posterior_update(psi, frame, ev)
        peak = out.posterior.moments().peak_a
        assert abs(a_om_of_x(peak, frame) - 2.0) < 2 * (a_om_of_x(peak + (x[1] - x[0]), frame) - 2.0)
        assert out.posterior.moments().std_a < psi.moments().std_a

    @pytest.mark.parametrize("ev", [
        MeasurementEvent(Lorentzian(1.0, 1.0, 10.0), Lorentzian(1.0, 1.0, 5.0)),
        MeasurementEvent(Lorentzian(1.0, 2.0, 4.0), Lorentzian(1.0, 2.0, 6.0)),
    ])
    def test_posterior_narrower(self, frame, ev):
        x = np.linspace(-0.9, 0.8, 1001)
        psi = displacement_packet(x, 0.2, 0.3)
        out = mirror_posterior_update(psi, frame, ev)
        assert out.posterior.moments().std_a < psi.moments().std_a
        assert abs(out.posterior.norm() - 1) < 1e-12

    def test_with_evolution_kernel(self, frame):
        x = np.linspace(-0.9, 0.8, 801)
        psi = displacement_packet(x, 0.0, 0.1)
        ev = MeasurementEvent(Lorentzian(1.0, 1.0, 10.0), Lorentzian(1.0, 1.0, 5.0))
        out = mirror_posterior_update(psi, frame, ev, BroadenedScaling(1.0, 0.3), support_tol=1.0)
        assert abs(out.posterior.norm() - 1) < 1e-12
        assert out.detect_weight > 0

    def test_outside_valid_range(self, frame):
        psi = displacement_packet(np.linspace(-0.5, 1.5, 101), 0.0, 0.1)
        with pytest.raises(InvalidRangeError):
            mirror_posterior_update(psi, frame, MeasurementEvent(Lorentzian(), Lorentzian()))

    def test_wavefunction_validation(self):
        with pytest.raises(InvalidArgumentError):
            DisplacementWavefunction([0.0, 1.0, 0.5], [1, 1, 1])
