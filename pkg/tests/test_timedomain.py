"""Spectral pulse propagation, front causality, and the Schrodinger oracle."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import OMEGA0
from tunneltime import photonic, quantum, spectral, timedomain
from tunneltime.errors import (
    BandTooNarrowError,
    SpectrumExceedsGridError,
    WraparoundDetectedError,
)


def unity_response(grid):
    return spectral.ComplexResponse(
        grid, np.ones(grid.count, dtype=complex), np.zeros(grid.count, dtype=complex)
    )


class TestPulseEnvelope:
    def test_rejects_nonuniform_times(self):
        times = np.concatenate([np.linspace(0, 1, 50), [1.5]])
        with pytest.raises(ValueError):
            timedomain.PulseEnvelope(times, np.exp(-((times - 0.5) ** 2) * 500), 5.0)

    def test_rejects_undecayed_ends(self):
        times = np.linspace(-1.0, 1.0, 64)
        with pytest.raises(ValueError):
            timedomain.PulseEnvelope(times, np.exp(-times ** 2), 5.0)

    def test_gaussian_record_is_clean(self):
        pulse = timedomain.PulseEnvelope.gaussian(5.0, sigma_t=2.0, samples=1024)
        assert pulse.count == 1024
        peak = np.max(np.abs(pulse.a))
        assert abs(pulse.a[0]) <= 1e-12 * peak

    def test_bandwidth_convention(self):
        pulse = timedomain.PulseEnvelope.gaussian_with_bandwidth(
            5.0, bandwidth=0.05, samples=4096
        )
        assert pulse.bandwidth() == pytest.approx(0.05, rel=0.02)


class TestPropagateSpectral:
    def test_identity_response(self):
        pulse = timedomain.PulseEnvelope.gaussian(OMEGA0, sigma_t=40.0, samples=2048)
        result = timedomain.propagate_spectral(unity_response(pulse.fft_grid()), pulse)
        np.testing.assert_allclose(result.a_out, pulse.a, atol=1e-14)
        assert result.peak_delay == pytest.approx(0.0, abs=1e-9)
        assert result.width_ratio == pytest.approx(1.0, abs=1e-12)
        assert result.quasistatic_deviation == pytest.approx(0.0, abs=1e-13)

    def test_pure_delay_line(self):
        pulse = timedomain.PulseEnvelope.gaussian(OMEGA0, sigma_t=40.0, samples=8192)
        grid = pulse.fft_grid()
        tau = 3.7
        resp = spectral.ComplexResponse(
            grid, np.exp(1j * grid.detunings * tau), np.zeros(grid.count)
        )
        result = timedomain.propagate_spectral(resp, pulse)
        assert result.peak_delay == pytest.approx(tau, abs=1e-6)
        assert result.quasistatic_deviation < 1e-10
        assert result.width_ratio == pytest.approx(1.0, abs=1e-9)

    def test_quasistatic_transit_of_opaque_stack(self, skc_stack):
        band = photonic.find_stopband(skc_stack, OMEGA0)
        pulse = timedomain.PulseEnvelope.gaussian_with_bandwidth(
            OMEGA0, 0.01 * band.width, samples=1024
        )
        resp = photonic.stack_response(skc_stack, pulse.fft_grid())
        result = timedomain.propagate_spectral(resp, pulse)
        tau_g = photonic.group_delay(skc_stack, OMEGA0)
        assert result.peak_delay == pytest.approx(tau_g, rel=0.01)
        assert abs(result.width_ratio - 1.0) < 0.01
        assert result.quasistatic_deviation < 0.01
        # transmitted peak stays behind the vacuum front transit
        assert result.peak_delay < skc_stack.total_length

    def test_energy_bookkeeping(self, skc_stack):
        band = photonic.find_stopband(skc_stack, OMEGA0)
        pulse = timedomain.PulseEnvelope.gaussian_with_bandwidth(
            OMEGA0, 0.02 * band.width, samples=1024
        )
        resp = photonic.stack_response(skc_stack, pulse.fft_grid())
        result = timedomain.propagate_spectral(resp, pulse)
        balance = (result.energy_transmitted + result.energy_reflected) / result.energy_in
        assert balance == pytest.approx(1.0, abs=1e-8)

    def test_deviation_shrinks_with_bandwidth(self, skc_stack):
        band = photonic.find_stopband(skc_stack, OMEGA0)
        deviations = []
        for fraction in (0.04, 0.02, 0.01, 0.005):
            pulse = timedomain.PulseEnvelope.gaussian_with_bandwidth(
                OMEGA0, fraction * band.width, samples=1024
            )
            resp = photonic.stack_response(skc_stack, pulse.fft_grid())
            deviations.append(
                timedomain.propagate_spectral(resp, pulse).quasistatic_deviation
            )
        assert all(a >= b for a, b in zip(deviations, deviations[1:]))

    def test_interpolated_response_grid(self, skc_stack):
        band = photonic.find_stopband(skc_stack, OMEGA0)
        pulse = timedomain.PulseEnvelope.gaussian_with_bandwidth(
            OMEGA0, 0.01 * band.width, samples=1024
        )
        # a uniform grid that is not the FFT grid: forces the spline path
        half = 8.0 * pulse.bandwidth()
        grid = spectral.FrequencyGrid.centered(OMEGA0, half, 1201)
        resp = photonic.stack_response(skc_stack, grid)
        result = timedomain.propagate_spectral(resp, pulse)
        tau_g = photonic.group_delay(skc_stack, OMEGA0)
        assert result.peak_delay == pytest.approx(tau_g, rel=0.01)

    def test_spectrum_exceeding_grid_rejected(self, skc_stack):
        pulse = timedomain.PulseEnvelope.gaussian(OMEGA0, sigma_t=10.0, samples=1024)
        narrow = spectral.FrequencyGrid.centered(OMEGA0, 0.05 / 10.0, 64)
        resp = photonic.stack_response(skc_stack, narrow)
        with pytest.raises(SpectrumExceedsGridError):
            timedomain.propagate_spectral(resp, pulse)

    def test_wraparound_detected(self):
        pulse = timedomain.PulseEnvelope.gaussian(OMEGA0, sigma_t=10.0, samples=1024)
        grid = pulse.fft_grid()
        span = pulse.times[-1] - pulse.times[0]
        resp = spectral.ComplexResponse(
            grid, np.exp(1j * grid.detunings * 0.45 * span), np.zeros(grid.count)
        )
        with pytest.raises(WraparoundDetectedError):
            timedomain.propagate_spectral(resp, pulse)


class TestFrontCausality:
    def test_opaque_stack_respects_the_front(self, front_stack):
        result = timedomain.front_causality(front_stack, OMEGA0)
        assert result.front_time == pytest.approx(front_stack.total_length)
        assert result.pre_front_fraction < 1e-4
        tau_g = photonic.group_delay(front_stack, OMEGA0)
        assert tau_g < front_stack.total_length

    def test_vacuum_control_floor(self, front_stack):
        width = photonic.find_stopband(front_stack, OMEGA0).width
        control = timedomain.front_causality(
            photonic.LayeredStack.vacuum_slab(front_stack.total_length),
            OMEGA0,
            stopband_width=width,
        )
        assert control.pre_front_fraction < 1e-8

    def test_doubling_band_does_not_increase_fraction(self, front_stack):
        base = timedomain.front_causality(front_stack, OMEGA0, band_factor=50.0)
        doubled = timedomain.front_causality(front_stack, OMEGA0, band_factor=100.0)
        assert doubled.pre_front_fraction <= base.pre_front_fraction

    def test_band_factor_below_fifty_rejected(self, front_stack):
        with pytest.raises(BandTooNarrowError):
            timedomain.front_causality(front_stack, OMEGA0, band_factor=20.0)

    def test_wide_stopband_cannot_be_covered(self, skc_stack):
        # the SKC-regime stopband is ~27% of the carrier; 50x does not fit
        with pytest.raises(BandTooNarrowError):
            timedomain.front_causality(skc_stack, OMEGA0)


class TestTdseOracle:
    def test_packet_validation(self):
        with pytest.raises(ValueError):
            timedomain.GaussianPacket(k0=0.0, delta_k=0.1, x0=-10.0)
        with pytest.raises(ValueError):
            timedomain.GaussianPacket(k0=1.0, delta_k=0.1, x0=1.0)

    def test_quasistatic_precondition(self):
        barrier = quantum.QuantumBarrier(2.0, 1.0)
        packet = timedomain.GaussianPacket(k0=1.0, delta_k=0.5, x0=-50.0)
        with pytest.raises(ValueError):
            timedomain.tdse_oracle(barrier, packet)

    def test_overlap_precondition(self):
        barrier = quantum.QuantumBarrier(2.0, 1.0)
        kappa = np.sqrt(2.0)
        packet = timedomain.GaussianPacket(k0=1.0, delta_k=0.02 * kappa, x0=-10.0)
        with pytest.raises(ValueError):
            timedomain.tdse_oracle(barrier, packet)

    def test_free_run_measures_zero_delay(self):
        # negligible barrier: both runs identical, delay must vanish within dt
        barrier = quantum.QuantumBarrier(1e-12, 1.0)
        packet = timedomain.GaussianPacket(k0=1.0, delta_k=0.1, x0=-40.0)
        result = timedomain.tdse_oracle(barrier, packet)
        dx = 1.0 / 20.0
        assert abs(result.delay) < dx * dx
        assert result.norm_error < 1e-8
        assert result.boundary_leak < 1e-10
