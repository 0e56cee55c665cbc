"""Stick assembly, Gaussian broadening and spectrum comparison."""

import math

import numpy as np
import pytest

from vibronic import (
    ParameterError,
    Stick,
    StickSpectrum,
    basis_state,
    broaden,
    compare_spectra,
    leakage,
    new_vacuum,
    stick_spectrum,
)
from vibronic.spectrum import assemble_sticks

OMEGA = (1112.7, 415.0)


def spectrum_from(sticks):
    return StickSpectrum(sticks=tuple(Stick(f, p, (idx,)) for f, p, idx in sticks))


class TestStickSpectrum:
    def test_vacuum_gives_single_origin_line(self):
        spec = stick_spectrum(new_vacuum(2, [6, 6]), OMEGA)
        assert len(spec.sticks) == 1
        assert spec.sticks[0].frequency == 0.0
        assert spec.sticks[0].intensity == 1.0
        assert spec.sticks[0].assignment == ((0, 0),)

    def test_offset_shifts_every_line(self):
        spec = stick_spectrum(new_vacuum(2, [6, 6]), OMEGA, offset=500.0)
        assert spec.sticks[0].frequency == 500.0

    def test_two_quanta_line(self):
        spec = stick_spectrum(basis_state((0, 2), (6, 6)), OMEGA)
        assert spec.sticks[0].frequency == pytest.approx(830.0, abs=1e-9)
        assert spec.sticks[0].intensity == pytest.approx(1.0)

    def test_sticks_sorted_ascending(self, so2_state):
        spec = stick_spectrum(so2_state, OMEGA)
        freqs = spec.frequencies
        assert np.all(np.diff(freqs) > 0)

    def test_completeness_against_leakage(self, so2_state):
        spec = stick_spectrum(so2_state, OMEGA)
        assert spec.total_intensity == pytest.approx(1.0 - leakage(so2_state), abs=1e-9)

    def test_dominant_progression_spacing(self, so2_state):
        spec = stick_spectrum(so2_state, OMEGA)
        top = sorted(spec.sticks, key=lambda s: -s.intensity)[:5]
        for stick in top:
            steps = stick.frequency / 415.0
            assert abs(steps - round(steps)) < 1e-9

    def test_geometry_mismatch(self, so2_state):
        with pytest.raises(Exception):
            stick_spectrum(so2_state, (1.0, 2.0, 3.0))


class TestMerging:
    def test_degenerate_intensities_add(self):
        spec = assemble_sticks(
            [(100.0, 0.3, (0, 1)), (100.0, 0.2, (1, 0)), (250.0, 0.5, (2, 0))]
        )
        assert len(spec.sticks) == 2
        merged = spec.sticks[0]
        assert merged.intensity == pytest.approx(0.5)
        assert merged.assignment == ((0, 1), (1, 0))

    def test_merge_within_tolerance_weighted_mean(self):
        spec = assemble_sticks([(100.0, 0.75, (0,)), (100.4, 0.25, (1,))], merge_tol=1.0)
        assert len(spec.sticks) == 1
        assert spec.sticks[0].frequency == pytest.approx(100.1)

    def test_idempotent_at_same_tolerance(self, so2_state):
        spec = stick_spectrum(so2_state, OMEGA)
        again = assemble_sticks(
            ((s.frequency, s.intensity, s.assignment[0]) for s in spec.sticks)
        )
        np.testing.assert_allclose(again.frequencies, spec.frequencies, atol=1e-12)
        np.testing.assert_allclose(again.intensities, spec.intensities, atol=1e-15)

    def test_weak_sticks_kept_in_residual(self):
        spec = assemble_sticks([(0.0, 1e-15, (0,)), (50.0, 0.4, (1,))])
        assert len(spec.sticks) == 1
        assert spec.residual == pytest.approx(1e-15)
        assert spec.total_intensity == pytest.approx(0.4 + 1e-15)


class TestBroaden:
    def test_single_stick_peak_height(self):
        spec = spectrum_from([(0.0, 1.0, (0,))])
        curve = broaden(spec, 50.0, "stddev", grid_step=1.0)
        expected = 1.0 / (50.0 * math.sqrt(2.0 * math.pi))
        assert curve.values.max() == pytest.approx(expected, rel=1e-9)
        assert curve.grid[np.argmax(curve.values)] == pytest.approx(0.0, abs=1.0)

    def test_fwhm_kind_halves_at_half_width(self):
        spec = spectrum_from([(0.0, 1.0, (0,))])
        curve = broaden(spec, 50.0, "fwhm", grid_step=0.5)
        peak = curve.values.max()
        at_half = curve.values[np.argmin(np.abs(curve.grid - 25.0))]
        assert at_half == pytest.approx(0.5 * peak, rel=1e-3)

    def test_distant_sticks_give_two_maxima(self):
        spec = spectrum_from([(0.0, 1.0, (0,)), (2000.0, 0.5, (1,))])
        curve = broaden(spec, 50.0, "fwhm", grid_step=1.0)
        for freq, frac in ((0.0, 1.0), (2000.0, 0.5)):
            region = np.abs(curve.grid - freq) < 2.0
            peak_position = curve.grid[region][np.argmax(curve.values[region])]
            assert abs(peak_position - freq) <= 1.0

    def test_empty_spectrum_gives_zero_curve(self):
        curve = broaden(StickSpectrum(sticks=()), 50.0, "fwhm", 1.0)
        assert np.all(curve.values == 0.0)
        assert curve.grid.size > 0

    def test_integral_preserves_total_intensity(self, so2_state):
        spec = stick_spectrum(so2_state, OMEGA)
        curve = broaden(spec, 50.0, "fwhm", grid_step=0.5)
        assert curve.integral() == pytest.approx(sum(spec.intensities), abs=1e-3)

    def test_linearity(self):
        a = spectrum_from([(0.0, 0.2, (0,)), (1000.0, 0.1, (1,))])
        b = spectrum_from([(0.0, 0.05, (0,)), (400.0, 0.3, (2,)), (1000.0, 0.15, (3,))])
        summed = spectrum_from(
            [(0.0, 0.25, (0,)), (400.0, 0.3, (2,)), (1000.0, 0.25, (3,))]
        )
        kwargs = dict(width=30.0, width_kind="fwhm", grid_step=1.0)
        np.testing.assert_allclose(
            broaden(summed, **kwargs).values,
            broaden(a, **kwargs).values + broaden(b, **kwargs).values,
            atol=1e-12,
        )

    @pytest.mark.parametrize("width,step", [(0.0, 1.0), (-5.0, 1.0), (50.0, 0.0)])
    def test_invalid_parameters(self, width, step):
        with pytest.raises(ParameterError):
            broaden(spectrum_from([(0.0, 1.0, (0,))]), width, "fwhm", step)

    def test_unknown_width_kind(self):
        with pytest.raises(ParameterError):
            broaden(spectrum_from([(0.0, 1.0, (0,))]), 50.0, "sigma-ish", 1.0)


class TestCompare:
    def test_identical_spectra(self, so2_state):
        spec = stick_spectrum(so2_state, OMEGA)
        report = compare_spectra(spec, spec, freq_tol=0.1)
        assert report.max_intensity_deviation == 0.0
        assert report.unmatched_mass == 0.0
        assert report.n_matched == len(spec.sticks)

    def test_single_perturbed_intensity(self):
        a = spectrum_from([(0.0, 0.5, (0,)), (415.0, 0.5, (1,))])
        b = spectrum_from([(0.0, 0.51, (0,)), (415.0, 0.5, (1,))])
        report = compare_spectra(a, b, freq_tol=0.1)
        assert report.max_intensity_deviation == pytest.approx(0.01)

    def test_unmatched_mass_counts_both_sides(self):
        a = spectrum_from([(0.0, 0.4, (0,))])
        b = spectrum_from([(500.0, 0.3, (1,))])
        report = compare_spectra(a, b, freq_tol=1.0)
        assert report.n_matched == 0
        assert report.unmatched_mass == pytest.approx(0.7)

    def test_nearest_match_wins(self):
        a = spectrum_from([(100.0, 0.5, (0,))])
        b = spectrum_from([(99.0, 0.2, (1,)), (100.2, 0.3, (2,))])
        report = compare_spectra(a, b, freq_tol=2.0)
        assert report.matched[0][3] == pytest.approx(0.3)
        assert report.unmatched_mass == pytest.approx(0.2)
