import numpy as np
import pytest

from rawboost import (
    ConfigurationError,
    DegenerateSpecError,
    FirFilter,
    NotchSpec,
    cascade,
    convolve_same,
    design_multiband_fir,
    design_notch_fir,
    frequency_response,
)
from rawboost.filters import DESIGN_GRID_POINTS, local_minima, write_response_csv

FS = 16000.0
BIN_HZ = (FS / 2) / (DESIGN_GRID_POINTS - 1)

# The multi-band example used for visual verification: three notches at
# normalized centers 0.01/0.35/0.45, widths 0.06/0.03/0.02, taps 30/94/52.
EXAMPLE_NOTCHES = [
    NotchSpec(f_c=0.01 * FS, delta_f=0.06 * FS, n_taps=30),
    NotchSpec(f_c=0.35 * FS, delta_f=0.03 * FS, n_taps=94),
    NotchSpec(f_c=0.45 * FS, delta_f=0.02 * FS, n_taps=52),
]


def brute_force_convolve(x, b):
    """O(l*N) double-loop oracle for causal same-length convolution."""
    y = np.zeros(len(x))
    for n in range(len(x)):
        for i in range(len(b)):
            if n - i >= 0:
                y[n] += b[i] * x[n - i]
    return y


def response_at(fir: FirFilter, freq_hz: float, fs: float) -> float:
    w = 2.0 * np.pi * freq_hz / fs
    return float(np.abs(np.exp(-1j * w * np.arange(len(fir))) @ fir.coefficients))


class TestNotchSpec:
    def test_validation(self):
        with pytest.raises(ConfigurationError):
            NotchSpec(f_c=100.0, delta_f=0.0, n_taps=30)
        with pytest.raises(ConfigurationError):
            NotchSpec(f_c=100.0, delta_f=50.0, n_taps=2)
        with pytest.raises(ConfigurationError):
            NotchSpec(f_c=float("nan"), delta_f=50.0, n_taps=30)

    def test_clamping(self):
        f_c, lo, hi = NotchSpec(f_c=160.0, delta_f=960.0, n_taps=30).clamped(FS)
        assert lo > 0.0 and hi < FS / 2
        assert f_c == 160.0
        f_c, lo, hi = NotchSpec(f_c=7990.0, delta_f=100.0, n_taps=30).clamped(FS)
        assert hi < FS / 2

    def test_band_fully_outside_raises(self):
        with pytest.raises(DegenerateSpecError):
            NotchSpec(f_c=9000.0, delta_f=100.0, n_taps=30).clamped(FS)
        with pytest.raises(DegenerateSpecError):
            NotchSpec(f_c=-500.0, delta_f=100.0, n_taps=30).clamped(FS)


class TestDesignNotchFir:
    def test_exact_tap_count(self):
        for spec in EXAMPLE_NOTCHES:
            assert len(design_notch_fir(spec, FS)) == spec.n_taps

    def test_coefficients_symmetric(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            spec = NotchSpec(
                f_c=rng.uniform(20, 8000),
                delta_f=rng.uniform(100, 1000),
                n_taps=int(rng.integers(10, 101)) + 1,
            )
            c = design_notch_fir(spec, FS).coefficients
            assert np.max(np.abs(c - c[::-1])) < 1e-12

    def test_local_minimum_at_center(self):
        # 0.35*fs, 0.03*fs wide, 94 taps: minimum within one grid bin of 0.35
        fir = design_notch_fir(EXAMPLE_NOTCHES[1], FS)
        freq, mag_db = frequency_response(fir, DESIGN_GRID_POINTS, FS)
        mins = local_minima(mag_db)
        nearest = min(mins, key=lambda i: abs(freq[i] - 0.35 * FS))
        assert abs(freq[nearest] - 0.35 * FS) <= BIN_HZ

    def test_null_pinned_at_center_for_any_spec(self):
        # the anchored zero pair kills the response at the clamped center
        rng = np.random.default_rng(5)
        for _ in range(200):
            spec = NotchSpec(
                f_c=rng.uniform(20, 8000),
                delta_f=rng.uniform(100, 1000),
                n_taps=int(rng.integers(10, 101)) + 1,
            )
            fir = design_notch_fir(spec, FS)
            f_c, lo, hi = spec.clamped(FS)
            freq, mag_db = frequency_response(fir, DESIGN_GRID_POINTS, FS)
            passband = (freq < lo) | (freq > hi)
            median_db = np.median(mag_db[passband])
            at_fc = response_at(fir, f_c, FS)
            assert 20 * np.log10(max(at_fc, 1e-15)) - median_db < -60.0

    def test_notch_depth_at_feasible_width(self):
        # width >= 3.3/taps: at least 6 dB below the mean passband level
        rng = np.random.default_rng(17)
        for _ in range(100):
            n_taps = int(rng.integers(11, 102))
            width_norm = 3.3 / n_taps * rng.uniform(1.0, 1.6)
            margin = width_norm / 2 + 0.02
            f_c = rng.uniform(margin, 0.5 - margin) * FS
            spec = NotchSpec(f_c=f_c, delta_f=width_norm * FS, n_taps=n_taps)
            fir = design_notch_fir(spec, FS)
            f_c_eff, lo, hi = spec.clamped(FS)
            freq, mag_db = frequency_response(fir, DESIGN_GRID_POINTS, FS)
            passband = (freq < lo) | (freq > hi)
            mean_pass = np.mean(mag_db[passband])
            at_fc_db = 20 * np.log10(max(response_at(fir, f_c_eff, FS), 1e-15))
            assert mean_pass - at_fc_db >= 6.0

    def test_degenerate_width_keeps_sane_passband(self):
        # a vanishing stop band leaves the pinned null plus a near-unity passband
        spec = NotchSpec(f_c=3997.0, delta_f=1e-6, n_taps=51)
        fir = design_notch_fir(spec, FS)
        freq, mag_db = frequency_response(fir, DESIGN_GRID_POINTS, FS)
        far = (freq < 3000) | (freq > 5000)
        assert np.max(np.abs(mag_db[far])) < 3.0
        assert response_at(fir, 3997.0, FS) < 1e-10


class TestCascade:
    def test_single_filter_unchanged(self):
        h = FirFilter(np.array([0.2, 0.5, 0.2]))
        assert cascade([h]) == h

    def test_unit_impulse_identity(self):
        h = FirFilter(np.array([0.2, 0.5, 0.2]))
        delta = FirFilter(np.array([1.0]))
        assert cascade([delta, h]) == h

    def test_empty_list_rejected(self):
        with pytest.raises(ConfigurationError):
            cascade([])

    def test_length_sum_rule(self):
        firs = [design_notch_fir(s, FS) for s in EXAMPLE_NOTCHES]
        combined = cascade(firs)
        assert len(combined) == sum(len(f) for f in firs) - (len(firs) - 1)

    def test_db_additivity_of_example_notches(self):
        firs = [design_notch_fir(s, FS) for s in EXAMPLE_NOTCHES]
        combined = cascade(firs)
        freq, total_db = frequency_response(combined, DESIGN_GRID_POINTS, FS)
        sum_db = np.zeros_like(total_db)
        for f in firs:
            sum_db += frequency_response(f, DESIGN_GRID_POINTS, FS)[1]
        # compare away from the -300 dB floor, where dB additivity is exact
        ok = (total_db > -250) & (sum_db > -250)
        assert np.max(np.abs(total_db[ok] - sum_db[ok])) < 1e-6

    def test_associative_and_commutative(self):
        rng = np.random.default_rng(3)
        a, b, c = (FirFilter(rng.normal(size=n)) for n in (5, 9, 7))
        left = cascade([cascade([a, b]), c]).coefficients
        right = cascade([a, cascade([b, c])]).coefficients
        swapped = cascade([b, a, c]).coefficients
        assert np.max(np.abs(left - right)) < 1e-12
        assert np.max(np.abs(left - swapped)) < 1e-12


class TestDesignMultiband:
    def test_zero_notches_unit_impulse(self):
        fir = design_multiband_fir([], FS)
        assert np.array_equal(fir.coefficients, np.array([1.0]))

    def test_example_minima_near_all_centers(self):
        fir = design_multiband_fir(EXAMPLE_NOTCHES, FS)
        freq, mag_db = frequency_response(fir, DESIGN_GRID_POINTS, FS)
        mins = local_minima(mag_db)
        for center in (0.01, 0.35, 0.45):
            nearest = min(mins, key=lambda i: abs(freq[i] - center * FS))
            assert abs(freq[nearest] - center * FS) <= BIN_HZ

    def test_error_propagated(self):
        with pytest.raises(DegenerateSpecError):
            design_multiband_fir([NotchSpec(f_c=9000.0, delta_f=10.0, n_taps=20)], FS)


class TestFrequencyResponse:
    def test_unit_impulse_flat(self):
        freq, mag_db = frequency_response(FirFilter(np.array([1.0])), 256, FS)
        assert freq[0] == 0.0 and freq[-1] == FS / 2
        assert np.max(np.abs(mag_db)) < 1e-12

    def test_two_tap_averager(self):
        # |0.5 + 0.5 e^{-i pi/2}| = sqrt(2)/2 -> 20 log10 = -3.0103 dB
        fir = FirFilter(np.array([0.5, 0.5]))
        freq, mag_db = frequency_response(fir, 5, FS)
        quarter = np.argmin(np.abs(freq - FS / 4))
        assert mag_db[quarter] == pytest.approx(20 * np.log10(np.sqrt(2) / 2), abs=1e-9)

    def test_dc_bin_is_coefficient_sum(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            fir = FirFilter(rng.normal(size=int(rng.integers(2, 40))))
            _, mag_db = frequency_response(fir, 16, FS)
            expected = 20 * np.log10(max(abs(np.sum(fir.coefficients)), 1e-15))
            assert mag_db[0] == pytest.approx(expected, abs=1e-9)

    def test_requires_two_points(self):
        with pytest.raises(ConfigurationError):
            frequency_response(FirFilter(np.array([1.0])), 1, FS)

    def test_csv_export(self, tmp_path):
        freq, mag_db = frequency_response(FirFilter(np.array([0.5, 0.5])), 8, FS)
        out = tmp_path / "resp.csv"
        write_response_csv(out, freq, mag_db)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "frequency_hz,magnitude_db"
        assert len(lines) == 9
        f0, m0 = lines[1].split(",")
        assert float(f0) == 0.0


class TestConvolveSame:
    def test_identity_filter(self):
        x = np.random.default_rng(0).normal(size=32)
        y = convolve_same(x, FirFilter(np.array([1.0])))
        assert np.array_equal(y, x)

    def test_unit_delay(self):
        y = convolve_same(np.array([1.0, 0.0, 0.0]), FirFilter(np.array([0.0, 1.0])))
        assert np.allclose(y, [0.0, 1.0, 0.0], atol=1e-15)

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(99)
        for _ in range(25):
            x = rng.normal(size=int(rng.integers(1, 65)))
            b = rng.normal(size=int(rng.integers(1, 10)))
            fast = convolve_same(x, FirFilter(b))
            slow = brute_force_convolve(x, b)
            assert len(fast) == len(x)
            assert np.max(np.abs(fast - slow)) < 1e-12

    def test_linearity(self):
        rng = np.random.default_rng(4)
        fir = FirFilter(rng.normal(size=12))
        x, z = rng.normal(size=(2, 200))
        a, b = 0.7, -1.3
        combined = convolve_same(a * x + b * z, fir)
        separate = a * convolve_same(x, fir) + b * convolve_same(z, fir)
        assert np.max(np.abs(combined - separate)) < 1e-12
