"""Notch and multi-band FIR filter design, frequency response, convolution.

Each notch filter is built from two cascaded parts:

* a second-order section ``[1, -2*cos(w_c), 1]`` whose zero pair pins an
  exact spectral null at the (clamped) center frequency, and
* a linear-phase shaping filter for the remaining taps, designed by
  frequency sampling on a 512-point uniform grid over [0, fs/2]: the
  desired amplitude is zero inside the stop band and compensates the
  zero-pair tilt outside it, the grid is inverse-transformed to a
  symmetric impulse response, truncated, and multiplied by a Hamming
  window.

The cascade is rescaled so the median passband magnitude is unity. The
pinned null guarantees that the magnitude response of every designed
notch attains a local minimum at its center frequency, whatever the tap
budget allows for the surrounding stop band; short filters simply show
the wider skirts and passband ripple expected of window designs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.signal import oaconvolve

from .errors import ConfigurationError, DegenerateSpecError

__all__ = [
    "DESIGN_GRID_POINTS",
    "NotchSpec",
    "FirFilter",
    "design_notch_fir",
    "design_multiband_fir",
    "cascade",
    "frequency_response",
    "convolve_same",
    "local_minima",
    "write_response_csv",
]

DESIGN_GRID_POINTS = 512

# Compensation of the zero-pair tilt is capped at 40 dB: beyond that the
# shaping filter cannot realistically follow the target anyway.
_COMPENSATION_CAP = 100.0

# Relative margin keeping clamped band edges and centers strictly inside
# the open interval (0, fs/2).
_EDGE_MARGIN = 1e-6

# Empirical transition width of a Hamming-window design, in normalized
# frequency (f/fs) for an L-tap filter.
HAMMING_TRANSITION = 3.3


@dataclass(frozen=True)
class NotchSpec:
    """One notch: center frequency, stop-band width and coefficient count."""

    f_c: float
    delta_f: float
    n_taps: int

    def __post_init__(self):
        if not np.isfinite(self.f_c):
            raise ConfigurationError(f"notch center must be finite, got {self.f_c}")
        if not (np.isfinite(self.delta_f) and self.delta_f > 0):
            raise ConfigurationError(f"notch width must be positive, got {self.delta_f}")
        if int(self.n_taps) != self.n_taps or self.n_taps < 3:
            raise ConfigurationError(f"notch needs at least 3 taps, got {self.n_taps}")
        object.__setattr__(self, "f_c", float(self.f_c))
        object.__setattr__(self, "delta_f", float(self.delta_f))
        object.__setattr__(self, "n_taps", int(self.n_taps))

    def clamped(self, sample_rate: float) -> Tuple[float, float, float]:
        """Clamped (center, low edge, high edge), all inside (0, fs/2).

        Raises DegenerateSpecError when the stop band lies entirely
        outside the representable interval.
        """
        nyquist = sample_rate / 2.0
        eps = nyquist * _EDGE_MARGIN
        lo_raw = self.f_c - self.delta_f / 2.0
        hi_raw = self.f_c + self.delta_f / 2.0
        lo = max(lo_raw, eps)
        hi = min(hi_raw, nyquist - eps)
        if lo > hi:
            raise DegenerateSpecError(
                f"notch band [{lo_raw:.6g}, {hi_raw:.6g}] Hz lies outside (0, {nyquist:.6g})"
            )
        f_c = min(max(self.f_c, eps), nyquist - eps)
        return f_c, lo, hi


@dataclass(frozen=True, eq=False)
class FirFilter:
    """Finite impulse response coefficients b_0..b_N."""

    coefficients: np.ndarray

    def __post_init__(self):
        coeff = np.array(self.coefficients, dtype=np.float64, copy=True)
        if coeff.ndim != 1 or coeff.size < 1:
            raise ConfigurationError("filter coefficients must form a non-empty 1-D sequence")
        if not np.all(np.isfinite(coeff)):
            raise ConfigurationError("filter coefficients must be finite")
        coeff.setflags(write=False)  # shared freely across tasks
        object.__setattr__(self, "coefficients", coeff)

    def __len__(self) -> int:
        return self.coefficients.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, FirFilter):
            return NotImplemented
        return np.array_equal(self.coefficients, other.coefficients)


UNIT_IMPULSE = FirFilter(np.array([1.0]))


def _zero_pair_magnitude(freq: np.ndarray, f_c: float, sample_rate: float) -> np.ndarray:
    """|1 - 2 cos(w_c) z^-1 + z^-2| on the unit circle: 2|cos(w) - cos(w_c)|."""
    w = 2.0 * np.pi * freq / sample_rate
    w_c = 2.0 * np.pi * f_c / sample_rate
    return 2.0 * np.abs(np.cos(w) - np.cos(w_c))


def design_notch_fir(spec: NotchSpec, sample_rate: float) -> FirFilter:
    """Design one linear-phase notch filter of exactly ``spec.n_taps`` taps.

    The desired amplitude is 1 outside the clamped stop band and 0 inside
    it; the zero-pair anchor makes the response vanish at the clamped
    center frequency exactly.
    """
    if sample_rate <= 0:
        raise ConfigurationError(f"sample rate must be positive, got {sample_rate}")
    f_c, lo, hi = spec.clamped(sample_rate)
    w_c = 2.0 * np.pi * f_c / sample_rate
    zero_pair = np.array([1.0, -2.0 * np.cos(w_c), 1.0])

    grid = np.linspace(0.0, sample_rate / 2.0, DESIGN_GRID_POINTS)
    n_win = spec.n_taps - 2
    if n_win <= 1:
        shaped = zero_pair
    else:
        compensation = np.minimum(
            1.0 / np.clip(_zero_pair_magnitude(grid, f_c, sample_rate), 1e-12, None),
            _COMPENSATION_CAP,
        )
        amp = np.where((grid >= lo) & (grid <= hi), 0.0, compensation)
        # Linear phase: delay by (n_win-1)/2 samples, then real inverse FFT
        # of the sampled response, truncation and Hamming window.
        shift = np.exp(-1j * np.pi * (n_win - 1) * grid / sample_rate)
        h_win = np.fft.irfft(amp * shift)[:n_win] * np.hamming(n_win)
        shaped = np.convolve(h_win, zero_pair)

    magnitudes = _grid_magnitude(shaped, DESIGN_GRID_POINTS)
    passband = (grid < lo) | (grid > hi)
    scale = float(np.median(magnitudes[passband]))
    if scale <= 0 or not np.isfinite(scale):
        raise DegenerateSpecError(f"notch design for {spec} collapsed to a zero response")
    return FirFilter(shaped / scale)


def cascade(filters: Sequence[FirFilter]) -> FirFilter:
    """Combine filters in series: the linear convolution of all responses."""
    if len(filters) == 0:
        raise ConfigurationError("cascade of zero filters is undefined")
    combined = filters[0].coefficients
    for f in filters[1:]:
        combined = np.convolve(combined, f.coefficients)
    return FirFilter(combined)


def design_multiband_fir(notches: Sequence[NotchSpec], sample_rate: float) -> FirFilter:
    """Design one multi-band filter as the cascade of per-notch designs.

    Zero notches yield the unit impulse (all-pass).
    """
    if len(notches) == 0:
        return UNIT_IMPULSE
    return cascade([design_notch_fir(spec, sample_rate) for spec in notches])


def _grid_magnitude(coefficients: np.ndarray, n_points: int) -> np.ndarray:
    """|DTFT| on the uniform inclusive grid over [0, fs/2] with n_points bins.

    That grid coincides with the non-negative bins of a 2*(n_points-1)-point
    real FFT, so zero-padded rfft evaluates it exactly; filters longer than
    the transform fall back to the direct matrix evaluation.
    """
    n_fft = 2 * (n_points - 1)
    if coefficients.size <= n_fft:
        return np.abs(np.fft.rfft(coefficients, n_fft))
    w = np.pi * np.arange(n_points) / (n_points - 1)
    response = np.exp(-1j * np.outer(w, np.arange(coefficients.size))) @ coefficients
    return np.abs(response)


def frequency_response(fir: FirFilter, n_points: int, sample_rate: float):
    """Magnitude response in dB at n_points uniform frequencies over [0, fs/2].

    Returns (frequencies_hz, magnitude_db) arrays. Magnitudes are floored at
    -300 dB so exact nulls stay representable.
    """
    if n_points < 2:
        raise ConfigurationError(f"n_points must be at least 2, got {n_points}")
    freq = np.linspace(0.0, sample_rate / 2.0, int(n_points))
    mag = _grid_magnitude(fir.coefficients, int(n_points))
    mag_db = 20.0 * np.log10(np.maximum(mag, 1e-15))
    return freq, mag_db


def convolve_same(samples: np.ndarray, fir: FirFilter) -> np.ndarray:
    """Causal convolution with implicit zero history, output length = input length.

    y[n] = sum_i b_i * x[n-i] with x[m] = 0 for m < 0.
    """
    x = np.asarray(samples, dtype=np.float64)
    b = fir.coefficients
    if b.size == 1:
        return x * b[0]
    return oaconvolve(x, b, mode="full")[: x.size]


def local_minima(values: np.ndarray) -> List[int]:
    """Indices of interior local minima, tolerating flat plateaus."""
    idx = []
    v = np.asarray(values)
    for i in range(1, v.size - 1):
        if v[i] <= v[i - 1] and v[i] <= v[i + 1] and (v[i] < v[i - 1] or v[i] < v[i + 1]):
            idx.append(i)
    return idx


def write_response_csv(path, freq: np.ndarray, mag_db: np.ndarray) -> None:
    """Emit a (frequency_hz, magnitude_db) response as two-column CSV."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frequency_hz", "magnitude_db"])
        for f, m in zip(freq, mag_db):
            writer.writerow([repr(float(f)), repr(float(m))])
