"""The three noise kernels: convolutive, impulsive and stationary.

All randomness used by a kernel is drawn from the RandomSource passed in;
the convolutive kernel consumes none (its randomness lives entirely in
config sampling). Kernels never normalize: peak control happens once at
the end of a pipeline run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConvolutiveConfig, ImpulsiveConfig, RandomSource, StationaryConfig, Waveform
from .errors import DegenerateFilterError, DegenerateInputError
from .filters import convolve_same

__all__ = [
    "DrSample",
    "sample_dr",
    "apply_convolutive",
    "apply_impulsive",
    "apply_stationary",
]


@dataclass(frozen=True)
class DrSample:
    """One impulsive amplitude draw: fair sign times a (0, 1] magnitude.

    The magnitude is the product of two independent uniform(0, 1) variates,
    whose density on (0, 1] is -ln(m); zero occurs only with the (measure
    zero) probability of drawing an exact floating-point zero.
    """

    value: float

    def __post_init__(self):
        if not -1.0 <= self.value <= 1.0:
            raise ValueError(f"D_R sample out of [-1, 1]: {self.value}")


def sample_dr(rng: RandomSource) -> DrSample:
    """Draw one D_R value: sign, then the two magnitude factors."""
    sign = rng.sign()
    u1 = rng.uniform(0.0, 1.0)
    u2 = rng.uniform(0.0, 1.0)
    return DrSample(value=float(sign * u1 * u2))


def apply_convolutive(x: Waveform, cfg: ConvolutiveConfig) -> Waveform:
    """Hammerstein convolutive noise.

    y[n] = sum_j gain_j * (fir_j * x^j)[n], where x^j is the elementwise
    j-th power (computed by repeated multiplication) and * is causal
    same-length convolution. Deterministic given cfg.
    """
    samples = x.samples
    y = np.zeros_like(samples)
    power = np.ones_like(samples)
    for order in cfg.orders:
        power = power * samples
        y += order.gain * convolve_same(power, order.fir)
    return Waveform(samples=y, sample_rate=x.sample_rate)


def apply_impulsive(x: Waveform, cfg: ImpulsiveConfig, rng: RandomSource) -> Waveform:
    """Impulsive signal-dependent noise at round(p_rel * l) distinct positions.

    At each chosen position n: y[n] = x[n] + g_sd * d_n * x[n]; every other
    sample is left bit-identical. The per-position draws follow the
    sample_dr order (sign, factor, factor), batched.
    """
    samples = x.samples
    l = samples.size
    p = int(np.floor(cfg.p_rel * l + 0.5))
    y = samples.copy()
    if p == 0:
        return Waveform(samples=y, sample_rate=x.sample_rate)
    positions = rng.choose_positions(l, p)
    draws = rng.uniform(0.0, 1.0, size=3 * p).reshape(p, 3)
    signs = np.where(draws[:, 0] < 0.5, 1.0, -1.0)
    d = signs * draws[:, 1] * draws[:, 2]
    y[positions] = samples[positions] + cfg.g_sd * d * samples[positions]
    return Waveform(samples=y, sample_rate=x.sample_rate)


def apply_stationary(x: Waveform, cfg: StationaryConfig, rng: RandomSource) -> Waveform:
    """Stationary colored additive noise at an exact target SNR.

    White standard-normal noise is colored by the config's FIR filter and
    scaled so that 10*log10(sum(x^2) / sum((g*z)^2)) equals snr_db up to
    float rounding.
    """
    samples = x.samples
    signal_energy = float(np.sum(samples * samples))
    if signal_energy <= 0.0:
        raise DegenerateInputError("input has zero energy; target SNR is undefined")
    white = rng.normal(size=samples.size)
    colored = convolve_same(white, cfg.coloring_filter)
    noise_energy = float(np.sum(colored * colored))
    if noise_energy <= 0.0:
        raise DegenerateFilterError("coloring filter produced zero-energy noise")
    gain = np.sqrt(signal_energy / (noise_energy * 10.0 ** (cfg.snr_db / 10.0)))
    y = samples + gain * colored
    return Waveform(samples=y, sample_rate=x.sample_rate)
