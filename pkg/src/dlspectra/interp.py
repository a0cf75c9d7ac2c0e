"""Trigonometric interpolation of samples on an equispaced periodic grid."""
from __future__ import annotations

import numpy as np


def trig_coefficients(samples) -> tuple[np.ndarray, np.ndarray]:
    """Modes ``k`` and coefficients ``c_k`` with the Nyquist mode split in half.

    The interpolant ``sum_k c_k exp(i k t)`` is real for real samples.
    """
    samples = np.asarray(samples)
    n = samples.shape[0]
    c = np.fft.fft(samples, axis=0) / n
    k = np.fft.fftfreq(n, 1.0 / n)
    if n % 2 == 0:
        nyq = n // 2
        c = np.concatenate([c, c[nyq:nyq + 1]], axis=0)
        c[nyq] *= 0.5
        c[-1] *= 0.5
        k = np.concatenate([k, [nyq]])
        k[n // 2] = -nyq
    return k, c


def trig_resample(samples, m: int) -> np.ndarray:
    """Values of the trigonometric interpolant on ``m`` equispaced points (``m >= n``)."""
    samples = np.asarray(samples)
    n = samples.shape[0]
    if m < n:
        raise ValueError(f"cannot resample {n} samples down to {m}")
    c = np.fft.fft(samples, axis=0)
    out = np.zeros((m,) + samples.shape[1:], dtype=complex)
    half = n // 2
    if n % 2 == 0:
        out[:half] = c[:half]
        out[m - half + 1:] = c[half + 1:]
        out[half] += 0.5 * c[half]
        out[m - half] += 0.5 * c[half]
    else:
        out[:half + 1] = c[:half + 1]
        out[m - half:] = c[half + 1:]
    vals = np.fft.ifft(out, axis=0) * (m / n)
    return vals.real if np.isrealobj(samples) else vals


def trig_eval(samples, t) -> np.ndarray:
    """Evaluate the interpolant at arbitrary (possibly complex) parameters ``t``."""
    k, c = trig_coefficients(samples)
    t = np.asarray(t)
    vals = np.exp(1j * np.multiply.outer(t, k)) @ c
    if np.isrealobj(samples) and np.isrealobj(t):
        return vals.real
    return vals
