"""Electro-optic phase modulators as periodic time-domain phase shifters.

A drive with period T = 2*pi/spacing scatters bin n into bin m with amplitude
``c_{m-n}``, where ``c_n`` is the n-th Fourier coefficient of
``exp(i phi(t))`` taken with kernel ``exp(+i n spacing t)``. Time is measured
in units of the period, so coefficients do not depend on the bin spacing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from qfpsim._search import grid_golden_max

DEFAULT_TRUNCATION = 16
DEFAULT_SAMPLES = 4096
TAIL_LIMIT = 1e-10


class TruncationError(ValueError):
    """Energy outside the retained sidebands is too large."""

    def __init__(self, tail: float, truncation: int):
        super().__init__(
            f"sideband energy beyond |n| > {truncation - 2} is {tail:.3e} "
            f"(limit {TAIL_LIMIT:g}); increase the truncation"
        )
        self.tail = tail
        self.truncation = truncation


@dataclass(frozen=True)
class ModulatorDrive:
    """Periodic phase drive of one EOM.

    ``kind="sinusoid"``: ``phi = depth * sin(2 pi t + rf_phase)``.
    ``kind="log_voltage"``: ``phi = a * ln(1 + V(t) / v_0)`` with
    ``V(t) = v_dc + v_1 * sin(2 pi t + rf_phase)`` (reverse bias, volts).

    ``amplitude`` optionally maps the instantaneous voltage to a field
    transmission for voltage-dependent loss; ``None`` means lossless.
    """

    kind: str = "sinusoid"
    depth: float = 0.8283
    rf_phase: float = 0.0
    v_dc: float = 0.0
    v_1: float = 0.0
    a: float = 2.0
    v_0: float = 10.0
    amplitude: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self) -> None:
        if self.kind == "sinusoid":
            if self.depth < 0:
                raise ValueError(f"depth must be non-negative, got {self.depth}")
        elif self.kind == "log_voltage":
            if self.v_0 <= 0:
                raise ValueError(f"v_0 must be positive, got {self.v_0}")
            if not 0 <= self.v_1 <= self.v_dc:
                raise ValueError(
                    f"need 0 <= v_1 <= v_dc so the reverse voltage stays non-negative, "
                    f"got v_1={self.v_1}, v_dc={self.v_dc}"
                )
        else:
            raise ValueError(f"unknown drive kind {self.kind!r}")

    @classmethod
    def off(cls) -> "ModulatorDrive":
        return cls(depth=0.0)

    def with_rf_phase(self, rf_phase: float) -> "ModulatorDrive":
        return replace(self, rf_phase=float(rf_phase))

    def voltage(self, t_norm):
        return self.v_dc + self.v_1 * np.sin(2 * np.pi * np.asarray(t_norm) + self.rf_phase)


def phase_waveform(drive: ModulatorDrive, t_norm):
    """Instantaneous phase (rad) at normalised time ``t_norm`` in [0, 1)."""
    t = np.asarray(t_norm, dtype=float)
    if drive.kind == "sinusoid":
        phi = drive.depth * np.sin(2 * np.pi * t + drive.rf_phase)
    else:
        arg = 1 + drive.voltage(t) / drive.v_0
        if np.any(arg <= 0):
            raise ValueError("drive voltage reaches the logarithm's singularity (V <= -v_0)")
        phi = drive.a * np.log(arg)
    return phi.item() if phi.ndim == 0 else phi


def linear_slope(drive: ModulatorDrive) -> float:
    """Small-signal phase slope a / v_0 (rad/V) of the logarithmic model at V = 0."""
    return drive.a / drive.v_0


@dataclass(frozen=True)
class EomCoefficients:
    """Sideband amplitudes ``c_n`` for ``n = -truncation .. truncation``."""

    coeffs: np.ndarray
    truncation: int

    def __post_init__(self) -> None:
        if len(self.coeffs) != 2 * self.truncation + 1:
            raise ValueError("coeffs length must be 2 * truncation + 1")

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-self.truncation, self.truncation + 1)

    def __getitem__(self, n: int) -> complex:
        if abs(n) > self.truncation:
            return 0j
        return complex(self.coeffs[n + self.truncation])

    def shifted(self, delta: float) -> "EomCoefficients":
        """Coefficients of the same drive advanced in RF phase by ``delta``."""
        return EomCoefficients(self.coeffs * np.exp(-1j * self.orders * delta), self.truncation)

    @property
    def total_power(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))


def fourier_coefficients(
    drive: ModulatorDrive,
    truncation: int = DEFAULT_TRUNCATION,
    samples: int = DEFAULT_SAMPLES,
) -> EomCoefficients:
    """Sample one period of the drive and return its retained sideband amplitudes.

    Raises :class:`TruncationError` when more than ``1e-10`` of the energy sits
    at orders ``|n| > truncation - 2``.
    """
    if truncation < 1:
        raise ValueError(f"truncation must be >= 1, got {truncation}")
    if samples < 8 * truncation or samples & (samples - 1):
        raise ValueError(f"samples must be a power of two >= 8*truncation, got {samples}")
    t = np.arange(samples) / samples
    signal = np.exp(1j * phase_waveform(drive, t))
    if drive.amplitude is not None:
        signal = signal * drive.amplitude(drive.voltage(t))
    # ifft kernel is exp(+2 pi i n j / P) with the 1/P factor
    spectrum = np.fft.ifft(signal)
    orders = np.fft.fftfreq(samples, 1 / samples).astype(int)
    tail = float(np.sum(np.abs(spectrum[np.abs(orders) > truncation - 2]) ** 2))
    if tail >= TAIL_LIMIT:
        raise TruncationError(tail, truncation)
    keep = np.arange(-truncation, truncation + 1)
    return EomCoefficients(spectrum[keep % samples], truncation)


def optimize_drive(
    v_dc_grid: Sequence[float],
    a: float,
    v_0: float,
    gate_eval: Callable[[ModulatorDrive], float],
    *,
    grid_points: int = 64,
    tol: float = 1e-4,
) -> list[tuple[float, float, float]]:
    """For each bias, find the modulation amplitude ``v_1 <= v_dc`` maximising fidelity.

    ``gate_eval`` receives the log-voltage drive and returns the gate fidelity
    (it is responsible for applying the drive to both modulators and aligning
    them). Returns ``(v_dc, best v_1, fidelity)`` triples.
    """
    results = []
    for v_dc in v_dc_grid:
        v_dc = float(v_dc)
        if v_dc <= 0:
            drive = ModulatorDrive("log_voltage", v_dc=v_dc, v_1=0.0, a=a, v_0=v_0)
            results.append((v_dc, 0.0, gate_eval(drive)))
            continue

        def fid(v1: float) -> float:
            v1 = min(max(v1, 0.0), v_dc)
            return gate_eval(ModulatorDrive("log_voltage", v_dc=v_dc, v_1=v1, a=a, v_0=v_0))

        v1, f = grid_golden_max(fid, 0.0, v_dc, grid_points, tol)
        results.append((v_dc, min(v1, v_dc), f))
    return results
