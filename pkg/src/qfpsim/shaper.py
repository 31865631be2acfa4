"""Microring pulse shaper with full inter-channel crosstalk, and the ideal
line-by-line reference shaper.

Each MRR channel drops its line through one filter, applies a lumped phase and
adds it back through an identical filter, so the channel contributes
``D_p(w)**2 exp(i phi_p)`` and must pass the through ports of every other
channel on the way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from qfpsim.rings import RingFilter, filter_response, synthesize_flat_filter
from qfpsim.waveguide import WaveguideModel


class LinewidthError(RuntimeError):
    """Half-maximum points of a channel could not be bracketed."""


@dataclass(frozen=True)
class FrequencyGrid:
    """Equispaced bins ``omega0 + m * spacing`` for ``m = 0 .. count-1`` (rad/s)."""

    omega0: float
    spacing: float
    count: int

    def __post_init__(self) -> None:
        if self.spacing <= 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        if self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")

    def frequency(self, m):
        return self.omega0 + np.asarray(m) * self.spacing

    @property
    def frequencies(self) -> np.ndarray:
        return self.frequency(np.arange(self.count))


@dataclass(frozen=True)
class ShaperConfig:
    """Channels ``(filter, phase)`` aligned one-to-one with the grid bins.

    ``mode`` selects the MRR crosstalk model (``"mrr"``) or the ideal
    line-by-line shaper (``"ideal"``).
    """

    grid: FrequencyGrid
    channels: tuple[tuple[RingFilter, float], ...]
    waveguide: WaveguideModel = field(default_factory=WaveguideModel)
    mode: str = "mrr"

    def __post_init__(self) -> None:
        object.__setattr__(self, "channels", tuple((f, float(p)) for f, p in self.channels))
        if len(self.channels) != self.grid.count:
            raise ValueError(f"{len(self.channels)} channels for a {self.grid.count}-bin grid")
        if self.mode not in ("mrr", "ideal"):
            raise ValueError(f"unknown shaper mode {self.mode!r}")

    @property
    def phases(self) -> np.ndarray:
        return np.array([p for _, p in self.channels])

    def with_phases(self, phases: Sequence[float]) -> "ShaperConfig":
        chans = tuple((f, p) for (f, _), p in zip(self.channels, phases, strict=True))
        return ShaperConfig(self.grid, chans, self.waveguide, self.mode)


def build_shaper(
    grid: FrequencyGrid,
    phases: Sequence[float],
    waveguide: WaveguideModel | None = None,
    *,
    radius: float = 20.0,
    kappa_sq: float = 0.01,
    order: int = 1,
    ratio_table: dict[int, tuple[float, ...]] | None = None,
    mode: str = "mrr",
) -> ShaperConfig:
    """Shaper with one filter per bin, each tuned to its own bin frequency."""
    waveguide = waveguide or WaveguideModel()
    if order > 1 and ratio_table is None:
        from qfpsim.rings import load_coupling_table

        ratio_table = load_coupling_table()
    table = ratio_table if ratio_table is not None else {1: ()}
    chans = []
    for m, phase in enumerate(phases):
        filt = synthesize_flat_filter(
            waveguide, radius, order, kappa_sq, table, omega_target=float(grid.frequency(m))
        )
        chans.append((filt, phase))
    return ShaperConfig(grid, tuple(chans), waveguide, mode)


def _channel_responses(config: ShaperConfig, w: np.ndarray):
    through = np.empty((len(config.channels), w.size), dtype=complex)
    drop = np.empty_like(through)
    for p, (filt, _) in enumerate(config.channels):
        r = filter_response(config.waveguide, filt, w)
        through[p] = r.through
        drop[p] = r.drop
    return through, drop


def shaper_response(config: ShaperConfig, omega):
    """Complex MRR shaper transfer function H(omega), valid at any frequency."""
    if config.mode != "mrr":
        raise ValueError("shaper_response needs an 'mrr' shaper; use ideal_response")
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    through, drop = _channel_responses(config, w.reshape(-1))
    # product over q != p without dividing by T_p (which may vanish)
    ones = np.ones((1, through.shape[1]), dtype=complex)
    before = np.cumprod(np.vstack([ones, through[:-1]]), axis=0)
    after = np.cumprod(np.vstack([ones, through[:0:-1]]), axis=0)[::-1]
    weights = np.exp(1j * config.phases)[:, None]
    h = np.sum(drop**2 * weights * before * after, axis=0).reshape(w.shape)
    return h.item() if np.ndim(omega) == 0 else h


def ideal_response(config: ShaperConfig, omega):
    """Line-by-line shaper: ``exp(i phi_m)`` for the nearest bin, 0 outside the band."""
    w = np.asarray(omega, dtype=float)
    grid = config.grid
    m = np.floor((w - grid.omega0) / grid.spacing + 0.5).astype(int)
    inside = (m >= 0) & (m < grid.count)
    h = np.zeros(w.shape, dtype=complex)
    h[inside] = np.exp(1j * config.phases[m[inside]])
    return h.item() if h.ndim == 0 else h


def response(config: ShaperConfig, omega):
    """Dispatch on the shaper mode."""
    if config.mode == "ideal":
        return ideal_response(config, omega)
    return shaper_response(config, omega)


def channel_linewidth(config: ShaperConfig, channel: int, quantity: str = "field") -> float:
    """Half-width at half-maximum of one shaper channel, in Hz.

    The half-maximum is taken on ``|H|`` (``quantity="field"``, the drop-port
    power transmission of a single ring) or on ``|H|**2``
    (``quantity="power"``). The search is confined to half a bin on either
    side of the channel peak.
    """
    if config.mode != "mrr":
        raise ValueError("linewidth is only defined for an 'mrr' shaper")
    if quantity not in ("field", "power"):
        raise ValueError(f"quantity must be 'field' or 'power', got {quantity!r}")
    power = 1 if quantity == "field" else 2
    wm = float(config.grid.frequency(channel))
    half = config.grid.spacing / 2

    def level(w):
        return np.abs(shaper_response(config, w)) ** power

    # refine the peak; the resonance is tuned to wm but crosstalk can pull it
    scale = config.grid.spacing
    res = minimize_scalar(
        lambda x: -level(wm + x * scale), bounds=(-0.25, 0.25), method="bounded",
        options={"xatol": 1e-9},
    )
    w_peak = wm + res.x * scale
    target = level(w_peak) / 2

    def edge(direction: int) -> float:
        xs = np.linspace(0, half, 2001)[1:]
        vals = level(w_peak + direction * xs) - target
        below = np.nonzero(vals < 0)[0]
        if below.size == 0:
            raise LinewidthError(
                f"channel {channel}: no half-maximum crossing within half a bin"
            )
        i = below[0]
        lo = 0.0 if i == 0 else xs[i - 1]
        return brentq(lambda x: level(w_peak + direction * x) - target, lo, xs[i], xtol=1e-3)

    width = edge(+1) + edge(-1)
    return width / 2 / (2 * math.pi)
