"""Finite-bandwidth qubits with rectangular (Nyquist) bin spectra.

Each input bin carries the flat spectrum of an ideal sinc pulse. The output
wavepacket is sampled on a midpoint quadrature over the occupied offsets and
compared with the ideal gate output that keeps the input bin shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from qfpsim.engine import (
    GateSpec,
    QfpStack,
    _map,
    compose_v,
    window_positions,
)


@dataclass(frozen=True)
class NyquistQubit:
    """``c0|0> + c1|1>`` on two bins, each with a flat spectrum ``bandwidth`` wide (rad/s)."""

    c0: complex
    c1: complex
    bandwidth: float
    modes: tuple[int, int] = (2, 3)

    def __post_init__(self) -> None:
        norm = abs(self.c0) ** 2 + abs(self.c1) ** 2
        if abs(norm - 1) > 1e-12:
            raise ValueError(f"amplitudes must be normalised, |c0|^2 + |c1|^2 = {norm}")
        if self.bandwidth < 0:
            raise ValueError("bandwidth must be non-negative")

    @classmethod
    def named(cls, state: str, bandwidth: float, modes: tuple[int, int] = (2, 3)) -> "NyquistQubit":
        """``"0"``, ``"1"``, ``"+"``, ``"-"``, ``"+i"`` or ``"-i"``."""
        s = 1 / math.sqrt(2)
        amps = {
            "0": (1, 0),
            "1": (0, 1),
            "+": (s, s),
            "-": (s, -s),
            "+i": (s, 1j * s),
            "-i": (s, -1j * s),
        }
        try:
            c0, c1 = amps[state]
        except KeyError:
            raise ValueError(f"unknown state {state!r}; choose from {sorted(amps)}") from None
        return cls(complex(c0), complex(c1), bandwidth, modes)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([self.c0, self.c1], dtype=complex)


@dataclass(frozen=True)
class Wavepacket:
    """Complex spectral amplitudes per mode (rows) and offset (columns).

    ``modes`` holds the shaper-bin index of each row and ``weights`` the
    quadrature weight of each offset column.
    """

    offsets: np.ndarray
    weights: np.ndarray
    modes: np.ndarray
    amplitudes: np.ndarray

    def energy(self, modes=None) -> float:
        amps = self.amplitudes if modes is None else self.amplitudes[self._rows(modes)]
        return float(np.sum(np.abs(amps) ** 2 * self.weights[None, :]))

    def _rows(self, modes) -> list[int]:
        index = {int(m): i for i, m in enumerate(self.modes)}
        return [index[int(m)] for m in modes]

    def restricted(self, modes) -> "Wavepacket":
        rows = self._rows(modes)
        return Wavepacket(self.offsets, self.weights, self.modes[rows], self.amplitudes[rows])


def nyquist_spectrum(bandwidth: float, omega_offset):
    """Flat spectrum ``sqrt(T_s / 2 pi)`` for ``|offset| < bandwidth / 2``, zero outside.

    ``bandwidth`` is the full width ``2 pi / T_s`` in rad/s.
    """
    ts = 2 * math.pi / bandwidth
    x = np.asarray(omega_offset, dtype=float)
    s = np.where(np.abs(x) < math.pi / ts, math.sqrt(ts / (2 * math.pi)), 0.0)
    return s.item() if s.ndim == 0 else s


def quadrature(bandwidth: float, points: int) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint nodes and weights spanning the occupied band ``[-bw/2, bw/2]``."""
    if points < 1 or points % 2 == 0:
        raise ValueError(f"quadrature points must be odd, got {points}")
    h = bandwidth / points
    nodes = -bandwidth / 2 + h * (np.arange(points) + 0.5)
    return nodes, np.full(points, h)


def propagate(
    stack: QfpStack,
    qubit: NyquistQubit,
    spec: GateSpec,
    quadrature_points: int = 201,
    *,
    threads: int | None = None,
) -> tuple[Wavepacket, Wavepacket]:
    """Ideal output ``g`` (computational bins only) and actual output ``y`` (whole window).

    A zero bandwidth is treated as a single monochromatic comb at zero offset
    with unit weight.
    """
    if qubit.bandwidth >= stack.shaper.grid.spacing:
        raise ValueError("input bandwidth must be narrower than the bin spacing")
    if qubit.bandwidth == 0:
        nodes, weights = np.zeros(1), np.ones(1)
        profile = np.ones(1)
    else:
        if quadrature_points < 3:
            raise ValueError("need at least 3 quadrature points")
        nodes, weights = quadrature(qubit.bandwidth, quadrature_points)
        profile = nyquist_spectrum(qubit.bandwidth, nodes)

    pos = window_positions(GateSpec(np.eye(2), qubit.modes), stack.guard_modes, stack.dim)
    comp = window_positions(spec, stack.guard_modes, stack.dim)
    if not set(pos) <= set(comp):
        raise ValueError(f"input modes {qubit.modes} are not computational modes of the gate")

    x_comp = np.zeros(spec.d, dtype=complex)
    for amp, p in zip(qubit.amplitudes, pos):
        x_comp[comp.index(p)] = amp
    g_comp = spec.target @ x_comp

    def column(offset: float) -> np.ndarray:
        return compose_v(stack, offset)[:, comp] @ x_comp

    y = np.stack(_map(column, nodes, threads), axis=1) * profile[None, :]
    g = g_comp[:, None] * profile[None, :]
    g_packet = Wavepacket(nodes, weights, np.array(spec.computational_modes), g)
    y_packet = Wavepacket(nodes, weights, stack.bins.copy(), y)
    return g_packet, y_packet


def wavepacket_metrics(g: Wavepacket, y: Wavepacket, *, include_scattered: bool = False) -> tuple[float, float]:
    """Wavepacket fidelity and success probability of ``y`` against ``g``.

    The overlap and norms use the modes of ``g`` (the computational bins);
    ``include_scattered=True`` adds light scattered into every other mode of
    ``y`` to its norm for both metrics.
    """
    if not np.allclose(g.offsets, y.offsets):
        raise ValueError("wavepackets use different quadrature grids")
    y_comp = y.restricted(g.modes)
    overlap = np.sum(np.conj(g.amplitudes) * y_comp.amplitudes * g.weights[None, :])
    eg = g.energy()
    ey = y.energy() if include_scattered else y_comp.energy()
    if ey == 0 or eg == 0:
        return 0.0, 0.0
    return float(abs(overlap) ** 2 / (eg * ey)), ey / eg
