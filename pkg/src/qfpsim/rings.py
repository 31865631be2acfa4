"""Add-drop microring filter responses.

Single rings use the closed-form through/drop expressions. Serially coupled
N-ring filters are cascaded with 2x2 transfer matrices: lossless couplers with
self-coupling ``t`` and cross-coupling ``i*kappa``, separated by half-round-trip
propagation ``sqrt(A) exp(i phi/2)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from qfpsim.waveguide import (
    RingGeometry,
    WaveguideModel,
    field_attenuation,
    round_trip_phase,
    tune_ring,
)


@dataclass(frozen=True)
class RingFilter:
    """Serial add-drop filter of ``order`` coupled rings.

    ``bus_coupling`` is the power coupling of both bus couplers and
    ``inter_couplings`` the ``order - 1`` ring-ring power couplings.
    """

    rings: tuple[RingGeometry, ...]
    bus_coupling: float = 0.01
    inter_couplings: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "rings", tuple(self.rings))
        object.__setattr__(self, "inter_couplings", tuple(float(k) for k in self.inter_couplings))
        if not self.rings:
            raise ValueError("a filter needs at least one ring")
        if len(self.inter_couplings) != len(self.rings) - 1:
            raise ValueError(
                f"order {len(self.rings)} needs {len(self.rings) - 1} inter-ring couplings, "
                f"got {len(self.inter_couplings)}"
            )
        for k in (self.bus_coupling, *self.inter_couplings):
            if not 0 <= k < 1:
                raise ValueError(f"power coupling must lie in [0, 1), got {k}")

    @property
    def order(self) -> int:
        return len(self.rings)

    @classmethod
    def single(cls, ring: RingGeometry, kappa_sq: float = 0.01) -> "RingFilter":
        return cls(rings=(ring,), bus_coupling=kappa_sq)

    def couplings(self) -> tuple[float, ...]:
        """All power couplings along the chain, input bus first."""
        return (self.bus_coupling, *self.inter_couplings, self.bus_coupling)

    def tuned(self, model: WaveguideModel, omega_target: float) -> "RingFilter":
        rings = tuple(tune_ring(model, r, omega_target) for r in self.rings)
        return RingFilter(rings, self.bus_coupling, self.inter_couplings)


@dataclass(frozen=True)
class FilterResponse:
    """Complex through and drop field ratios (scalars or arrays over frequency)."""

    through: complex | np.ndarray
    drop: complex | np.ndarray


def single_ring_response(model: WaveguideModel, filt: RingFilter, omega) -> FilterResponse:
    if filt.order != 1:
        raise ValueError(f"closed form applies to a single ring, got order {filt.order}")
    ring = filt.rings[0]
    k2 = filt.bus_coupling
    t = math.sqrt(1 - k2)
    a = field_attenuation(model, ring)
    phi = np.asarray(round_trip_phase(model, ring, omega))
    e = a * np.exp(1j * phi)
    den = 1 - t * t * e
    through = (t - t * e) / den
    drop = -k2 * math.sqrt(a) * np.exp(0.5j * phi) / den
    return FilterResponse(_squeeze(through), _squeeze(drop))


def nring_response(model: WaveguideModel, filt: RingFilter, omega) -> FilterResponse:
    """Through/drop response of a serial ring chain by transfer-matrix cascade.

    The coupler matrix ``[[-1, t], [-t, 1]]`` and propagation matrix
    ``diag(h, 1/h)`` (``h = sqrt(A) exp(i phi/2)``) act on the homogeneous
    vector of the reflected-to-incident field ratio on each coupler's upper
    guide. The cascade runs from the drop bus (no add input) back to the input
    bus and is renormalised after every step; multiplying the raw matrices
    together loses all precision once the inner couplings get small.
    """
    omega = np.asarray(omega, dtype=float)
    shape = omega.shape
    w = omega.reshape(-1)
    # extended precision: 1 - t*sigma cancels badly for weak inner couplers
    k2 = np.asarray(filt.couplings(), dtype=np.longdouble)
    kappas = np.sqrt(k2)
    ts = np.sqrt(1 - k2)
    hs = []
    for ring in filt.rings:
        half = np.asarray(round_trip_phase(model, ring, w), dtype=np.longdouble) / 2
        amp = np.sqrt(np.longdouble(field_attenuation(model, ring)))
        hs.append(amp * (np.cos(half) + 1j * np.sin(half)))

    # sigma_j: incoming/outgoing field ratio on the ring side of coupler j
    sigmas = [None] * (filt.order + 1)
    vec = np.zeros((2, w.size), dtype=np.clongdouble)
    vec[1] = 1.0
    for j in range(filt.order, -1, -1):
        sigmas[j] = vec[0] / vec[1]
        coupler = np.array([[-1, ts[j]], [-ts[j], 1]], dtype=np.longdouble)
        vec = coupler @ vec
        if j > 0:
            vec = np.stack([hs[j - 1] * vec[0], vec[1] / hs[j - 1]])
        vec = vec / np.abs(vec).max(axis=0)
    through = (vec[0] / vec[1]).astype(complex)

    # forward pass for the field leaving each coupler into the next guide
    amp = np.ones(w.size, dtype=np.clongdouble)
    for j in range(filt.order + 1):
        amp = 1j * kappas[j] * amp / (1 - ts[j] * sigmas[j])
        if j < filt.order:
            amp = hs[j] * amp
    drop = amp.astype(complex)
    return FilterResponse(_squeeze(through.reshape(shape)), _squeeze(drop.reshape(shape)))


def filter_response(model: WaveguideModel, filt: RingFilter, omega) -> FilterResponse:
    """Closed form for single rings, transfer matrices otherwise."""
    if filt.order == 1:
        return single_ring_response(model, filt, omega)
    return nring_response(model, filt, omega)


def load_coupling_table(path=None) -> dict[int, tuple[float, ...]]:
    """Read an inter-ring coupling ratio table keyed by filter order.

    Without ``path`` the packaged maximally flat table is used.
    """
    if path is None:
        text = resources.files("qfpsim.data").joinpath("coupling_table.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    raw = json.loads(text)
    return {int(k): tuple(float(x) for x in v) for k, v in raw.items() if not k.startswith("_")}


def synthesize_flat_filter(
    model: WaveguideModel,
    radius: float,
    order: int,
    bus_kappa_sq: float,
    ratio_table: dict[int, tuple[float, ...]],
    omega_target: float | None = None,
) -> RingFilter:
    """Build an order-``order`` flat-top filter with every ring tuned to ``omega_target``.

    Inter-ring power couplings are ``ratio * bus_kappa_sq**2``.
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    try:
        ratios = tuple(ratio_table[order])
    except KeyError:
        raise KeyError(f"coupling table has no entry for order {order}") from None
    if len(ratios) != order - 1:
        raise ValueError(f"table entry for order {order} has {len(ratios)} ratios, expected {order - 1}")
    inter = tuple(r * bus_kappa_sq**2 for r in ratios)
    ring = RingGeometry(radius)
    if omega_target is not None:
        ring = tune_ring(model, ring, omega_target)
    return RingFilter((ring,) * order, bus_kappa_sq, inter)


def _squeeze(x):
    x = np.asarray(x)
    return x.item() if x.ndim == 0 else x
