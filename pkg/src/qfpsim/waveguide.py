"""Waveguide dispersion, round-trip phase and loss for ring resonators.

Frequencies are angular (rad/s). Ring radii are in micrometres and the
attenuation coefficient in 1/cm, matching how ring designs are usually quoted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

C_VACUUM = 299792458.0  # m/s

OMEGA_REF_DEFAULT = 2 * math.pi * 193e12
N_EFF_DEFAULT = 2.37
N_GROUP_DEFAULT = 4.226
EXTRAPOLATION_LIMIT = 0.05


class ExtrapolationError(ValueError):
    """Frequency lies outside the validity window of the dispersion polynomial."""


def db_per_cm_to_alpha(loss_db_per_cm: float) -> float:
    """Convert a propagation loss in dB/cm to a power attenuation coefficient in 1/cm."""
    return loss_db_per_cm * math.log(10) / 10


@dataclass(frozen=True)
class WaveguideModel:
    """Effective-index Taylor polynomial plus propagation loss.

    Parameters
    ----------
    omega_ref : float
        Expansion centre [rad/s].
    n_coeffs : tuple of float
        Taylor coefficients ``[n0, n1, n2, ...]`` so that
        ``n_eff(w) = sum_k n_k (w - omega_ref)**k / k!``.
    alpha : float
        Power attenuation coefficient [1/cm].
    """

    omega_ref: float = OMEGA_REF_DEFAULT
    n_coeffs: tuple[float, ...] = (
        N_EFF_DEFAULT,
        (N_GROUP_DEFAULT - N_EFF_DEFAULT) / OMEGA_REF_DEFAULT,
    )
    alpha: float = db_per_cm_to_alpha(0.5)

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_coeffs", tuple(float(c) for c in self.n_coeffs))
        if not self.n_coeffs:
            raise ValueError("n_coeffs must not be empty")
        if self.n_coeffs[0] <= 0:
            raise ValueError(f"n0 must be positive, got {self.n_coeffs[0]}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")
        if self.omega_ref <= 0:
            raise ValueError(f"omega_ref must be positive, got {self.omega_ref}")

    @classmethod
    def from_group_index(
        cls,
        n_eff: float = N_EFF_DEFAULT,
        n_group: float = N_GROUP_DEFAULT,
        omega_ref: float = OMEGA_REF_DEFAULT,
        loss_db_per_cm: float = 0.5,
    ) -> "WaveguideModel":
        """First-order dispersion model fixed by the phase and group index at ``omega_ref``."""
        return cls(
            omega_ref=omega_ref,
            n_coeffs=(n_eff, (n_group - n_eff) / omega_ref),
            alpha=db_per_cm_to_alpha(loss_db_per_cm),
        )

    def with_alpha(self, alpha: float) -> "WaveguideModel":
        return replace(self, alpha=alpha)

    def group_index(self, omega):
        """n_g = n_eff + w dn_eff/dw."""
        dw = _checked_offset(self, omega)
        n = np.zeros_like(dw)
        dn = np.zeros_like(dw)
        for k, c in enumerate(self.n_coeffs):
            n = n + c * dw**k / math.factorial(k)
            if k > 0:
                dn = dn + c * dw ** (k - 1) / math.factorial(k - 1)
        return _scalar_or_array(n + np.asarray(omega, dtype=float) * dn)


@dataclass(frozen=True)
class RingGeometry:
    """Ring radius [um] and the static tuning phase [rad] added to the round trip."""

    radius: float = 20.0
    phase_offset: float = 0.0
    round_trip_length: float = field(init=False)

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        object.__setattr__(self, "round_trip_length", 2 * math.pi * self.radius)

    @property
    def round_trip_length_m(self) -> float:
        return self.round_trip_length * 1e-6


def _checked_offset(model: WaveguideModel, omega) -> np.ndarray:
    w = np.asarray(omega, dtype=float)
    dw = w - model.omega_ref
    if np.any(np.abs(dw) > EXTRAPOLATION_LIMIT * model.omega_ref):
        worst = float(np.max(np.abs(dw)) / model.omega_ref)
        raise ExtrapolationError(
            f"frequency offset {worst:.3%} of omega_ref exceeds "
            f"the {EXTRAPOLATION_LIMIT:.0%} dispersion window"
        )
    return dw


def _scalar_or_array(x):
    x = np.asarray(x)
    return x.item() if x.ndim == 0 else x


def effective_index(model: WaveguideModel, omega):
    """Evaluate the effective-index polynomial at ``omega`` (scalar or array)."""
    dw = _checked_offset(model, omega)
    # Horner on the factorial-scaled coefficients
    n = np.zeros_like(dw)
    for k in range(len(model.n_coeffs) - 1, -1, -1):
        n = n * dw + model.n_coeffs[k] / math.factorial(k)
    return _scalar_or_array(n)


def round_trip_phase(model: WaveguideModel, ring: RingGeometry, omega):
    """Round-trip phase ``w n_eff(w) L_rt / c + phase_offset`` in radians (not wrapped)."""
    w = np.asarray(omega, dtype=float)
    n = np.asarray(effective_index(model, w))
    return _scalar_or_array(w * n * ring.round_trip_length_m / C_VACUUM + ring.phase_offset)


def field_attenuation(model: WaveguideModel, ring: RingGeometry) -> float:
    """Round-trip field attenuation ``A = exp(-alpha L_rt / 2)``."""
    length_cm = ring.round_trip_length * 1e-4
    return math.exp(-model.alpha * length_cm / 2)


def free_spectral_range(model: WaveguideModel, ring: RingGeometry, omega=None) -> float:
    """FSR in Hz, ``c / (n_g L_rt)``, at ``omega`` (defaults to the expansion centre)."""
    w = model.omega_ref if omega is None else omega
    return C_VACUUM / (model.group_index(w) * ring.round_trip_length_m)


def tune_ring(model: WaveguideModel, ring: RingGeometry, omega_target: float) -> RingGeometry:
    """Return ``ring`` with its phase offset chosen so ``omega_target`` is on resonance.

    The offset is the smallest-magnitude value making the round-trip phase a
    multiple of 2*pi at the target.
    """
    bare = round_trip_phase(model, replace(ring, phase_offset=0.0), omega_target)
    # residue in [-pi, pi]
    offset = -math.remainder(bare, 2 * math.pi)
    return replace(ring, phase_offset=offset)
