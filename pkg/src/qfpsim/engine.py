"""EOM / shaper / EOM composition and frequency-bin gate metrics.

Modes live on an extended window: the ``M`` shaper bins plus ``guard_modes``
bins on each side, so window position ``i`` holds bin ``i - guard_modes``.
Every offset ``Omega`` defines its own comb ``omega_n + Omega``; the processor
acts on each comb with the matrix ``V = E2 S(Omega) E1``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import toeplitz
from scipy.optimize import minimize

from qfpsim._search import grid_golden_max
from qfpsim.eom import (
    DEFAULT_SAMPLES,
    DEFAULT_TRUNCATION,
    EomCoefficients,
    ModulatorDrive,
    fourier_coefficients,
)
from qfpsim.rings import RingFilter
from qfpsim.shaper import FrequencyGrid, ShaperConfig, build_shaper, response

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


@dataclass(frozen=True)
class QfpStack:
    """Two modulators sharing the bin-spacing period around one pulse shaper."""

    eom1: ModulatorDrive
    shaper: ShaperConfig
    eom2: ModulatorDrive
    guard_modes: int = 16
    truncation: int = DEFAULT_TRUNCATION
    samples: int = DEFAULT_SAMPLES

    def __post_init__(self) -> None:
        if self.guard_modes < self.truncation:
            raise ValueError(
                f"guard_modes ({self.guard_modes}) must be >= EOM truncation ({self.truncation})"
            )

    @property
    def dim(self) -> int:
        return self.shaper.grid.count + 2 * self.guard_modes

    @property
    def bins(self) -> np.ndarray:
        """Bin index of every window position."""
        return np.arange(-self.guard_modes, self.shaper.grid.count + self.guard_modes)

    def with_shaper(self, shaper: ShaperConfig) -> "QfpStack":
        return replace(self, shaper=shaper)

    def with_rf_phases(self, phase1: float, phase2: float) -> "QfpStack":
        return replace(
            self, eom1=self.eom1.with_rf_phase(phase1), eom2=self.eom2.with_rf_phase(phase2)
        )


@dataclass(frozen=True)
class GateSpec:
    """Target unitary acting on the listed shaper bins."""

    target: np.ndarray
    computational_modes: tuple[int, ...]

    def __post_init__(self) -> None:
        u = np.asarray(self.target, dtype=complex)
        object.__setattr__(self, "target", u)
        object.__setattr__(self, "computational_modes", tuple(int(m) for m in self.computational_modes))
        d = len(self.computational_modes)
        if u.shape != (d, d):
            raise ValueError(f"target shape {u.shape} does not match {d} computational modes")
        if not np.allclose(u.conj().T @ u, np.eye(d), atol=1e-12, rtol=0):
            raise ValueError("target is not unitary")
        modes = self.computational_modes
        if any(b <= a for a, b in zip(modes, modes[1:])) or modes[0] < 0:
            raise ValueError(f"computational modes must be non-negative and increasing, got {modes}")

    @property
    def d(self) -> int:
        return len(self.computational_modes)


@dataclass(frozen=True)
class GateReport:
    """Gate metrics for one sweep point; ``degenerate`` marks ``P = 0``."""

    offset: float
    w: np.ndarray
    fidelity: float
    success_prob: float
    success_prob_normalized: float = float("nan")
    parameter: float = float("nan")
    degenerate: bool = False


def hadamard_spec() -> GateSpec:
    return GateSpec(HADAMARD, (2, 3))


def parallel_hadamard_spec() -> GateSpec:
    return GateSpec(np.kron(np.eye(2), HADAMARD), (2, 3, 8, 9))


def hadamard_phases(count: int = 6) -> np.ndarray:
    """Stairstep shaper phases: blocks of six bins ``[0, 0, 0, pi, pi, pi]``."""
    return np.array([math.pi if (m % 6) >= 3 else 0.0 for m in range(count)])


# ---------------------------------------------------------------- matrices


@lru_cache(maxsize=256)
def _base_coefficients(drive: ModulatorDrive, truncation: int, samples: int) -> EomCoefficients:
    return fourier_coefficients(drive, truncation, samples)


def drive_coefficients(drive: ModulatorDrive, truncation: int, samples: int) -> EomCoefficients:
    """Coefficients of ``drive``; the RF phase enters as ``exp(-i n rf_phase)``."""
    base = _base_coefficients(drive.with_rf_phase(0.0), truncation, samples)
    return base.shifted(drive.rf_phase)


def eom_matrix(coeffs: EomCoefficients, dim: int) -> np.ndarray:
    """Banded Toeplitz scattering matrix with entry ``(m, n) = c_{m-n}``."""
    lags = np.arange(dim)
    col = np.array([coeffs[k] for k in lags])
    row = np.array([coeffs[-k] for k in lags])
    return toeplitz(col, row)


def shaper_matrix(shaper: ShaperConfig, offset: float, dim: int) -> np.ndarray:
    """Diagonal shaper transfer ``H(omega_n + offset)`` over a symmetric extended window."""
    guard, rem = divmod(dim - shaper.grid.count, 2)
    if guard < 0 or rem:
        raise ValueError(f"window of {dim} modes cannot be centred on {shaper.grid.count} bins")
    bins = np.arange(-guard, shaper.grid.count + guard)
    return np.diag(response(shaper, shaper.grid.frequency(bins) + offset))


def _shaper_diagonal(stack: QfpStack, offset: float) -> np.ndarray:
    return np.asarray(response(stack.shaper, stack.shaper.grid.frequency(stack.bins) + offset))


def _eoms(stack: QfpStack) -> tuple[np.ndarray, np.ndarray]:
    e1 = eom_matrix(drive_coefficients(stack.eom1, stack.truncation, stack.samples), stack.dim)
    e2 = eom_matrix(drive_coefficients(stack.eom2, stack.truncation, stack.samples), stack.dim)
    return e1, e2


def compose_v(stack: QfpStack, offset: float = 0.0) -> np.ndarray:
    """Full mode transformation ``E2 S(offset) E1`` on the extended window."""
    e1, e2 = _eoms(stack)
    return e2 @ (_shaper_diagonal(stack, offset)[:, None] * e1)


def window_positions(spec: GateSpec, guard_modes: int, dim: int) -> list[int]:
    pos = [m + guard_modes for m in spec.computational_modes]
    if pos[-1] >= dim:
        raise IndexError(
            f"computational mode {spec.computational_modes[-1]} lies outside the {dim}-mode window"
        )
    return pos


def extract_w(v: np.ndarray, spec: GateSpec, guard_modes: int = 0) -> np.ndarray:
    """Submatrix of ``v`` on the computational bins."""
    pos = window_positions(spec, guard_modes, v.shape[0])
    return v[np.ix_(pos, pos)]


def fidelity_and_prob(w: np.ndarray, spec: GateSpec) -> tuple[float, float]:
    """Fidelity ``|Tr(W^+ U)|^2 / (d^2 P)`` and success probability ``Tr(W^+ W) / Tr(U^+ U)``.

    Fidelity is reported as 0 when ``P`` vanishes.
    """
    u = spec.target
    prob = float(np.real(np.trace(w.conj().T @ w)) / np.real(np.trace(u.conj().T @ u)))
    if prob == 0:
        return 0.0, 0.0
    fid = float(abs(np.trace(w.conj().T @ u)) ** 2 / (spec.d**2 * prob))
    return fid, prob


def evaluate(stack: QfpStack, spec: GateSpec, offset: float = 0.0, parameter: float = float("nan")) -> GateReport:
    v = compose_v(stack, offset)
    w = extract_w(v, spec, stack.guard_modes)
    fid, prob = fidelity_and_prob(w, spec)
    return GateReport(offset, w, fid, prob, parameter=parameter, degenerate=prob == 0)


# ---------------------------------------------------------------- alignment


def _fidelity_of_phases(stack: QfpStack, spec: GateSpec) -> Callable[[float, float], float]:
    """Fast ``F(common, relative)`` at zero offset with the shaper evaluated once."""
    pos = window_positions(spec, stack.guard_modes, stack.dim)
    s = _shaper_diagonal(stack, 0.0)
    c1 = drive_coefficients(stack.eom1.with_rf_phase(0.0), stack.truncation, stack.samples)
    c2 = drive_coefficients(stack.eom2.with_rf_phase(0.0), stack.truncation, stack.samples)
    e1 = eom_matrix(c1, stack.dim)[:, pos]
    e2 = eom_matrix(c2, stack.dim)[pos, :]
    n = stack.bins.astype(float)
    n_comp = n[pos]

    def fid(common: float, relative: float) -> float:
        th1, th2 = common, common + relative
        # E(theta) = diag(e^{-i n theta}) E(0) diag(e^{i n theta})
        inner = e2 * np.exp(1j * n * th2)[None, :]
        inner = inner * (s * np.exp(-1j * n * th1))[None, :]
        w = (np.exp(-1j * n_comp * th2)[:, None] * (inner @ e1)) * np.exp(1j * n_comp * th1)[None, :]
        return fidelity_and_prob(w, spec)[0]

    return fid


def align_eoms(
    stack: QfpStack,
    spec: GateSpec,
    *,
    grid_points: int = 360,
    tol: float = 1e-6,
    max_rounds: int = 8,
) -> QfpStack:
    """Choose the modulators' RF phases for maximum zero-offset fidelity.

    Alternates a grid-plus-golden search over the second modulator's phase
    relative to the first and over the phase common to both, until a round no
    longer improves the fidelity.
    """
    fid = _fidelity_of_phases(stack, spec)
    common = stack.eom1.rf_phase % (2 * math.pi)
    relative = (stack.eom2.rf_phase - stack.eom1.rf_phase) % (2 * math.pi)
    best = fid(common, relative)
    for _ in range(max_rounds):
        relative, f_rel = grid_golden_max(
            lambda x: fid(common, x), 0.0, 2 * math.pi, grid_points, tol, periodic=True
        )
        common, f_com = grid_golden_max(
            lambda x: fid(x, relative), 0.0, 2 * math.pi, grid_points, tol, periodic=True
        )
        improved = f_com - best
        best = max(best, f_com)
        if improved < 1e-13:
            break
    # the two phases are correlated near the optimum; finish with a joint polish
    res = minimize(
        lambda x: -fid(x[0], x[1]),
        [common, relative],
        method="Nelder-Mead",
        options={"xatol": tol / 10, "fatol": 1e-15, "initial_simplex": _simplex(common, relative, 1e-3)},
    )
    if -res.fun > best:
        common, relative = res.x
    return stack.with_rf_phases(common % (2 * math.pi), (common + relative) % (2 * math.pi))


def _simplex(x: float, y: float, step: float) -> np.ndarray:
    return np.array([[x, y], [x + step, y], [x, y + step]])


# ---------------------------------------------------------------- sweeps


def _map(fn, items, threads: int | None):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def normalize(reports: Sequence[GateReport], reference: float | None = None) -> list[GateReport]:
    """Attach ``success_prob / reference`` (default: the sweep maximum)."""
    ref = reference if reference is not None else max(r.success_prob for r in reports)
    return [replace(r, success_prob_normalized=r.success_prob / ref if ref > 0 else 0.0) for r in reports]


def sweep_offset(
    stack: QfpStack, spec: GateSpec, offsets: Sequence[float], *, threads: int | None = None
) -> list[GateReport]:
    """Gate metrics at each comb offset (rad/s) for an already aligned stack."""
    return normalize(_map(lambda o: evaluate(stack, spec, o, parameter=o), offsets, threads))


def respace(shaper: ShaperConfig, spacing: float) -> ShaperConfig:
    """Same channels on a new bin spacing, every filter re-tuned to its new bin."""
    grid = FrequencyGrid(shaper.grid.omega0, spacing, shaper.grid.count)
    chans = tuple(
        (filt.tuned(shaper.waveguide, float(grid.frequency(m))), phase)
        for m, (filt, phase) in enumerate(shaper.channels)
    )
    return ShaperConfig(grid, chans, shaper.waveguide, shaper.mode)


def sweep_spacing(
    stack_template: QfpStack,
    spec: GateSpec,
    spacings: Sequence[float],
    *,
    threads: int | None = None,
) -> list[GateReport]:
    """Zero-offset metrics versus bin spacing (rad/s), re-tuning and re-aligning per point.

    The modulators follow the spacing automatically: their coefficients are
    defined per period.
    """

    def point(spacing: float) -> GateReport:
        stack = align_eoms(stack_template.with_shaper(respace(stack_template.shaper, spacing)), spec)
        return evaluate(stack, spec, 0.0, parameter=spacing)

    return normalize(_map(point, spacings, threads))


def sweep_loss(
    stack: QfpStack,
    spec: GateSpec,
    alphas: Sequence[float],
    *,
    threads: int | None = None,
) -> list[GateReport]:
    """Zero-offset metrics versus waveguide attenuation ``alpha`` (1/cm)."""

    def point(alpha: float) -> GateReport:
        shaper = stack.shaper
        lossy = ShaperConfig(shaper.grid, shaper.channels, shaper.waveguide.with_alpha(alpha), shaper.mode)
        aligned = align_eoms(stack.with_shaper(lossy), spec)
        return evaluate(aligned, spec, 0.0, parameter=alpha)

    return normalize(_map(point, alphas, threads))


def sweep_order(
    stack_template: QfpStack,
    spec: GateSpec,
    orders: Sequence[int],
    spacings: Sequence[float],
    *,
    ratio_table: dict[int, tuple[float, ...]] | None = None,
    reference: tuple[int, float] | None = None,
    threads: int | None = None,
) -> dict[int, list[GateReport]]:
    """Zero-offset metrics for each filter order and bin spacing.

    Success probabilities are normalised to one reference point, by default
    the lowest order at the widest spacing, so values are comparable across
    orders.
    """
    template = stack_template.shaper
    first: RingFilter = template.channels[0][0]
    radius = first.rings[0].radius

    def point(job: tuple[int, float]) -> GateReport:
        order, spacing = job
        grid = FrequencyGrid(template.grid.omega0, spacing, template.grid.count)
        shaper = build_shaper(
            grid,
            template.phases,
            template.waveguide,
            radius=radius,
            kappa_sq=first.bus_coupling,
            order=order,
            ratio_table=ratio_table,
            mode=template.mode,
        )
        stack = align_eoms(stack_template.with_shaper(shaper), spec)
        return evaluate(stack, spec, 0.0, parameter=spacing)

    jobs = [(int(n), float(s)) for n in orders for s in spacings]
    flat = _map(point, jobs, threads)
    ref_order, ref_spacing = reference or (min(orders), max(spacings))
    ref = next(r.success_prob for (n, s), r in zip(jobs, flat) if n == ref_order and s == ref_spacing)
    flat = normalize(flat, ref)
    out: dict[int, list[GateReport]] = {}
    for (n, _), r in zip(jobs, flat):
        out.setdefault(n, []).append(r)
    return out


# ---------------------------------------------------------------- presets


def hadamard_stack(
    *,
    parallel: bool = False,
    spacing_ghz: float = 15.0,
    center_thz: float = 193.0,
    loss_db_per_cm: float = 0.5,
    kappa_sq: float = 0.01,
    radius: float = 20.0,
    order: int = 1,
    depth: float = 0.8283,
    mode: str = "mrr",
    guard_modes: int = 16,
    waveguide=None,
    ratio_table: dict[int, tuple[float, ...]] | None = None,
) -> QfpStack:
    """Unaligned single (M = 6) or parallel (M = 12) Hadamard processor."""
    from qfpsim.waveguide import WaveguideModel

    count = 12 if parallel else 6
    if waveguide is None:
        waveguide = WaveguideModel.from_group_index(loss_db_per_cm=loss_db_per_cm)
    grid = FrequencyGrid(2 * math.pi * center_thz * 1e12, 2 * math.pi * spacing_ghz * 1e9, count)
    shaper = build_shaper(
        grid,
        hadamard_phases(count),
        waveguide,
        radius=radius,
        kappa_sq=kappa_sq,
        order=order,
        ratio_table=ratio_table,
        mode=mode,
    )
    drive = ModulatorDrive(depth=depth)
    return QfpStack(drive, shaper, drive.with_rf_phase(math.pi), guard_modes=guard_modes)


def drive_fidelity_evaluator(
    spec: GateSpec | None = None, template: QfpStack | None = None
) -> Callable[[ModulatorDrive], float]:
    """Fidelity of a gate whose two modulators both use ``drive``.

    The second modulator runs half a period behind the first, then both RF
    phases are aligned. The default template is the ideal-shaper single
    Hadamard processor.
    """
    spec = spec or hadamard_spec()
    # logarithmic drives carry more harmonics than a pure sinusoid
    template = template or replace(hadamard_stack(mode="ideal", guard_modes=24), truncation=24)

    def evaluate_drive(drive: ModulatorDrive) -> float:
        stack = replace(template, eom1=drive, eom2=drive.with_rf_phase(drive.rf_phase + math.pi))
        stack = align_eoms(stack, spec, grid_points=90)
        return evaluate(stack, spec).fidelity

    return evaluate_drive
