"""JSON run configuration: strict schema, baseline defaults, and stack builders.

Frequencies are given in linear units (THz, GHz) and converted to angular
frequency once, when the processor is built.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from qfpsim.engine import (
    GateSpec,
    HADAMARD,
    QfpStack,
    hadamard_phases,
)
from qfpsim.eom import ModulatorDrive
from qfpsim.rings import load_coupling_table
from qfpsim.shaper import FrequencyGrid, build_shaper
from qfpsim.waveguide import WaveguideModel, db_per_cm_to_alpha


class ConfigError(ValueError):
    """Invalid run configuration; ``errors`` lists ``(path, message)`` pairs."""

    def __init__(self, errors: list[tuple[str, str]]):
        self.errors = errors
        super().__init__("; ".join(f"{p}: {m}" for p, m in errors))


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class WaveguideSection(_Section):
    ref_THz: float = Field(193.0, gt=0)
    n_eff: float = Field(2.37, gt=0)
    n_group: float = Field(4.226, gt=0)
    # explicit Taylor coefficients (per rad/s powers) override n_eff/n_group
    n_coeffs: Optional[list[float]] = None
    loss_dB_per_cm: float = Field(0.5, ge=0)

    @field_validator("n_coeffs")
    @classmethod
    def _nonempty(cls, v):
        if v is not None and (not v or v[0] <= 0):
            raise ValueError("n_coeffs must be non-empty with a positive leading term")
        return v


class RingSection(_Section):
    radius_um: float = Field(20.0, gt=0)


class ShaperSection(_Section):
    M: int = Field(6, ge=1)
    filter_order: int = Field(1, ge=1)
    kappa_sq: float = Field(0.01, gt=0, lt=1)
    # radians; defaults to the Hadamard stairstep for M bins
    phases: Optional[list[float]] = None
    # path to a JSON table or an inline {order: [ratios]} mapping
    inter_coupling_table: Optional[Union[str, dict[str, list[float]]]] = None
    mode: Literal["mrr", "ideal"] = "mrr"


class GridSection(_Section):
    center_THz: float = Field(193.0, gt=0)
    spacing_GHz: float = Field(15.0, gt=0)


class EomSection(_Section):
    kind: Literal["sinusoid", "log_voltage"] = "sinusoid"
    depth: float = Field(0.8283, ge=0)
    rf_phase: float = 0.0
    v_dc: float = Field(0.0, ge=0)
    v_1: float = Field(0.0, ge=0)
    a: float = Field(2.0, gt=0)
    v_0: float = Field(10.0, gt=0)
    truncation: int = Field(16, ge=1)
    samples: int = Field(4096, ge=8)
    guard_modes: int = Field(16, ge=1)


class GateSection(_Section):
    # "hadamard", "hadamard-parallel", or a square matrix whose entries are
    # numbers or [re, im] pairs
    target: Union[Literal["hadamard", "hadamard-parallel"], list[list[Union[float, list[float]]]]] = "hadamard"
    modes: Optional[list[int]] = None


class SweepSection(_Section):
    start: Optional[float] = None
    stop: Optional[float] = None
    steps: Optional[int] = Field(None, ge=1)
    values: Optional[list[float]] = None
    orders: list[int] = [1, 2, 3, 4, 5, 6]
    state: Literal["0", "1", "+", "-", "+i", "-i"] = "+"
    quadrature_points: int = Field(201, ge=3)
    waveform_v_dc: float = Field(15.5, gt=0)


class OutputSection(_Section):
    dir: str = "out"
    svg: bool = False
    json_report: bool = False


class RunConfig(_Section):
    waveguide: WaveguideSection = WaveguideSection()
    ring: RingSection = RingSection()
    shaper: ShaperSection = ShaperSection()
    grid: GridSection = GridSection()
    eom: EomSection = EomSection()
    gate: GateSection = GateSection()
    sweep: SweepSection = SweepSection()
    output: OutputSection = OutputSection()

    @model_validator(mode="after")
    def _consistent(self):
        if self.shaper.phases is not None and len(self.shaper.phases) != self.shaper.M:
            raise ValueError(f"shaper.phases has {len(self.shaper.phases)} entries for M={self.shaper.M}")
        if self.eom.guard_modes < self.eom.truncation:
            raise ValueError("eom.guard_modes must be >= eom.truncation")
        return self

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def parse_config(data: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(
            [(".".join(str(p) for p in e["loc"]) or "<root>", e["msg"]) for e in exc.errors()]
        ) from None


def load_config(path: str | Path | None) -> RunConfig:
    """Read and validate a JSON config; ``None`` gives the baseline."""
    if path is None:
        return RunConfig()
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError([("<root>", f"invalid JSON: {exc}")]) from None
    if not isinstance(data, dict):
        raise ConfigError([("<root>", "config must be a JSON object")])
    return parse_config(data)


# ---------------------------------------------------------------- builders


def build_waveguide(cfg: RunConfig) -> WaveguideModel:
    wg = cfg.waveguide
    omega_ref = 2 * math.pi * wg.ref_THz * 1e12
    alpha = db_per_cm_to_alpha(wg.loss_dB_per_cm)
    if wg.n_coeffs is not None:
        return WaveguideModel(omega_ref, tuple(wg.n_coeffs), alpha)
    return WaveguideModel(omega_ref, (wg.n_eff, (wg.n_group - wg.n_eff) / omega_ref), alpha)


def coupling_table(cfg: RunConfig) -> dict[int, tuple[float, ...]]:
    table = cfg.shaper.inter_coupling_table
    if table is None or isinstance(table, str):
        return load_coupling_table(table)
    return {int(k): tuple(v) for k, v in table.items() if not k.startswith("_")}


def build_drive(cfg: RunConfig) -> ModulatorDrive:
    e = cfg.eom
    return ModulatorDrive(e.kind, e.depth, e.rf_phase, e.v_dc, e.v_1, e.a, e.v_0)


def build_stack(cfg: RunConfig, *, spacing_GHz: float | None = None, order: int | None = None) -> QfpStack:
    """Unaligned processor described by ``cfg``; the second modulator starts half a period behind."""
    sh = cfg.shaper
    spacing = cfg.grid.spacing_GHz if spacing_GHz is None else spacing_GHz
    grid = FrequencyGrid(2 * math.pi * cfg.grid.center_THz * 1e12, 2 * math.pi * spacing * 1e9, sh.M)
    phases = sh.phases if sh.phases is not None else hadamard_phases(sh.M)
    shaper = build_shaper(
        grid,
        phases,
        build_waveguide(cfg),
        radius=cfg.ring.radius_um,
        kappa_sq=sh.kappa_sq,
        order=sh.filter_order if order is None else order,
        ratio_table=coupling_table(cfg),
        mode=sh.mode,
    )
    drive = build_drive(cfg)
    return QfpStack(
        drive,
        shaper,
        drive.with_rf_phase(drive.rf_phase + math.pi),
        guard_modes=cfg.eom.guard_modes,
        truncation=cfg.eom.truncation,
        samples=cfg.eom.samples,
    )


def _entry(x) -> complex:
    if isinstance(x, list):
        if len(x) != 2:
            raise ConfigError([("gate.target", "complex entries must be [re, im] pairs")])
        return complex(x[0], x[1])
    return complex(x)


def build_spec(cfg: RunConfig) -> GateSpec:
    g = cfg.gate
    if g.target == "hadamard":
        u, modes = HADAMARD, (2, 3)
    elif g.target == "hadamard-parallel":
        u, modes = np.kron(np.eye(2), HADAMARD), (2, 3, 8, 9)
    else:
        u = np.array([[_entry(x) for x in row] for row in g.target])
        modes = None
    if g.modes is not None:
        modes = tuple(g.modes)
    if modes is None:
        raise ConfigError([("gate.modes", "required for an explicit target matrix")])
    try:
        spec = GateSpec(u, modes)
    except ValueError as exc:
        raise ConfigError([("gate", str(exc))]) from None
    if spec.computational_modes[-1] >= cfg.shaper.M:
        raise ConfigError([("gate.modes", f"mode {spec.computational_modes[-1]} outside the {cfg.shaper.M}-bin grid")])
    return spec
