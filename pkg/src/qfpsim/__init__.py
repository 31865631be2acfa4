"""Integrated quantum frequency processor simulation.

Models microring-resonator pulse shapers bookended by electro-optic phase
modulators and evaluates frequency-bin gate fidelity and success probability.
"""

from qfpsim.waveguide import (
    C_VACUUM,
    ExtrapolationError,
    RingGeometry,
    WaveguideModel,
    db_per_cm_to_alpha,
    effective_index,
    field_attenuation,
    round_trip_phase,
    tune_ring,
)
from qfpsim.rings import (
    FilterResponse,
    RingFilter,
    load_coupling_table,
    nring_response,
    single_ring_response,
    synthesize_flat_filter,
)
from qfpsim.shaper import (
    FrequencyGrid,
    LinewidthError,
    ShaperConfig,
    build_shaper,
    channel_linewidth,
    ideal_response,
    shaper_response,
)
from qfpsim.eom import (
    EomCoefficients,
    ModulatorDrive,
    TruncationError,
    fourier_coefficients,
    optimize_drive,
    phase_waveform,
)
from qfpsim.engine import (
    GateReport,
    GateSpec,
    QfpStack,
    align_eoms,
    compose_v,
    eom_matrix,
    extract_w,
    fidelity_and_prob,
    hadamard_spec,
    parallel_hadamard_spec,
    shaper_matrix,
    sweep_loss,
    sweep_offset,
    sweep_order,
    sweep_spacing,
    hadamard_stack,
    drive_fidelity_evaluator,
    hadamard_phases,
)
from qfpsim.broadband import (
    NyquistQubit,
    Wavepacket,
    nyquist_spectrum,
    propagate,
    wavepacket_metrics,
)

__version__ = "0.1.0"
