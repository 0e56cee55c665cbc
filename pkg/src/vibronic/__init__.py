"""Vibronic (Franck-Condon) spectrum simulation on truncated phonon modes.

The pipeline: molecular parameters (frequencies, mode rotation, displacement)
factorise into a squeeze / rotate / inverse-squeeze / displace operation
sequence; applying it to the vacuum of a truncated two-mode Fock space and
reading occupation probabilities yields the transition stick spectrum; a
device layer maps the operations to trapped-ion Raman pulse timings and
emulates the finite-shot collective projection measurement together with its
published error correction.
"""

__version__ = "0.1.0"

from .doktorov import (
    DEFAULT_SCALE,
    DoktorovSequence,
    MolecularParams,
    build_sequence,
    d_from_delta,
    delta_from_d,
    rotation_angle_from_U,
    squeezing_params,
)
from .errors import (
    ConfigurationError,
    DimensionError,
    LeakageError,
    ModelError,
    OutOfModelWarning,
    ParameterError,
    ParamsFileError,
    ReflectionError,
    RotationMatrixError,
    VibronicError,
)
from .fock import (
    Displace,
    GaussianOp,
    Rotate,
    Squeeze,
    TruncatedState,
    apply_displacement,
    apply_op,
    apply_rotation,
    apply_sequence,
    apply_squeeze,
    basis_state,
    leakage,
    new_vacuum,
    probability,
    run_with_auto_cutoff,
)
from .ion_device import (
    DetectionModel,
    DeviceConfig,
    EmulationResult,
    Pulse,
    PulseSchedule,
    ShotRecord,
    class_probabilities,
    correct_population,
    corrected_p4,
    corrected_stderr,
    measure_target,
    plan_pulses,
    sampled_spectrum,
)
from .spectrum import (
    BroadenedCurve,
    SpectrumComparison,
    Stick,
    StickSpectrum,
    broaden,
    compare_spectra,
    stick_spectrum,
)

__all__ = [
    "__version__",
    "DEFAULT_SCALE",
    "DoktorovSequence",
    "MolecularParams",
    "build_sequence",
    "d_from_delta",
    "delta_from_d",
    "rotation_angle_from_U",
    "squeezing_params",
    "ConfigurationError",
    "DimensionError",
    "LeakageError",
    "ModelError",
    "OutOfModelWarning",
    "ParameterError",
    "ParamsFileError",
    "ReflectionError",
    "RotationMatrixError",
    "VibronicError",
    "Displace",
    "GaussianOp",
    "Rotate",
    "Squeeze",
    "TruncatedState",
    "apply_displacement",
    "apply_op",
    "apply_rotation",
    "apply_sequence",
    "apply_squeeze",
    "basis_state",
    "leakage",
    "new_vacuum",
    "probability",
    "run_with_auto_cutoff",
    "DetectionModel",
    "DeviceConfig",
    "EmulationResult",
    "Pulse",
    "PulseSchedule",
    "ShotRecord",
    "class_probabilities",
    "correct_population",
    "corrected_p4",
    "corrected_stderr",
    "measure_target",
    "plan_pulses",
    "sampled_spectrum",
    "BroadenedCurve",
    "SpectrumComparison",
    "Stick",
    "StickSpectrum",
    "broaden",
    "compare_spectra",
    "stick_spectrum",
]
