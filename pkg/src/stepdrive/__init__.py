"""Exact dynamics of two-level systems under periodic N-step driving."""

__version__ = "0.1.0"

from .core import (
    BeatPrediction,
    BranchAmbiguityError,
    DegenerateFrequencyWarning,
    DriveStep,
    EffectiveHamiltonian,
    EmptySequenceError,
    MicromotionParams,
    NoEnvelopeError,
    PropagatorCoeffs,
    PulseSequence,
    SpectralComponent,
    SpectralModel,
    validate,
)
from .propagator import (
    compose,
    evolve,
    evolve_many,
    intra_period,
    period_propagator,
    step_propagator,
    transition_probabilities,
    transition_probability,
)
from .effective import (
    effective_hamiltonian,
    effective_with_jump,
    jump_sequence,
    micromotion,
)
from .spectrum import (
    ModelError,
    dominant_model,
    fourier_closed_form_two_step,
    fourier_numeric,
    model_error,
    piecewise_coefficients,
    piecewise_evaluate,
    two_step_empirical_model,
    write_csv,
)
from .phenomena import (
    PhenomenaReport,
    PhenomenonFlag,
    beat_prediction,
    classify,
    complete_transition_time,
    design_manipulation,
    phase_from_beat,
)

__all__ = [
    "BeatPrediction",
    "BranchAmbiguityError",
    "DegenerateFrequencyWarning",
    "DriveStep",
    "EffectiveHamiltonian",
    "EmptySequenceError",
    "MicromotionParams",
    "ModelError",
    "NoEnvelopeError",
    "PhenomenaReport",
    "PhenomenonFlag",
    "PropagatorCoeffs",
    "PulseSequence",
    "SpectralComponent",
    "SpectralModel",
    "beat_prediction",
    "classify",
    "complete_transition_time",
    "compose",
    "design_manipulation",
    "dominant_model",
    "effective_hamiltonian",
    "effective_with_jump",
    "evolve",
    "evolve_many",
    "fourier_closed_form_two_step",
    "fourier_numeric",
    "intra_period",
    "jump_sequence",
    "micromotion",
    "model_error",
    "period_propagator",
    "phase_from_beat",
    "piecewise_coefficients",
    "piecewise_evaluate",
    "step_propagator",
    "transition_probabilities",
    "transition_probability",
    "two_step_empirical_model",
    "validate",
    "write_csv",
]
