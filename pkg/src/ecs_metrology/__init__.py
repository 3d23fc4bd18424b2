"""Entangled coherent states for phase estimation and external-force detection."""
from .coherent_algebra import (
    CoherentSuperposition,
    DegenerateStateError,
    DimensionError,
    NotNormalizedError,
    apply_displacement,
    apply_phase_shift,
    coherent,
    entanglement_of_formation,
    gram_matrix_quasi_bell,
    joo_state,
    normalize,
    number_moment,
    overlap,
    quasi_bell,
)

__version__ = "0.1.0"
