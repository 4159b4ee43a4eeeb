"""Special orthonormal frames, closed one-forms and conservation laws."""

from ._core import (
    ConfigError,
    DegenerateFrameError,
    EvolveError,
    GateError,
    ch_evolve,
    ch_frame,
    ch_hierarchy,
    ch_residual,
    conservation,
    gate_factor,
    igsge,
    run,
    sine_gordon,
)

__all__ = [
    "ConfigError",
    "DegenerateFrameError",
    "EvolveError",
    "GateError",
    "ch_evolve",
    "ch_frame",
    "ch_hierarchy",
    "ch_residual",
    "conservation",
    "gate_factor",
    "igsge",
    "run",
    "sine_gordon",
]
