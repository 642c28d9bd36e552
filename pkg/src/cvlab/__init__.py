"""Pseudo-spin Bell correlations of a single continuous-variable mode.

The quadrature axis is cut into intervals of width ``a`` grouped in blocks
of ``L = 2**N``; bin labels carry N qubit-like degrees of freedom whose
Pauli operators act as interval shifts and signs.  Bell-type operators
built from them are evaluated on Gaussian and designed states through an
``L x L`` overlap kernel, and checked against exact hidden-variable bounds
and a brute-force grid discretisation.
"""
__version__ = "0.1.0"

from .bell_engine import (
    BoundReport,
    DisplacementSpec,
    bell_correlation,
    bound_report,
    smsv_bound,
    violation_factor,
)
from .exceptions import CVLabError, InputError, NumericError, ResourceError, TruncationError
from .gram_kernel import GramKernel, KernelSettings, gram
from .nchv_oracle import classical_max, nchv_feasible
from .optimizer import OptResult, optimize_bin_width, optimize_orientations
from .partition import CellIndex, Partition, cell_to_x, x_to_cell
from .spin_algebra import BellSpec, bell_operator, center_hop_spec, lowering_spec, spectral_norm, tsirelson_bound
from .states import (
    WaveFunction,
    make_max_violation,
    make_sampled,
    make_squeezed_coherent,
    make_squeezed_vacuum,
    make_vacuum,
)
from .wigner import PhasePoint, wigner_gaussian, wigner_min, wigner_numeric

__all__ = [
    "BellSpec", "BoundReport", "CVLabError", "CellIndex", "DisplacementSpec", "GramKernel", "InputError",
    "KernelSettings", "NumericError", "OptResult", "Partition", "PhasePoint", "ResourceError", "TruncationError",
    "WaveFunction", "bell_correlation", "bell_operator", "bound_report", "cell_to_x", "center_hop_spec",
    "classical_max", "gram", "lowering_spec", "make_max_violation", "make_sampled", "make_squeezed_coherent",
    "make_squeezed_vacuum", "make_vacuum", "nchv_feasible", "optimize_bin_width", "optimize_orientations",
    "smsv_bound", "spectral_norm", "tsirelson_bound", "violation_factor", "wigner_gaussian", "wigner_min",
    "wigner_numeric", "x_to_cell",
]
