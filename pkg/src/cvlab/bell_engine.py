"""Quantum Bell correlations and their classical/quantum bounds.

Expectation values are contractions of a pseudo-spin matrix with the
overlap kernel of the state.  A phase-space displacement ``(qbar, pbar)`` of
the operators never materialises a new operator: the position shift moves
the kernel window to ``x + qbar`` and the momentum shift dresses each
transition ``m -> m'`` with ``exp(i pbar a (m' - m))``.
"""
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .exceptions import InputError
from .gram_kernel import GramKernel, KernelSettings, gram
from .partition import Partition
from .special import window_mass
from .spin_algebra import BellSpec, bell_operator, displacement_phases, tsirelson_bound
from .states import WaveFunction

NCHV_BOUND = 1.0
FLAG_SLACK = 1e-9
HERMITIAN_RESIDUE = 1e-9
NORM_TOL = 1e-6


@dataclass(frozen=True)
class DisplacementSpec:
    qbar: float = 0.0
    pbar: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.qbar) and math.isfinite(self.pbar)):
            raise InputError("displacement must be finite")

    @property
    def alpha(self) -> complex:
        return complex(self.qbar, self.pbar) / math.sqrt(2)

    @classmethod
    def from_alpha(cls, alpha):
        alpha = complex(alpha) * math.sqrt(2)
        return cls(alpha.real, alpha.imag)


NO_DISPLACEMENT = DisplacementSpec()


@dataclass(frozen=True)
class BoundReport:
    value: float
    N: int
    nchv_bound: float
    tsirelson_bound: float
    violation_ratio: float
    tsirelson_margin: float
    nchv_violated: bool
    tsirelson_exceeded: bool

    def as_dict(self):
        return asdict(self)


def bound_report(value, N) -> BoundReport:
    value = float(value)
    tb = tsirelson_bound(N)
    return BoundReport(
        value=value,
        N=int(N),
        nchv_bound=NCHV_BOUND,
        tsirelson_bound=tb,
        violation_ratio=value / NCHV_BOUND,
        tsirelson_margin=tb - abs(value),
        nchv_violated=abs(value) > NCHV_BOUND + FLAG_SLACK,
        tsirelson_exceeded=abs(value) > tb + FLAG_SLACK,
    )


def expect_spin_operator(M, G: GramKernel) -> complex:
    """``sum_{m',m} M[m',m] G(m',m)``, the expectation of ``M x 1``."""
    M = np.asarray(M)
    if M.shape != G.entries.shape:
        raise InputError(f"operator shape {M.shape} does not match kernel {G.entries.shape}")
    return complex(np.sum(M * G.entries))


@dataclass(frozen=True)
class Correlation:
    """Everything :func:`bell_correlation` learned on the way to its value."""

    value: float
    imag_residue: float
    norm: float
    kernel: GramKernel


def bell_expectation(p: Partition, spec: BellSpec, kernel: GramKernel, disp: DisplacementSpec = NO_DISPLACEMENT):
    """Complex ``<B_i>`` from a kernel already shifted by ``disp.qbar``."""
    if spec.N != p.N or kernel.N != p.N:
        raise InputError(f"qubit counts disagree: partition {p.N}, spec {spec.N}, kernel {kernel.N}")
    B = displacement_phases(bell_operator(spec), p.a, disp.pbar)
    return expect_spin_operator(B, kernel)


def correlation(wf: WaveFunction, p: Partition, spec: BellSpec, disp: DisplacementSpec = NO_DISPLACEMENT,
                settings: Optional[KernelSettings] = None, kernel: Optional[GramKernel] = None) -> Correlation:
    if kernel is None:
        kernel = gram(p, wf, settings, shift=disp.qbar)
    norm = kernel.trace
    if abs(norm - 1.0) > NORM_TOL:
        raise InputError(f"state norm {norm:.9f} differs from 1 by more than {NORM_TOL:g}")
    z = bell_expectation(p, spec, kernel, disp)
    return Correlation(z.real, abs(z.imag), norm, kernel)


def bell_correlation(wf: WaveFunction, p: Partition, spec: BellSpec, disp: DisplacementSpec = NO_DISPLACEMENT,
                     settings: Optional[KernelSettings] = None, kernel: Optional[GramKernel] = None):
    """Quantum value of the (possibly displaced) Bell operator ``B_{i,alpha}``.

    Returns ``(value, BoundReport)``.  ``kernel`` may be passed to reuse a
    kernel computed with ``shift=disp.qbar``.
    """
    c = correlation(wf, p, spec, disp, settings, kernel)
    return c.value, bound_report(c.value, spec.N)


def smsv_bound(mu, N):
    """Lower bound ``2^((N+1)/2) exp(-mu^2/2) A(mu)`` on ``<B_1>`` for the squeezed vacuum.

    Only the block ``s = 0`` is kept; every other block adds a positive
    amount.  ``mu = a / (2 sigma)``.
    """
    if int(N) != N or N < 1 or N % 2 == 0:
        raise InputError(f"the squeezed-vacuum bound is established for odd N only, got {N!r}")
    if not mu >= 0:
        raise InputError(f"mu must be non-negative, got {mu!r}")
    return 2.0 ** ((N + 1) / 2) * math.exp(-mu * mu / 2) * float(window_mass(mu))


def violation_factor(mu):
    """``2 exp(-mu^2/2) A(mu)``: the N-independent part of :func:`smsv_bound`."""
    return 2.0 * math.exp(-mu * mu / 2) * float(window_mass(mu))
