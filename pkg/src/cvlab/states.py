"""Single-mode wave functions on the quadrature line.

Three kinds are supported:

``gaussian``
    Squeezed coherent state ``C exp(-(x - qbar)^2 / (4 sigma^2) + i pbar x)``
    with ``C = (2 pi sigma^2)^(-1/4)``.  ``qbar = pbar = 0`` is the squeezed
    vacuum and ``sigma^2 = 1/2`` the vacuum.
``max_violation``
    The two-bin state supported on ``m = 0`` and ``m = L-1`` with block
    coefficients ``2 / (pi (2s - 1))`` and a relative phase ``exp(i theta)``.
``sampled``
    Linear interpolation of user samples, zero outside the sampled range.

All evaluators are vectorised and pure, so a :class:`WaveFunction` can be
shared between threads.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import polygamma

from .exceptions import InputError
from .partition import Partition, cells_of

DEFAULT_S_TRUNC = 256


@dataclass(frozen=True)
class GaussianParams:
    sigma: float
    qbar: float = 0.0
    pbar: float = 0.0

    def __post_init__(self):
        for name in ("sigma", "qbar", "pbar"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise InputError(f"{name} must be finite, got {v!r}")
        if self.sigma <= 0:
            raise InputError(f"sigma must be positive, got {self.sigma!r}")

    @property
    def alpha(self) -> complex:
        return complex(self.qbar, self.pbar) / math.sqrt(2)

    @property
    def squeezing(self) -> float:
        """Squeezing parameter r' with sigma^2 = exp(-2 r') / 2."""
        return -0.5 * math.log(2 * self.sigma**2)


@dataclass(frozen=True)
class MaxViolationParams:
    partition: Partition
    theta: float
    s_trunc: Optional[int]
    scale: float
    raw_norm: float

    @property
    def chi(self) -> float:
        return 1.0 / math.sqrt(2 * self.partition.a)


@dataclass(frozen=True)
class SampledParams:
    x: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class WaveFunction:
    """An evaluatable pure state ``x -> psi(x)``.

    ``support`` is a finite ``(lo, hi)`` outside of which psi vanishes, or
    None.  ``tail_mass(s_lo, s_hi)``, when available, gives the exact norm
    the state carries outside blocks ``s_lo..s_hi`` of ``home_partition``.
    """

    kind: str
    params: object
    evaluator: Callable = field(repr=False, compare=False)
    support: Optional[tuple] = None
    tail_mass: Optional[Callable] = field(default=None, repr=False, compare=False)
    home_partition: Optional[Partition] = None

    def __call__(self, x):
        return self.evaluator(np.asarray(x, dtype=float))

    def scaled(self, factor):
        """The same state multiplied by a constant (no longer normalised)."""
        ev = self.evaluator
        tail = self.tail_mass
        return WaveFunction(
            "scaled",
            (self, factor),
            lambda x: factor * ev(x),
            self.support,
            None if tail is None else (lambda lo, hi: abs(factor) ** 2 * tail(lo, hi)),
            self.home_partition,
        )


def make_squeezed_coherent(sigma, qbar=0.0, pbar=0.0):
    """Displaced squeezed vacuum of position width ``sigma``.

    The global phase ``exp(-i pbar qbar / 2)`` of the displacement operator
    is dropped; every expectation value is independent of it.
    """
    g = GaussianParams(float(sigma), float(qbar), float(pbar))
    C = (2 * math.pi * g.sigma**2) ** -0.25

    def psi(x):
        return C * np.exp(-((x - g.qbar) ** 2) / (4 * g.sigma**2) + 1j * g.pbar * x)

    return WaveFunction("gaussian", g, psi)


def make_squeezed_vacuum(sigma):
    return make_squeezed_coherent(sigma)


def make_vacuum():
    return make_squeezed_coherent(1 / math.sqrt(2))


def _odd_inverse_square_tail(k0):
    """sum_{k >= k0} (2k - 1)^-2 for real k0 >= 1."""
    return 0.25 * float(polygamma(1, k0 - 0.5))


def _block_weight_sum(s_lo, s_hi):
    """sum_{s=s_lo}^{s_hi} (2s - 1)^-2, inclusive; infinite ends allowed."""
    if s_hi < s_lo:
        return 0.0

    def upper(k0):  # sum over s >= k0, any integer k0
        if k0 >= 1:
            return _odd_inverse_square_tail(k0)
        # s <= 0 terms mirror s' = 1 - s >= 1
        return _odd_inverse_square_tail(1) + (_odd_inverse_square_tail(1) - _odd_inverse_square_tail(2 - k0))

    total_hi = upper(s_lo) if math.isfinite(s_lo) else 2 * _odd_inverse_square_tail(1)
    rest = upper(s_hi + 1) if math.isfinite(s_hi) else 0.0
    return total_hi - rest


def make_max_violation(p: Partition, theta=0.0, s_trunc=DEFAULT_S_TRUNC, renormalize=True):
    """Two-bin state reaching the largest quantum Bell value.

    On block ``s`` the ``m = 0`` bin carries ``2/(pi (2s-1)) * chi`` with the
    constant ``chi = (2a)^(-1/2)``; the ``m = L-1`` bin carries the same
    amplitude times ``exp(i theta)``.  All integer ``s`` contribute and
    ``sum_{s in Z} (2s-1)^-2 = pi^2/4`` makes the untruncated state
    normalised.

    Args:
        p: partition that fixes ``a`` and ``L``.
        theta: relative phase of the ``m = L-1`` branch.
        s_trunc: keep only ``|s| <= s_trunc``; None keeps every block.
        renormalize: rescale a truncated state back to unit norm.
    """
    if s_trunc is not None and (int(s_trunc) != s_trunc or s_trunc < 0):
        raise InputError(f"s_trunc must be a non-negative integer or None, got {s_trunc!r}")
    coef = 2 / math.pi
    if s_trunc is None:
        raw = 1.0
    else:
        raw = coef**2 * _block_weight_sum(-s_trunc, s_trunc)
    scale = 1 / math.sqrt(raw) if renormalize else 1.0
    params = MaxViolationParams(p, float(theta), s_trunc, scale, raw)
    chi = params.chi
    phase = complex(math.cos(theta), math.sin(theta))
    L = p.L

    def psi(x):
        m, s, _ = cells_of(p, x)
        amp = scale * coef * chi / (2.0 * s - 1.0)
        out = np.where(m == 0, amp, 0.0) + np.where(m == L - 1, amp * phase, 0.0)
        if s_trunc is not None:
            out = np.where(np.abs(s) <= s_trunc, out, 0.0)
        return out.astype(complex)

    def tail(s_lo, s_hi):
        lo_cut = -math.inf if s_trunc is None else -s_trunc
        hi_cut = math.inf if s_trunc is None else s_trunc
        w = _block_weight_sum(lo_cut, min(s_lo - 1, hi_cut)) + _block_weight_sum(max(s_hi + 1, lo_cut), hi_cut)
        return scale**2 * coef**2 * w

    support = None
    if s_trunc is not None:
        support = (float(p.block_origin(-s_trunc)), float(p.block_origin(s_trunc + 1)))
    return WaveFunction("max_violation", params, psi, support, tail, p)


def make_sampled(x, values):
    """State interpolated linearly between samples ``values`` at points ``x``."""
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=complex)
    if x.ndim != 1 or x.shape != values.shape or len(x) < 2:
        raise InputError("sampled state needs matching 1-d x and value arrays of length >= 2")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(values))):
        raise InputError("sampled state contains non-finite entries")
    if np.any(np.diff(x) <= 0):
        raise InputError("sample points must be strictly increasing")
    re, im = values.real.copy(), values.imag.copy()

    def psi(t):
        return np.interp(t, x, re, left=0.0, right=0.0) + 1j * np.interp(t, x, im, left=0.0, right=0.0)

    return WaveFunction("sampled", SampledParams(x, values), psi, (float(x[0]), float(x[-1])))


def load_sampled(path):
    """Read a sampled state from whitespace-separated ``x Re(psi) [Im(psi)]`` columns."""
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] not in (2, 3):
        raise InputError(f"{path}: expected 2 or 3 columns, found {data.shape[1]}")
    values = data[:, 1] + (1j * data[:, 2] if data.shape[1] == 3 else 0)
    return make_sampled(data[:, 0], values)


def save_sampled(path, wf: WaveFunction, x):
    x = np.asarray(x, dtype=float)
    v = wf(x)
    np.savetxt(path, np.column_stack([x, v.real, v.imag]), header="x re_psi im_psi")


def wf_norm(wf: WaveFunction, partition: Optional[Partition] = None, settings=None):
    """``integral |psi|^2 dx`` as the trace of the overlap kernel."""
    from .gram_kernel import gram

    if partition is None:
        partition = wf.params.partition if wf.kind == "max_violation" else Partition(1.0, 1)
    return float(np.trace(gram(partition, wf, settings).entries).real)
