"""Overlap kernel between the bins of a state.

For a partition (a, N) and a state psi the kernel is the L x L matrix

    G(m', m) = sum_s integral_0^a conj(psi(x_{m',s} + y)) psi(x_{m,s} + y) dy,
    x_{m,s} = a L (s - 1/2) + a m.

Any pseudo-spin operator ``M`` acts as ``M x 1`` over ``(s, y)``, so
``<psi|M|psi> = sum_{m',m} M[m', m] G(m', m)``.  The kernel is Hermitian and
positive semidefinite and its trace is the norm captured by the included
blocks.

Three engines fill it: a closed form for Gaussians, a closed form for the
two-bin maximal-violation state, and adaptive Gauss-Legendre panels for
anything else.
"""
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import InputError, NumericError, TruncationError
from .partition import Partition
from .special import erfc, normal_interval
from .states import GaussianParams, WaveFunction, _block_weight_sum


@dataclass(frozen=True)
class KernelSettings:
    eps: float = 1e-10  # Gaussian tail bound
    tol: float = 1e-8  # absolute quadrature tolerance per entry and block
    s_max: int = 64
    order: int = 10
    max_depth: int = 40

    def __post_init__(self):
        if not (self.eps > 0 and self.tol > 0):
            raise InputError("eps and tol must be positive")
        if int(self.s_max) != self.s_max or self.s_max < 0:
            raise InputError(f"s_max must be a non-negative integer, got {self.s_max!r}")


@dataclass(frozen=True)
class GramKernel:
    N: int
    a: float
    entries: np.ndarray = field(repr=False)
    s_range: tuple
    tail_bound: float
    engine: str
    shift: float = 0.0

    @property
    def L(self) -> int:
        return 1 << self.N

    @property
    def s_max(self) -> int:
        return max(abs(self.s_range[0]), abs(self.s_range[1]))

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def min_eigenvalue(self) -> float:
        H = (self.entries + self.entries.conj().T) / 2
        return float(np.linalg.eigvalsh(H)[0])

    def to_csv(self, path):
        """Write the kernel as L rows of ``re,im`` pairs."""
        L = self.L
        with open(path, "w") as fh:
            fh.write("# " + ",".join(f"re{m},im{m}" for m in range(L)) + "\n")
            for row in self.entries:
                fh.write(",".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row) + "\n")


def _gaussian_s_range(p: Partition, g: GaussianParams, eps, s_max):
    # smallest symmetric window whose two tails together carry <= eps
    z = 1.0
    while erfc(z / math.sqrt(2)) > eps:
        z += 0.25
    lo_x, hi_x = g.qbar - z * g.sigma, g.qbar + z * g.sigma
    s_lo, s_hi = int(p.block_of(lo_x)), int(p.block_of(hi_x))
    if s_hi - s_lo > 2 * s_max:
        raise TruncationError(
            f"eps={eps:g} needs blocks {s_lo}..{s_hi}, more than 2*s_max+1={2 * s_max + 1}"
        )
    edge_lo = float(p.block_origin(s_lo))
    edge_hi = float(p.block_origin(s_hi + 1))
    tail = 0.5 * (erfc((g.qbar - edge_lo) / (g.sigma * math.sqrt(2))) + erfc((edge_hi - g.qbar) / (g.sigma * math.sqrt(2))))
    return s_lo, s_hi, float(tail)


def gram_gaussian(p: Partition, g: GaussianParams, eps=1e-10, s_max=64):
    """Closed-form kernel of ``C exp(-(x-qbar)^2/(4 sigma^2) + i pbar x)``.

    With ``alpha = u - qbar`` and ``beta = v - qbar`` the cell start offsets,
    completing the square gives for each block

        C^2 int_0^a exp(-[(alpha+y)^2 + (beta+y)^2] / (4 sigma^2)) dy
          = exp(-(alpha-beta)^2 / (8 sigma^2)) * [Phi((c+a)/sigma) - Phi(c/sigma)],

    ``c = (alpha+beta)/2``.  ``alpha - beta = a(m'-m)`` is block independent
    and the momentum enters only as the phase ``exp(-i pbar a (m'-m))``.
    """
    if not eps > 0:
        raise InputError(f"eps must be positive, got {eps!r}")
    s_lo, s_hi, tail = _gaussian_s_range(p, g, eps, s_max)
    L, a, sig = p.L, p.a, g.sigma
    m = np.arange(L)
    dm = m[:, None] - m[None, :]
    s = np.arange(s_lo, s_hi + 1)
    # cell starts relative to the centre, shape (n_s, L)
    start = p.block_origin(s)[:, None] + a * m[None, :] - g.qbar
    c = (start[:, :, None] + start[:, None, :]) / 2
    mass = normal_interval(c / sig, (c + a) / sig)
    total = np.sum(mass, axis=0)
    G = np.exp(-(a * dm) ** 2 / (8 * sig**2)) * total * np.exp(-1j * g.pbar * a * dm)
    return GramKernel(p.N, a, G, (s_lo, s_hi), tail, "gaussian")


def gram_max_violation(p: Partition, wf: WaveFunction):
    """Exact kernel of the two-bin state on its own partition.

    Only ``G(0,0)``, ``G(L-1,L-1)`` and ``G(0,L-1) = exp(i theta) G(0,0)``
    (with its conjugate) are non-zero; block sums are done in closed form.
    """
    prm = wf.params
    if prm.partition != p:
        raise InputError("closed-form kernel needs the state's own partition")
    if prm.s_trunc is None:
        weight, s_range = math.pi**2 / 4, (-math.inf, math.inf)
    else:
        weight, s_range = _block_weight_sum(-prm.s_trunc, prm.s_trunc), (-prm.s_trunc, prm.s_trunc)
    # |coef * chi|^2 * a = (2/pi)^2 / 2 per unit block weight
    diag = prm.scale**2 * (2 / math.pi) ** 2 * weight / 2
    L = p.L
    G = np.zeros((L, L), dtype=complex)
    G[0, 0] += diag
    G[L - 1, L - 1] += diag
    G[0, L - 1] += diag * complex(math.cos(prm.theta), math.sin(prm.theta))
    G[L - 1, 0] = np.conj(G[0, L - 1])
    return GramKernel(p.N, p.a, G, s_range, 0.0, "max_violation")


def _quadrature_s_range(p: Partition, wf: WaveFunction, shift, s_max):
    if wf.kind == "gaussian":
        centre = int(p.block_of(wf.params.qbar - shift))
        return centre - s_max, centre + s_max, False
    if wf.support is not None:
        lo, hi = wf.support
        s_lo = int(p.block_of(lo - shift))
        s_hi = int(p.block_of(np.nextafter(hi, -np.inf) - shift))
        covered = s_hi - s_lo <= 2 * s_max
        if not covered:
            centre = (s_lo + s_hi) // 2
            s_lo, s_hi = max(s_lo, centre - s_max), min(s_hi, centre + s_max)
        return s_lo, s_hi, covered
    return -s_max, s_max, False


class _PanelRule:
    def __init__(self, order):
        self.t, self.w = np.polynomial.legendre.leggauss(order)

    def block(self, f, lo, hi):
        """Weighted Gram matrix of the L-vector function f over [lo, hi]."""
        h = (hi - lo) / 2
        y = lo + h * (self.t + 1)
        F = f(y)  # (L, K)
        return (np.conj(F) * (h * self.w)) @ F.T


def _adaptive_block(f, a, rule, tol, max_depth, s):
    stack = [(0.0, a, 0, rule.block(f, 0.0, a))]
    total = 0
    while stack:
        lo, hi, depth, coarse = stack.pop()
        mid = (lo + hi) / 2
        left, right = rule.block(f, lo, mid), rule.block(f, mid, hi)
        fine = left + right
        err = float(np.max(np.abs(fine - coarse), initial=0.0))
        if err <= tol * (hi - lo) / a or err <= 1e-15 * float(np.max(np.abs(fine), initial=0.0)):
            total = total + fine
            continue
        if depth >= max_depth:
            i, j = np.unravel_index(np.argmax(np.abs(fine - coarse)), fine.shape)
            raise NumericError(
                f"quadrature did not converge in cell (m'={i}, m={j}, s={s}) "
                f"on y in [{lo:.6g}, {hi:.6g}], error estimate {err:.3e}"
            )
        stack.append((mid, hi, depth + 1, right))
        stack.append((lo, mid, depth + 1, left))
    return total


def gram_quadrature(p: Partition, wf: WaveFunction, settings: Optional[KernelSettings] = None, shift=0.0):
    """Kernel by adaptive panel quadrature, state evaluated at ``x + shift``.

    Every block is integrated over ``y in [0, a]`` with Gauss-Legendre panels
    that are bisected until the entrywise change between a panel and its two
    halves is below ``settings.tol``.  Bin edges are panel edges, so
    piecewise-smooth states converge without special handling.

    ``tail_bound`` is zero when the state's support is fully covered, exact
    when the state knows its own tail, and otherwise the documented
    heuristic ``2 x`` (mass of the two outermost included blocks).
    """
    settings = settings or KernelSettings()
    rule = _PanelRule(settings.order)
    s_lo, s_hi, covered = _quadrature_s_range(p, wf, shift, settings.s_max)
    L, a = p.L, p.a
    offsets = a * np.arange(L)
    blocks = []
    for s in range(s_lo, s_hi + 1):
        base = float(p.block_origin(s)) + shift

        def f(y, base=base):
            return wf(base + offsets[:, None] + y[None, :])

        blocks.append(_adaptive_block(f, a, rule, settings.tol, settings.max_depth, s))
    stacked = np.array(blocks)
    G = np.sum(stacked, axis=0)
    G = (G + G.conj().T) / 2
    if covered:
        tail = 0.0
    elif wf.tail_mass is not None and wf.home_partition == p and shift == 0:
        tail = float(wf.tail_mass(s_lo, s_hi))
    else:
        edge = np.trace(stacked[0]).real + (np.trace(stacked[-1]).real if len(blocks) > 1 else 0.0)
        tail = 2.0 * float(edge)
    return GramKernel(p.N, a, G, (s_lo, s_hi), tail, "quadrature", shift)


def gram(p: Partition, wf: WaveFunction, settings: Optional[KernelSettings] = None, shift=0.0):
    """Kernel of ``x -> wf(x + shift)`` by the best available engine."""
    settings = settings or KernelSettings()
    if wf.kind == "gaussian":
        g = wf.params
        return gram_gaussian(p, GaussianParams(g.sigma, g.qbar - shift, g.pbar), settings.eps, settings.s_max)
    if wf.kind == "max_violation" and shift == 0 and wf.params.partition == p:
        return gram_max_violation(p, wf)
    return gram_quadrature(p, wf, settings, shift)
