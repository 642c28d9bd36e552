"""Parameter searches for the Bell functionals.

``optimize_bin_width`` maximises the N-independent squeezed-vacuum factor
``f(mu) = 2 exp(-mu^2/2) A(mu)`` over ``mu = a/(2 sigma)`` by golden-section
search; f is unimodal on (0, inf).  ``optimize_orientations`` maximises
``|<B_i>|`` over the 2N measurement directions with Nelder-Mead restarts.
"""
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .bell_engine import expect_spin_operator, violation_factor
from .exceptions import InputError
from .gram_kernel import GramKernel, KernelSettings, gram
from .partition import Partition
from .spin_algebra import BellSpec, bell_operator

INV_PHI = (math.sqrt(5) - 1) / 2
NORM_TOL = 1e-6


@dataclass
class OptResult:
    best_params: object
    best_value: float
    trace: list = field(default_factory=list)
    converged: bool = True

    def as_dict(self, with_trace=False):
        params = self.best_params
        if isinstance(params, np.ndarray):
            params = params.tolist()
        out = {"best_params": params, "best_value": self.best_value, "converged": self.converged}
        if with_trace:
            out["trace"] = [[p.tolist() if isinstance(p, np.ndarray) else p, v] for p, v in self.trace]
        return out


def _golden_max(f, lo, hi, tol, trace):
    c, d = hi - INV_PHI * (hi - lo), lo + INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    trace += [(c, fc), (d, fd)]
    while hi - lo > tol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - INV_PHI * (hi - lo)
            fc = f(c)
            trace.append((c, fc))
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * (hi - lo)
            fd = f(d)
            trace.append((d, fd))
    return (lo + hi) / 2


def optimize_bin_width(sigma, N=3, bracket=(0.1, 2.0), tol=1e-6) -> OptResult:
    """Golden-section maximum of ``f(mu)`` inside ``bracket``.

    ``best_params`` is ``{"mu": mu*, "a": 2 mu* sigma, "ratio": a*/sigma}``.
    A maximum sitting on a bracket end (monotone f, or a bracket narrower
    than ``tol``) is returned with ``converged=False``.
    """
    if not sigma > 0:
        raise InputError(f"sigma must be positive, got {sigma!r}")
    if int(N) != N or N < 1 or N % 2 == 0:
        raise InputError(f"N must be a positive odd integer, got {N!r}")
    lo, hi = (float(v) for v in bracket)
    if not 0 < lo < hi:
        raise InputError(f"bracket must satisfy 0 < mu_lo < mu_hi, got {bracket!r}")
    trace = []
    f = violation_factor
    if hi - lo <= tol:
        mu, converged = max((lo, hi), key=f), False
        trace += [(lo, f(lo)), (hi, f(hi))]
    else:
        mu = _golden_max(f, lo, hi, tol, trace)
        converged = True
        for end in (lo, hi):
            if abs(mu - end) <= tol and f(end) >= f(mu):
                mu, converged = end, False
    value = f(mu)
    return OptResult({"mu": mu, "a": 2 * mu * sigma, "ratio": 2 * mu}, value, trace, converged)


def angles_from_spec(spec: BellSpec):
    """Spherical angles ``(theta, phi, theta', phi')`` per qubit of a spec."""
    out = []
    for pair in spec.pairs:
        for x, y, z in pair:
            out += [math.acos(max(-1.0, min(1.0, z))), math.atan2(y, x)]
    return np.array(out)


def _local(theta, phi):
    st = math.sin(theta)
    return np.array([[-math.cos(theta), st * complex(math.cos(phi), math.sin(phi))],
                     [st * complex(math.cos(phi), -math.sin(phi)), math.cos(theta)]])


def spec_value(kernel: GramKernel, spec: BellSpec) -> float:
    """``|<B>|`` for a spec, the quantity the orientation search maximises."""
    return abs(float(expect_spin_operator(bell_operator(spec), kernel).real))


def _thread_count():
    try:
        return max(1, int(os.environ.get("CVLAB_THREADS", "1")))
    except ValueError:
        raise InputError("CVLAB_THREADS must be an integer") from None


def optimize_orientations(state, p: Partition, variant=1, restarts=16, seed=None, seed_angles=None,
                          settings: Optional[KernelSettings] = None, maxiter=None, threads=None) -> OptResult:
    """Best ``|<B_variant>|`` over measurement orientations.

    ``state`` is a wave function or a ready :class:`GramKernel` on ``p``.
    Starts are ``seed_angles`` (if given) followed by ``restarts`` uniform
    random angle sets drawn from ``seed``; each start is refined by
    Nelder-Mead until a further run no longer improves.  ``best_params`` is
    the 4N-angle vector and the trace holds the refined value of each start.
    """
    if seed is None:
        raise InputError("a seed for the random starts is required")
    if int(restarts) != restarts or restarts < 1:
        raise InputError(f"restarts must be a positive integer, got {restarts!r}")
    N = p.N
    kernel = state if isinstance(state, GramKernel) else gram(p, state, settings)
    if kernel.N != N:
        raise InputError("kernel and partition disagree on N")
    if abs(kernel.trace - 1.0) > NORM_TOL:
        raise InputError(f"state norm {kernel.trace:.9f} differs from 1 by more than {NORM_TOL:g}")

    G = kernel.entries
    r = N // 2

    def value(angles):
        # E is a Kronecker product of local factors (qubit N leftmost); for a
        # Hermitian kernel <E1> = Re<E> and <E2> = Im<E>.
        t = np.asarray(angles, dtype=float).reshape(N, 4)
        E = np.ones((1, 1), dtype=complex)
        for th, ph, thp, php in t[::-1]:
            E = np.kron(E, _local(th, ph) + 1j * _local(thp, php))
        z = np.sum(E * G)
        if N % 2 == 0:
            v = z.real + z.imag if variant == 1 else z.real - z.imag
        else:
            v = z.real if variant == 1 else z.imag
        return abs(float(v)) / 2**r

    rng = np.random.default_rng(seed)
    starts = []
    if seed_angles is not None:
        seed_angles = np.asarray(seed_angles, dtype=float)
        if seed_angles.shape != (4 * N,):
            raise InputError(f"seed_angles must hold 4N = {4 * N} angles")
        starts.append(seed_angles)
    for _ in range(int(restarts)):
        t = np.arccos(rng.uniform(-1, 1, size=2 * N))
        f = rng.uniform(-math.pi, math.pi, size=2 * N)
        starts.append(np.column_stack([t, f]).ravel())
    opts = {"xatol": 1e-9, "fatol": 1e-12, "adaptive": True, "maxiter": maxiter or 2000 * 4 * N}

    def refine(x0):
        x, best = x0, value(x0)
        for _ in range(8):
            res = minimize(lambda z: -value(z), x, method="Nelder-Mead", options=opts)
            if -res.fun <= best + 1e-13:
                break
            x, best = res.x, -res.fun
        return x, best

    workers = threads or _thread_count()
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(refine, starts))
    else:
        results = [refine(x0) for x0 in starts]
    trace = [(x, float(v)) for x, v in results]
    k = int(np.argmax([v for _, v in results]))
    best_x = results[k][0]
    best_value = spec_value(kernel, BellSpec.from_angles(N, best_x, variant))
    return OptResult(best_x, best_value, trace, True)
