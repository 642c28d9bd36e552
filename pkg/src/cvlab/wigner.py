"""Wigner functions of single-mode states.

Gaussian states have the closed form

    W(x, p) = exp(-(x - qbar)^2 / (2 sigma^2) - 2 sigma^2 (p - pbar)^2) / pi,

which is strictly positive.  Other states go through the transform
``W(x, p) = (1/pi) int conj(psi(x+u)) psi(x-u) exp(2ipu) du`` on a
truncated u-window with the trapezoid rule.
"""
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .exceptions import InputError
from .states import GaussianParams, WaveFunction


class WindowWarning(RuntimeWarning):
    """The u-window of the numeric transform cuts off a non-negligible integrand."""


class PhasePoint(NamedTuple):
    x: float
    p: float


@dataclass(frozen=True)
class WignerSettings:
    half_width: Optional[float] = None
    step: Optional[float] = None
    edge_tol: float = 1e-8
    imag_tol: float = 1e-6


def _gaussian(state):
    if isinstance(state, GaussianParams):
        return state
    if isinstance(state, WaveFunction) and state.kind == "gaussian":
        return state.params
    return None


def wigner_gaussian(g: GaussianParams, x, p):
    """Closed-form Wigner function of a squeezed coherent state (vectorised)."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    w = np.exp(-((x - g.qbar) ** 2) / (2 * g.sigma**2) - 2 * g.sigma**2 * (p - g.pbar) ** 2) / math.pi
    return w if w.ndim else float(w)


def _u_grid(wf: WaveFunction, x, p, settings: WignerSettings):
    g = _gaussian(wf)
    if settings.half_width is not None:
        half = settings.half_width
        scale = settings.step or half / 1024
    elif g is not None:
        half = 8 * g.sigma
        scale = g.sigma / 32
    elif wf.support is not None:
        lo, hi = wf.support
        half = max(abs(x - lo), abs(hi - x)) + 1e-9
        scale = (hi - lo) / 8192
    else:
        raise InputError("numeric Wigner transform needs settings.half_width for states without finite support")
    step = settings.step or min(scale, math.pi / (8 * max(abs(p), 1.0)))
    n = int(math.ceil(half / step))
    return np.linspace(-half, half, 2 * n + 1)


def wigner_numeric(wf: WaveFunction, pt, settings: Optional[WignerSettings] = None):
    """Wigner function at one phase-space point by direct transform."""
    settings = settings or WignerSettings()
    x, p = float(pt[0]), float(pt[1])
    u = _u_grid(wf, x, p, settings)
    f = np.conj(wf(x + u)) * wf(x - u) * np.exp(2j * p * u)
    edge = max(abs(f[0]), abs(f[-1]))
    if edge > settings.edge_tol:
        warnings.warn(f"u-window edge integrand {edge:.2e} at ({x:g}, {p:g}) exceeds {settings.edge_tol:g}", WindowWarning)
    w = np.trapezoid(f, u) / math.pi
    if abs(w.imag) > settings.imag_tol:
        warnings.warn(f"imaginary residue {abs(w.imag):.2e} at ({x:g}, {p:g})", WindowWarning)
    return float(w.real)


def _axes(window, grid_steps):
    x_lo, x_hi, p_lo, p_hi = (float(v) for v in window)
    if x_hi < x_lo or p_hi < p_lo:
        raise InputError(f"window bounds out of order: {window!r}")
    nx, npts = (grid_steps, grid_steps) if np.isscalar(grid_steps) else grid_steps
    nx = 1 if x_hi == x_lo else int(nx)
    npts = 1 if p_hi == p_lo else int(npts)
    if nx < 1 or npts < 1:
        raise InputError("grid_steps must be positive")
    return np.linspace(x_lo, x_hi, nx), np.linspace(p_lo, p_hi, npts)


def wigner_grid(state, window, grid_steps, settings: Optional[WignerSettings] = None):
    """``(X, P, W)`` sampled on a rectangular phase-space grid."""
    xs, ps = _axes(window, grid_steps)
    X, P = np.meshgrid(xs, ps, indexing="ij")
    g = _gaussian(state)
    if g is not None:
        return X, P, wigner_gaussian(g, X, P)
    W = np.array([[wigner_numeric(state, (x, p), settings) for p in ps] for x in xs])
    return X, P, W


def wigner_min(state, window, grid_steps, settings: Optional[WignerSettings] = None):
    """Smallest sampled Wigner value over the window."""
    return float(np.min(wigner_grid(state, window, grid_steps, settings)[2]))


def wigner_to_csv(path, X, P, W):
    np.savetxt(path, np.column_stack([X.ravel(), P.ravel(), W.ravel()]), delimiter=",", header="x,p,W", comments="")
