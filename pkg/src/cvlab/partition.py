"""Index arithmetic between the quadrature line and its (m, s, y) cells.

The line is cut into blocks of length ``a*L`` centred at ``a*L*s`` and every
block into ``L = 2**N`` sub-intervals of length ``a``.  A point is addressed as

    x = a*L*(s - 1/2) + a*m + y,   0 <= m < L,  0 <= y < a,

and the bin index ``m`` doubles as an N-qubit register through its binary
digits, ``m_j = +1`` when bit ``j-1`` is set and ``-1`` otherwise.  Intervals
are half-open, so a point on a bin edge belongs to the bin on its right.
"""
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .exceptions import InputError

N_MAX = 12


@dataclass(frozen=True)
class Partition:
    """Bin width ``a`` and qubit count ``N`` of the cell decomposition."""

    a: float
    N: int
    n_max: int = N_MAX

    def __post_init__(self):
        if not (isinstance(self.a, (int, float)) and math.isfinite(self.a) and self.a > 0):
            raise InputError(f"bin width must be positive and finite, got {self.a!r}")
        if int(self.N) != self.N or not 1 <= self.N <= self.n_max:
            raise InputError(f"N must be an integer in [1, {self.n_max}], got {self.N!r}")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "N", int(self.N))

    @property
    def L(self) -> int:
        return 1 << self.N

    @property
    def block_length(self) -> float:
        return self.a * self.L

    def block_origin(self, s):
        """Left edge ``a*L*(s - 1/2)`` of block ``s``."""
        return self.block_length * (np.asarray(s, dtype=float) - 0.5)

    def block_of(self, x):
        """Block index ``s`` containing ``x`` (vectorised)."""
        return np.floor(np.asarray(x, dtype=float) / self.block_length + 0.5).astype(np.int64)


class CellIndex(NamedTuple):
    m: int
    s: int
    y: float


def encode_m(bits: Sequence[int]) -> int:
    """Bin index of the qubit labels ``(m_1, ..., m_N)``, each ``+-1``."""
    bits = tuple(bits)
    if not bits:
        raise InputError("qubit labels must be non-empty")
    m = 0
    for j, b in enumerate(bits):
        if b not in (-1, 1):
            raise InputError(f"qubit label {j + 1} must be +1 or -1, got {b!r}")
        m += (1 << j) * (1 + b) // 2
    return m


def decode_m(m: int, N: int) -> tuple:
    """Inverse of :func:`encode_m`."""
    if int(N) != N or N < 1:
        raise InputError(f"N must be a positive integer, got {N!r}")
    if int(m) != m or not 0 <= m < (1 << N):
        raise InputError(f"m must be an integer in [0, {(1 << N) - 1}], got {m!r}")
    m = int(m)
    return tuple(1 if (m >> j) & 1 else -1 for j in range(N))


def qubit_signs(N: int) -> np.ndarray:
    """Array ``signs[m, j-1] = m_j`` for all ``m`` in ``[0, 2**N)``."""
    m = np.arange(1 << N)[:, None]
    return np.where((m >> np.arange(N)[None, :]) & 1, 1, -1)


def cell_to_x(p: Partition, c: CellIndex) -> float:
    m, s, y = c
    if not 0 <= m < p.L:
        raise InputError(f"m={m} outside [0, {p.L - 1}]")
    if not 0 <= y < p.a:
        raise InputError(f"y={y} outside [0, {p.a})")
    return p.a * p.L * (s - 0.5) + p.a * m + y


def x_to_cell(p: Partition, x: float) -> CellIndex:
    """Cell containing ``x``; the returned ``y`` always lies in ``[0, a)``."""
    x = float(x)
    if not math.isfinite(x):
        raise InputError(f"x must be finite, got {x!r}")
    s = int(p.block_of(x))
    r = x - p.block_length * (s - 0.5)
    # floor() of the block coordinate can land one cell off near edges
    if r < 0:
        s -= 1
        r = x - p.block_length * (s - 0.5)
    elif r >= p.block_length:
        s += 1
        r = x - p.block_length * (s - 0.5)
    m = min(int(r // p.a), p.L - 1)
    y = r - p.a * m
    if y >= p.a:
        y = math.nextafter(p.a, 0.0)
    return CellIndex(m, s, max(y, 0.0))


def cells_of(p: Partition, x) -> tuple:
    """Vectorised ``(m, s, y)`` arrays for an array of points."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InputError("x must be finite")
    s = p.block_of(x)
    r = x - p.block_origin(s)
    s = np.where(r < 0, s - 1, np.where(r >= p.block_length, s + 1, s))
    r = x - p.block_origin(s)
    m = np.clip(np.floor(r / p.a).astype(np.int64), 0, p.L - 1)
    y = np.clip(r - p.a * m, 0.0, np.nextafter(p.a, 0.0))
    return m, s, y
