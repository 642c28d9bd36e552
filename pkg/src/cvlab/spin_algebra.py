"""Pseudo-spin operators on the bin register.

Every operator of the pseudo-spin algebra acts as ``(2**N x 2**N matrix) x 1``
on the ``(m) x (s, y)`` factorisation of the quadrature line, so it is stored
as a dense numpy array indexed by ``(m', m)``.  Qubit ``j`` occupies bit
``j-1`` of ``m`` and the single-qubit basis is ordered ``(m_j=-1, m_j=+1)``.

In that basis ``sigma_x`` swaps the two states, ``sigma_y|m_j> = i m_j |-m_j>``
and ``sigma_z = diag(-1, +1)``, which reproduces ``sigma_x sigma_y = i sigma_z``.
"""
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .exceptions import InputError, NumericError

SIGMA = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, 1j], [-1j, 0]], dtype=complex),
    "z": np.array([[-1, 0], [0, 1]], dtype=complex),
}

UNIT_TOL = 1e-12


def _check_site(N, j):
    if int(N) != N or N < 1:
        raise InputError(f"N must be a positive integer, got {N!r}")
    if int(j) != j or not 1 <= j <= N:
        raise InputError(f"qubit index j must lie in [1, {N}], got {j!r}")


def embed(local, N, j):
    """Lift a 2x2 matrix on qubit ``j`` to the full ``2**N`` register."""
    _check_site(N, j)
    upper = np.eye(1 << (N - j))
    lower = np.eye(1 << (j - 1))
    return np.kron(upper, np.kron(local, lower))


def sigma_component(N, j, axis):
    """``sigma_axis`` acting on qubit ``j`` of an N-qubit register."""
    if axis not in SIGMA:
        raise InputError(f"axis must be one of x, y, z; got {axis!r}")
    return embed(SIGMA[axis], N, j)


def as_orientation(n):
    n = np.asarray(n, dtype=float)
    if n.shape != (3,) or not np.all(np.isfinite(n)):
        raise InputError(f"orientation must be a finite 3-vector, got {n!r}")
    if abs(np.linalg.norm(n) - 1.0) > UNIT_TOL:
        raise InputError(f"orientation must have unit norm, |n| = {np.linalg.norm(n)!r}")
    return n


def local_dot(n):
    n = as_orientation(n)
    return n[0] * SIGMA["x"] + n[1] * SIGMA["y"] + n[2] * SIGMA["z"]


def sigma_dot(N, j, n):
    """``sigma^(j) . n`` for a unit vector ``n``."""
    return embed(local_dot(n), N, j)


def number_operator_M(N):
    """Diagonal bin-index operator, ``M|m> = m|m>``."""
    if int(N) != N or N < 1:
        raise InputError(f"N must be a positive integer, got {N!r}")
    return np.diag(np.arange(1 << N).astype(complex))


def spherical_orientation(theta, phi):
    """Unit vector with polar angle ``theta`` and azimuth ``phi``."""
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


@dataclass(frozen=True)
class BellSpec:
    """Measurement orientations ``(a^(j), a'^(j))`` for j = 1..N and the variant i."""

    N: int
    pairs: Tuple[Tuple[Tuple[float, float, float], Tuple[float, float, float]], ...]
    variant: int = 1

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise InputError(f"N must be a positive integer, got {self.N!r}")
        if len(self.pairs) != self.N:
            raise InputError(f"expected {self.N} orientation pairs, got {len(self.pairs)}")
        if self.variant not in (1, 2):
            raise InputError(f"variant must be 1 or 2, got {self.variant!r}")
        pairs = tuple(
            (tuple(as_orientation(a).tolist()), tuple(as_orientation(b).tolist()))
            for a, b in self.pairs
        )
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def from_angles(cls, N, angles, variant=1):
        """Build from ``4N`` spherical angles ``(theta, phi, theta', phi')`` per qubit."""
        angles = np.asarray(angles, dtype=float).reshape(N, 4)
        pairs = [
            (spherical_orientation(t, f), spherical_orientation(tp, fp))
            for t, f, tp, fp in angles
        ]
        return cls(N, tuple(pairs), variant)

    def with_variant(self, variant):
        return BellSpec(self.N, self.pairs, variant)


X_AXIS = (1.0, 0.0, 0.0)
Y_AXIS = (0.0, 1.0, 0.0)
MINUS_Y_AXIS = (0.0, -1.0, 0.0)


def lowering_spec(N, variant=1):
    """Orientations making every factor ``A + iA' = sigma_x - i sigma_y``.

    The resulting product operator is ``2**N |0><L-1|``.
    """
    return BellSpec(N, tuple((X_AXIS, MINUS_Y_AXIS) for _ in range(N)), variant)


def center_hop_spec(N, variant=1):
    """Raise qubits 1..N-1 and lower qubit N: maps ``m = L/2`` to ``m = L/2 - 1``.

    The product operator is ``2**N |L/2-1><L/2|``, which couples the two bins
    adjacent to the centre of every block.
    """
    pairs = [(X_AXIS, Y_AXIS) for _ in range(N - 1)] + [(X_AXIS, MINUS_Y_AXIS)]
    return BellSpec(N, tuple(pairs), variant)


def product_operator(spec: BellSpec):
    """``E = prod_j (A^(j) + i A'^(j))`` formed by direct matrix products."""
    L = 1 << spec.N
    E = np.eye(L, dtype=complex)
    for j, (a, ap) in enumerate(spec.pairs, start=1):
        E = E @ (sigma_dot(spec.N, j, a) + 1j * sigma_dot(spec.N, j, ap))
    return E


def hermitian_parts(E):
    """``(E1, E2)`` with ``E = E1 + i E2`` and both Hermitian."""
    Ed = E.conj().T
    return (E + Ed) / 2, (E - Ed) / 2j


def bell_pair(spec: BellSpec):
    """Normalised Bell operators ``(B1, B2)`` built by the even/odd recursion.

    Starting from ``B1 = A^(1)``, ``B2 = A'^(1)``, each new qubit M enters
    through ``P = (A + A')/2`` and ``Q = (A - A')/2``:

    * M even: ``B1 <- B1 P + B2 Q``,  ``B2 <- B1 Q - B2 P``
    * M odd:  ``B1 <- B2 P + B1 Q``,  ``B2 <- B1 P - B2 Q``

    The new qubit is the most significant bit, so products are Kronecker
    products with the lower-order operators.
    """
    (a, ap) = spec.pairs[0]
    B1, B2 = local_dot(a), local_dot(ap)
    for M in range(2, spec.N + 1):
        a, ap = spec.pairs[M - 1]
        A, Ap = local_dot(a), local_dot(ap)
        P, Q = (A + Ap) / 2, (A - Ap) / 2
        if M % 2 == 0:
            B1, B2 = np.kron(P, B1) + np.kron(Q, B2), np.kron(Q, B1) - np.kron(P, B2)
        else:
            B1, B2 = np.kron(P, B2) + np.kron(Q, B1), np.kron(P, B1) - np.kron(Q, B2)
    return B1, B2


def bell_operator(spec: BellSpec):
    """The Bell operator selected by ``spec.variant``."""
    return bell_pair(spec)[spec.variant - 1]


def bell_from_product(E, N, variant):
    """Bell operator from ``E`` through the normalisation of each parity of N.

    Used as an independent route to :func:`bell_pair`.
    """
    E1, E2 = hermitian_parts(E)
    r = N // 2
    if N % 2 == 0:
        B = (E1 + E2) if variant == 1 else (E1 - E2)
        return B / 2**r
    return (E1 if variant == 1 else E2) / 2**r


def tsirelson_bound(N):
    """Largest quantum value ``2**((N-1)/2)`` of a normalised Bell operator."""
    return 2.0 ** ((N - 1) / 2)


def is_hermitian(M, tol=1e-12):
    M = np.asarray(M)
    scale = max(1.0, np.max(np.abs(M), initial=0.0))
    return M.ndim == 2 and M.shape[0] == M.shape[1] and np.max(np.abs(M - M.conj().T), initial=0.0) <= tol * scale


def spectral_norm(M, rtol=1e-10):
    """Largest absolute eigenvalue of a Hermitian matrix.

    The eigen-solve is LAPACK's (deterministic for a given input); the
    result is certified by the residual of the extremal eigenpair.
    """
    M = np.asarray(M, dtype=complex)
    if not is_hermitian(M):
        raise InputError("spectral_norm requires a Hermitian matrix")
    H = (M + M.conj().T) / 2
    w, V = np.linalg.eigh(H)
    k = int(np.argmax(np.abs(w)))
    lam = w[k]
    resid = np.linalg.norm(H @ V[:, k] - lam * V[:, k])
    if resid > rtol * max(abs(lam), 1.0):
        raise NumericError(f"eigenpair residual {resid:.3e} exceeds {rtol:g}")
    return float(abs(lam))


def displacement_phases(M, a, pbar):
    """Multiply each transition ``m -> m'`` by ``exp(i pbar a (m' - m))``.

    This is how a momentum displacement ``pbar`` dresses the ladder
    entries of any algebra operator; the position part of a displacement
    is applied to the state window instead.
    """
    M = np.asarray(M)
    if pbar == 0:
        return M
    idx = np.arange(M.shape[0])
    return M * np.exp(1j * pbar * a * (idx[:, None] - idx[None, :]))


def random_spec(N, rng, variant=1):
    """Bell spec with 2N orientations drawn uniformly from the sphere."""
    v = rng.normal(size=(N, 2, 3))
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    return BellSpec(N, tuple((tuple(p[0]), tuple(p[1])) for p in v), variant)


def commutator_norm(A, B):
    C = A @ B - B @ A
    return float(np.max(np.abs(C), initial=0.0))


def spins_commute(ops: Sequence[np.ndarray], tol=1e-12):
    return all(commutator_norm(x, y) <= tol for i, x in enumerate(ops) for y in ops[i + 1:])
