"""Brute-force discretisation of the quadrature line.

Every sub-interval gets the same ``P`` interior nodes, so the pseudo-spin
operators, which shift ``x`` by exact multiples of ``a`` inside a block,
map nodes onto nodes and become sparse D x D matrices with no
interpolation error.  Only the final inner product ``<psi|Op|psi>`` is a
quadrature.  Grid vectors are indexed ``(m, s, k)`` with ``k`` fastest.

The sigma operators here are assembled from their action on nodes, not
from :mod:`cvlab.spin_algebra`, so the grid results are an independent check
of the kernel engine.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .bell_engine import NO_DISPLACEMENT, DisplacementSpec
from .exceptions import InputError, ResourceError
from .partition import Partition
from .spin_algebra import BellSpec, as_orientation, commutator_norm, displacement_phases, is_hermitian

D_CAP = 2_000_000


@dataclass(frozen=True)
class GridBasis:
    partition: Partition
    s_lo: int
    s_hi: int
    P: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def n_s(self) -> int:
        return self.s_hi - self.s_lo + 1

    @property
    def D(self) -> int:
        return self.partition.L * self.n_s * self.P

    @property
    def inner(self) -> int:
        """Length of the (s, node) factor that every operator leaves alone."""
        return self.n_s * self.P

    def coordinates(self):
        p = self.partition
        m = np.arange(p.L)[:, None, None]
        s = np.arange(self.s_lo, self.s_hi + 1)[None, :, None]
        x = p.block_origin(s) + p.a * m + self.nodes[None, None, :]
        return x.reshape(-1)

    def weight_vector(self):
        return np.tile(self.weights, self.partition.L * self.n_s)

    def bin_index(self):
        return np.repeat(np.arange(self.partition.L), self.inner)


def build_basis(p: Partition, s_range=(-3, 3), P=200, rule="midpoint", cap=D_CAP) -> GridBasis:
    """Per-sub-interval nodes: composite midpoint (default) or Gauss-Legendre."""
    s_lo, s_hi = (int(v) for v in s_range)
    if s_hi < s_lo:
        raise InputError(f"empty s range {s_range!r}")
    if int(P) != P or P < 8:
        raise InputError(f"need at least 8 points per sub-interval, got {P!r}")
    D = p.L * (s_hi - s_lo + 1) * P
    if D > cap:
        raise ResourceError(f"grid dimension {D} exceeds the cap {cap}")
    if rule == "midpoint":
        nodes = (np.arange(P) + 0.5) * (p.a / P)
        weights = np.full(P, p.a / P)
    elif rule == "gauss":
        t, w = np.polynomial.legendre.leggauss(P)
        nodes = (t + 1) * (p.a / 2)
        weights = w * (p.a / 2)
    else:
        raise InputError(f"unknown rule {rule!r}")
    return GridBasis(p, s_lo, s_hi, int(P), nodes, weights)


def grid_amplitudes(state, basis: GridBasis, shift=0.0):
    """State values on the nodes, window moved to ``x + shift``."""
    if callable(state):
        psi = np.asarray(state(basis.coordinates() + shift), dtype=complex)
    else:
        psi = np.asarray(state, dtype=complex)
        if psi.shape != (basis.D,):
            raise InputError(f"grid state must have length {basis.D}, got {psi.shape}")
    if not np.all(np.isfinite(psi)):
        raise InputError("state is not finite on the grid")
    return psi


def _weighted(psi, basis):
    return psi * np.sqrt(basis.weight_vector())


def lift(M, basis: GridBasis):
    """``M x 1`` on the grid as a sparse D x D matrix."""
    M = sp.csr_matrix(np.asarray(M))
    return sp.kron(M, sp.identity(basis.inner, dtype=complex, format="csr"), format="csr")


def expect_grid(state, M, basis: GridBasis, disp: DisplacementSpec = NO_DISPLACEMENT):
    """``<psi| M_alpha |psi>`` by explicit grid matrices.

    ``state`` is a :class:`~cvlab.states.WaveFunction` or a vector of node
    amplitudes; the result is not divided by the grid norm.
    """
    M = np.asarray(M)
    L = basis.partition.L
    if M.shape != (L, L):
        raise InputError(f"operator must be {L}x{L}, got {M.shape}")
    phi = _weighted(grid_amplitudes(state, basis, disp.qbar), basis)
    op = lift(displacement_phases(M, basis.partition.a, disp.pbar), basis)
    return complex(np.vdot(phi, op @ phi))


def grid_sigma(basis: GridBasis, j, axis, disp: DisplacementSpec = NO_DISPLACEMENT):
    """Displaced ``sigma_axis^(j)`` assembled node by node.

    Column ``(m, s, k)`` of ``sigma_x`` has a single 1 in row
    ``(m - 2^(j-1) m_j, s, k)``; ``sigma_y`` carries ``i m_j`` instead and
    ``sigma_z`` is the diagonal ``m_j``.  A momentum displacement multiplies
    each hop ``m -> m'`` by ``exp(i pbar a (m' - m))``.
    """
    p = basis.partition
    if not 1 <= j <= p.N:
        raise InputError(f"qubit index j must lie in [1, {p.N}], got {j!r}")
    m = basis.bin_index()
    mj = np.where((m >> (j - 1)) & 1, 1, -1)
    cols = np.arange(basis.D)
    if axis == "z":
        return sp.csr_matrix((mj.astype(complex), (cols, cols)), shape=(basis.D, basis.D))
    target = m - (1 << (j - 1)) * mj
    rows = cols + (target - m) * basis.inner
    phase = np.exp(1j * disp.pbar * p.a * (target - m))
    if axis == "x":
        vals = phase
    elif axis == "y":
        vals = 1j * mj * phase
    else:
        raise InputError(f"axis must be one of x, y, z; got {axis!r}")
    return sp.csr_matrix((vals, (rows, cols)), shape=(basis.D, basis.D))


def grid_sigma_dot(basis, j, n, disp=NO_DISPLACEMENT):
    n = as_orientation(n)
    out = sp.csr_matrix((basis.D, basis.D), dtype=complex)
    for comp, axis in zip(n, "xyz"):
        if comp != 0:
            out = out + comp * grid_sigma(basis, j, axis, disp)
    return out


def grid_product_operator(basis: GridBasis, spec: BellSpec, disp: DisplacementSpec = NO_DISPLACEMENT):
    """``E = prod_j (A_j + i A'_j)`` multiplied out on the grid."""
    if spec.N != basis.partition.N:
        raise InputError("spec and basis disagree on N")
    E = sp.identity(basis.D, dtype=complex, format="csr")
    for j, (a, ap) in enumerate(spec.pairs, start=1):
        E = E @ (grid_sigma_dot(basis, j, a, disp) + 1j * grid_sigma_dot(basis, j, ap, disp))
    return E.tocsr()


def grid_product_expectation(state, spec: BellSpec, basis: GridBasis, disp: DisplacementSpec = NO_DISPLACEMENT):
    """Complex ``<psi|E_alpha|psi>`` on the grid (unnormalised)."""
    phi = _weighted(grid_amplitudes(state, basis, disp.qbar), basis)
    return complex(np.vdot(phi, grid_product_operator(basis, spec, disp) @ phi))


def grid_bell_operator(basis: GridBasis, spec: BellSpec, disp: DisplacementSpec = NO_DISPLACEMENT):
    """``B_i`` built from the grid product operator."""
    E = grid_product_operator(basis, spec, disp)
    Ed = E.conj().T
    E1, E2 = (E + Ed) / 2, (E - Ed) / 2j
    N, r = spec.N, spec.N // 2
    if N % 2 == 0:
        B = (E1 + E2) if spec.variant == 1 else (E1 - E2)
    else:
        B = E1 if spec.variant == 1 else E2
    return (B / 2**r).tocsr()


def grid_bell_correlation(state, spec: BellSpec, basis: GridBasis, disp: DisplacementSpec = NO_DISPLACEMENT):
    """Real part of ``<psi|B_{i,alpha}|psi>`` on the grid (unnormalised)."""
    phi = _weighted(grid_amplitudes(state, basis, disp.qbar), basis)
    B = grid_bell_operator(basis, spec, disp)
    return float(np.vdot(phi, B @ phi).real)


def grid_norm(state, basis: GridBasis, shift=0.0):
    phi = _weighted(grid_amplitudes(state, basis, shift), basis)
    return float(np.vdot(phi, phi).real)


def eigenprojectors(A, tol=1e-8):
    """Spectral projectors of a Hermitian matrix, one per distinct eigenvalue."""
    if not is_hermitian(A):
        raise InputError("measured observable must be Hermitian")
    w, V = np.linalg.eigh((A + A.conj().T) / 2)
    groups, start = [], 0
    for k in range(1, len(w) + 1):
        if k == len(w) or w[k] - w[start] > tol:
            Vg = V[:, start:k]
            groups.append((float(np.mean(w[start:k])), Vg @ Vg.conj().T))
            start = k
    return groups


def grid_projectors(A, basis: GridBasis):
    return [(lam, lift(P, basis)) for lam, P in eigenprojectors(np.asarray(A))]


def measure_then_expect(state, A, B, basis: GridBasis, commute_tol=1e-10):
    """``(<B>, Tr rho' B)`` with ``rho' = sum_l P_l rho P_l`` after measuring A.

    When A and B commute the two agree; a non-commuting pair is rejected.
    """
    A, B = np.asarray(A), np.asarray(B)
    if commutator_norm(A, B) > commute_tol:
        raise InputError("A and B do not commute; post-measurement invariance does not apply")
    phi = _weighted(grid_amplitudes(state, basis), basis)
    Bg = lift(B, basis)
    before = complex(np.vdot(phi, Bg @ phi))
    after = 0j
    for _, Pg in grid_projectors(A, basis):
        chi = Pg @ phi
        after += np.vdot(chi, Bg @ chi)
    return float(before.real), float(after.real)


def random_grid_state(basis: GridBasis, rng):
    """Random node amplitudes normalised in the grid inner product."""
    psi = rng.normal(size=basis.D) + 1j * rng.normal(size=basis.D)
    return psi / np.sqrt(grid_norm(psi, basis))
