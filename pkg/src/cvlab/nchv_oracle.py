"""Classical (non-contextual hidden-variable) side of the Bell functionals.

A hidden state assigns a value to each of the 2N observables
``(A^(1), A'^(1), ..., A^(N), A'^(N))``.  The Bell functionals are linear in
the hidden-variable distribution, so their classical maximum is attained on
a deterministic assignment of +-1 values; :func:`classical_max` enumerates
all ``4**N`` of them.

On a deterministic assignment ``(A + A')/2`` and ``(A - A')/2`` take values
in {-1, 0, 1} with exactly one of them non-zero, so the recursion keeps
``B_1`` and ``B_2`` integer-valued and the enumeration is exact.
"""
import json
import warnings
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from .exceptions import InputError, NumericError, ResourceError

DEFAULT_CAP = 10
HARD_CAP = 16
CHUNK = 1 << 20
FEASIBILITY_TOL = 1e-8


def assignment_values(index, N):
    """``(4**N-sized chunk, 2N)`` array of +-1 values for assignment indices.

    Position 0 is the most significant bit, so increasing index is
    lexicographic order with -1 < +1.
    """
    index = np.asarray(index, dtype=np.int64)
    shifts = np.arange(2 * N - 1, -1, -1, dtype=np.int64)
    return np.where((index[:, None] >> shifts[None, :]) & 1, 1, -1).astype(np.int64)


def hv_bell_values(values):
    """Integer ``(B1, B2)`` for each row of ``values`` via the hidden-variable recursion."""
    A, Ap = values[:, 0::2], values[:, 1::2]
    N = A.shape[1]
    B1, B2 = A[:, 0].copy(), Ap[:, 0].copy()
    for M in range(2, N + 1):
        P = (A[:, M - 1] + Ap[:, M - 1]) // 2
        Q = (A[:, M - 1] - Ap[:, M - 1]) // 2
        if M % 2 == 0:
            B1, B2 = B1 * P + B2 * Q, B1 * Q - B2 * P
        else:
            B1, B2 = B2 * P + B1 * Q, B1 * P - B2 * Q
    return B1, B2


def classical_max(N, variant=1, cap=DEFAULT_CAP):
    """Exact maximum of ``B_variant`` over deterministic assignments.

    Returns ``(Fraction, assignment)``; ties resolve to the lexicographically
    lowest assignment.
    """
    if int(N) != N or N < 1:
        raise InputError(f"N must be a positive integer, got {N!r}")
    if variant not in (1, 2):
        raise InputError(f"variant must be 1 or 2, got {variant!r}")
    if N > min(cap, HARD_CAP):
        raise ResourceError(f"enumerating 4**{N} assignments exceeds the cap N <= {min(cap, HARD_CAP)}")
    total = 1 << (2 * N)
    best, best_idx = None, None
    for start in range(0, total, CHUNK):
        idx = np.arange(start, min(start + CHUNK, total), dtype=np.int64)
        B = hv_bell_values(assignment_values(idx, N))[variant - 1]
        k = int(np.argmax(B))
        if best is None or B[k] > best:
            best, best_idx = int(B[k]), int(idx[k])
    assignment = tuple(int(v) for v in assignment_values([best_idx], N)[0])
    return Fraction(best), assignment


def product_term_values(values, N):
    """``(rows, 2**N)`` values of every product term of ``E``.

    Term ``S`` (a bitmask) takes the primed observable on the qubits whose
    bit is set: ``prod_{j in S} A'^(j) prod_{j not in S} A^(j)``.
    """
    A, Ap = values[:, 0::2], values[:, 1::2]
    masks = np.arange(1 << N)
    use_primed = (masks[:, None] >> np.arange(N)[None, :]) & 1  # (2**N, N)
    picked = np.where(use_primed[None, :, :] == 1, Ap[:, None, :], A[:, None, :])
    return np.prod(picked, axis=2)


def parse_table(table, N):
    """Dense array of the ``2**N`` term values from a ``{bitmask: value}`` mapping."""
    if int(N) != N or not 1 <= N <= 4:
        raise InputError(f"feasibility checks support 1 <= N <= 4, got {N!r}")
    if not isinstance(table, dict):
        raise InputError("correlation table must be a mapping from term bitmask to value")
    out = np.full(1 << N, np.nan)
    for key, val in table.items():
        try:
            k = int(key, 0) if isinstance(key, str) else int(key)
            v = float(val)
        except (TypeError, ValueError) as exc:
            raise InputError(f"malformed table entry {key!r}: {val!r}") from exc
        if not 0 <= k < (1 << N):
            raise InputError(f"term bitmask {key!r} out of range for N={N}")
        if not np.isfinite(v):
            raise InputError(f"term {key!r} has non-finite value")
        out[k] = v
    if np.any(np.isnan(out)):
        missing = [int(k) for k in np.flatnonzero(np.isnan(out))]
        raise InputError(f"correlation table is missing terms {missing}")
    return out


def load_table(path, N):
    with open(path) as fh:
        return parse_table(json.load(fh), N)


def _all_terms(N):
    return product_term_values(assignment_values(np.arange(1 << (2 * N)), N), N)


def feasibility_gap(table, N):
    """Smallest ``max_S |sum_l mu_l T_S(l) - table_S|`` over distributions mu."""
    b = parse_table(table, N) if isinstance(table, dict) else np.asarray(table, dtype=float)
    T = _all_terms(N).T.astype(float)  # (terms, assignments)
    n_terms, n_vert = T.shape
    # variables: mu (n_vert), t ; minimise t
    c = np.zeros(n_vert + 1)
    c[-1] = 1.0
    ones = np.ones((n_terms, 1))
    A_ub = np.block([[T, -ones], [-T, -ones]])
    b_ub = np.concatenate([b, -b])
    A_eq = np.concatenate([np.ones(n_vert), [0.0]])[None, :]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=(0, None), method="highs")
    if res.status != 0:
        raise NumericError(f"feasibility LP failed: {res.message}")
    return float(res.fun)


def nchv_feasible(table, N, tol=FEASIBILITY_TOL):
    """Whether some hidden-variable distribution reproduces the table."""
    gap = feasibility_gap(table, N)
    if gap <= tol:
        if gap > 0.1 * tol:
            warnings.warn(f"feasibility gap {gap:.3e} is close to the tolerance {tol:g}", RuntimeWarning)
        return True
    return False


def mixture_max(N, variant=1):
    """LP maximum of ``<B_variant>`` over all hidden-variable distributions."""
    if N > 4:
        raise ResourceError("mixture LP is limited to N <= 4")
    values = assignment_values(np.arange(1 << (2 * N)), N)
    B = hv_bell_values(values)[variant - 1].astype(float)
    res = linprog(-B, A_eq=np.ones((1, B.size)), b_eq=[1.0], bounds=(0, None), method="highs")
    if res.status != 0:
        raise NumericError(f"mixture LP failed: {res.message}")
    return float(-res.fun)


def table_from_assignment(assignment, N):
    """Correlation table of a point-mass distribution."""
    values = np.asarray(assignment, dtype=np.int64)[None, :]
    terms = product_term_values(values, N)[0]
    return {str(k): float(v) for k, v in enumerate(terms)}


def quantum_table(kernel, spec):
    """Quantum expectation of every product term for a state's kernel."""
    from .spin_algebra import sigma_dot

    N = spec.N
    A = [sigma_dot(N, j + 1, a) for j, (a, _) in enumerate(spec.pairs)]
    Ap = [sigma_dot(N, j + 1, ap) for j, (_, ap) in enumerate(spec.pairs)]
    table = {}
    for S in range(1 << N):
        op = np.eye(1 << N, dtype=complex)
        for j in range(N):
            op = op @ (Ap[j] if (S >> j) & 1 else A[j])
        table[str(S)] = float(np.sum(op * kernel.entries).real)
    return table
