import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvlab.exceptions import NumericError, TruncationError
from cvlab.gram_kernel import KernelSettings, gram, gram_gaussian, gram_max_violation, gram_quadrature
from cvlab.partition import Partition
from cvlab.states import GaussianParams, WaveFunction, make_max_violation, make_sampled, make_squeezed_coherent

# G(L/2-1, L/2) for N=3, a=1.8 sigma: exp(-mu^2/2) A(mu) at mu=0.9, outer blocks < 1e-12
G34_REF = 0.42144914


def _mp_entry(sigma, a, N, mp_, m, s):
    """Direct mpmath integral of one block term of the Gaussian kernel."""
    L = 2**N
    C2 = 1 / mpmath.sqrt(2 * mpmath.pi * sigma**2)

    def f(y):
        u = a * L * (s - 0.5) + a * mp_ + y
        v = a * L * (s - 0.5) + a * m + y
        return C2 * mpmath.exp(-(u**2 + v**2) / (4 * sigma**2))

    return mpmath.quad(f, [0, a])


def test_center_entry_value():
    for sigma in (0.3, 1.0, 2.5):
        p = Partition(1.8 * sigma, 3)
        G = gram_gaussian(p, GaussianParams(sigma))
        assert G.entries[3, 4].real == pytest.approx(G34_REF, abs=1e-8)
    mu = 0.9
    closed = math.exp(-mu * mu / 2) * float(mpmath.erf(mu / mpmath.sqrt(2)))
    assert G34_REF == pytest.approx(closed, abs=5e-9)
    assert float(_mp_entry(1.0, 1.8, 3, 3, 4, 0)) == pytest.approx(closed, rel=1e-12)


@pytest.mark.parametrize("N,sigma,a,qbar", [(2, 1.0, 0.7, 0.3), (3, 0.6, 0.5, -0.8), (1, 2.0, 1.1, 0.0)])
def test_entries_against_mpmath_integrals(N, sigma, a, qbar):
    p = Partition(a, N)
    G = gram_gaussian(p, GaussianParams(sigma, qbar)).entries
    L = p.L
    C2 = 1 / mpmath.sqrt(2 * mpmath.pi * sigma**2)
    for mp_, m in [(0, 0), (1, L - 1), (L - 1, 0), (L // 2, L // 2 - 1)]:
        ref = 0
        for s in range(-6, 7):
            base = a * L * (s - 0.5) - qbar
            ref += mpmath.quad(lambda y: C2 * mpmath.exp(
                -((base + a * mp_ + y) ** 2 + (base + a * m + y) ** 2) / (4 * sigma**2)), [0, a])
        # closed form keeps blocks until the dropped mass is below eps = 1e-10
        assert G[mp_, m].real == pytest.approx(float(ref), abs=1e-10)


@given(st.floats(0.1, 3), st.floats(-5, 5), st.floats(-5, 5), st.floats(0.2, 3), st.integers(1, 4))
def test_trace_hermitian_psd(sigma, qbar, pbar, a, N):
    p = Partition(a, N)
    K = gram_gaussian(p, GaussianParams(sigma, qbar, pbar))
    assert K.trace == pytest.approx(1.0, abs=1e-10)
    assert K.tail_bound <= 1e-10
    np.testing.assert_allclose(K.entries, K.entries.conj().T, atol=1e-15)
    assert K.min_eigenvalue() >= -1e-9


def test_momentum_only_changes_phase():
    p = Partition(0.9, 2)
    K0 = gram_gaussian(p, GaussianParams(1.0, 0.4, 0.0)).entries
    K1 = gram_gaussian(p, GaussianParams(1.0, 0.4, 2.3)).entries
    np.testing.assert_allclose(np.abs(K1), np.abs(K0), atol=1e-15)
    dm = np.arange(4)[:, None] - np.arange(4)[None, :]
    np.testing.assert_allclose(K1, K0 * np.exp(-1j * 2.3 * 0.9 * dm), atol=1e-15)


@settings(max_examples=20)
@given(st.floats(0.3, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(0.4, 2), st.sampled_from([2, 3]))
def test_quadrature_matches_closed_form(sigma, qbar, pbar, a, N):
    p = Partition(a, N)
    wf = make_squeezed_coherent(sigma, qbar, pbar)
    s_max = math.ceil(8 * sigma / (a * p.L)) + 1
    Kq = gram_quadrature(p, wf, KernelSettings(s_max=s_max))
    Kg = gram_gaussian(p, wf.params)
    np.testing.assert_allclose(Kq.entries, Kg.entries, atol=1e-6, rtol=0)


def test_max_violation_quadrature_entry():
    p = Partition(1.0, 3)
    theta = 0.9
    wf = make_max_violation(p, theta, s_trunc=20)
    Kq = gram_quadrature(p, wf)
    assert Kq.entries[0, 7] == pytest.approx(0.5 * np.exp(1j * theta), abs=1e-12)
    assert Kq.tail_bound == 0.0
    np.testing.assert_allclose(Kq.entries, gram_max_violation(p, wf).entries, atol=1e-12)


def test_untruncated_state_reports_exact_tail():
    p = Partition(1.0, 2)
    wf = make_max_violation(p, 0.0, s_trunc=None)
    K = gram_quadrature(p, wf, KernelSettings(s_max=30))
    assert K.s_range == (-30, 30)
    assert 1.0 - K.trace == pytest.approx(K.tail_bound, rel=1e-8)


def test_zero_function_gives_zero_kernel():
    p = Partition(1.0, 2)
    zero = make_sampled([-3.0, 3.0], [0.0, 0.0])
    K = gram(p, zero)
    assert np.all(K.entries == 0)


def test_kernel_level_covariance():
    p = Partition(0.8, 3)
    moved = make_squeezed_coherent(0.9, 1.7, -0.6)
    base = make_squeezed_coherent(0.9, 0.0, -0.6)
    np.testing.assert_allclose(gram(p, moved, shift=1.7).entries, gram(p, base).entries, atol=1e-14)
    # the quadrature path shifts the window the same way
    Kq = gram_quadrature(p, moved, KernelSettings(s_max=3), shift=1.7)
    np.testing.assert_allclose(Kq.entries, gram(p, base).entries, atol=1e-7)


def test_truncation_error_when_cap_too_small():
    p = Partition(0.1, 1)
    with pytest.raises(TruncationError):
        gram_gaussian(p, GaussianParams(5.0), eps=1e-10, s_max=2)


def test_nonconvergence_reports_cell():
    p = Partition(1.0, 1)
    wild = WaveFunction("sampled", None, lambda x: np.sin(400 * x**2).astype(complex), (-1.0, 1.0))
    with pytest.raises(NumericError, match="cell"):
        gram_quadrature(p, wild, KernelSettings(tol=1e-14, max_depth=2))


def test_heuristic_tail_for_unknown_state():
    p = Partition(1.0, 1)
    g = make_squeezed_coherent(1.0)
    wf = WaveFunction("sampled", None, g.evaluator)
    K = gram_quadrature(p, wf, KernelSettings(s_max=1))
    exact_tail = 1.0 - K.trace
    assert exact_tail <= K.tail_bound  # heuristic is conservative here
    assert K.tail_bound > 0


def test_csv_dump(tmp_path):
    K = gram_gaussian(Partition(1.0, 2), GaussianParams(1.0, 0.2, 0.5))
    path = tmp_path / "k.csv"
    K.to_csv(path)
    raw = np.loadtxt(path, delimiter=",", comments="#")
    np.testing.assert_array_equal(raw[:, 0::2] + 1j * raw[:, 1::2], K.entries)
