import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvlab.bell_engine import (
    DisplacementSpec,
    bell_correlation,
    bell_expectation,
    bound_report,
    correlation,
    expect_spin_operator,
    smsv_bound,
    violation_factor,
)
from cvlab.exceptions import InputError
from cvlab.gram_kernel import KernelSettings, gram, gram_quadrature
from cvlab.partition import Partition
from cvlab.spin_algebra import (
    center_hop_spec,
    lowering_spec,
    number_operator_M,
    product_operator,
    random_spec,
    tsirelson_bound,
)
from cvlab.states import make_max_violation, make_squeezed_coherent, make_squeezed_vacuum, make_vacuum

# <B_1> of the squeezed vacuum at a = 1.8 sigma, N = 3 (closed-form kernel, frozen)
SMSV_B1_N3 = 1.68579656
SMSV_B1_N5 = 3.37159312
FACTOR_AT_0_9 = 0.84289828


def _mp_factor(mu):
    mu = mpmath.mpf(mu)
    return 2 * mpmath.exp(-mu**2 / 2) * mpmath.erf(mu / mpmath.sqrt(2))


def test_identity_expectation_is_norm():
    p = Partition(1.0, 3)
    K = gram(p, make_vacuum())
    assert expect_spin_operator(np.eye(8), K) == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(InputError):
        expect_spin_operator(np.eye(4), K)


def test_number_operator_against_bin_probabilities():
    sigma = 1 / math.sqrt(2)
    p = Partition(1.8 / math.sqrt(2), 3)
    K = gram(p, make_vacuum())
    value = expect_spin_operator(number_operator_M(3), K)
    # brute force: probability of bin m summed over blocks from erf differences
    ref = 0
    for m in range(8):
        for s in range(-4, 5):
            lo = p.a * 8 * (s - 0.5) + p.a * m
            ref += m * (mpmath.erf((lo + p.a) / (sigma * mpmath.sqrt(2))) - mpmath.erf(lo / (sigma * mpmath.sqrt(2)))) / 2
    # blocks dropped by the kernel carry at most tail_bound, each weighted by m <= 7
    assert value.real == pytest.approx(float(ref), abs=7 * K.tail_bound + 1e-14)
    assert abs(value.imag) < 1e-15 and 0 <= value.real <= 7


def test_hop_operator_expectation():
    p = Partition(1.8, 3)
    z = expect_spin_operator(product_operator(center_hop_spec(3)), gram(p, make_squeezed_vacuum(1.0)))
    assert z.real == pytest.approx(8 * 0.42144914, abs=1e-7)


def test_smsv_correlation():
    p = Partition(1.8, 3)
    value, rep = bell_correlation(make_squeezed_vacuum(1.0), p, center_hop_spec(3))
    assert value == pytest.approx(SMSV_B1_N3, abs=1e-8)
    assert rep.nchv_violated and not rep.tsirelson_exceeded


def test_max_violation_correlation():
    for N in (1, 3, 5, 7):
        p = Partition(0.9, N)
        value, rep = bell_correlation(make_max_violation(p, 0.0), p, lowering_spec(N))
        assert value == pytest.approx(2 ** ((N - 1) / 2), abs=1e-9)
        assert rep.tsirelson_margin == pytest.approx(0.0, abs=1e-9)


def test_max_violation_even_n_phase():
    # for even N the two parts combine; theta = pi/4 aligns them
    for N in (2, 4):
        p = Partition(1.0, N)
        value, _ = bell_correlation(make_max_violation(p, math.pi / 4), p, lowering_spec(N))
        assert value == pytest.approx(2 ** ((N - 1) / 2), abs=1e-9)


@settings(max_examples=20)
@given(st.floats(0.3, 2.5), st.floats(-4, 4), st.floats(-4, 4), st.sampled_from([2, 3]), st.floats(0.5, 2.5))
def test_displacement_covariance(sigma, qbar, pbar, N, ratio):
    p = Partition(ratio * sigma, N)
    spec = center_hop_spec(N)
    base, _ = bell_correlation(make_squeezed_vacuum(sigma), p, spec)
    moved, _ = bell_correlation(make_squeezed_coherent(sigma, qbar, pbar), p, spec, DisplacementSpec(qbar, pbar))
    assert moved == pytest.approx(base, abs=1e-9)


def test_displacement_spec_alpha_roundtrip():
    d = DisplacementSpec(1.2, -0.4)
    back = DisplacementSpec.from_alpha(d.alpha)
    assert back.qbar == pytest.approx(1.2) and back.pbar == pytest.approx(-0.4)
    with pytest.raises(InputError):
        DisplacementSpec(math.inf, 0.0)


def test_unnormalised_state_rejected():
    p = Partition(1.0, 2)
    wf = make_squeezed_vacuum(1.0).scaled(1.01)
    with pytest.raises(InputError):
        bell_correlation(wf, p, center_hop_spec(2))


def test_imaginary_residue_small(rng):
    p = Partition(0.7, 3)
    wf = make_squeezed_coherent(0.8, 0.3, 1.1)
    for _ in range(10):
        c = correlation(wf, p, random_spec(3, rng, rng.integers(1, 3)))
        assert c.imag_residue <= 1e-9
        assert abs(c.value) <= tsirelson_bound(3) + 1e-6


def test_smsv_bound_values():
    assert smsv_bound(0.9, 3) == pytest.approx(SMSV_B1_N3, abs=1e-8)
    assert smsv_bound(0.9, 5) == pytest.approx(SMSV_B1_N5, abs=1e-8)
    assert smsv_bound(0.9, 3) == pytest.approx(4 * float(_mp_factor(0.9)) / 2, rel=1e-14)
    assert smsv_bound(1e-12, 3) == pytest.approx(0.0, abs=1e-11)
    assert violation_factor(0.9) == pytest.approx(FACTOR_AT_0_9, abs=1e-8)
    with pytest.raises(InputError):
        smsv_bound(0.9, 4)


def test_smsv_bound_is_lower_bound():
    for mu in (0.2, 0.6, 0.9, 1.4, 3.0):
        for N in (1, 3, 5):
            p = Partition(2 * mu, N)
            value, _ = bell_correlation(make_squeezed_vacuum(1.0), p, center_hop_spec(N))
            assert value >= smsv_bound(mu, N) - 1e-12


def test_block_sum_monotone():
    # every extra block adds a non-negative amount to <B_1>
    sigma = 1.0
    p = Partition(0.4, 2)
    wf = make_squeezed_vacuum(sigma)
    spec = center_hop_spec(2)
    prev = -math.inf
    for s_max in range(0, 6):
        K = gram_quadrature(p, wf, KernelSettings(s_max=s_max))
        v = bell_expectation(p, spec, K).real
        assert v >= prev - 1e-12
        prev = v


def test_bound_report_examples():
    r = bound_report(1.6852, 3)
    assert r.violation_ratio == pytest.approx(1.6852) and r.nchv_violated and not r.tsirelson_exceeded
    assert not bound_report(1.0, 5).nchv_violated
    assert bound_report(2.0, 3).tsirelson_margin == pytest.approx(0.0, abs=1e-9)
    assert bound_report(2.0 + 1e-6, 3).tsirelson_exceeded
    assert set(r.as_dict()) >= {"value", "nchv_bound", "tsirelson_bound", "violation_ratio"}
