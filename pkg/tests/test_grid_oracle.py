import math

import numpy as np
import pytest

from cvlab.bell_engine import DisplacementSpec, bell_correlation
from cvlab.exceptions import InputError, ResourceError
from cvlab.grid_oracle import (
    build_basis,
    eigenprojectors,
    expect_grid,
    grid_bell_correlation,
    grid_norm,
    grid_sigma,
    lift,
    measure_then_expect,
    random_grid_state,
)
from cvlab.partition import Partition, cells_of
from cvlab.spin_algebra import center_hop_spec, displacement_phases, lowering_spec, random_spec, sigma_component
from cvlab.states import make_max_violation, make_squeezed_coherent, make_squeezed_vacuum


def test_basis_dimension_and_weights():
    p = Partition(1.0, 2)
    b = build_basis(p, (-1, 1), 10)
    assert b.D == 120 and b.coordinates().shape == (120,)
    for rule in ("midpoint", "gauss"):
        bb = build_basis(Partition(0.7, 2), (-1, 1), 12, rule)
        assert bb.weights.sum() == pytest.approx(0.7, abs=1e-12)
        assert np.all(bb.weights > 0) and np.all((bb.nodes > 0) & (bb.nodes < 0.7))


def test_nodes_map_to_their_cells():
    p = Partition(0.9, 3)
    b = build_basis(p, (-2, 1), 9)
    m, s, _ = cells_of(p, b.coordinates())
    np.testing.assert_array_equal(m, b.bin_index())
    np.testing.assert_array_equal(s, np.tile(np.repeat(np.arange(-2, 2), 9), p.L))


def test_basis_limits():
    p = Partition(1.0, 3)
    with pytest.raises(ResourceError):
        build_basis(p, (-100, 100), 2000)
    with pytest.raises(InputError):
        build_basis(p, (0, 0), 4)
    with pytest.raises(InputError):
        build_basis(p, (1, 0), 10)


def test_grid_sigma_matches_algebra():
    p = Partition(0.5, 3)
    b = build_basis(p, (-1, 0), 8)
    for j in (1, 2, 3):
        for ax in "xyz":
            G = grid_sigma(b, j, ax, DisplacementSpec(0.0, 1.3))
            ref = lift(displacement_phases(sigma_component(3, j, ax), p.a, 1.3), b)
            assert abs(G - ref).max() < 1e-14
            cols = abs(G).tocsc()
            assert np.all(np.diff(cols.indptr) == 1)
            np.testing.assert_allclose(cols.data, 1.0, atol=1e-15)


def test_identity_gives_norm():
    p = Partition(1.8, 2)
    b = build_basis(p, (-3, 3), 40)
    wf = make_squeezed_vacuum(1.0)
    assert expect_grid(wf, np.eye(4), b).real == pytest.approx(grid_norm(wf, b), rel=1e-13)


def test_smsv_cross_engine():
    p = Partition(1.8, 3)
    wf = make_squeezed_vacuum(1.0)
    spec = center_hop_spec(3)
    analytic, _ = bell_correlation(wf, p, spec)
    grid = grid_bell_correlation(wf, spec, build_basis(p, (-3, 3), 200))
    assert abs(grid - analytic) / analytic < 1e-3


def test_max_violation_exact_on_grid():
    p = Partition(1.0, 3)
    wf = make_max_violation(p, 0.0, s_trunc=3)
    assert grid_bell_correlation(wf, lowering_spec(3), build_basis(p, (-3, 3), 16)) == pytest.approx(2.0, abs=1e-12)


def test_random_spec_cross_engine(rng):
    p = Partition(0.8, 2)
    wf = make_squeezed_coherent(0.7, 0.4, -0.9)
    b = build_basis(p, (-5, 5), 24, "gauss")
    for _ in range(3):
        spec = random_spec(2, rng)
        analytic, _ = bell_correlation(wf, p, spec)
        assert grid_bell_correlation(wf, spec, b) == pytest.approx(analytic, abs=1e-9)


def test_displaced_covariance_on_grid():
    sigma, qbar, pbar = 1.0, 0.7, -1.1
    p = Partition(1.8 * sigma, 2)
    spec = center_hop_spec(2)
    b = build_basis(p, (-3, 3), 100)
    base = grid_bell_correlation(make_squeezed_vacuum(sigma), spec, b)
    moved = grid_bell_correlation(make_squeezed_coherent(sigma, qbar, pbar), spec, b, DisplacementSpec(qbar, pbar))
    assert moved == pytest.approx(base, rel=1e-3)


def test_measure_then_expect(rng):
    p = Partition(1.0, 3)
    b = build_basis(p, (-1, 1), 8)
    psi = random_grid_state(b, rng)
    before, after = measure_then_expect(psi, sigma_component(3, 2, "z"), sigma_component(3, 1, "x"), b)
    assert abs(before - after) <= 1e-9
    Z = sigma_component(3, 1, "z")
    before, after = measure_then_expect(psi, Z, Z, b)
    assert after == pytest.approx(before, abs=1e-12)
    with pytest.raises(InputError):
        measure_then_expect(psi, sigma_component(3, 1, "x"), sigma_component(3, 1, "y"), b)


def test_measurement_changes_noncommuting_expectation(rng):
    # sanity: the dephasing step is not a no-op
    p = Partition(1.0, 1)
    b = build_basis(p, (0, 0), 8)
    psi = random_grid_state(b, rng)
    Z, X = sigma_component(1, 1, "z"), sigma_component(1, 1, "x")
    phi = psi * np.sqrt(b.weight_vector())
    projected = sum(P @ phi for _, P in [(l, lift(P, b)) for l, P in eigenprojectors(Z)])
    np.testing.assert_allclose(projected, phi, atol=1e-12)
    x_before = expect_grid(psi, X, b).real
    x_after = sum(np.vdot(P @ phi, lift(X, b) @ (P @ phi)).real for _, P in [(l, lift(Q, b)) for l, Q in eigenprojectors(Z)])
    assert abs(x_after) < 1e-12 and abs(x_before) > 1e-6


def test_projector_completeness(rng):
    for A in (sigma_component(3, 2, "z"), sigma_component(2, 1, "x") @ sigma_component(2, 2, "y")):
        total = sum(P for _, P in eigenprojectors(A))
        np.testing.assert_allclose(total, np.eye(A.shape[0]), atol=1e-12)


def test_grid_state_validation():
    b = build_basis(Partition(1.0, 1), (0, 0), 8)
    with pytest.raises(InputError):
        grid_norm(np.ones(3), b)
