import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cvlab.partition import Partition
from cvlab.states import GaussianParams, make_max_violation, make_squeezed_coherent, make_vacuum
from cvlab.wigner import (
    PhasePoint,
    WignerSettings,
    WindowWarning,
    wigner_gaussian,
    wigner_grid,
    wigner_min,
    wigner_numeric,
    wigner_to_csv,
)

gauss = st.builds(GaussianParams, st.floats(0.1, 4), st.floats(-6, 6), st.floats(-6, 6))


def test_peak_value():
    g = GaussianParams(0.37, 1.2, -0.4)
    assert wigner_gaussian(g, 1.2, -0.4) == pytest.approx(1 / math.pi, rel=1e-15)


@given(gauss)
def test_normalisation(g):
    X, P, W = wigner_grid(g, (g.qbar - 10 * g.sigma, g.qbar + 10 * g.sigma,
                              g.pbar - 5 / g.sigma, g.pbar + 5 / g.sigma), 401)
    dx, dp = X[1, 0] - X[0, 0], P[0, 1] - P[0, 0]
    assert np.trapezoid(np.trapezoid(W, dx=dp, axis=1), dx=dx) == pytest.approx(1.0, abs=1e-6)


@given(gauss, st.floats(-50, 50), st.floats(-50, 50))
def test_gaussian_positive_anywhere(g, x, p):
    assert wigner_gaussian(g, x, p) >= 0
    assert wigner_min(g, (x, x + 1, p, p + 1), 5) >= 0


@given(gauss)
def test_gaussian_min_positive_on_scans(g):
    assert wigner_min(g, (g.qbar - 3, g.qbar + 3, g.pbar - 3, g.pbar + 3), 21) > 0


@given(st.floats(0.2, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-2, 2), st.floats(-2, 2))
def test_numeric_matches_closed_form(sigma, qbar, pbar, dx, dp):
    wf = make_squeezed_coherent(sigma, qbar, pbar)
    x, p = qbar + dx * sigma, pbar + dp / sigma
    assert wigner_numeric(wf, (x, p)) == pytest.approx(wigner_gaussian(wf.params, x, p), abs=1e-5)


def test_vacuum_origin():
    assert wigner_numeric(make_vacuum(), PhasePoint(0.0, 0.0)) == pytest.approx(1 / math.pi, abs=1e-5)


def test_displaced_peak_location():
    wf = make_squeezed_coherent(0.6, 1.0, 0.0)
    xs = np.linspace(-1, 3, 81)
    vals = [wigner_numeric(wf, (x, 0.0)) for x in xs]
    assert abs(xs[int(np.argmax(vals))] - 1.0) <= xs[1] - xs[0]


def test_max_violation_has_negative_region():
    wf = make_max_violation(Partition(1.0, 3), 0.0, s_trunc=1)
    assert wigner_min(wf, (-12, 12, -3, 3), (25, 13)) < -0.1


def test_degenerate_window():
    g = GaussianParams(0.8, 0.5, 0.2)
    assert wigner_min(g, (1.0, 1.0, 0.3, 0.3), 17) == pytest.approx(wigner_gaussian(g, 1.0, 0.3), rel=1e-15)
    wf = make_squeezed_coherent(0.8, 0.5, 0.2)
    X, P, W = wigner_grid(wf, (1.0, 1.0, 0.3, 0.3), 17)
    assert W.shape == (1, 1)


def test_small_window_warns():
    wf = make_squeezed_coherent(2.0)
    with pytest.warns(WindowWarning):
        wigner_numeric(wf, (0.0, 0.0), WignerSettings(half_width=1.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        wigner_numeric(wf, (0.0, 0.0))


def test_csv_dump(tmp_path):
    X, P, W = wigner_grid(GaussianParams(1.0), (-1, 1, -1, 1), 3)
    path = tmp_path / "w.csv"
    wigner_to_csv(path, X, P, W)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (9, 3)
    np.testing.assert_allclose(data[:, 2], wigner_gaussian(GaussianParams(1.0), data[:, 0], data[:, 1]))
