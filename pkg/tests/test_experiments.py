import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msgfem.config import RunConfig
from msgfem.experiments import first_n_below, log_linear_fit, make_coefficient, make_mesh, timing_setup


@settings(max_examples=30, deadline=None)
@given(slope=st.floats(-3.0, 3.0), icpt=st.floats(-5.0, 5.0), size=st.integers(3, 20))
def test_log_linear_fit_recovers_exact_exponentials(slope, icpt, size):
    ns = np.arange(1, size + 1)
    s, r2 = log_linear_fit(ns, np.exp(icpt + slope * ns))
    assert s == pytest.approx(slope, abs=1e-9)
    assert r2 == pytest.approx(1.0, abs=1e-9) or abs(slope) < 1e-9


def test_first_n_below():
    assert first_n_below([1, 2, 3], [1.0, 1e-4, 1e-5], 1e-3) == 2
    assert first_n_below([1, 2], [1.0, 0.5], 1e-3) is None


def test_timing_setup_keeps_layers_off_the_boundary():
    problem, dec = timing_setup(5, 2, overlap=1)
    sub = dec[0]
    assert problem.mesh.cells_per_axis == (13, 13, 13)
    assert not sub.is_boundary
    assert sub.omega_star.lo == (1, 1, 1)


def test_channel_contrast_exponent_override():
    cfg = RunConfig(cells=128, coefficient="channel", contrast=1e6)
    field = make_coefficient(cfg, make_mesh(cfg), contrast_exponent=3.0)
    assert field.contrast == pytest.approx(1e3)
    assert make_coefficient(cfg, make_mesh(cfg)).contrast == pytest.approx(1e6)
    assert math.isclose(make_coefficient(cfg.replace(coefficient="constant"), make_mesh(cfg)).contrast, 1.0)
