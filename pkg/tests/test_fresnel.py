import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nearfield_codebook import ArrayConfig, PolarPoint, fresnel_c, fresnel_cs, fresnel_s, closed_form_gain
from nearfield_codebook.fresnel import (
    DEGENERATE_EPS,
    SERIES_LIMIT,
    dirichlet,
    fresnel_gain,
    gain_params,
    steering_gain,
)

import oracles


def test_zero_and_unit_values():
    assert fresnel_c(0.0) == 0.0 and fresnel_s(0.0) == 0.0
    C, S = oracles.fresnel_quad(np.array([1.0]))
    assert fresnel_c(1.0) == pytest.approx(C[0], abs=1e-13)
    assert fresnel_s(1.0) == pytest.approx(S[0], abs=1e-13)
    assert round(fresnel_c(1.0), 8) == 0.77989340
    assert round(fresnel_s(1.0), 8) == 0.43825915


def test_large_argument_matches_leading_asymptotics():
    x = 50.0
    ph = 0.5 * math.pi * x * x
    assert fresnel_c(x) == pytest.approx(0.5 + math.sin(ph) / (math.pi * x), abs=1e-6)
    assert fresnel_s(x) == pytest.approx(0.5 - math.cos(ph) / (math.pi * x), abs=1e-6)


def test_frozen_oracle_agreement(data_dir):
    z = np.load(data_dir / "fresnel_oracle.npz")
    C, S = fresnel_cs(z["x"])
    assert np.max(np.abs(C - z["C"])) <= 1e-8
    assert np.max(np.abs(S - z["S"])) <= 1e-8


def test_live_quadrature_at_branch_switch():
    x = np.array([SERIES_LIMIT - 1e-9, SERIES_LIMIT, SERIES_LIMIT + 1e-9, 3.7, 12.25, 33.3])
    Cq, Sq = oracles.fresnel_quad(x)
    C, S = fresnel_cs(x)
    assert np.max(np.abs(C - Cq)) < 1e-12
    assert np.max(np.abs(S - Sq)) < 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_odd_symmetry_is_exact(x):
    c1, s1 = fresnel_cs(x)
    c2, s2 = fresnel_cs(-x)
    assert c1 == -c2 and s1 == -s2


def test_array_shapes_and_bad_input():
    x = np.linspace(-3, 3, 12).reshape(3, 4)
    C, S = fresnel_cs(x)
    assert C.shape == (3, 4) and S.shape == (3, 4)
    with pytest.raises(ValueError):
        fresnel_cs([1.0, np.inf])
    with pytest.raises(ValueError):
        fresnel_c(np.nan)


def test_closed_form_self_point(cfg):
    p = PolarPoint(0.3, 9.0)
    assert closed_form_gain(cfg, p, p) == pytest.approx(1.0, abs=1e-15)
    assert closed_form_gain(cfg, PolarPoint(0.3), PolarPoint(0.3)) == 1.0


def test_closed_form_same_ring_null(cfg):
    k = 0.05
    g = closed_form_gain(cfg, PolarPoint.from_kappa(0.1, k), PolarPoint.from_kappa(0.1 + 2 / cfg.n_w, k))
    assert abs(g) < 1e-9
    assert abs(math.sin(math.pi) / (cfg.n_w * math.sin(math.pi / cfg.n_w))) < 1e-9


def test_closed_form_against_summation_example(cfg):
    steer, at = PolarPoint(0.0, 10.0), PolarPoint(0.05, 25.0)
    a, b = gain_params(cfg, steer.theta, steer.kappa, at.theta, at.kappa)
    direct = oracles.quad_sum_gain(cfg.n_w, float(a), float(b))
    assert closed_form_gain(cfg, steer, at) == pytest.approx(direct, abs=0.02)


def test_gain_params_definition(cfg):
    a, b = gain_params(cfg, 0.2, 0.1, 0.25, 0.04)
    assert a == pytest.approx(cfg.d**2 / cfg.wavelength * 0.06)
    assert b == pytest.approx(0.05)


def test_branches_meet_at_degenerate_switch():
    n_w = 256
    b = np.linspace(-2 / n_w, 2 / n_w, 81)
    a_at = (DEGENERATE_EPS / n_w) ** 2 / 2
    below = fresnel_gain(a_at * 0.999, b, n_w)
    above = fresnel_gain(a_at * 1.001, b, n_w)
    exact = oracles.quad_sum_gain_vec(n_w, np.full_like(b, a_at), b)
    # the integral form differs from the discrete sum by O((pi b / 2)^2 / 6)
    assert np.max(np.abs(below - above)) < 1e-5
    assert np.max(np.abs(above - exact)) < 1e-5
    assert np.max(np.abs(below - exact)) < 1e-6
    assert fresnel_gain(a_at * 1.001, 0.0, n_w) == pytest.approx(1.0, abs=1e-9)


def test_dirichlet_kernel_limit():
    assert float(dirichlet(0.0, 64)) == 1.0
    assert float(dirichlet(1e-300, 64)) == 1.0
    assert float(dirichlet(1 / 64, 64)) == pytest.approx(1 / (64 * math.sin(math.pi / 128)))


@settings(max_examples=100, deadline=None)
@given(a=st.floats(-5e-4, 5e-4), b=st.floats(-0.05, 0.05))
def test_gain_symmetries(a, b):
    g = float(fresnel_gain(a, b, 256))
    assert float(fresnel_gain(a, -b, 256)) == pytest.approx(g, abs=1e-12)
    assert float(fresnel_gain(-a, b, 256)) == pytest.approx(g, abs=1e-12)
    assert 0.0 <= g <= 1.0 + 1e-9


@pytest.mark.parametrize("a", [0.0, 1e-6, 1e-5, 3e-5, 3.9e-5, 4.5e-5])
def test_main_lobe_monotone_in_b(a):
    # holds while gamma2 <= ~1.2, which spans every codebook cell half-width;
    # deeper defocus develops Fresnel ripple across the lobe
    b = np.linspace(0, 2 / 256, 200)
    g = fresnel_gain(a, b, 256)
    assert np.all(np.diff(g) <= 1e-12)


def test_vectorized_steering_gain_matches_scalar(cfg):
    rng = np.random.default_rng(5)
    st_, sk, t, k = rng.uniform(-0.9, 0.9, 4), rng.uniform(0, 0.18, 4), rng.uniform(-0.9, 0.9, 4), rng.uniform(0, 0.18, 4)
    vec = steering_gain(cfg, st_, sk, t, k)
    for i in range(4):
        assert vec[i] == pytest.approx(closed_form_gain(cfg, PolarPoint.from_kappa(st_[i], sk[i]), PolarPoint.from_kappa(t[i], k[i])), abs=1e-12)
