import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nearfield_codebook import (
    ArrayConfig,
    BeamVector,
    ChannelRealization,
    PolarPoint,
    beam_gain,
    steering_matrix,
    steering_vector,
    synthesize_channel,
)
from nearfield_codebook.array import element_offsets, gain_map

import oracles


def test_element_offsets_small_sizes():
    assert element_offsets(ArrayConfig(n_w=3)).tolist() == [-1.0, 0.0, 1.0]
    assert element_offsets(ArrayConfig(n_w=2)).tolist() == [-0.5, 0.5]
    n = element_offsets(ArrayConfig())
    assert n[0] == -127.5 and n[-1] == 127.5
    assert np.array_equal(n, -n[::-1])


def test_reference_array_quantities(cfg):
    ref = oracles.reference_array()
    assert cfg.d == pytest.approx(ref["d"], rel=1e-15)
    assert cfg.aperture == cfg.n_w * cfg.d
    assert cfg.r_min == pytest.approx(ref["r_min"], rel=1e-14)
    assert round(cfg.r_min, 2) == 5.43
    assert cfg.spacing_ratio == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("kwargs", [dict(n_w=0), dict(n_w=2.5), dict(f_c=0.0), dict(d=-1.0)])
def test_array_config_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        ArrayConfig(**kwargs)


def test_polar_point_validation_and_curvature():
    p = PolarPoint(0.6, 8.0)
    assert p.kappa == pytest.approx(0.64 / 8.0)
    assert PolarPoint(0.3).kappa == 0.0 and PolarPoint(0.3).is_far_field
    q = PolarPoint.from_kappa(0.6, p.kappa)
    assert q.r == pytest.approx(8.0, rel=1e-14)
    for bad in [(1.2, 3.0), (0.0, 0.0), (0.0, -2.0), (math.nan, 1.0)]:
        with pytest.raises(ValueError):
            PolarPoint(*bad)


def test_beam_vector_modulus_rules():
    mask = np.array([True, True, False, False])
    w = np.where(mask, 1 / math.sqrt(2), 0).astype(complex)
    bv = BeamVector(w, mask)
    assert bv.n_active == 2
    assert bv.is_constant_modulus("active")
    assert not bv.is_constant_modulus("full")
    with pytest.raises(ValueError):
        BeamVector(np.array([1.0, 1.0], dtype=complex), np.array([True, True]))  # norm > 1
    with pytest.raises(ValueError):
        BeamVector(np.array([0.5, 0.5], dtype=complex), np.array([True, False]))  # inactive must be zero


def test_broadside_far_field_is_uniform(cfg):
    a = steering_vector(cfg, PolarPoint(0.0)).weights
    assert np.allclose(a, 1 / math.sqrt(cfg.n_w), atol=0, rtol=1e-15)


def test_steering_phases_match_direct_formulas(cfg):
    ref = oracles.reference_array()
    for model, fn in [("quadratic", None), ("exact", oracles.steering_exact)]:
        ours = steering_vector(cfg, PolarPoint(0.5, 20.0), model).weights
        if model == "quadratic":
            theirs = oracles.steering_quadratic(256, ref["d"], ref["lam"], 0.5, 0.75 / 20.0)
        else:
            theirs = fn(256, ref["d"], ref["lam"], 0.5, 20.0)
        assert np.max(np.abs(ours - theirs)) < 1e-9
    # the two models differ by the neglected higher-order wavefront terms
    q = steering_vector(cfg, PolarPoint(0.5, 20.0), "quadratic").weights
    e = steering_vector(cfg, PolarPoint(0.5, 20.0), "exact").weights
    dphi = np.abs(np.angle(q * np.conj(e)))
    n = element_offsets(cfg) * cfg.d
    # third-order term theta (1 - theta^2) x^3 / (2 r^2) bounds the phase gap
    bound = 2 * np.pi / cfg.wavelength * (0.5 * 0.75 * np.abs(n) ** 3 / (2 * 20.0**2)) * 1.05 + 1e-9
    assert np.all(dphi <= bound + 2 * np.pi / cfg.wavelength * n**4 / (8 * 20.0**3))


def test_exact_model_rejects_far_field_and_bad_distance(cfg):
    with pytest.raises(ValueError):
        steering_vector(cfg, PolarPoint(0.1), "exact")
    with pytest.raises(ValueError):
        steering_matrix(cfg, 0.1, -3.0, model="exact")
    with pytest.raises(ValueError):
        steering_matrix(cfg, 0.1, 0.0)
    with pytest.raises(ValueError):
        steering_matrix(cfg, 0.1, 5.0, model="spherical")


def test_synthesize_channel_linearity(cfg):
    p = PolarPoint(-0.3, 12.0)
    a = steering_vector(cfg, p, "exact").weights
    assert np.array_equal(synthesize_channel(cfg, [(1.0, p)]), a)
    assert np.allclose(synthesize_channel(cfg, [(1.0, p), (1.0, p)]), 2 * a, rtol=0, atol=1e-15)


def test_synthesize_channel_matches_bruteforce_sum(cfg):
    ref = oracles.reference_array()
    rng = np.random.default_rng(3)
    paths = [(complex(rng.normal(), rng.normal()), PolarPoint(rng.uniform(-1, 1), rng.uniform(6, 60))) for _ in range(3)]
    h = synthesize_channel(cfg, ChannelRealization.from_paths(paths))
    brute = np.zeros(256, dtype=complex)
    for alpha, p in paths:
        brute += alpha * oracles.steering_exact(256, ref["d"], ref["lam"], p.theta, p.r)
    assert np.max(np.abs(h - brute)) < 1e-9
    with pytest.raises(ValueError):
        ChannelRealization.from_paths([])


def test_beam_gain_examples(cfg):
    p = PolarPoint(0.2, 15.0)
    assert beam_gain(cfg, steering_vector(cfg, p), p) == pytest.approx(1.0, abs=1e-12)
    w = steering_vector(cfg, PolarPoint(0.1))
    assert beam_gain(cfg, w, PolarPoint(0.1 + 2 / cfg.n_w)) < 1e-10
    w = steering_vector(cfg, PolarPoint(0.0, cfg.r_min))
    expected = oracles.quad_sum_gain(256, cfg.quad_coef * (cfg.kappa_max - 0.0), 0.0)
    assert beam_gain(cfg, w, PolarPoint(0.0)) == pytest.approx(expected, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(tp=st.floats(-1, 1), kp=st.floats(0, 0.2), t=st.floats(-1, 1), k=st.floats(0, 0.2))
def test_gain_bounds_and_self_gain(tp, kp, t, k):
    cfg = ArrayConfig()
    w = steering_matrix(cfg, tp, kappa=kp)
    g = float(gain_map(cfg, w, t, k))
    assert 0.0 <= g <= 1.0 + 1e-12
    assert float(gain_map(cfg, w, tp, kp)) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(tp=st.floats(-0.95, 0.95), rp=st.floats(6, 60), t=st.floats(-0.95, 0.95), r=st.floats(6, 60))
def test_mirror_symmetry(tp, rp, t, r):
    cfg = ArrayConfig()
    for model in ("quadratic", "exact"):
        g1 = beam_gain(cfg, steering_vector(cfg, PolarPoint(tp, rp), model), PolarPoint(t, r), model)
        g2 = beam_gain(cfg, steering_vector(cfg, PolarPoint(-tp, rp), model), PolarPoint(-t, r), model)
        assert g1 == pytest.approx(g2, abs=1e-10)


def test_model_agreement_in_fresnel_region(cfg):
    """Exact vs quadratic gain of quadratic codewords, uniformly drawn pairs with r >= r_min, |theta| <= 0.95."""
    rng = np.random.default_rng(11)
    n = 4000
    tp, t = rng.uniform(-0.95, 0.95, (2, n))
    rp, r = cfg.r_min * rng.uniform(1, 10, (2, n))
    W = steering_matrix(cfg, tp, rp)
    Ae = steering_matrix(cfg, t, r, model="exact")
    Aq = steering_matrix(cfg, t, r)
    ge = np.abs(np.sum(np.conj(W) * Ae, axis=1))
    gq = np.abs(np.sum(np.conj(W) * Aq, axis=1))
    eps_model = float(np.max(np.abs(ge - gq)))
    # self gain: exact-model response to its own quadratic codeword
    T = np.linspace(-0.95, 0.95, 381)
    Wq = steering_matrix(cfg, T, cfg.r_min)
    We = steering_matrix(cfg, T, np.full_like(T, cfg.r_min), model="exact")
    self_loss = 1 - np.abs(np.sum(np.conj(Wq) * We, axis=1))
    print(f"eps_model={eps_model:.4f} worst self-gain loss at r_min={self_loss.max():.4f}")
    assert eps_model <= 0.05
    assert self_loss.max() <= 0.05
