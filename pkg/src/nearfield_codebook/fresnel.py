"""Fresnel integrals and the closed-form gain of a near-field steering beam.

``C(x) = int_0^x cos(pi t^2 / 2) dt`` and ``S(x) = int_0^x sin(pi t^2 / 2) dt``
are evaluated on ``|x|`` and mirrored, so odd symmetry holds exactly. Small
arguments use the power series of ``C + iS``; larger ones use a continued
fraction for the complementary error function (modified Lentz iteration).
"""
from __future__ import annotations

import numpy as np

from .array import ArrayConfig, PolarPoint

SERIES_LIMIT = 1.5
# below this value of sqrt(2|a|) n_w the quadratic phase is < 4e-7 rad across the
# aperture; above it C(g1+g2) - C(g1-g2) stops cancelling catastrophically
DEGENERATE_EPS = 1e-3

_EPS = 1e-16
_CF_EPS = 1e-15
_TINY = 1e-300
_MAX_TERMS = 60
_MAX_CF = 500


def _series(x: np.ndarray) -> np.ndarray:
    # C + iS = sum_n (i pi / 2)^n x^(2n+1) / (n! (2n+1))
    z = 0.5j * np.pi * x * x
    term = x.astype(complex)
    total = term.copy()
    for n in range(1, _MAX_TERMS):
        term = term * z / n
        total += term / (2 * n + 1)
        if np.all(np.abs(term) < _EPS * np.abs(total)):
            break
    return total


def _continued_fraction(x: np.ndarray) -> np.ndarray:
    b = 1.0 - 1j * np.pi * x * x
    cc = np.full(x.shape, 1.0 / _TINY, dtype=complex)
    d = 1.0 / b
    h = d.copy()
    n = -1
    done = np.zeros(x.shape, dtype=bool)
    for _ in range(_MAX_CF):
        n += 2
        a = -n * (n + 1.0)
        b = b + 4.0
        d = 1.0 / (a * d + b)
        cc = b + a / cc
        step = cc * d
        h = np.where(done, h, h * step)
        done |= np.abs(step - 1.0) < _CF_EPS
        if done.all():
            break
    else:
        raise RuntimeError("Fresnel continued fraction failed to converge")
    h = h * (x - 1j * x)
    phase = 0.5 * np.pi * x * x
    return (0.5 + 0.5j) * (1.0 - (np.cos(phase) + 1j * np.sin(phase)) * h)


def fresnel_cs(x) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(C(x), S(x))`` for real ``x`` (scalar or array)."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("Fresnel integrals need finite arguments")
    ax = np.abs(x).ravel()
    out = np.empty(ax.shape, dtype=complex)
    small = ax < SERIES_LIMIT
    if small.any():
        out[small] = _series(ax[small])
    if (~small).any():
        out[~small] = _continued_fraction(ax[~small])
    out = out.reshape(x.shape) * np.sign(x)
    # sign(0) = 0 keeps C(0) = S(0) = 0 exact
    return out.real, out.imag


def fresnel_c(x):
    c, _ = fresnel_cs(x)
    return c if c.ndim else float(c)


def fresnel_s(x):
    _, s = fresnel_cs(x)
    return s if s.ndim else float(s)


def fresnel_gain(a, b, n_w: int) -> np.ndarray:
    """``|(1/n_w) int_{-n_w/2}^{n_w/2} exp(j pi (a n^2 + b n)) dn|``.

    ``a`` and ``b`` are the quadratic and linear phase coefficients in units
    of pi. Near ``a = 0`` the Dirichlet kernel of the discrete sum is used.
    """
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    root = np.sqrt(2.0 * np.abs(a))
    out = np.empty(a.shape, dtype=float)

    degenerate = root * n_w < DEGENERATE_EPS
    if degenerate.any():
        out[degenerate] = dirichlet(b[degenerate], n_w)

    reg = ~degenerate
    if reg.any():
        r = root[reg]
        g1 = b[reg] / r
        g2 = r * n_w / 2.0
        c1, s1 = fresnel_cs(g1 + g2)
        c2, s2 = fresnel_cs(g1 - g2)
        out[reg] = np.hypot(c1 - c2, s1 - s2) / (2.0 * g2)
    return out


def dirichlet(b, n_w: int) -> np.ndarray:
    """``|sin(n_w pi b / 2) / (n_w sin(pi b / 2))|`` with the limit 1 at ``b = 0``."""
    b = np.asarray(b, dtype=float)
    den = n_w * np.sin(0.5 * np.pi * b)
    num = np.sin(0.5 * n_w * np.pi * b)
    with np.errstate(invalid="ignore", divide="ignore"):
        val = np.abs(num / den)
    return np.where(np.abs(den) < 1e-300, 1.0, val)


def gain_params(cfg: ArrayConfig, steer_theta, steer_kappa, theta, kappa):
    """Quadratic and linear phase coefficients ``(a, b)`` between a steering point and an evaluation point."""
    a = cfg.quad_coef * (np.asarray(steer_kappa, float) - np.asarray(kappa, float))
    b = cfg.spacing_ratio * (np.asarray(theta, float) - np.asarray(steer_theta, float))
    return a, b


def steering_gain(cfg: ArrayConfig, steer_theta, steer_kappa, theta, kappa) -> np.ndarray:
    """Vectorized closed-form gain of the steering beam at ``(steer_theta, steer_kappa)``."""
    a, b = gain_params(cfg, steer_theta, steer_kappa, theta, kappa)
    return fresnel_gain(a, b, cfg.n_w)


def closed_form_gain(cfg: ArrayConfig, steer: PolarPoint, at: PolarPoint) -> float:
    """Closed-form gain at ``at`` of the steering beam focused on ``steer``."""
    return float(steering_gain(cfg, steer.theta, steer.kappa, at.theta, at.kappa))


__all__ = [
    "fresnel_c",
    "fresnel_s",
    "fresnel_cs",
    "fresnel_gain",
    "dirichlet",
    "gain_params",
    "steering_gain",
    "closed_form_gain",
]
