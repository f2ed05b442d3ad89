"""Uniform linear array geometry, near-field steering vectors and beam gain.

Two array-response models are supported:

``"exact"``
    per-element distance ``r_i = sqrt(r^2 + delta_i^2 d^2 - 2 r theta delta_i d)``
    and phase ``-(2 pi / lambda) (r_i - r)``.
``"quadratic"``
    the second-order (Fresnel) expansion of the same phase,
    ``(2 pi / lambda) d theta delta_i - pi (d^2 / lambda) kappa delta_i^2``
    with curvature ``kappa = (1 - theta^2) / r``.

Internally locations are carried as ``(theta, kappa)``; ``kappa = 0`` is the
far field, so no floating-point infinity enters the quadratic model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0

MODELS = ("exact", "quadratic")


@dataclass(frozen=True)
class ArrayConfig:
    """ULA geometry and carrier. ``d`` defaults to half a wavelength."""

    n_w: int = 256
    f_c: float = 40e9
    d: float | None = None

    def __post_init__(self):
        if int(self.n_w) != self.n_w or self.n_w < 1:
            raise ValueError(f"n_w must be a positive integer, got {self.n_w!r}")
        if not self.f_c > 0:
            raise ValueError(f"f_c must be positive, got {self.f_c!r}")
        object.__setattr__(self, "n_w", int(self.n_w))
        if self.d is None:
            object.__setattr__(self, "d", self.wavelength / 2)
        elif not self.d > 0:
            raise ValueError(f"element spacing must be positive, got {self.d!r}")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.f_c

    @property
    def aperture(self) -> float:
        return self.n_w * self.d

    @property
    def r_min(self) -> float:
        """Fresnel distance ``0.5 sqrt(D^3 / lambda)``."""
        return 0.5 * math.sqrt(self.aperture**3 / self.wavelength)

    @property
    def kappa_max(self) -> float:
        """Largest curvature inside the Fresnel region (broadside at ``r_min``)."""
        return 1.0 / self.r_min

    @property
    def spacing_ratio(self) -> float:
        """``2 d / lambda``; 1 for half-wavelength spacing."""
        return 2.0 * self.d / self.wavelength

    @property
    def quad_coef(self) -> float:
        """``d^2 / lambda``: maps curvature to the quadratic phase (units of pi)."""
        return self.d**2 / self.wavelength

    def to_dict(self) -> dict:
        return {"n_w": self.n_w, "f_c": self.f_c, "d": self.d}


@dataclass(frozen=True)
class PolarPoint:
    """Location as directional cosine ``theta`` and distance ``r`` (``inf`` = far field)."""

    theta: float
    r: float = math.inf

    def __post_init__(self):
        if not -1.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must lie in [-1, 1], got {self.theta!r}")
        if not self.r > 0:
            raise ValueError(f"r must be positive, got {self.r!r}")

    @classmethod
    def from_kappa(cls, theta: float, kappa: float) -> "PolarPoint":
        if kappa < 0:
            raise ValueError(f"kappa must be non-negative, got {kappa!r}")
        if kappa == 0:
            return cls(theta, math.inf)
        return cls(theta, (1.0 - theta * theta) / kappa)

    @property
    def kappa(self) -> float:
        if math.isinf(self.r):
            return 0.0
        return (1.0 - self.theta * self.theta) / self.r

    @property
    def is_far_field(self) -> bool:
        return math.isinf(self.r)


@dataclass
class BeamVector:
    """Analog beamforming weights with an explicit element activity mask."""

    weights: np.ndarray
    active_mask: np.ndarray = field(default=None)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=complex)
        if self.weights.ndim != 1:
            raise ValueError("weights must be one-dimensional")
        if self.active_mask is None:
            self.active_mask = self.weights != 0
        else:
            self.active_mask = np.asarray(self.active_mask, dtype=bool)
            if self.active_mask.shape != self.weights.shape:
                raise ValueError("active_mask must match weights in shape")
            if np.any(self.weights[~self.active_mask] != 0):
                raise ValueError("inactive elements must carry zero weight")
        if np.linalg.norm(self.weights) > 1.0 + 1e-12:
            raise ValueError("beam power exceeds 1")

    @property
    def n_active(self) -> int:
        return int(self.active_mask.sum())

    def __len__(self):
        return self.weights.size

    def is_constant_modulus(self, normalization: str = "active", atol: float = 1e-12) -> bool:
        """Check the per-element amplitude constraint.

        ``normalization="active"`` expects ``1/sqrt(M)`` on the ``M`` active
        elements, ``"full"`` expects ``1/sqrt(n_w)``.
        """
        count = self.n_active if normalization == "active" else self.weights.size
        if count == 0:
            return False
        mags = np.abs(self.weights[self.active_mask])
        return bool(np.all(np.abs(mags - 1.0 / math.sqrt(count)) <= atol))


@dataclass
class ChannelRealization:
    """Multipath channel: complex path gains and their locations."""

    gains: Sequence[complex]
    locations: Sequence[PolarPoint]

    def __post_init__(self):
        self.gains = [complex(g) for g in self.gains]
        self.locations = list(self.locations)
        if len(self.gains) < 1:
            raise ValueError("a channel needs at least one path")
        if len(self.gains) != len(self.locations):
            raise ValueError("gains and locations must have the same length")

    @property
    def n_paths(self) -> int:
        return len(self.gains)

    @classmethod
    def from_paths(cls, paths: Iterable[tuple[complex, PolarPoint]]) -> "ChannelRealization":
        paths = list(paths)
        return cls([g for g, _ in paths], [p for _, p in paths])


def element_offsets(cfg: ArrayConfig) -> np.ndarray:
    """Half-index offsets ``(2i - n_w - 1) / 2`` for ``i = 1..n_w``."""
    i = np.arange(1, cfg.n_w + 1, dtype=float)
    return (2.0 * i - cfg.n_w - 1.0) / 2.0


def quadratic_phase(cfg: ArrayConfig, theta, kappa) -> np.ndarray:
    """Quadratic-model element phases, shape ``broadcast(theta, kappa) + (n_w,)``."""
    n = element_offsets(cfg)
    theta = np.asarray(theta, dtype=float)[..., None]
    kappa = np.asarray(kappa, dtype=float)[..., None]
    return np.pi * cfg.spacing_ratio * theta * n - np.pi * cfg.quad_coef * kappa * n * n


def exact_phase(cfg: ArrayConfig, theta, r) -> np.ndarray:
    n = element_offsets(cfg)
    theta = np.asarray(theta, dtype=float)[..., None]
    r = np.asarray(r, dtype=float)[..., None]
    if np.any(~np.isfinite(r)):
        raise ValueError("exact model needs a finite distance; use the quadratic model for r = inf")
    if np.any(r <= 0):
        raise ValueError("distance must be positive")
    x = n * cfg.d
    num = x * x - 2.0 * r * theta * x
    # r_i - r without cancellation
    diff = num / (np.sqrt(r * r + num) + r)
    return -2.0 * np.pi / cfg.wavelength * diff


def steering_matrix(cfg: ArrayConfig, theta, r=None, *, kappa=None, model: str = "quadratic") -> np.ndarray:
    """Vectorized steering vectors; trailing axis is the element axis.

    Give either ``r`` (``inf`` allowed for the quadratic model) or ``kappa``.
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
    theta = np.asarray(theta, dtype=float)
    if model == "exact":
        if r is None:
            raise ValueError("exact model requires distances, not curvatures")
        phase = exact_phase(cfg, theta, r)
    else:
        if kappa is None:
            if r is None:
                raise ValueError("need r or kappa")
            r = np.asarray(r, dtype=float)
            if np.any(r <= 0):
                raise ValueError("distance must be positive")
            with np.errstate(divide="ignore"):
                kappa = np.where(np.isinf(r), 0.0, (1.0 - theta * theta) / r)
        phase = quadratic_phase(cfg, theta, kappa)
    return np.exp(1j * phase) / math.sqrt(cfg.n_w)


def steering_vector(cfg: ArrayConfig, p: PolarPoint, model: str = "quadratic") -> BeamVector:
    if model == "exact" and p.is_far_field:
        raise ValueError("exact model needs a finite distance; use the quadratic model for r = inf")
    if model == "exact":
        a = steering_matrix(cfg, p.theta, p.r, model="exact")
    else:
        a = steering_matrix(cfg, p.theta, kappa=p.kappa, model="quadratic")
    return BeamVector(a, np.ones(cfg.n_w, dtype=bool))


def synthesize_channel(cfg: ArrayConfig, paths) -> np.ndarray:
    """``h = sum_l alpha_l a(theta_l, r_l)`` with exact-model steering vectors.

    ``paths`` is a :class:`ChannelRealization` or an iterable of ``(alpha, PolarPoint)``.
    """
    if not isinstance(paths, ChannelRealization):
        paths = ChannelRealization.from_paths(paths)
    theta = np.array([p.theta for p in paths.locations])
    r = np.array([p.r for p in paths.locations])
    A = steering_matrix(cfg, theta, r, model="exact")
    return np.asarray(paths.gains) @ A


def _weights(w) -> np.ndarray:
    return w.weights if isinstance(w, BeamVector) else np.asarray(w, dtype=complex)


def beam_gain(cfg: ArrayConfig, w, p: PolarPoint, model: str = "quadratic") -> float:
    """Normalized beam gain ``|w^H a(p)|``."""
    a = steering_vector(cfg, p, model).weights
    return float(abs(np.vdot(_weights(w), a)))


def gain_map(cfg: ArrayConfig, w, theta, kappa) -> np.ndarray:
    """Quadratic-model gain of ``w`` over broadcast arrays of ``theta`` and ``kappa``."""
    A = steering_matrix(cfg, theta, kappa=kappa, model="quadratic")
    return np.abs(A @ np.conj(_weights(w)))


def gain_map_exact(cfg: ArrayConfig, w, theta, r) -> np.ndarray:
    A = steering_matrix(cfg, theta, r, model="exact")
    return np.abs(A @ np.conj(_weights(w)))
