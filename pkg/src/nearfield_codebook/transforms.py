"""Beam rotation and relocation.

Both act by an elementwise product with a unit-modulus phase ramp and move
the whole gain pattern rigidly in ``(theta, kappa)``:

* rotation by ``dtheta`` (far-field ramp): ``(theta, kappa) -> (theta + dtheta, kappa)``
* relocation by ``dr`` (quadratic ramp):  ``(theta, kappa) -> (theta, kappa + 1/dr)``

The point maps below go the other way: they return where, in the original
beam's pattern, the gain observed at ``p`` is read from.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .array import ArrayConfig, BeamVector, element_offsets


@dataclass(frozen=True)
class MappedPoint:
    """Image of a point under a transform; ``virtual`` when the curvature went negative."""

    theta: float
    kappa: float

    @property
    def virtual(self) -> bool:
        return self.kappa < 0

    @property
    def r(self) -> float:
        if self.kappa == 0:
            return math.inf
        return (1.0 - self.theta**2) / self.kappa


def rotation_ramp(cfg: ArrayConfig, dtheta: float) -> np.ndarray:
    """``sqrt(n_w) a(dtheta, inf)``."""
    n = element_offsets(cfg)
    return np.exp(1j * np.pi * cfg.spacing_ratio * dtheta * n)


def relocation_ramp(cfg: ArrayConfig, dr: float) -> np.ndarray:
    """``sqrt(n_w) a(0, dr)``; ``dr = inf`` gives all ones."""
    if dr == 0:
        raise ValueError("relocation distance must be non-zero")
    return curvature_ramp(cfg, 0.0 if math.isinf(dr) else 1.0 / dr)


def curvature_ramp(cfg: ArrayConfig, dkappa: float) -> np.ndarray:
    n = element_offsets(cfg)
    return np.exp(-1j * np.pi * cfg.quad_coef * dkappa * n * n)


def _apply(w: BeamVector, ramp: np.ndarray) -> BeamVector:
    if len(w) != ramp.size:
        raise ValueError(f"beam has {len(w)} elements, array has {ramp.size}")
    return BeamVector(np.where(w.active_mask, w.weights * ramp, 0), w.active_mask.copy())


def rotate(cfg: ArrayConfig, w: BeamVector, dtheta: float) -> BeamVector:
    return _apply(w, rotation_ramp(cfg, dtheta))


def relocate(cfg: ArrayConfig, w: BeamVector, dr: float) -> BeamVector:
    return _apply(w, relocation_ramp(cfg, dr))


def shift_curvature(cfg: ArrayConfig, w: BeamVector, dkappa: float) -> BeamVector:
    """Relocation written in curvature: ``dkappa = 1 / dr``."""
    return _apply(w, curvature_ramp(cfg, dkappa))


def map_point_rotation(theta: float, kappa: float, dtheta: float) -> MappedPoint:
    return MappedPoint(theta - dtheta, kappa)


def map_point_relocation(theta: float, kappa: float, dr: float) -> MappedPoint:
    if dr == 0:
        raise ValueError("relocation distance must be non-zero")
    return MappedPoint(theta, kappa - (0.0 if math.isinf(dr) else 1.0 / dr))


def rotated_distance(theta: float, r: float, dtheta: float) -> float:
    """Distance ``r~ = (1 - (theta - dtheta)^2) / (1 - theta^2) * r`` read by the rotated beam."""
    return (1.0 - (theta - dtheta) ** 2) / (1.0 - theta**2) * r


def relocated_distance(theta: float, r: float, dr: float) -> float:
    """Distance ``r~`` with ``1/r~ = 1/r - 1/(dr (1 - theta^2))``."""
    inv = 1.0 / r - 1.0 / (dr * (1.0 - theta**2))
    return math.inf if inv == 0 else 1.0 / inv
