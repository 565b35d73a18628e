"""Marchenko-Pastur limiting spectrum of a null sample covariance matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CONVENTION = "c = p/n (dimension over sample size)"


@dataclass(frozen=True)
class MarchenkoPasturLaw:
    c: float
    x_min: float
    x_max: float
    atom: float  # point mass at zero, 1 - 1/c when c > 1
    convention: str = CONVENTION


def mp_law(c: float) -> MarchenkoPasturLaw:
    """Eigenvalue law of ``X X'/n`` for a ``p x n`` standard Gaussian ``X`` with ``p/n -> c``."""
    if not c > 0:
        raise ValueError(f"ratio must be positive, got {c}")
    r = np.sqrt(c)
    return MarchenkoPasturLaw(float(c), float((1 - r) ** 2), float((1 + r) ** 2), float(max(0.0, 1 - 1 / c)))


def mp_density(law: MarchenkoPasturLaw, x):
    """Continuous part ``sqrt((x_max - x)(x - x_min)) / (2 pi c x)``; zero off the support."""
    x = np.asarray(x, dtype=float)
    inside = (x > law.x_min) & (x < law.x_max) & (x > 0)
    xs = np.where(inside, x, 1.0)
    dens = np.sqrt(np.maximum((law.x_max - xs) * (xs - law.x_min), 0.0)) / (2 * np.pi * law.c * xs)
    out = np.where(inside, dens, 0.0)
    return float(out) if out.ndim == 0 else out
