"""Input checks shared by the estimator and the command line."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .spinor import LabelError, check_labels, default_labels

__all__ = ["LabelError", "check_ball_points", "check_lambda", "check_labels_for", "check_p", "check_t_grid"]


def check_lambda(lam, convergent: bool = False) -> complex:
    lam = complex(lam)
    if not np.isfinite(lam.real) or not np.isfinite(lam.imag):
        raise ValueError(f"lambda must be finite, got {lam}")
    if convergent and (1j * lam).real <= 0:
        raise ValueError(f"need Re(i lambda) > 0, got lambda = {lam}")
    return lam


def check_p(p) -> float:
    p = float(p)
    if not 1 < p < np.inf:
        raise ValueError(f"need 1 < p < inf, got {p}")
    return p


def check_labels_for(n: int, tau: str | None, sigma: str | None) -> tuple:
    if n < 2:
        raise ValueError("need n >= 2")
    dt, ds = default_labels(n)
    tau, sigma = tau or dt, sigma or ds
    check_labels(n, tau, sigma)
    return tau, sigma


def check_ball_points(X, n: int) -> np.ndarray:
    """Points of the open unit ball in R^n, one per row."""
    X = check_array(X, dtype=float, ensure_2d=True)
    if X.shape[1] != n:
        raise ValueError(f"expected points in R^{n}, got {X.shape[1]} columns")
    if np.any(np.linalg.norm(X, axis=1) >= 1):
        raise ValueError("points must lie in the open unit ball")
    return X


def check_t_grid(t_min: float, t_max: float, count: int, log: bool = False) -> np.ndarray:
    if count < 1:
        raise ValueError("t grid needs at least one point")
    if t_min < 0 or t_max < t_min:
        raise ValueError(f"bad t range [{t_min}, {t_max}]")
    if count == 1:
        return np.array([float(t_max)])
    if log:
        if t_min <= 0:
            raise ValueError("log spacing needs t_min > 0")
        return np.geomspace(t_min, t_max, count)
    return np.linspace(t_min, t_max, count)
