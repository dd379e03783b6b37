"""scikit-learn style wrapper around the Poisson transform."""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .clifford import Multivector, euclidean
from .poisson import BoundaryDatum, spherical_function, transform_from_spherical
from .quadrature import section_coeffs
from .spin import half_vector
from .validation import check_ball_points, check_labels_for, check_lambda


def boost_rotation(x: np.ndarray) -> np.ndarray:
    """Spin(n) element ``k`` with ``k e_n k^-1 = x``, stable on the whole sphere."""
    n = len(x)
    sig = euclidean(n)
    if x[-1] > -0.5:
        return section_coeffs(half_vector(x), sig)
    # k(-x) composed with a half turn e_1 e_n that sends e_n to -e_n
    flip = Multivector.blade(sig, 1, n).coeffs
    return (Multivector(sig, section_coeffs(half_vector(-x), sig)) * Multivector(sig, flip)).coeffs


class PoissonTransformer(BaseEstimator, TransformerMixin):
    """Evaluate the Poisson transform of boundary data at points of the unit ball.

    ``fit`` takes a :class:`BoundaryDatum`; ``transform`` maps ball points
    ``z`` (rows of an ``(m, n)`` array) to V_tau values ``F(g_z)``, where
    ``g_z`` is the pure boost carrying the origin to ``z``.
    """

    def __init__(self, n=3, tau=None, sigma=None, lam=-0.6j, order=None):
        self.n = n
        self.tau = tau
        self.sigma = sigma
        self.lam = lam
        self.order = order

    def fit(self, X, y=None):
        tau, sigma = check_labels_for(self.n, self.tau, self.sigma)
        check_lambda(self.lam)
        if not isinstance(X, BoundaryDatum):
            raise TypeError("fit expects a BoundaryDatum")
        if (X.n, X.tau, X.sigma) != (self.n, tau, sigma):
            raise ValueError("datum type does not match (n, tau, sigma)")
        self.datum_ = X
        self.labels_ = (tau, sigma)
        return self

    def transform(self, X):
        check_is_fitted(self, "datum_")
        Z = check_ball_points(X, self.n)
        tau, sigma = self.labels_
        out = np.empty((len(Z), self.datum_.branch.dim_tau), dtype=complex)
        for i, z in enumerate(Z):
            r = np.linalg.norm(z)
            t = 2 * math.atanh(r)
            # k a_t moves the origin to -tanh(t/2) k e_n
            x = -z / r if r > 0 else np.eye(self.n)[-1]
            k = boost_rotation(x)
            Phi = spherical_function(self.n, tau, sigma, self.lam, t, order=self.order)
            F = transform_from_spherical(self.datum_, Phi, k)
            # F(k a_t k^-1) = tau(k) F(k a_t)
            out[i] = self.datum_.branch.tau_batch(k, euclidean(self.n)) @ F
        return out
