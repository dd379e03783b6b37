"""Quadrature on the sphere S^{n-1} = K/M and the section k(x) over it.

Nodes are stored together with their half-vectors ``h = (x + e_n)/|x + e_n|``,
built from half-angles so that the section stays accurate near ``-e_n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import expit, roots_jacobi, roots_legendre

from .clifford import Multivector, change_signature, euclidean, gp_batch, lorentzian
from .spin import half_vector, section_coeffs

SECTION_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes on S^{n-1} with weights summing to 1."""

    n: int
    points: np.ndarray = field(repr=False)
    half: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("points", "half", "weights"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.points.shape != (len(self.weights), self.n) or self.half.shape != self.points.shape:
            raise ValueError("inconsistent node arrays")

    def __len__(self):
        return len(self.weights)

    def section(self, sig=None) -> np.ndarray:
        """Section coefficients at every node, in Cl(1, n) unless ``sig`` says otherwise."""
        return section_coeffs(self.half, sig or lorentzian(self.n))

    def integrate(self, values) -> np.ndarray:
        """Weighted sum over the leading axis; ``values`` has one entry per node."""
        values = np.asarray(values)
        if values.shape[0] != len(self):
            raise ValueError(f"expected {len(self)} node values, got {values.shape[0]}")
        return np.tensordot(self.weights, values, axes=(0, 0))


def _circle(count: int):
    phi = 2 * np.pi * (np.arange(count) + 0.5) / count - np.pi
    pts = np.stack([np.sin(phi), np.cos(phi)], axis=-1)
    half = np.stack([np.sin(phi / 2), np.cos(phi / 2)], axis=-1)
    return pts, half, np.full(count, 1.0 / count)


def _polar_nodes(d: int, order: int):
    """Gauss-Jacobi nodes in z = cos(theta) for the weight (1 - z^2)^((d-3)/2)."""
    a = (d - 3) / 2
    z, w = roots_jacobi(max(1, math.ceil(order / 2)), a, a)
    return z, w / w.sum()


def _lift(z, wz, inner_pts, inner_w):
    """Combine polar nodes with a rule on the equatorial sphere."""
    nz, ni = len(z), len(inner_w)
    sin_t = np.sqrt(np.clip(1 - z * z, 0, None))
    s_half = np.sqrt((1 - z) / 2)
    c_half = np.sqrt((1 + z) / 2)
    om = np.broadcast_to(inner_pts, (nz, ni, inner_pts.shape[1]))
    pts = np.concatenate([sin_t[:, None, None] * om, np.broadcast_to(z[:, None, None], (nz, ni, 1))], axis=-1)
    half = np.concatenate([s_half[:, None, None] * om, np.broadcast_to(c_half[:, None, None], (nz, ni, 1))], axis=-1)
    w = wz[:, None] * inner_w[None, :]
    d = pts.shape[-1]
    return pts.reshape(-1, d), half.reshape(-1, d), w.reshape(-1)


def _sphere(d: int, order: int, inner_order: int):
    if d == 1:
        return np.array([[1.0], [-1.0]]), None, np.array([0.5, 0.5])
    if d == 2:
        count = max(2, order + (order % 2))
        return _circle(count)
    inner_pts, _, inner_w = _sphere(d - 1, inner_order, inner_order)
    z, wz = _polar_nodes(d, order)
    return _lift(z, wz, inner_pts, inner_w)


@lru_cache(maxsize=64)
def product_rule(n: int, order: int, inner_order: int | None = None) -> QuadratureRule:
    """Product rule on S^{n-1}, exact for polynomials of degree < ``order``.

    The polar angle from ``e_n`` uses Gauss-Jacobi in ``cos(theta)``, the
    innermost circle a uniform offset grid, so no node sits at ``-e_n``.
    ``inner_order`` sets the order on the equatorial spheres.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if order < 2:
        raise ValueError("order must be at least 2")
    pts, half, w = _sphere(n, order, inner_order or order)
    return QuadratureRule(n, pts, half, w)


def equator_rule(n: int, order: int):
    """Points and weights on S^{n-2} (the directions of R^{n-1})."""
    if n == 2:
        return np.array([[1.0], [-1.0]]), np.array([0.5, 0.5])
    pts, _, w = _sphere(n - 1, order, order)
    return pts, w


def log_tan_half(half: np.ndarray) -> np.ndarray:
    """``u = log tan(theta/2)`` of the node, theta measured from e_n."""
    half = np.asarray(half, dtype=float)
    return np.log(np.linalg.norm(half[..., :-1], axis=-1)) - np.log(half[..., -1])


def half_from_log_tan(u, omega) -> np.ndarray:
    u = np.asarray(u, dtype=float)[..., None]
    omega = np.asarray(omega, dtype=float)
    s = np.sqrt(expit(2 * u))
    c = np.sqrt(expit(-2 * u))
    shape = np.broadcast_shapes(u.shape[:-1], omega.shape[:-1])
    return np.concatenate([np.broadcast_to(s * omega, shape + omega.shape[-1:]), np.broadcast_to(c, shape + (1,))], axis=-1)


def graded_rule(n: int, shift: float = 0.0, panel: float = 0.5, nodes: int = 10, inner_order: int = 8) -> QuadratureRule:
    """Composite rule in ``u = log tan(theta/2)`` for integrands with features at ``u = 0`` and ``u = -shift``.

    The sphere measure becomes ``sech(u)^(n-1) du`` on the polar part; the
    u-range is cut where that weight drops below ~1e-17.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    shift = max(float(shift), 0.0)
    tail = 40.0 / (n - 1) + 5.0
    lo, hi = -shift - tail, tail
    npan = max(1, math.ceil((hi - lo) / panel))
    edges = np.linspace(lo, hi, npan + 1)
    x, wx = roots_legendre(nodes)
    mid = (edges[:-1] + edges[1:]) / 2
    rad = (edges[1:] - edges[:-1]) / 2
    u = (mid[:, None] + rad[:, None] * x[None, :]).ravel()
    wu = (rad[:, None] * wx[None, :]).ravel() / np.cosh(u) ** (n - 1)
    total = math.sqrt(math.pi) * math.gamma((n - 1) / 2) / math.gamma(n / 2)
    wu = wu / total
    om, wom = equator_rule(n, inner_order)
    half = half_from_log_tan(u[:, None], om[None, :, :])
    sin_t = 1 / np.cosh(u)
    cos_t = -np.tanh(u)
    pts = np.concatenate(
        [sin_t[:, None, None] * om[None], np.broadcast_to(cos_t[:, None, None], (len(u), len(wom), 1))], axis=-1
    )
    w = (wu[:, None] * wom[None, :]).ravel()
    return QuadratureRule(n, pts.reshape(-1, n), half.reshape(-1, n), w)


def section_k(x) -> Multivector:
    """Element of Spin(n) carrying e_n to the unit vector ``x``; equals 1 at e_n."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("x must be a unit vector in R^n, n >= 2")
    if abs(np.linalg.norm(x) - 1) > 1e-10:
        raise ValueError("x must have unit length")
    try:
        half = half_vector(x, tol=SECTION_TOL)
    except ValueError:
        raise ValueError("section is undefined within 1e-8 of -e_n") from None
    sig = euclidean(x.size)
    return Multivector(sig, section_coeffs(half, sig))


def integrate_covariant(rule: QuadratureRule, func) -> np.ndarray:
    """``sum_i w_i func(x_i, k(x_i))`` with ``k`` the section in Cl(n)."""
    sig = euclidean(rule.n)
    secs = section_coeffs(rule.half, sig)
    vals = [np.asarray(func(x, Multivector(sig, k))) for x, k in zip(rule.points, secs)]
    return rule.integrate(np.array(vals))


def spin_rule(d: int, order: int):
    """Haar quadrature on Spin(d) as coefficient arrays in Cl(d) plus weights.

    Built as ``section(x) m`` with ``x`` on S^{d-1} and ``m`` in Spin(d-1),
    recursively; Spin(1) = {+1, -1} and Spin(2) is a uniform circle in the
    half-angle.
    """
    sig = euclidean(d)
    if d == 1:
        c = np.zeros((2, 2))
        c[:, 0] = [1.0, -1.0]
        return c.astype(complex), np.array([0.5, 0.5])
    if d == 2:
        count = max(2, order)
        psi = 2 * np.pi * (np.arange(count) + 0.5) / count
        c = np.zeros((count, 4), dtype=complex)
        c[:, 0] = np.cos(psi)
        c[:, 3] = np.sin(psi)
        return c, np.full(count, 1.0 / count)
    return fibre_product(product_rule(d, order), *spin_rule(d - 1, order))


def fibre_product(rule: QuadratureRule, m_coeffs: np.ndarray, m_weights: np.ndarray):
    """Combine a rule on S^{n-1} with a rule on Spin(n-1) into a Haar rule on Spin(n)."""
    n = rule.n
    sig = euclidean(n)
    sub = euclidean(n - 1)
    m_full = np.array([change_signature(Multivector(sub, c), sig).coeffs for c in m_coeffs])
    secs = section_coeffs(rule.half, sig)
    k = gp_batch(secs[:, None, :], m_full[None, :, :], sig).reshape(-1, sig.size)
    w = (rule.weights[:, None] * np.asarray(m_weights)[None, :]).ravel()
    return k, w
