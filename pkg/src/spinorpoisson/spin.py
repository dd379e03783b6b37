"""Spin(n) and Spin_0(1, n) as Clifford elements.

Conventions: ``a_t = exp((t/2) e_0 e_n)``, ``N = exp span{e_j (e_0 - e_n)}`` and
``Nbar = exp span{e_j (e_0 + e_n)}``.  With these, ``Ad(a_t)`` acts on the Lie
algebra of ``N`` by ``e^t`` (so rho = (n-1)/2) and the null vector
``e_0 - e_n`` is fixed by ``N`` and scaled by ``e^t`` under ``a_t``.  The
Iwasawa projection is therefore read off as
``H(g) = log <e_0, g (e_0 - e_n) g^-1>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .clifford import (
    Multivector,
    Signature,
    change_signature,
    conjugate_batch,
    euclidean,
    gp_batch,
    grades,
    lorentzian,
)

NORM_TOL = 1e-10


class NotInGroupError(ValueError):
    """Raised when an element fails the spin-group membership checks."""


@dataclass(frozen=True)
class IwasawaFactors:
    kappa: Multivector
    h: float
    nil: Multivector

    def reconstruct(self) -> Multivector:
        return self.kappa * a_t(self.h, self.kappa.sig.n) * self.nil


# -- basic elements ------------------------------------------------------

def _vector_coords(a: np.ndarray, sig: Signature) -> np.ndarray:
    return a[..., 1 << np.arange(sig.dim)]


def inverse(g: Multivector) -> Multivector:
    """Inverse of an element with scalar spinorial norm."""
    nrm = g.conjugate() * g
    s = nrm.scalar_part
    if abs(s) < 1e-300 or np.linalg.norm(nrm.coeffs[1:]) > 1e-8 * max(1.0, abs(s)):
        raise NotInGroupError("element is not invertible through its spinorial norm")
    return g.conjugate() / s


def check_spin(g: Multivector, tol: float = NORM_TOL, compact: bool = False) -> Multivector:
    if np.any(np.abs(g.coeffs[grades(g.sig) % 2 == 1]) > tol):
        raise NotInGroupError("spin elements are even")
    nrm = (g.conjugate() * g).coeffs.copy()
    nrm[0] -= 1.0
    scale = max(1.0, float(np.sum(np.abs(g.coeffs) ** 2)))
    if np.max(np.abs(nrm)) > tol * scale:
        raise NotInGroupError(f"spinorial norm differs from 1 by {np.max(np.abs(nrm)):.3g}")
    if compact and g.sig.plus and np.any(np.abs(g.coeffs[1::2]) > tol):
        raise NotInGroupError("element of Spin(n) may not involve e_0")
    return g


def quadratic_form(sig: Signature, x: np.ndarray) -> float:
    """Q(x) for Cl(1,n) and |x|^2 for Cl(n)."""
    x = np.asarray(x, dtype=float)
    if sig.plus:
        return float(x[0] ** 2 - np.sum(x[1:] ** 2))
    return float(np.sum(x**2))


def spin_from_vectors(vectors: Sequence[Sequence[float]], sig: Signature, tol: float = 1e-10) -> Multivector:
    """Product ``x_1 ... x_2k`` of unit vectors."""
    if len(vectors) % 2:
        raise NotInGroupError("spin elements are products of an even number of vectors")
    out = Multivector.scalar(sig)
    timelike_neg = 0
    for x in vectors:
        q = quadratic_form(sig, x)
        if abs(abs(q) - 1.0) > tol:
            raise NotInGroupError(f"vector {x} is not a unit vector (Q = {q})")
        if sig.plus and q < 0:
            timelike_neg += 1
        out = out * Multivector.vector(sig, x)
    if sig.plus and timelike_neg % 2:
        raise NotInGroupError("odd number of vectors with Q(x) = -1 lies outside Spin_0(1,n)")
    return out


def vector_rep(g: Multivector) -> np.ndarray:
    """Matrix of ``x -> g x g^-1`` on the generator span (n x n or (n+1) x (n+1))."""
    sig = g.sig
    ginv = inverse(g)
    eye = np.eye(sig.dim)
    cols = []
    for j in range(sig.dim):
        y = g * Multivector.vector(sig, eye[j]) * ginv
        cols.append(_vector_coords(y.coeffs, sig))
    mat = np.array(cols).T
    if np.max(np.abs(mat.imag)) > 1e-9 * max(1.0, np.max(np.abs(mat))):
        raise NotInGroupError("vector representation is not real")
    return mat.real


def vector_rep_batch(g: np.ndarray, sig: Signature) -> np.ndarray:
    """Batched :func:`vector_rep` for unit-norm elements, shape (..., dim, dim)."""
    gc = conjugate_batch(g, sig)
    cols = []
    for j in range(sig.dim):
        e = np.zeros(sig.size)
        e[1 << j] = 1.0
        cols.append(_vector_coords(gp_batch(gp_batch(g, e, sig), gc, sig), sig).real)
    return np.stack(cols, axis=-1)


def exp_bivector(b: Multivector, tol: float = 1e-16, max_terms: int = 200) -> Multivector:
    """Power series of a bivector with scaling and squaring."""
    if np.any(np.abs(b.coeffs[grades(b.sig) != 2]) > 0):
        raise ValueError("exp_bivector expects a pure bivector")
    nrm = b.norm()
    squarings = max(0, int(np.ceil(np.log2(nrm))) + 1) if nrm > 0.5 else 0
    x = b / (2**squarings)
    term = Multivector.scalar(b.sig)
    total = term
    for k in range(1, max_terms):
        term = term * x / k
        total = total + term
        if term.norm() < tol * total.norm():
            break
    else:
        raise RuntimeError("exp series did not converge")
    for _ in range(squarings):
        total = total * total
    return total


def a_t(t: float, n: int) -> Multivector:
    """``exp((t/2) e_0 e_n)`` in Cl(1, n)."""
    sig = lorentzian(n)
    c = np.zeros(sig.size, dtype=complex)
    c[0] = np.cosh(t / 2)
    c[(1 << 0) | (1 << n)] = np.sinh(t / 2)
    return Multivector(sig, c)


def a_t_coeffs(t, n: int) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    sig = lorentzian(n)
    c = np.zeros(t.shape + (sig.size,), dtype=complex)
    c[..., 0] = np.cosh(t / 2)
    c[..., (1 << 0) | (1 << n)] = np.sinh(t / 2)
    return c


def _unipotent(v: Sequence[float], n: int, sign: int) -> Multivector:
    v = np.asarray(v, dtype=float)
    if v.shape != (n - 1,):
        raise ValueError(f"need {n - 1} coordinates")
    sig = lorentzian(n)
    c = np.zeros(sig.size, dtype=complex)
    c[0] = 1.0
    # e_j e_0 = -e_0 e_j, e_j e_n is canonical
    for j in range(1, n):
        c[(1 << 0) | (1 << j)] += -0.5 * v[j - 1]
        c[(1 << j) | (1 << n)] += 0.5 * sign * v[j - 1]
    return Multivector(sig, c)


def n_plus(v: Sequence[float], n: int) -> Multivector:
    """``1 + 1/2 sum v_j e_j (e_0 - e_n)``, an element of N."""
    return _unipotent(v, n, -1)


def nbar(v: Sequence[float], n: int) -> Multivector:
    """``1 + 1/2 sum v_j e_j (e_0 + e_n)``, an element of Nbar."""
    return _unipotent(v, n, +1)


def nbar_coeffs(v: np.ndarray, n: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    sig = lorentzian(n)
    c = np.zeros(v.shape[:-1] + (sig.size,), dtype=complex)
    c[..., 0] = 1.0
    for j in range(1, n):
        c[..., (1 << 0) | (1 << j)] = -0.5 * v[..., j - 1]
        c[..., (1 << j) | (1 << n)] = 0.5 * v[..., j - 1]
    return c


# -- covering inverse ------------------------------------------------------

def _sign_convention(coeffs: np.ndarray) -> int:
    nz = np.flatnonzero(np.abs(coeffs) > 1e-12)
    if nz.size == 0:
        return 1
    c = coeffs[nz[0]]
    return 1 if (c.real > 0 or (c.real == 0 and c.imag > 0)) else -1


def so_lift(R: np.ndarray, reference: Multivector | None = None, sig: Signature | None = None) -> Multivector:
    """A spin element covering the rotation ``R`` via a Householder factorization."""
    R = np.asarray(R, dtype=float)
    n = R.shape[0]
    if R.shape != (n, n) or not np.allclose(R.T @ R, np.eye(n), atol=1e-9):
        raise ValueError("R must be orthogonal")
    if np.linalg.det(R) < 0:
        raise NotInGroupError("det(R) = -1 has no spin lift")
    sig = sig or (reference.sig if reference is not None else euclidean(n))
    if sig.n != n:
        raise ValueError(f"{sig} does not act on R^{n}")
    A = R.copy()
    units = []
    eye = np.eye(n)
    for j in range(n):
        # reflect column j onto -sign(a_jj) e_j, so |v| >= 1 and nothing cancels
        s = -1.0 if A[j, j] >= 0 else 1.0
        v = A[:, j] - s * eye[j]
        u = v / np.linalg.norm(v)
        A = A - 2.0 * np.outer(u, u @ A)
        units.append(u)
    # A is now diagonal with entries +-1; each -1 is one more reflection
    units.extend(eye[j] for j in range(n) if A[j, j] < 0)
    if len(units) % 2:
        raise NotInGroupError("odd reflection count; R is not a rotation")
    out = Multivector.scalar(sig)
    for u in units:
        coords = np.concatenate([[0.0], u]) if sig.plus else u
        out = out * Multivector.vector(sig, coords)
    if reference is not None:
        if (out - reference).norm() > (out + reference).norm():
            out = -out
    elif _sign_convention(out.coeffs) < 0:
        out = -out
    return out


# -- sections and Iwasawa --------------------------------------------------

def section_coeffs(half: np.ndarray, sig: Signature) -> np.ndarray:
    """Coefficients of ``k = -h e_n`` for unit half-vectors ``h = (x + e_n)/|x + e_n|``.

    ``vector_rep(k) e_n = x``; ``h = e_n`` gives ``k = 1``.
    """
    half = np.asarray(half, dtype=float)
    n = sig.n
    off = sig.first_index
    bn = 1 << (n - off)
    c = np.zeros(half.shape[:-1] + (sig.size,), dtype=complex)
    c[..., 0] = half[..., n - 1]
    for j in range(1, n):
        c[..., (1 << (j - off)) | bn] = -half[..., j - 1]
    return c


def half_vector(x: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    h = x.copy()
    h[..., -1] += 1.0
    nrm = np.linalg.norm(h, axis=-1, keepdims=True)
    if np.any(nrm < tol):
        raise ValueError("section is singular at -e_n")
    return h / nrm


_M_MASK_CACHE: dict = {}


def _m_mask(n: int) -> np.ndarray:
    if n not in _M_MASK_CACHE:
        sig = lorentzian(n)
        masks = np.arange(sig.size)
        _M_MASK_CACHE[n] = ((masks & 1) == 0) & ((masks >> n & 1) == 0)
    return _M_MASK_CACHE[n]


def _null_image(g: np.ndarray, n: int) -> np.ndarray:
    sig = lorentzian(n)
    nu = np.zeros(sig.size)
    nu[1] = 1.0
    nu[1 << n] = -1.0
    w = gp_batch(gp_batch(g, nu, sig), conjugate_batch(g, sig), sig)
    return _vector_coords(w, sig).real


def _iwasawa_chart(g: np.ndarray, n: int):
    sig = lorentzian(n)
    w = _null_image(g, n)
    w0 = w[..., 0]
    if np.any(w0 <= 0):
        raise NotInGroupError("element does not preserve the forward light cone")
    h = np.log(w0)
    y = -w[..., 1:] / w0[..., None]
    yh = y.copy()
    yh[..., -1] += 1.0
    gap = np.linalg.norm(yh, axis=-1)
    k = section_coeffs(yh / np.maximum(gap, 1e-300)[..., None], sig)
    p = gp_batch(conjugate_batch(k, sig), g, sig)
    m = np.where(_m_mask(n), p, 0) / np.cosh(h / 2)[..., None]
    mn = gp_batch(conjugate_batch(m, sig), m, sig)[..., 0].real
    # mn vanishes only off the chart; those rows are redone by the caller
    with np.errstate(invalid="ignore", divide="ignore"):
        m = m / np.sqrt(mn)[..., None]
    kappa = gp_batch(k, m, sig)
    nil = gp_batch(a_t_coeffs(-h, n), gp_batch(conjugate_batch(m, sig), p, sig), sig)
    return h, kappa, nil, gap


def _chart_rotation(n: int) -> np.ndarray:
    """Spin element rotating e_n to e_1 (a quarter turn in the (1, n) plane)."""
    sig = lorentzian(n)
    r = np.zeros(sig.size, dtype=complex)
    r[0] = np.sqrt(0.5)
    r[(1 << 1) | (1 << n)] = np.sqrt(0.5)
    return r


def iwasawa_batch(g: np.ndarray, n: int, check: bool = True):
    """Vectorized ``g = kappa a_h nil``; returns ``(h, kappa, nil)`` coefficient arrays."""
    sig = lorentzian(n)
    g = np.asarray(g, dtype=complex)
    if check:
        nrm = gp_batch(conjugate_batch(g, sig), g, sig)
        nrm[..., 0] -= 1.0
        scale = np.maximum(1.0, np.sum(np.abs(g) ** 2, axis=-1))
        if np.any(np.max(np.abs(nrm), axis=-1) > 1e-8 * scale):
            raise NotInGroupError("input is not in Spin_0(1,n) (spinorial norm != 1)")
        if np.any(np.abs(g[..., grades(sig) % 2 == 1]) > 1e-10 * np.sqrt(scale)[..., None]):
            raise NotInGroupError("input is not even")
    h, kappa, nil, gap = _iwasawa_chart(g, n)
    bad = gap < 0.5
    if np.any(bad):
        r = _chart_rotation(n)
        gb = gp_batch(r, g[bad] if g.ndim > 1 else g, sig)
        h2, k2, n2, _ = _iwasawa_chart(gb, n)
        k2 = gp_batch(conjugate_batch(r, sig), k2, sig)
        if g.ndim > 1:
            h[bad], kappa[bad], nil[bad] = h2, k2, n2
        else:
            h, kappa, nil = h2, k2, n2
    return h, kappa, nil


def iwasawa(g: Multivector) -> IwasawaFactors:
    """Iwasawa factors ``g = kappa(g) exp(H(g) X) n(g)`` with ``X = (1/2) e_0 e_n``."""
    if g.sig.plus != 1:
        raise ValueError("Iwasawa decomposition lives in Cl(1, n)")
    check_spin(g, tol=1e-8)
    n = g.sig.n
    h, kappa, nil = iwasawa_batch(g.coeffs, n, check=False)
    return IwasawaFactors(Multivector(g.sig, kappa), float(h), Multivector(g.sig, nil))


def random_compact(n: int, rng=None, sig: Signature | None = None) -> Multivector:
    """Haar-random element of Spin(n) (in Cl(n) unless ``sig`` is given)."""
    from scipy.stats import special_ortho_group

    rng = np.random.default_rng(rng)
    R = special_ortho_group.rvs(n, random_state=rng) if n > 1 else np.eye(1)
    k = so_lift(R, sig=euclidean(n))
    if rng.random() < 0.5:
        k = -k
    return k if sig is None else change_signature(k, sig)


def random_lorentz(n: int, rng=None, t_max: float = 3.0) -> Multivector:
    """Random element ``k_1 a_t k_2`` of Spin_0(1, n) with ``0 <= t <= t_max``."""
    rng = np.random.default_rng(rng)
    sig = lorentzian(n)
    k1 = random_compact(n, rng, sig)
    k2 = random_compact(n, rng, sig)
    return k1 * a_t(rng.uniform(0, t_max), n) * k2
