"""Spinor modules on exterior algebras and the Spin(n) -> Spin(n-1) branching.

The full module for ``n = 2m`` or ``n = 2m + 1`` is ``Lambda W_m`` with the
monomial basis ``f_S`` (``S`` a bitmask over ``m`` modes, bit ``j`` is
``f_{j+1}``), declared orthonormal.  With ``a_j`` the contraction
``a_j f_j = 1``,

    tau(e_{2j-1}) = a_j^dagger - a_j,     tau(e_{2j}) = -i (a_j^dagger + a_j),

and for odd ``n`` the last generator acts by ``i (-1)^deg``.  The interior
product is the one induced by the bilinear pairing, ``<fbar_j, f_j> = -1``,
which is what makes ``tau(x)^2 = -|x|^2``.

Representation labels: ``"full"`` (odd ``n``) and ``"plus"``/``"minus"``
(even ``n``, the even/odd degree halves).  The M-type labels follow the
branching rule: for odd ``n`` the restriction of the full module splits into
``"plus"``/``"minus"``; for even ``n`` both halves restrict to the single
``"full"`` spin module of Spin(n-1).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import null_space

from .clifford import Multivector, Signature, change_signature, euclidean, popcount

LABELS = ("full", "plus", "minus")

_lock = threading.Lock()


class LabelError(ValueError):
    pass


def tau_labels(n: int) -> tuple:
    return ("full",) if n % 2 else ("plus", "minus")


def sigma_labels(n: int) -> tuple:
    """M-types occurring in tau_n, each with multiplicity one."""
    return ("plus", "minus") if n % 2 else ("full",)


def check_labels(n: int, tau: str, sigma: str) -> None:
    if n < 2:
        raise LabelError("n must be at least 2")
    if tau not in tau_labels(n):
        raise LabelError(f"tau label {tau!r} invalid for n={n}; expected one of {tau_labels(n)}")
    if sigma not in sigma_labels(n):
        raise LabelError(f"sigma label {sigma!r} invalid for n={n}; expected one of {sigma_labels(n)}")


def default_labels(n: int) -> tuple:
    return tau_labels(n)[0], sigma_labels(n)[0]


def kappa_const(n: int) -> float:
    """sqrt(dim tau / dim sigma): 1 for even n, sqrt(2) for odd n."""
    check_labels(n, *default_labels(n))
    return float(np.sqrt(rep_dim(n, tau_labels(n)[0]) / rep_dim(n - 1, sigma_labels(n)[0])))


def rep_dim(n: int, label: str) -> int:
    """Dimension of the spin (``full``) or half-spin module of Spin(n)."""
    return 1 << (n // 2) if label == "full" else 1 << (n // 2 - 1)


@dataclass(frozen=True)
class Spinor:
    """A vector in ``Lambda W_m`` in the monomial basis."""

    rank: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        if c.shape != (1 << self.rank,):
            raise ValueError(f"rank-{self.rank} spinor needs {1 << self.rank} coefficients")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def monomial(cls, rank: int, *modes: int, value: complex = 1.0) -> Spinor:
        """``value * f_{i1} ^ f_{i2} ^ ...`` (1-based mode indices, any order)."""
        s = cls(rank, np.eye(1 << rank)[0])
        for j in reversed(modes):
            s = Spinor(rank, _creation(rank, j - 1) @ s.coeffs)
        return cls(rank, value * s.coeffs)

    def inner(self, other: Spinor) -> complex:
        return complex(np.vdot(self.coeffs, other.coeffs))

    def allclose(self, other: Spinor, atol: float = 1e-12) -> bool:
        return self.rank == other.rank and bool(np.allclose(self.coeffs, other.coeffs, atol=atol, rtol=0))


@lru_cache(maxsize=None)
def _creation(rank: int, j: int) -> np.ndarray:
    dim = 1 << rank
    out = np.zeros((dim, dim))
    for s in range(dim):
        if not s >> j & 1:
            out[s | 1 << j, s] = -1.0 if popcount(s & ((1 << j) - 1)) & 1 else 1.0
    return out


def _degrees(rank: int) -> np.ndarray:
    return np.array([popcount(s) for s in range(1 << rank)])


@lru_cache(maxsize=None)
def generator_matrices(n: int) -> np.ndarray:
    """``tau(e_1) .. tau(e_n)`` on the full module, stacked as (n, D, D)."""
    m = n // 2
    mats = []
    for j in range(m):
        c = _creation(m, j)
        a = c.T
        mats.append(c - a)
        mats.append(-1j * (c + a))
    if n % 2:
        mats.append(np.diag(1j * (-1.0) ** _degrees(m)))
    out = np.array(mats, dtype=complex)
    out.flags.writeable = False
    return out


def tau_vector_action(n: int, x, s: Spinor) -> Spinor:
    """Clifford action of a complex vector ``x in C^n`` on a full spinor."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (n,):
        raise ValueError(f"need a vector in C^{n}")
    if s.rank != n // 2:
        raise ValueError(f"spinor rank {s.rank} does not match n={n}")
    mat = np.tensordot(x, generator_matrices(n), axes=1)
    return Spinor(s.rank, mat @ s.coeffs)


@lru_cache(maxsize=None)
def _blade_matrices(n: int, sig: Signature) -> np.ndarray:
    gens = generator_matrices(n)
    dim = gens.shape[1]
    out = np.zeros((sig.size, dim, dim), dtype=complex)
    valid = np.ones(sig.size, dtype=bool)
    for mask in range(sig.size):
        mat = np.eye(dim, dtype=complex)
        for b in range(sig.dim):
            if mask >> b & 1:
                idx = b + sig.first_index
                if idx == 0 or idx > n:
                    valid[mask] = False
                    break
                mat = mat @ gens[idx - 1]
        if valid[mask]:
            out[mask] = mat
    out.flags.writeable = False
    valid.flags.writeable = False
    return out, valid


def tau_matrix(n: int, a: Multivector) -> np.ndarray:
    """Matrix of ``tau(a)`` on the full module for ``a`` in Cl(n) (or Cl(1,n) without e_0)."""
    mats, valid = _blade_matrices(n, a.sig)
    if np.any(np.abs(a.coeffs[~valid]) > 1e-12):
        raise ValueError("tau is only defined on Cl(n); element involves e_0")
    return np.tensordot(a.coeffs, mats, axes=1)


def tau_matrix_batch(n: int, coeffs: np.ndarray, sig: Signature) -> np.ndarray:
    mats, valid = _blade_matrices(n, sig)
    return np.tensordot(np.where(valid, coeffs, 0), mats, axes=1)


def tau_algebra_action(n: int, a: Multivector, s: Spinor) -> Spinor:
    if s.rank != n // 2:
        raise ValueError(f"spinor rank {s.rank} does not match n={n}")
    return Spinor(s.rank, tau_matrix(n, a) @ s.coeffs)


def gamma_parity(s: Spinor) -> Spinor:
    return Spinor(s.rank, s.coeffs * (-1.0) ** _degrees(s.rank))


def project_halfspin(s: Spinor, sign: str) -> Spinor:
    """``(s + gamma s)/2`` for ``"plus"``, ``(s - gamma s)/2`` for ``"minus"``."""
    if sign not in ("plus", "minus"):
        raise LabelError(sign)
    g = gamma_parity(s).coeffs
    return Spinor(s.rank, 0.5 * (s.coeffs + (g if sign == "plus" else -g)))


def half_basis(rank: int, label: str) -> np.ndarray:
    """Columns: monomials of even (``plus``) / odd (``minus``) degree, or all (``full``)."""
    deg = _degrees(rank)
    eye = np.eye(1 << rank)
    if label == "full":
        return eye
    keep = deg % 2 == (0 if label == "plus" else 1)
    return eye[:, keep]


@dataclass(frozen=True)
class Branching:
    """Embedding ``iota: V_sigma -> V_tau`` and its adjoint for one (n, tau, sigma).

    ``V_tau`` coordinates are with respect to ``basis_tau`` (columns inside the
    full module); ``V_sigma`` coordinates likewise for the Spin(n-1) module.
    """

    n: int
    tau: str
    sigma: str
    basis_tau: np.ndarray
    basis_sigma: np.ndarray
    iota: np.ndarray

    @property
    def dim_tau(self) -> int:
        return self.basis_tau.shape[1]

    @property
    def dim_sigma(self) -> int:
        return self.iota.shape[1]

    @property
    def proj(self) -> np.ndarray:
        return self.iota.conj().T

    @property
    def kappa(self) -> float:
        return float(np.sqrt(self.dim_tau / self.dim_sigma))

    def tau_of(self, k: Multivector) -> np.ndarray:
        """``tau(k)`` restricted to ``V_tau`` for ``k`` in Spin(n)."""
        B = self.basis_tau
        return B.T @ tau_matrix(self.n, k) @ B

    def tau_batch(self, coeffs: np.ndarray, sig: Signature) -> np.ndarray:
        B = self.basis_tau
        return B.T @ tau_matrix_batch(self.n, coeffs, sig) @ B

    def sigma_of(self, m: Multivector) -> np.ndarray:
        """``sigma(m)`` on ``V_sigma`` for ``m`` in Spin(n-1)."""
        return _sigma_matrix(self.n, self.sigma, m)

    def embed(self, v) -> np.ndarray:
        return self.iota @ np.asarray(v, dtype=complex)

    def project(self, s) -> np.ndarray:
        return self.proj @ np.asarray(s, dtype=complex)

    def to_full(self, s) -> Spinor:
        return Spinor(self.n // 2, self.basis_tau @ np.asarray(s, dtype=complex))

    def from_full(self, s: Spinor) -> np.ndarray:
        return self.basis_tau.T @ s.coeffs


def _m_generators(n: int):
    """Compact Cl(n-1) generators e_i e_j (1 <= i < j <= n-1) as Cl(n) elements."""
    sig = euclidean(n)
    return [Multivector.blade(sig, i, j) for i in range(1, n) for j in range(i + 1, n)]


def _sigma_matrix(n: int, sigma: str, m: Multivector) -> np.ndarray:
    if n % 2:
        B = half_basis(n // 2, sigma)
        return B.T @ tau_matrix(n, change_signature(m, euclidean(n))) @ B
    return tau_matrix(n - 1, change_signature(m, euclidean(n - 1)))


@lru_cache(maxsize=None)
def _branching_cached(n: int, tau: str, sigma: str) -> Branching:
    check_labels(n, tau, sigma)
    m = n // 2
    if n % 2:
        basis_tau = half_basis(m, "full")
        basis_sigma = half_basis(m, sigma)
        iota = basis_sigma.astype(complex)
    else:
        basis_tau = half_basis(m, tau)
        basis_sigma = np.eye(1 << (m - 1))
        iota = _solve_intertwiner(n, basis_tau)
    for arr in (basis_tau, basis_sigma, iota):
        arr.flags.writeable = False
    return Branching(n, tau, sigma, basis_tau, basis_sigma, iota)


def branching(n: int, tau: str | None = None, sigma: str | None = None) -> Branching:
    """Cached branching data; cache fill is serialized."""
    dt, ds = default_labels(n)
    with _lock:
        return _branching_cached(n, tau or dt, sigma or ds)


def _solve_intertwiner(n: int, basis_tau: np.ndarray) -> np.ndarray:
    gens = _m_generators(n)
    dt = basis_tau.shape[1]
    ds = 1 << (n // 2 - 1)
    rows = []
    for X in gens:
        A = basis_tau.T @ tau_matrix(n, X) @ basis_tau
        Bm = tau_matrix(n - 1, change_signature(X, euclidean(n - 1)))
        # A @ J - J @ Bm = 0 in column-major vec form
        rows.append(np.kron(np.eye(ds), A) - np.kron(Bm.T, np.eye(dt)))
    if rows:
        ns = null_space(np.vstack(rows), rcond=1e-10)
    else:
        ns = np.eye(dt * ds)
    if ns.shape[1] != 1:
        raise RuntimeError(f"intertwiner space has dimension {ns.shape[1]}, expected 1")
    J = ns[:, 0].reshape((dt, ds), order="F")
    gram = J.conj().T @ J
    J = J / np.sqrt(gram[0, 0].real)
    first = J.flat[np.flatnonzero(np.abs(J) > 1e-10)[0]]
    return J * (abs(first) / first)


def embed_sigma(n: int, sigma: str, v, tau: str | None = None) -> np.ndarray:
    return branching(n, tau, sigma).embed(v)


def project_sigma(n: int, sigma: str, s, tau: str | None = None) -> np.ndarray:
    return branching(n, tau, sigma).project(s)
