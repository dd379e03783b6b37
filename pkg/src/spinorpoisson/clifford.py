"""Dense complex Clifford algebras Cl(n) and Cl(1, n).

Blades are encoded as bit patterns; bit ``b`` stands for the generator
``e_{first_index + b}``.  For ``Cl(1, n)`` the generators are ``e_0..e_n``
with ``e_0**2 = +1``; for ``Cl(n)`` they are ``e_1..e_n``, all squaring to -1.

Besides the immutable :class:`Multivector` value type the module exposes
batched kernels (``gp_batch`` and friends) that act on arrays of shape
``(..., 2**dim)``; the quadrature code uses those to push thousands of
group elements through one product.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

MAX_GENERATORS = 16


def popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True)
class Signature:
    """Generator counts: ``plus`` square to +1 and come first."""

    plus: int
    minus: int

    def __post_init__(self):
        if self.plus not in (0, 1):
            raise ValueError("only Cl(n) and Cl(1, n) are supported (plus in {0, 1})")
        if self.minus < 0 or self.plus + self.minus > MAX_GENERATORS:
            raise ValueError(f"unsupported signature ({self.plus}, {self.minus})")

    @property
    def dim(self) -> int:
        return self.plus + self.minus

    @property
    def size(self) -> int:
        return 1 << self.dim

    @property
    def first_index(self) -> int:
        """Index i of the generator e_i stored at bit 0."""
        return 0 if self.plus else 1

    @property
    def n(self) -> int:
        """Number of negative generators, i.e. the ``n`` of Cl(n) / Cl(1, n)."""
        return self.minus

    def bit(self, index: int) -> int:
        b = index - self.first_index
        if not 0 <= b < self.dim:
            raise ValueError(f"generator e_{index} not in {self}")
        return b

    def square(self, bit: int) -> int:
        return 1 if bit < self.plus else -1

    def __str__(self):
        return f"Cl({self.minus})" if self.plus == 0 else f"Cl(1,{self.minus})"


def euclidean(n: int) -> Signature:
    return Signature(0, n)


def lorentzian(n: int) -> Signature:
    return Signature(1, n)


def blade_sign(i: int, j: int, sig: Signature) -> int:
    """Sign of ``e_I e_J`` relative to the canonical blade ``e_{I xor J}``."""
    swaps = 0
    a = i >> 1
    while a:
        swaps += popcount(a & j)
        a >>= 1
    sign = -1 if swaps & 1 else 1
    common = i & j
    b = 0
    while common:
        if common & 1:
            sign *= sig.square(b)
        common >>= 1
        b += 1
    return sign


@lru_cache(maxsize=None)
def _tables(sig: Signature):
    size = sig.size
    ar = np.arange(size)
    idx = ar[:, None] ^ ar[None, :]
    sign = np.array(
        [[blade_sign(i, i ^ r, sig) for r in range(size)] for i in range(size)],
        dtype=float,
    )
    grades = np.array([popcount(i) for i in range(size)])
    for arr in (idx, sign, grades):
        arr.flags.writeable = False
    return idx, sign, grades


def grades(sig: Signature) -> np.ndarray:
    return _tables(sig)[2]


def gp_batch(a: np.ndarray, b: np.ndarray, sig: Signature) -> np.ndarray:
    """Geometric product of coefficient arrays, broadcasting over leading axes."""
    idx, sign, _ = _tables(sig)
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    shape = np.broadcast_shapes(a.shape[:-1], b.shape[:-1]) + (sig.size,)
    out = np.zeros(shape, dtype=complex)
    active = np.flatnonzero(np.any(a.reshape(-1, sig.size) != 0, axis=0))
    for i in active:
        out += a[..., i : i + 1] * b[..., idx[i]] * sign[i]
    return out


def _grade_sign_batch(a: np.ndarray, sig: Signature, fn) -> np.ndarray:
    g = grades(sig)
    return np.asarray(a) * fn(g)


def involute_batch(a, sig):
    return _grade_sign_batch(a, sig, lambda k: (-1.0) ** k)


def reverse_batch(a, sig):
    return _grade_sign_batch(a, sig, lambda k: (-1.0) ** (k * (k - 1) // 2))


def conjugate_batch(a, sig):
    return _grade_sign_batch(a, sig, lambda k: (-1.0) ** (k * (k + 1) // 2))


@dataclass(frozen=True, eq=False)
class Multivector:
    """Immutable element of a complexified Clifford algebra."""

    sig: Signature
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        if c.shape != (self.sig.size,):
            raise ValueError(f"expected {self.sig.size} coefficients, got {c.shape}")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    # -- construction ---------------------------------------------------
    @classmethod
    def zero(cls, sig: Signature) -> Multivector:
        return cls(sig, np.zeros(sig.size))

    @classmethod
    def scalar(cls, sig: Signature, value: complex = 1.0) -> Multivector:
        c = np.zeros(sig.size, dtype=complex)
        c[0] = value
        return cls(sig, c)

    @classmethod
    def blade(cls, sig: Signature, *indices: int, value: complex = 1.0) -> Multivector:
        """``value * e_{i1} e_{i2} ...`` with generator indices as in e_0..e_n, any order."""
        out = cls.scalar(sig, value)
        for i in indices:
            c = np.zeros(sig.size, dtype=complex)
            c[1 << sig.bit(i)] = 1.0
            out = out * cls(sig, c)
        return out

    @classmethod
    def vector(cls, sig: Signature, coords: Iterable[complex]) -> Multivector:
        """Grade-1 element; ``coords[k]`` multiplies the k-th generator."""
        coords = np.asarray(list(coords), dtype=complex)
        if coords.shape != (sig.dim,):
            raise ValueError(f"need {sig.dim} coordinates for a vector of {sig}")
        c = np.zeros(sig.size, dtype=complex)
        c[1 << np.arange(sig.dim)] = coords
        return cls(sig, c)

    @classmethod
    def from_terms(cls, sig: Signature, terms: Mapping[tuple, complex]) -> Multivector:
        out = cls.zero(sig)
        for idx, val in terms.items():
            out = out + cls.blade(sig, *idx, value=val)
        return out

    # -- arithmetic -----------------------------------------------------
    def _check(self, other: Multivector):
        if not isinstance(other, Multivector):
            return NotImplemented
        if other.sig != self.sig:
            raise ValueError(f"signature mismatch: {self.sig} vs {other.sig}")
        return None

    def __add__(self, other):
        if np.isscalar(other):
            other = Multivector.scalar(self.sig, other)
        self._check(other)
        return Multivector(self.sig, self.coeffs + other.coeffs)

    __radd__ = __add__

    def __neg__(self):
        return Multivector(self.sig, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if np.isscalar(other):
            return Multivector(self.sig, self.coeffs * other)
        self._check(other)
        return Multivector(self.sig, gp_batch(self.coeffs, other.coeffs, self.sig))

    def __rmul__(self, other):
        if np.isscalar(other):
            return Multivector(self.sig, self.coeffs * other)
        return NotImplemented

    def __truediv__(self, other):
        return Multivector(self.sig, self.coeffs / other)

    # -- structure ------------------------------------------------------
    def grade(self, k: int) -> Multivector:
        return grade_project(self, k)

    def involute(self) -> Multivector:
        return main_involution(self)

    def reverse(self) -> Multivector:
        return reversion(self)

    def conjugate(self) -> Multivector:
        return clifford_conjugation(self)

    def norm(self) -> float:
        """Coefficient 2-norm (not the spinorial norm)."""
        return float(np.linalg.norm(self.coeffs))

    @property
    def scalar_part(self) -> complex:
        return complex(self.coeffs[0])

    def terms(self, tol: float = 0.0) -> dict:
        """Nonzero coefficients keyed by tuples of generator indices."""
        out = {}
        for mask in np.flatnonzero(np.abs(self.coeffs) > tol):
            idx = tuple(b + self.sig.first_index for b in range(self.sig.dim) if mask >> b & 1)
            out[idx] = complex(self.coeffs[mask])
        return out

    def allclose(self, other: Multivector, atol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.allclose(self.coeffs, other.coeffs, atol=atol, rtol=0))

    def __repr__(self):
        parts = []
        for idx, val in self.terms(1e-14).items():
            name = "e" + "".join(map(str, idx)) if idx else "1"
            parts.append(f"({val:.6g})*{name}")
        return f"Multivector[{self.sig}](" + " + ".join(parts or ["0"]) + ")"


def geometric_product(a: Multivector, b: Multivector) -> Multivector:
    return a * b


def main_involution(a: Multivector) -> Multivector:
    return Multivector(a.sig, involute_batch(a.coeffs, a.sig))


def reversion(a: Multivector) -> Multivector:
    return Multivector(a.sig, reverse_batch(a.coeffs, a.sig))


def clifford_conjugation(a: Multivector) -> Multivector:
    return Multivector(a.sig, conjugate_batch(a.coeffs, a.sig))


def spinorial_norm(a: Multivector) -> Multivector:
    """``alpha(a) a``; a scalar on group elements."""
    return clifford_conjugation(a) * a


def grade_project(a: Multivector, k: int) -> Multivector:
    if not 0 <= k <= a.sig.dim:
        raise ValueError(f"grade {k} out of range for {a.sig}")
    return Multivector(a.sig, np.where(grades(a.sig) == k, a.coeffs, 0))


def change_signature(a: Multivector, sig: Signature) -> Multivector:
    """Re-express ``a`` in another algebra sharing its generators (e.g. Cl(n) inside Cl(1, n))."""
    if sig == a.sig:
        return a
    shift = a.sig.first_index - sig.first_index
    out = np.zeros(sig.size, dtype=complex)
    for mask in np.flatnonzero(a.coeffs):
        bits = [b + shift for b in range(a.sig.dim) if mask >> b & 1]
        if any(not 0 <= b < sig.dim for b in bits):
            raise ValueError(f"{a!r} has generators outside {sig}")
        out[sum(1 << b for b in bits)] = a.coeffs[mask]
    return Multivector(sig, out)
