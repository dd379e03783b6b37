"""Complex Gamma, 2F1 on the negative axis, Jacobi functions and c-functions."""

from __future__ import annotations

import cmath
import math

import mpmath
import numpy as np

POLE_TOL = 1e-9


class PoleError(ArithmeticError):
    """A Gamma factor is evaluated at (or within tolerance of) a pole."""


class ConvergenceError(RuntimeError):
    pass


# Lanczos coefficients, g = 7, n = 9 (Godfrey); relative error ~1e-15.
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


# the connection formula loses digits to cancellation below this w
W_SWITCH = 0.9


def _is_pole(z: complex) -> bool:
    return z.real <= 0.5 and abs(z.imag) < POLE_TOL and abs(z.real - round(z.real)) < POLE_TOL


def _gamma_lanczos(z: complex) -> complex:
    z = z - 1
    x = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        x += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2 * math.pi) * cmath.exp((z + 0.5) * cmath.log(t) - t) * x


def gamma_complex(z: complex) -> complex:
    """Gamma(z) by reflection into Re z >= 1/2, shifting up before the Lanczos sum."""
    z = complex(z)
    if _is_pole(z):
        raise PoleError(f"Gamma has a pole at {z}")
    if z.real < 0.5:
        return math.pi / (cmath.sin(math.pi * z) * gamma_complex(1 - z))
    # Shift small arguments upward; the Lanczos sum is most accurate away from 1/2.
    shift = 1.0 + 0j
    while z.real < 2.0:
        shift *= z
        z += 1
    return _gamma_lanczos(z) / shift


def rgamma_complex(z: complex) -> complex:
    """1/Gamma(z), zero at the poles."""
    z = complex(z)
    if _is_pole(z):
        return 0j
    return 1.0 / gamma_complex(z)


def _series_2f1(a, b, c, w, max_terms=20000):
    term = 1.0 + 0j
    total = 1.0 + 0j
    comp = 0j
    for k in range(max_terms):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * w
        # Kahan summation
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if abs(term) < 1e-17 * abs(total) and k > 2:
            return total
        if term == 0:
            return total
    raise ConvergenceError(f"2F1 series failed to converge (a={a}, b={b}, c={c}, w={w})")


def hyp2f1(a: complex, b: complex, c: complex, z: float) -> complex:
    """Gauss 2F1(a, b; c; z) for real z <= 0.

    |z| <= 1/2 uses the series directly.  Otherwise the Pfaff transformation
    maps to w = z/(z-1) in (1/3, 1); for w > 0.9 the series around w = 1 is
    used through the standard connection formula.  When c - a - b is
    numerically an integer that formula is degenerate and mpmath is used.
    """
    a, b, c = complex(a), complex(b), complex(c)
    z = float(z)
    if z > 0:
        raise ValueError("hyp2f1 is implemented for z <= 0 only")
    if _is_pole(c):
        raise PoleError(f"2F1 undefined for c = {c}")
    if z == 0:
        return 1.0 + 0j
    if z >= -0.5:
        return _series_2f1(a, b, c, z)
    # Pfaff: 2F1(a,b;c;z) = (1-z)^-a 2F1(a, c-b; c; z/(z-1))
    w = z / (z - 1.0)
    pref = cmath.exp(-a * math.log1p(-z))
    b2 = c - b
    if w <= W_SWITCH:
        return pref * _series_2f1(a, b2, c, w)
    s = c - a - b2
    if abs(s - round(s.real)) < 1e-4:
        # w may round to 1 in double precision, so hand mpmath the original z
        return complex(mpmath.hyp2f1(a, b, c, z))
    return pref * _hyp2f1_near_one(a, b2, c, 1.0 / (1.0 - z))


def _hyp2f1_near_one(a, b, c, one_minus_w):
    s = c - a - b
    gc = gamma_complex(c)
    t1 = gc * gamma_complex(s) * rgamma_complex(c - a) * rgamma_complex(c - b)
    t2 = gc * gamma_complex(-s) * rgamma_complex(a) * rgamma_complex(b)
    f1 = _series_2f1(a, b, 1 - s, one_minus_w) if t1 != 0 else 0
    f2 = _series_2f1(c - a, c - b, 1 + s, one_minus_w) if t2 != 0 else 0
    return t1 * f1 + cmath.exp(s * math.log(one_minus_w)) * t2 * f2


def jacobi_phi(alpha: complex, beta: complex, lam: complex, t: float) -> complex:
    """Jacobi function 2F1((i lam + rho)/2, (-i lam + rho)/2; alpha + 1; -sinh^2 t), rho = alpha + beta + 1."""
    if _is_pole(complex(alpha) + 1):
        raise PoleError("alpha must not be a negative integer")
    rho = alpha + beta + 1
    il = 1j * lam
    return hyp2f1((il + rho) / 2, (-il + rho) / 2, alpha + 1, -math.sinh(t) ** 2)


def jacobi_phi_array(alpha, beta, lam, ts) -> np.ndarray:
    return np.array([jacobi_phi(alpha, beta, lam, float(t)) for t in np.ravel(ts)]).reshape(np.shape(ts))


def c_simple(alpha: complex, beta: complex, lam: complex) -> complex:
    """Asymptotic constant of the Jacobi function for Re(i lam) > 0."""
    il = 1j * lam
    num = cmath.exp((-il + alpha + beta + 1) * math.log(2)) * gamma_complex(alpha + 1) * gamma_complex(il)
    den = gamma_complex((il + alpha + beta + 1) / 2) * gamma_complex((il + alpha - beta + 1) / 2)
    return num / den


def c_tau_closed(n: int, tau: str, sigma: str, lam: complex) -> complex:
    """Scalar component of the vector-valued c-function (Gamma quotient).

    Independent of the +/- labels; even n carries ``2^(n - 2 i lam)``, odd n
    ``2^(n - 1 - 2 i lam)``.
    """
    from .spinor import check_labels

    check_labels(n, tau, sigma)
    il = 1j * lam
    expo = (n if n % 2 == 0 else n - 1) - 2 * il
    return (
        cmath.exp(expo * math.log(2))
        * gamma_complex(n / 2)
        * gamma_complex(2 * il)
        / (gamma_complex(il + n / 2) * gamma_complex(il))
    )


def c_from_asymptotics(n: int, lam: complex) -> complex:
    """Leading coefficient of the spherical function as t -> oo: ``c_{n/2-1, n/2}(2 lam) / 2``.

    Agrees with :func:`c_tau_closed` for odd n and is half of it for even n.
    """
    return c_simple(n / 2 - 1, n / 2, 2 * lam) / 2


def envelope_grid(t_max: float = 30.0, count: int = 400) -> np.ndarray:
    return np.concatenate([[0.0], np.geomspace(1e-3, t_max, count - 1)])


def gamma_lambda_const(n: int, lam: complex, t_max: float = 30.0, count: int = 400) -> float:
    """sup_t e^{(rho - a) t} phi_{-ia}^{(rho-1/2, -1/2)}(t) over a log grid, with the t -> oo limit."""
    a = (1j * lam).real
    if a <= 0:
        raise ValueError("gamma_lambda needs Re(i lambda) > 0")
    rho = (n - 1) / 2
    alpha, beta = rho - 0.5, -0.5
    vals = [math.exp((rho - a) * t) * jacobi_phi(alpha, beta, -1j * a, t).real for t in envelope_grid(t_max, count)]
    tail = abs(c_simple(alpha, beta, -1j * a))
    return float(max(max(vals), tail))
