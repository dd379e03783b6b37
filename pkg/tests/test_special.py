import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special as sp

from spinorpoisson.special import (
    PoleError,
    c_from_asymptotics,
    c_simple,
    c_tau_closed,
    gamma_complex,
    gamma_lambda_const,
    hyp2f1,
    jacobi_phi,
    rgamma_complex,
)

mpmath.mp.dps = 40

finite = dict(allow_nan=False, allow_infinity=False)
strip = st.complex_numbers(max_magnitude=14, **finite).filter(
    lambda z: abs(z.real) <= 10 and abs(z.imag) <= 10 and min(abs(z - k) for k in range(-11, 1)) > 1e-3
)


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


@given(strip)
def test_gamma_matches_mpmath(z):
    assert rel(gamma_complex(z), complex(mpmath.gamma(z))) <= 1e-12


@given(strip)
def test_gamma_functional_equation(z):
    assert rel(gamma_complex(z + 1), z * gamma_complex(z)) <= 1e-12


def test_gamma_classical_values():
    assert gamma_complex(1) == pytest.approx(1, abs=1e-15)
    assert rel(gamma_complex(0.5), math.sqrt(math.pi)) <= 1e-14
    for x in np.linspace(0.1, 9.9, 25):
        assert rel(gamma_complex(x), sp.gamma(x)) <= 1e-13


@pytest.mark.parametrize("z", [0, -1, -2, -7, -3 + 1e-11])
def test_gamma_poles(z):
    with pytest.raises(PoleError):
        gamma_complex(z)
    assert rgamma_complex(z) == 0


def test_hyp2f1_trivial_cases():
    assert hyp2f1(0.3 + 1j, -2.1, 1.7, 0.0) == 1
    for z in (-0.2, -0.9, -5.0, -1e6):
        assert rel(hyp2f1(0.7 + 0.2j, 1.3, 1.3, z), (1 - z) ** -(0.7 + 0.2j)) <= 1e-12


def direct_series(a, b, c, z, terms=4000):
    with mpmath.workdps(60):
        a, b, c, z = map(mpmath.mpmathify, (a, b, c, z))
        total, term = mpmath.mpf(1), mpmath.mpf(1)
        for k in range(terms):
            term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
            total += term
            if abs(term) < mpmath.mpf(10) ** -40 * abs(total):
                break
        return complex(total)


par = st.complex_numbers(max_magnitude=4, **finite)


@given(par, par, st.floats(0.2, 5), st.floats(-0.5, 0))
def test_hyp2f1_against_slow_series(a, b, c, z):
    assert rel(hyp2f1(a, b, c, z), direct_series(a, b, c, z)) <= 1e-12 or abs(hyp2f1(a, b, c, z)) < 1e-8


def test_hyp2f1_against_mpmath():
    rng = np.random.default_rng(7)
    for _ in range(400):
        a, b = rng.uniform(-3, 3, 2) @ [1, 1j], rng.uniform(-3, 3, 2) @ [1, 1j]
        c, z = rng.uniform(0.2, 5), -(10 ** rng.uniform(-0.3, 8))
        assert rel(hyp2f1(a, b, c, z), complex(mpmath.hyp2f1(a, b, c, z))) <= 1e-12


@pytest.mark.parametrize("args", [(1.5, 2.0, 1.5), (1.0, 1.0, 2.0), (0.5, 1.5, 2.0), (2.0, 3.0, 1.0)])
def test_hyp2f1_integer_gap_cases(args):
    for z in (-0.9, -3.0, -1e4, -1e16):
        ref = complex(mpmath.hyp2f1(*args, z))
        assert rel(hyp2f1(*args, z), ref) <= 1e-11


def test_hyp2f1_pole():
    with pytest.raises(PoleError):
        hyp2f1(1, 1, -2, -0.3)


@given(st.floats(0.05, 3), st.floats(-2, 2), st.floats(0, 6))
def test_jacobi_phi_even_in_lambda(a, s, t):
    lam = s - 1j * a
    assert rel(jacobi_phi(0.5, 1.5, lam, t), jacobi_phi(0.5, 1.5, -lam, t)) <= 1e-10


def test_jacobi_phi_at_zero_and_elementary():
    assert jacobi_phi(1.0, 2.0, 0.3 - 0.4j, 0.0) == 1
    # alpha = beta = -1/2 gives cos(lam t)
    for t in (0.3, 1.7, 5.0):
        assert rel(jacobi_phi(-0.5, -0.5, 1.3 - 0.2j, t), cmath.cos((1.3 - 0.2j) * t)) <= 1e-12
    # alpha = 1/2, beta = -1/2 gives sin(lam t) / (lam sinh t)
    lam = 0.8 - 0.3j
    for t in (0.5, 2.0):
        assert rel(jacobi_phi(0.5, -0.5, lam, t), cmath.sin(lam * t) / (lam * math.sinh(t))) <= 1e-12


@pytest.mark.parametrize("alpha,beta,lam", [(0.5, 1.5, -1.2j), (1.0, 2.0, 2 - 1.2j), (1.5, 0.5, 1 - 0.4j)])
def test_jacobi_ode(alpha, beta, lam):
    # phi'' + ((2a+1) coth t + (2b+1) tanh t) phi' = -(lam^2 + rho^2) phi
    rho = alpha + beta + 1
    h = 1e-3
    for t in (0.4, 1.1, 2.3):
        f = [jacobi_phi(alpha, beta, lam, t + k * h) for k in (-2, -1, 0, 1, 2)]
        d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
        d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
        lhs = d2 + ((2 * alpha + 1) / math.tanh(t) + (2 * beta + 1) * math.tanh(t)) * d1
        assert abs(lhs + (lam * lam + rho * rho) * f[2]) <= 1e-6 * max(1, abs(f[2]))


def c_oracle(alpha, beta, lam):
    il = 1j * lam
    with mpmath.workdps(30):
        v = (
            mpmath.power(2, -il + alpha + beta + 1)
            * mpmath.gamma(alpha + 1)
            * mpmath.gamma(il)
            / (mpmath.gamma((il + alpha + beta + 1) / 2) * mpmath.gamma((il + alpha - beta + 1) / 2))
        )
    return complex(v)


@given(st.floats(-0.4, 3), st.floats(-0.4, 3), st.floats(0.1, 3), st.floats(-3, 3))
def test_c_simple_against_gamma_oracle(alpha, beta, a, s):
    lam = s - 1j * a
    assert rel(c_simple(alpha, beta, lam), c_oracle(alpha, beta, lam)) <= 1e-12


def test_c_simple_pole():
    with pytest.raises(PoleError):
        c_simple(0.5, 0.5, 0.0)


def recurrence_grid():
    a = np.linspace(0.15, 3.0, 5)
    s = np.array([-1.5, -0.3, 0.4, 2.0])
    return [complex(x, -y) for y in a for x in s]


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_recurrence(n):
    for lam in recurrence_grid():
        lhs = c_simple(n / 2, n / 2 - 1, 2 * lam)
        rhs = n / (2j * lam) * c_simple(n / 2 - 1, n / 2, 2 * lam)
        assert rel(lhs, rhs) <= 1e-12


def test_c_tau_spot_values():
    assert c_tau_closed(4, "plus", "full", -1j) == pytest.approx(2, rel=1e-13)
    assert c_tau_closed(4, "minus", "full", -1j) == pytest.approx(2, rel=1e-13)
    assert c_tau_closed(3, "full", "plus", -1j) == pytest.approx(2 / 3, rel=1e-13)
    assert c_tau_closed(3, "full", "minus", -1j) == pytest.approx(2 / 3, rel=1e-13)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_c_tau_is_label_independent(n):
    from spinorpoisson.spinor import sigma_labels, tau_labels

    lam = 0.7 - 0.9j
    vals = [c_tau_closed(n, t, s, lam) for t in tau_labels(n) for s in sigma_labels(n)]
    assert np.allclose(vals, vals[0], rtol=1e-15, atol=0)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_even_formula_is_twice_the_odd_one(n):
    lam = 0.4 - 0.7j
    il = 1j * lam
    odd_shape = 2 ** (n - 1 - 2 * il) * gamma_complex(n / 2) * gamma_complex(2 * il)
    odd_shape /= gamma_complex(il + n / 2) * gamma_complex(il)
    assert rel(c_tau_closed(n, "plus", "full", lam), 2 * odd_shape) <= 1e-14


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_c_from_asymptotics_relation(n):
    lam = 0.4 - 0.7j
    labels = ("full", "plus") if n % 2 else ("plus", "full")
    ratio = c_from_asymptotics(n, lam) / c_tau_closed(n, *labels, lam)
    assert ratio == pytest.approx(1.0 if n % 2 else 0.5, rel=1e-13)


@pytest.mark.parametrize("alpha,beta", [(0.5, 1.5), (1.5, 0.5), (1.0, 2.0), (2.0, 1.0), (1.0, -0.5)])
@pytest.mark.parametrize("lam", [-1.2j, 2 - 1.2j, 1 - 0.5j])
def test_jacobi_asymptotics(alpha, beta, lam):
    c = c_simple(alpha, beta, lam)
    rho = alpha + beta + 1
    devs = [abs(cmath.exp((rho - 1j * lam) * t) * jacobi_phi(alpha, beta, lam, t) - c) for t in (4, 8, 12)]
    assert devs[0] > devs[1] > devs[2]
    assert devs[2] <= 1e-4 * max(1, abs(c))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
@pytest.mark.parametrize("lam", [-0.8j, 1 - 0.3j, -2.5j])
def test_gamma_lambda_bounds(n, lam):
    g = gamma_lambda_const(n, lam)
    a = (1j * lam).real
    rho = (n - 1) / 2
    assert math.isfinite(g)
    assert g >= 1 - 1e-15
    assert g >= abs(c_simple(rho - 0.5, -0.5, -1j * a)) - 1e-15


def test_gamma_lambda_needs_convergent_lambda():
    with pytest.raises(ValueError):
        gamma_lambda_const(3, 0.5)
