import math

import numpy as np
import pytest

from spinorpoisson import poisson as po
from spinorpoisson.clifford import Multivector, change_signature, conjugate_batch, euclidean, gp_batch, lorentzian
from spinorpoisson.quadrature import product_rule
from spinorpoisson.special import c_from_asymptotics, gamma_lambda_const, jacobi_phi
from spinorpoisson.spin import a_t, iwasawa_batch, random_compact, random_lorentz
from spinorpoisson.spinor import branching

CASES = [(3, "full", "plus"), (3, "full", "minus"), (4, "plus", "full"), (4, "minus", "full")]


def random_m(n, rng):
    return change_signature(random_compact(n - 1, rng), euclidean(n))


def rel(a, b):
    return np.linalg.norm(np.asarray(a) - b) / max(np.linalg.norm(b), 1e-300)


def test_kernel_examples(rng):
    n, lam = 3, 0.4 - 0.7j
    b = branching(n)
    k = random_compact(n, rng)
    assert np.allclose(po.poisson_kernel(a_t(0.0, n), k.coeffs, lam), b.tau_of(k), atol=1e-12)
    t = 1.3
    P = po.poisson_kernel(a_t(t, n), np.eye(1, 8)[0], lam)
    assert np.allclose(P, np.exp((1j * lam + po.rho(n)) * t) * np.eye(b.dim_tau), atol=1e-12)


@pytest.mark.parametrize("n,tau,sigma", CASES)
def test_kernel_covariance(n, tau, sigma, rng):
    lam = 0.3 - 0.6j
    b = branching(n, tau, sigma)
    sig = lorentzian(n)
    for _ in range(3):
        g = random_lorentz(n, rng)
        k = random_compact(n, rng)
        m = random_m(n, rng)
        h = random_compact(n, rng)
        P = po.poisson_kernel(g, k.coeffs, lam, tau, sigma)
        assert rel(po.poisson_kernel(g, (k * m).coeffs, lam, tau, sigma), P @ b.tau_of(m)) <= 1e-10
        hg = change_signature(h, sig) * g
        assert rel(po.poisson_kernel(hg, (h * k).coeffs, lam, tau, sigma), P) <= 1e-10


def test_boundary_datum_is_covariant(rng):
    for n, tau, sigma in CASES:
        datum = po.BoundaryDatum.random(n, tau, sigma, rng)
        b = datum.branch
        k = random_compact(n, rng)
        m = random_m(n, rng)
        m_sub = change_signature(m, euclidean(n - 1))
        lhs = datum((k * m).coeffs)
        rhs = np.linalg.inv(b.sigma_of(m_sub)) @ datum(k.coeffs)
        assert rel(lhs, rhs) <= 1e-10


def test_principal_series_group_law(rng):
    n, tau, sigma, lam = 3, "full", "minus", 0.5 - 0.4j
    datum = po.BoundaryDatum.random(n, tau, sigma, rng)
    g1, g2 = random_lorentz(n, rng), random_lorentz(n, rng)
    ks = np.array([random_compact(n, rng).coeffs for _ in range(5)])
    direct = po.principal_series_action(g1 * g2, datum, lam, ks)
    # apply g2 first, then g1, by hand
    sig = lorentzian(n)
    kl = np.array([change_signature(Multivector(euclidean(n), c), sig).coeffs for c in ks])
    H, kap, _ = iwasawa_batch(gp_batch(conjugate_batch(g1.coeffs, sig), kl, sig), n)
    kap_e = np.array([change_signature(Multivector(sig, c), euclidean(n)).coeffs for c in kap])
    inner = po.principal_series_action(g2, datum, lam, kap_e)
    composed = np.exp((1j * lam - po.rho(n)) * H.real)[:, None] * inner
    assert rel(composed, direct) <= 1e-10


@pytest.mark.parametrize("n", [2, 3, 4, 5])
@pytest.mark.parametrize("t", [0.7, 3.0, 9.0])
def test_kernel_l1_identity(n, t):
    a = 0.8
    b = branching(n)
    rule, kind = po._rule_for(n, t, None, "auto")
    e, _ = po.kernel_at_sections(b, -1j * a, t, rule, kind)
    ref = jacobi_phi(po.rho(n) - 0.5, -0.5, -1j * a, t)
    assert rel(rule.integrate(np.abs(e)), ref) <= 1e-6


@pytest.mark.parametrize("n", [3, 4, 5])
def test_radial_and_clifford_kernels_agree(n):
    b = branching(n)
    rule = product_rule(n, 12, 6)
    for t in (0.4, 2.5):
        e1, T1 = po.kernel_at_sections(b, 0.3 - 0.5j, t, rule, "radial")
        e2, T2 = po.kernel_at_sections(b, 0.3 - 0.5j, t, rule, "clifford")
        assert np.allclose(e1, e2, rtol=1e-10)
        assert np.allclose(T1, T2, atol=1e-10)


@pytest.mark.parametrize("n,tau,sigma", CASES)
def test_spherical_function_basics(n, tau, sigma, rng):
    lam = 1 - 0.6j
    assert np.allclose(po.spherical_function(n, tau, sigma, lam, 0.0), np.eye(branching(n, tau, sigma).dim_tau))
    M = po.spherical_function(n, tau, sigma, lam, 0.9)
    b = branching(n, tau, sigma)
    Tm = b.tau_of(random_m(n, rng))
    assert np.allclose(Tm @ M, M @ Tm, atol=1e-10)
    got = po.scalar_components(n, tau, sigma, M)
    ref = po.spherical_closed_form(n, tau, sigma, lam, 0.9)
    for s in ref:
        assert abs(got[s] - ref[s]) / abs(ref[s]) <= 1e-8


def test_closed_form_at_origin_and_symmetry():
    for n, tau, sigma in CASES:
        assert all(abs(v - 1) < 1e-15 for v in po.spherical_closed_form(n, tau, sigma, 0.3 - 0.2j, 0.0).values())
    a = po.spherical_closed_form(3, "full", "plus", 0.3 - 0.7j, 1.1)
    b = po.spherical_closed_form(3, "full", "minus", 0.3 - 0.7j, 1.1)
    assert a["plus"] == b["minus"] and a["minus"] == b["plus"]


def test_scalar_components_rejects_leakage():
    M = np.eye(2, dtype=complex)
    M[0, 1] = 0.1
    with pytest.raises(ValueError):
        po.scalar_components(3, "full", "plus", M)
    assert po.scalar_components(3, "full", "plus", np.diag([2.0, 3.0])) == {"plus": 2.0, "minus": 3.0}


@pytest.mark.parametrize("lam", [-1.2j, 1 - 0.5j])
def test_eigen_equation_of_radial_part(lam):
    # the even-block scalar divided by cosh(t/2) is a Jacobi function of t/2
    n = 4
    alpha, beta = n / 2 - 1, n / 2
    h = 0.02
    s0 = 0.6
    psi = []
    for k in (-2, -1, 0, 1, 2):
        s = s0 + k * h
        M = po.spherical_function(n, "plus", "full", lam, 2 * s, method="clifford")
        psi.append(po.scalar_components(n, "plus", "full", M)["full"] / math.cosh(s))
    d1 = (psi[0] - 8 * psi[1] + 8 * psi[3] - psi[4]) / (12 * h)
    d2 = (-psi[0] + 16 * psi[1] - 30 * psi[2] + 16 * psi[3] - psi[4]) / (12 * h * h)
    resid = d2 + ((2 * alpha + 1) / math.tanh(s0) + (2 * beta + 1) * math.tanh(s0)) * d1
    resid += (4 * lam * lam + (alpha + beta + 1) ** 2) * psi[2]
    assert abs(resid) <= 1e-5 * abs(psi[2])


def test_nbar_mass_is_one():
    for n in (3, 4):
        assert po.nbar_mass(n) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("n,tau,sigma", CASES)
def test_nbar_integral_matches_asymptotic_constant(n, tau, sigma):
    lam = -0.6j
    M = po.cfun_by_nbar(n, tau, sigma, lam)
    val = po.scalar_components(n, tau, sigma, M)[sigma]
    assert abs(val - c_from_asymptotics(n, lam)) / abs(c_from_asymptotics(n, lam)) <= 1e-6
    with pytest.raises(ValueError):
        po.cfun_by_nbar(n, tau, sigma, 0.5)


def test_fatou_estimate_converges():
    lam = -0.8j
    for n, tau, sigma in [(3, "full", "plus"), (4, "plus", "full")]:
        est = po.cfun_by_fatou(n, tau, sigma, lam)
        assert est.converged
        assert abs(est[sigma] - c_from_asymptotics(n, lam)) <= 1e-3 * abs(c_from_asymptotics(n, lam))


def test_fatou_pointwise_limit(rng):
    n, tau, sigma, lam = 3, "full", "plus", -0.8j
    datum = po.BoundaryDatum.random(n, tau, sigma, rng)
    b = datum.branch
    ks = np.array([random_compact(n, rng).coeffs for _ in range(4)])
    target = b.kappa * po.c_closed(n, tau, sigma, lam) * datum(ks) @ b.iota.T
    devs = []
    for t in (4.0, 8.0, 12.0):
        F = po.transform_from_spherical(datum, po.spherical_function(n, tau, sigma, lam, t), ks)
        devs.append(rel(np.exp((po.rho(n) - 1j * lam) * t) * F, target))
    assert devs[0] > devs[1] > devs[2]
    assert devs[2] <= 1e-3


@pytest.mark.parametrize("n,tau,sigma", CASES)
def test_transform_at_origin(n, tau, sigma, rng):
    b = branching(n, tau, sigma)
    v = rng.normal(size=b.dim_tau) + 1j * rng.normal(size=b.dim_tau)
    datum = po.BoundaryDatum.coherent(n, tau, sigma, v)
    assert rel(po.poisson_transform(datum, 0.4 - 0.6j, 0.0), v / b.kappa) <= 1e-12


@pytest.mark.parametrize("t", [0.5, 2.0, 6.0])
def test_direct_transform_matches_spherical_shortcut(t, rng):
    n, tau, sigma, lam = 3, "full", "minus", 0.4 - 0.6j
    datum = po.BoundaryDatum.random(n, tau, sigma, rng)
    ks = np.array([random_compact(n, rng).coeffs for _ in range(3)])
    direct = po.poisson_transform(datum, lam, t, k=ks)
    short = po.transform_from_spherical(datum, po.spherical_function(n, tau, sigma, lam, t), ks)
    assert rel(direct, short) <= 1e-8


def test_transform_is_tau_covariant(rng):
    # F(g k) = tau(k)^-1 F(g): moving the base point by m in M
    n, tau, sigma, lam = 4, "minus", "full", -0.7j
    datum = po.BoundaryDatum.random(n, tau, sigma, rng)
    b = datum.branch
    k = random_compact(n, rng)
    t = 1.1
    F = po.poisson_transform(datum, lam, t, k=k.coeffs)
    m = random_m(n, rng)
    # k a_t m = k m a_t since M commutes with A
    Fm = po.poisson_transform(datum, lam, t, k=(k * m).coeffs)
    assert rel(Fm, np.linalg.inv(b.tau_of(m)) @ F) <= 1e-9


def test_lp_norm_of_coherent_datum(rng):
    for n, tau, sigma in CASES:
        b = branching(n, tau, sigma)
        v = rng.normal(size=b.dim_tau)
        datum = po.BoundaryDatum.coherent(n, tau, sigma, v)
        # |pi tau(k^-1) v|^2 averages to |v|^2 dim_sigma / dim_tau
        assert po.lp_norm(datum, 2) == pytest.approx(np.linalg.norm(v) / b.kappa, rel=1e-10)
        assert po.lp_norm(datum, 2) <= po.lp_norm(datum, 4) + 1e-12
    with pytest.raises(ValueError):
        po.lp_norm(datum, 1.0)


def test_hardy_norm_sandwich_odd(rng):
    n, tau, sigma, lam = 3, "full", "plus", -0.8j
    b = branching(n, tau, sigma)
    c = abs(po.c_closed(n, tau, sigma, lam))
    gam = gamma_lambda_const(n, lam)
    datum = po.BoundaryDatum.random(n, tau, sigma, rng)
    for p in (2, 3):
        f = po.lp_norm(datum, p)
        h, prof = po.hardy_norm(datum, lam, p, return_profile=True)
        assert b.kappa * c * f - 1e-6 <= h <= b.kappa * gam * f + 1e-6
        assert len(prof) == len(po.default_t_grid())


def test_hs_limit_odd():
    n, tau, sigma, lam = 3, "full", "plus", -0.8j
    vals, last = po.hs_limit_eisenstein(n, tau, sigma, lam, [8.0, 12.0])
    assert abs(last - po.hs_limit_target(n, tau, sigma, lam)) <= 1e-2 * po.hs_limit_target(n, tau, sigma, lam)


def test_inversion_output_is_sigma_covariant(rng):
    n, tau, sigma, lam, t = 3, "full", "plus", -0.7j, 3.0
    datum = po.BoundaryDatum.random(n, tau, sigma, rng)
    b = datum.branch
    Phi = po.spherical_function(n, tau, sigma, lam, t)
    F = lambda h: po.transform_from_spherical(datum, Phi, h)
    k = random_compact(n, rng)
    m = random_m(n, rng)
    pts = np.array([k.coeffs, (k * m).coeffs])
    g = po.inversion(F, n, tau, sigma, lam, t, pts)
    m_sub = change_signature(m, euclidean(n - 1))
    assert rel(g[1], np.linalg.inv(b.sigma_of(m_sub)) @ g[0]) <= 1e-8
