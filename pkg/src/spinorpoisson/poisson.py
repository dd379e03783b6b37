"""Poisson transform for spinor bundles over real hyperbolic space.

Group elements of ``K = Spin(n)`` are coefficient arrays in Cl(n); the
transform is evaluated at points ``k a_t`` (Cartan coordinates).  Kernels at
``a_{-t} k(x)`` come from the closed radial formula

    H(a_{-t} k(x_u)) = log cosh(u + t) - log cosh(u),   kappa(a_{-t} k(x_u)) = k(x_{u+t}),

where ``u = log tan(theta/2)`` and ``theta`` is the angle from ``e_n``; it is
exact and avoids the cancellation the Clifford route suffers for large t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad_vec
from scipy.special import beta

from .clifford import Multivector, change_signature, conjugate_batch, euclidean, gp_batch, lorentzian
from .quadrature import (
    QuadratureRule,
    equator_rule,
    fibre_product,
    graded_rule,
    half_from_log_tan,
    log_tan_half,
    product_rule,
    spin_rule,
)
from .special import c_tau_closed, jacobi_phi
from .spin import a_t_coeffs, iwasawa_batch, nbar_coeffs, random_compact, section_coeffs
from .spinor import Branching, branching, check_labels

RADIAL_SWITCH = 1.5
DEFAULT_ORDER = 48
# kernels are quadratic in the equatorial direction, so inner spheres need few nodes
INNER_ORDER = 8
LEAK_TOL = 1e-8
CHUNK = 1 << 20


def rho(n: int) -> float:
    return (n - 1) / 2


def _re_il(lam: complex) -> float:
    return (1j * complex(lam)).real


# -- boundary data --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BoundaryDatum:
    """``f(k) = sum_j w_j pi(tau(k^-1 k_j) v_j)``: a finite sum of coherent sections.

    ``rotations`` are Spin(n) elements as Cl(n) coefficient rows, ``vectors``
    live in V_tau.
    """

    n: int
    tau: str
    sigma: str
    weights: np.ndarray = field(repr=False)
    vectors: np.ndarray = field(repr=False)
    rotations: np.ndarray = field(repr=False)

    def __post_init__(self):
        check_labels(self.n, self.tau, self.sigma)
        b = self.branch
        w = np.atleast_1d(np.asarray(self.weights, dtype=complex))
        v = np.atleast_2d(np.asarray(self.vectors, dtype=complex))
        r = np.atleast_2d(np.asarray(self.rotations, dtype=complex))
        if v.shape != (len(w), b.dim_tau) or r.shape != (len(w), 1 << self.n):
            raise ValueError("datum arrays do not match (n, tau)")
        for name, arr in (("weights", w), ("vectors", v), ("rotations", r)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def branch(self) -> Branching:
        return branching(self.n, self.tau, self.sigma)

    @classmethod
    def coherent(cls, n, tau, sigma, v, k0=None, weight=1.0) -> BoundaryDatum:
        k0 = np.eye(1, 1 << n, dtype=complex)[0] if k0 is None else np.asarray(k0, dtype=complex)
        return cls(n, tau, sigma, [weight], [v], [k0])

    @classmethod
    def random(cls, n, tau, sigma, rng=None, terms=3) -> BoundaryDatum:
        rng = np.random.default_rng(rng)
        b = branching(n, tau, sigma)
        w = rng.normal(size=terms) + 1j * rng.normal(size=terms)
        v = rng.normal(size=(terms, b.dim_tau)) + 1j * rng.normal(size=(terms, b.dim_tau))
        rot = np.array([random_spin(n, rng) for _ in range(terms)])
        return cls(n, tau, sigma, w, v, rot)

    def __add__(self, other: BoundaryDatum) -> BoundaryDatum:
        if (self.n, self.tau, self.sigma) != (other.n, other.tau, other.sigma):
            raise ValueError("cannot add data of different types")
        return BoundaryDatum(
            self.n,
            self.tau,
            self.sigma,
            np.concatenate([self.weights, other.weights]),
            np.concatenate([self.vectors, other.vectors]),
            np.concatenate([self.rotations, other.rotations]),
        )

    def vector(self) -> np.ndarray:
        """``V = sum_j w_j tau(k_j) v_j``, so that ``f(k) = pi tau(k^-1) V``."""
        T = self.branch.tau_batch(self.rotations, euclidean(self.n))
        return np.einsum("j,jab,jb->a", self.weights, T, self.vectors)

    def __call__(self, k) -> np.ndarray:
        """Values in V_sigma at Spin(n) elements ``k`` (shape (..., 2^n))."""
        b = self.branch
        kinv = conjugate_batch(np.asarray(k, dtype=complex), euclidean(self.n))
        return np.einsum("sa,...ab,b->...s", b.proj, b.tau_batch(kinv, euclidean(self.n)), self.vector())


def random_spin(n: int, rng=None) -> np.ndarray:
    """Haar-random element of Spin(n) as Cl(n) coefficients."""
    return random_compact(n, rng).coeffs


# -- kernels --------------------------------------------------------------


def radial_iwasawa(half: np.ndarray, t: float):
    """``H`` and the section half-vector of ``kappa`` for ``a_{-t} k(x)``."""
    u = log_tan_half(half)
    nrm = np.linalg.norm(half[..., :-1], axis=-1, keepdims=True)
    omega = np.divide(half[..., :-1], nrm, out=np.zeros_like(half[..., :-1]), where=nrm > 0)
    # nodes exactly at e_n have no direction; any unit omega works there
    omega[..., -1] = np.where(nrm[..., 0] > 0, omega[..., -1], 1.0)
    H = np.logaddexp(u + t, -u - t) - np.logaddexp(u, -u)
    return H, half_from_log_tan(u + t, omega)


def kernel_at_sections(b: Branching, lam: complex, t: float, rule: QuadratureRule, method: str = "radial"):
    """``(exp(-(i lam + rho) H), tau(kappa))`` at ``g^-1 k = a_{-t} k(x_i)`` for every node."""
    n = b.n
    if method == "radial":
        H, kh = radial_iwasawa(rule.half, t)
        kap = section_coeffs(kh, euclidean(n))
        T = b.tau_batch(kap, euclidean(n))
    elif method == "clifford":
        sig = lorentzian(n)
        g = gp_batch(a_t_coeffs(-t, n), rule.section(sig), sig)
        H, kap, _ = iwasawa_batch(g, n)
        H = H.real
        T = b.tau_batch(kap, sig)
    else:
        raise ValueError(f"unknown kernel method {method!r}")
    return np.exp(-(1j * lam + rho(n)) * H), T


def poisson_kernel(g, k, lam: complex, tau: str | None = None, sigma: str | None = None) -> np.ndarray:
    """``exp(-(i lam + rho) H(g^-1 k)) tau(kappa(g^-1 k))`` for g in Spin_0(1,n), k in Spin(n)."""
    n = g.sig.n
    b = branching(n, tau, sigma)
    sig = lorentzian(n)
    kc = np.asarray(getattr(k, "coeffs", k), dtype=complex)
    if kc.shape[-1] == 1 << n:
        kc = change_signature(Multivector(euclidean(n), kc), sig).coeffs
    x = gp_batch(conjugate_batch(g.coeffs, sig), kc, sig)
    H, kap, _ = iwasawa_batch(x, n)
    return np.exp(-(1j * lam + rho(n)) * H.real) * b.tau_batch(kap, sig)


def principal_series_action(g, datum: BoundaryDatum, lam, k) -> np.ndarray:
    """``(pi_{sigma,lam}(g) f)(k) = exp((i lam - rho) H(g^-1 k)) f(kappa(g^-1 k))``.

    ``g`` in Spin_0(1,n), ``k`` Spin(n) coefficient rows; returns V_sigma values.
    """
    n = datum.n
    sig = lorentzian(n)
    kc = np.atleast_2d(np.asarray(k, dtype=complex))
    kc = np.array([change_signature(Multivector(euclidean(n), c), sig).coeffs for c in kc])
    x = gp_batch(conjugate_batch(g.coeffs, sig), kc, sig)
    H, kap, _ = iwasawa_batch(x, n)
    kap_e = np.array([change_signature(Multivector(sig, c), euclidean(n)).coeffs for c in kap])
    return np.exp((1j * lam - rho(n)) * H.real)[:, None] * datum(kap_e)


def _rule_for(n: int, t: float, order: int | None, method: str):
    if method == "auto":
        method = "clifford" if t <= RADIAL_SWITCH else "radial"
    if method == "clifford":
        return product_rule(n, order or DEFAULT_ORDER, INNER_ORDER), "clifford"
    return graded_rule(n, t), "radial"


# -- spherical functions ----------------------------------------------------


def spherical_function(n, tau, sigma, lam, t, order=None, method="auto") -> np.ndarray:
    """``kappa^2 int_K P(a_t, k) iota pi tau(k^-1) dk`` as a dim_tau x dim_tau matrix.

    ``method="clifford"`` runs the full Clifford Iwasawa on a product rule,
    ``"radial"`` the closed radial kernel on a rule graded towards the
    kernel peak; ``"auto"`` switches at ``t = RADIAL_SWITCH``.
    """
    check_labels(n, tau, sigma)
    return _spherical(n, tau, sigma, complex(lam), float(t), order, method).copy()


@lru_cache(maxsize=512)
def _spherical(n, tau, sigma, lam, t, order, method):
    b = branching(n, tau, sigma)
    rule, kind = _rule_for(n, t, order, method)
    e, T = kernel_at_sections(b, lam, t, rule, kind)
    kinv = b.tau_batch(conjugate_batch(rule.section(euclidean(n)), euclidean(n)), euclidean(n))
    P = b.iota @ b.proj
    return b.kappa**2 * np.einsum("i,iab,bc,icd->ad", rule.weights * e, T, P, kinv)


def _blocks(b: Branching) -> dict:
    """Orthogonal projectors of V_tau onto its M-types, keyed by sigma label."""
    if b.n % 2 == 0:
        return {b.sigma: np.eye(b.dim_tau)}
    out = {}
    for s in ("plus", "minus"):
        other = branching(b.n, b.tau, s)
        out[s] = other.iota @ other.proj
    return out


def scalar_components(n, tau, sigma, M, tol=LEAK_TOL) -> dict:
    """Scalars of an M-equivariant endomorphism on each M-type of V_tau.

    Raises if ``M`` is not block-scalar to relative accuracy ``tol``.
    """
    b = branching(n, tau, sigma)
    M = np.asarray(M)
    out = {}
    recon = np.zeros_like(M, dtype=complex)
    for s, P in _blocks(b).items():
        val = np.trace(P @ M) / np.trace(P).real
        out[s] = complex(val)
        recon += val * P
    leak = np.linalg.norm(M - recon) / max(np.linalg.norm(M), 1e-300)
    if leak > tol:
        raise ValueError(f"endomorphism is not scalar on M-types (relative leakage {leak:.2e})")
    return out


def spherical_closed_form(n, tau, sigma, lam, t) -> dict:
    """Closed-form scalar components, keyed like :func:`scalar_components`."""
    check_labels(n, tau, sigma)
    A = math.cosh(t / 2) * jacobi_phi(n / 2 - 1, n / 2, 2 * lam, t / 2)
    if n % 2 == 0:
        return {sigma: A}
    B = 1j * 2 * lam / n * math.sinh(t / 2) * jacobi_phi(n / 2, n / 2 - 1, 2 * lam, t / 2)
    other = "minus" if sigma == "plus" else "plus"
    return {sigma: A + B, other: A - B}


# -- c-function -----------------------------------------------------------


def _nbar_integral(n, lam, values, order, epsrel):
    """``int_Nbar exp(-(i lam + rho) H) values(kappa) dnbar``, normalized so ``int exp(-2 rho H) = 1``."""
    sig = lorentzian(n)
    r0 = rho(n)
    om, wom = equator_rule(n, order)
    area = 2 * math.pi ** ((n - 1) / 2) / math.gamma((n - 1) / 2)
    norm = area * 0.5 * beta(r0, r0)

    def radial(r):
        H, kap, _ = iwasawa_batch(nbar_coeffs(r * om, n), n, check=False)
        w = wom * np.exp(-(1j * lam + r0) * H.real)
        return np.tensordot(w, values(kap, sig), axes=1) * r ** (n - 2)

    val, _ = quad_vec(radial, 0, np.inf, epsabs=1e-14, epsrel=epsrel)
    return val * area / norm


def cfun_by_nbar(n, tau, sigma, lam, order=16, epsrel=1e-12) -> np.ndarray:
    """``int_Nbar exp(-(i lam + rho) H(nbar)) tau(kappa(nbar)) dnbar``.

    Radial integral by adaptive quadrature (scipy ``quad_vec``) along each
    direction of a rule on S^{n-2}.
    """
    if _re_il(lam) <= 0:
        raise ValueError("the Nbar integral converges only for Re(i lambda) > 0")
    if n < 3:
        raise ValueError("the Nbar integral is implemented for n >= 3")
    b = branching(n, tau, sigma)
    return _nbar_integral(n, lam, b.tau_batch, order, epsrel)


def nbar_mass(n, order=16, epsrel=1e-12) -> float:
    """``int_Nbar exp(-2 rho H(nbar)) dnbar`` in the normalization used above; 1 up to quadrature error."""
    ones = lambda kap, sig: np.ones(len(kap))
    return float(_nbar_integral(n, -1j * rho(n), ones, order, epsrel).real)


@dataclass(frozen=True)
class FatouEstimate:
    """Weighted spherical-function scalars along a t-grid and their extrapolated limit."""

    t: np.ndarray
    weighted: dict
    limit: dict
    converged: bool

    def __getitem__(self, label):
        return self.limit[label]


def cfun_by_fatou(n, tau, sigma, lam, t_grid=None, order=None) -> FatouEstimate:
    """c-function from ``exp((rho - i lam) t) Phi(a_t) / kappa^2`` along ``t_grid``.

    The last two grid values feed one Richardson step that removes the
    leading ``exp(-2 i lam t)`` correction.  ``converged`` is False when the
    deviations from the limit do not shrink monotonically along the grid.
    """
    if _re_il(lam) <= 0:
        raise ValueError("the Fatou limit needs Re(i lambda) > 0")
    b = branching(n, tau, sigma)
    t_grid = np.arange(8.0, 14.5, 1.0) if t_grid is None else np.sort(np.asarray(t_grid, dtype=float))
    if len(t_grid) < 2:
        raise ValueError("need at least two grid points")
    rows = []
    for t in t_grid:
        M = spherical_function(n, tau, sigma, lam, t, order=order)
        rows.append(scalar_components(n, tau, sigma, np.exp((rho(n) - 1j * lam) * t) * M / b.kappa**2))
    labels = list(rows[0])
    weighted = {s: np.array([r[s] for r in rows]) for s in labels}
    r = np.exp(-2j * lam * (t_grid[-1] - t_grid[-2]))
    limit = {s: complex((w[-1] - r * w[-2]) / (1 - r)) for s, w in weighted.items()}
    dev = np.abs(weighted[sigma] - limit[sigma])
    converged = bool(np.all(np.diff(dev) <= 1e-14 * max(1.0, abs(limit[sigma]))))
    return FatouEstimate(t_grid, weighted, limit, converged)


def c_closed(n, tau, sigma, lam) -> complex:
    return c_tau_closed(n, tau, sigma, lam)


# -- transforms -------------------------------------------------------------


def poisson_transform(datum: BoundaryDatum, lam, t, k=None, order=None, method="auto") -> np.ndarray:
    """``P f(k a_t)`` by quadrature, for Spin(n) elements ``k`` (default: identity).

    Uses ``P f(k a_t) = kappa int P(a_t, k') iota f(k k') dk'``; the datum is
    only sampled, never expanded.
    """
    n = datum.n
    b = datum.branch
    sig = euclidean(n)
    k = np.eye(1, 1 << n, dtype=complex)[0] if k is None else np.asarray(k, dtype=complex)
    rule, kind = _rule_for(n, float(t), order, method)
    e, T = kernel_at_sections(b, lam, float(t), rule, kind)
    kk = gp_batch(k[..., None, :], rule.section(sig), sig)
    vals = datum(kk)
    return b.kappa * np.einsum("i,iab,bs,...is->...a", rule.weights * e, T, b.iota, vals)


def transform_from_spherical(datum: BoundaryDatum, Phi: np.ndarray, k) -> np.ndarray:
    """``P f(k a_t) = kappa^-1 Phi(a_t) tau(k^-1) V`` for coherent data."""
    b = datum.branch
    sig = euclidean(datum.n)
    kinv = b.tau_batch(conjugate_batch(np.asarray(k, dtype=complex), sig), sig)
    return np.einsum("ab,...bc,c->...a", Phi / b.kappa, kinv, datum.vector())


def lp_norm(datum: BoundaryDatum, p: float, order: int = 24) -> float:
    if not 1 < p < np.inf:
        raise ValueError("need 1 < p < inf")
    rule = product_rule(datum.n, order)
    vals = datum(rule.section(euclidean(datum.n)))
    return float(rule.integrate(np.linalg.norm(vals, axis=-1) ** p) ** (1 / p))


def default_t_grid() -> np.ndarray:
    return np.concatenate([np.linspace(0.0, 4.0, 17)[1:], np.linspace(5.0, 30.0, 26)])


def hardy_norm(datum: BoundaryDatum, lam, p, t_grid=None, order: int = 24, return_profile=False):
    """``sup_t exp((rho - Re(i lam)) t) ||P f(. a_t)||_{L^p(K)}`` over ``t_grid``."""
    if not 1 < p < np.inf:
        raise ValueError("need 1 < p < inf")
    n = datum.n
    t_grid = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    rule = product_rule(n, order)
    ks = rule.section(euclidean(n))
    a = _re_il(lam)
    prof = []
    for t in t_grid:
        Phi = spherical_function(n, datum.tau, datum.sigma, lam, t)
        F = transform_from_spherical(datum, Phi, ks)
        nrm = rule.integrate(np.linalg.norm(F, axis=-1) ** p) ** (1 / p)
        prof.append(math.exp((rho(n) - a) * t) * nrm)
    prof = np.array(prof)
    return (float(prof.max()), prof) if return_profile else float(prof.max())


def eisenstein_hs(n, tau, sigma, lam, t) -> float:
    """``exp(2 (rho - Re(i lam)) t) ||kappa^-1 Phi(a_t)||_HS^2``."""
    b = branching(n, tau, sigma)
    Phi = spherical_function(n, tau, sigma, lam, t) / b.kappa
    return float(math.exp(2 * (rho(n) - _re_il(lam)) * t) * np.linalg.norm(Phi) ** 2)


def hs_limit_eisenstein(n, tau, sigma, lam, t_grid) -> tuple:
    """Weighted squared HS norms along ``t_grid`` and the last value as limit estimate."""
    vals = np.array([eisenstein_hs(n, tau, sigma, lam, t) for t in t_grid])
    return vals, float(vals[-1])


def hs_limit_target(n, tau, sigma, lam, c=None) -> float:
    b = branching(n, tau, sigma)
    c = c_closed(n, tau, sigma, lam) if c is None else c
    return float(b.kappa**2 * abs(c) ** 2 * b.dim_sigma)


def inversion(F, n, tau, sigma, lam, t, points, c=None, order=None, m_order=8, prefactor_power=1):
    """Recover boundary values from ``F(. a_t)``.

    ``g_t(k) = kappa^-p |c|^-2 e^{2(rho - Re(i lam)) t} pi int_K P(h a_t, k)^* F(h a_t) dh``
    evaluated at Spin(n) elements ``points``, with ``F(k)`` a callable on
    Spin(n) coefficient arrays returning V_tau vectors and ``p`` given by
    ``prefactor_power``.  The K-integral runs over ``h = k k'^-1`` with
    ``k'`` on a Haar rule built from a graded sphere rule and a Spin(n-1)
    rule, so that the kernel peak is resolved.
    """
    b = branching(n, tau, sigma)
    sig = euclidean(n)
    c = c_closed(n, tau, sigma, lam) if c is None else c
    rule = graded_rule(n, t)
    e, T = kernel_at_sections(b, lam, float(t), rule, "radial")
    m_c, m_w = spin_rule(n - 1, m_order)
    kprime, w = fibre_product(rule, m_c, m_w)
    Tm = b.tau_batch(_embed_m(n, m_c), sig)
    # P(a_t, s(x) m) = P(a_t, s(x)) tau(m)
    kern = (e[:, None, None, None] * np.einsum("iab,jbc->ijac", T, Tm)).reshape(-1, b.dim_tau, b.dim_tau)
    kinv = conjugate_batch(kprime, sig)
    wk = w[:, None, None] * kern.conj()
    pts = np.asarray(points, dtype=complex)
    step = max(1, CHUNK // len(w))
    integral = np.concatenate(
        [
            np.einsum("jba,pjb->pa", wk, F(gp_batch(pts[i : i + step, None, :], kinv[None, :, :], sig)))
            for i in range(0, len(pts), step)
        ]
    )
    pref = b.kappa ** (-prefactor_power) / abs(c) ** 2 * math.exp(2 * (rho(n) - _re_il(lam)) * t)
    return pref * integral @ b.proj.T


def _embed_m(n, m_coeffs):
    sub, sig = euclidean(n - 1), euclidean(n)
    return np.array([change_signature(Multivector(sub, c), sig).coeffs for c in m_coeffs])
