import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import null_space

from spinorpoisson.clifford import Multivector, change_signature, euclidean
from spinorpoisson.spin import random_compact
from spinorpoisson.spinor import (
    LabelError,
    Spinor,
    branching,
    check_labels,
    generator_matrices,
    sigma_labels,
    tau_algebra_action,
    tau_labels,
    tau_matrix,
)

NS = [2, 3, 4, 5, 6, 7]


def all_branchings(ns=NS):
    return [(n, t, s) for n in ns for t in tau_labels(n) for s in sigma_labels(n)]


@pytest.mark.parametrize("n", NS)
def test_generators_satisfy_clifford_relations(n):
    G = generator_matrices(n)
    eye = np.eye(G.shape[1])
    for i in range(n):
        for j in range(n):
            anti = G[i] @ G[j] + G[j] @ G[i]
            assert np.allclose(anti, -2 * eye * (i == j), atol=1e-14)
        # skew-adjoint, so Spin(n) acts unitarily
        assert np.allclose(G[i].conj().T, -G[i])


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_tau_is_an_algebra_map(n, rng):
    sig = euclidean(n)
    for _ in range(3):
        a = Multivector(sig, rng.normal(size=sig.size) + 1j * rng.normal(size=sig.size))
        b = Multivector(sig, rng.normal(size=sig.size))
        assert np.allclose(tau_matrix(n, a * b), tau_matrix(n, a) @ tau_matrix(n, b), atol=1e-12)


def test_small_module_examples():
    # n = 2: tau(e_1) sends 1 to f_1 and f_1 to -1
    one, f1 = Spinor.monomial(1), Spinor.monomial(1, 1)
    e1 = Multivector.blade(euclidean(2), 1)
    assert tau_algebra_action(2, e1, one).allclose(f1)
    assert tau_algebra_action(2, e1, f1).allclose(Spinor(1, [-1, 0]))
    assert Spinor.monomial(2, 2, 1).allclose(Spinor.monomial(2, 1, 2, value=-1))


@pytest.mark.parametrize("n,tau,sigma", all_branchings(), ids=str)
def test_dimensions_and_kappa(n, tau, sigma):
    b = branching(n, tau, sigma)
    assert b.dim_tau == 2 ** ((n - 1) // 2)
    assert b.dim_sigma == 2 ** ((n - 2) // 2)
    assert b.kappa == (math.sqrt(2) if n % 2 else 1.0)
    assert b.kappa ** 2 == pytest.approx(b.dim_tau / b.dim_sigma, rel=1e-15)


@pytest.mark.parametrize("n,tau,sigma", all_branchings(), ids=str)
def test_iota_is_an_isometric_intertwiner(n, tau, sigma, rng):
    b = branching(n, tau, sigma)
    assert np.allclose(b.proj @ b.iota, np.eye(b.dim_sigma), atol=1e-12)
    for _ in range(4):
        m = random_compact(n - 1, rng)
        mm = change_signature(m, euclidean(n))
        lhs = b.tau_of(mm) @ b.iota
        rhs = b.iota @ b.sigma_of(m)
        assert np.max(np.abs(lhs - rhs)) <= 1e-10
        S = b.sigma_of(m)
        assert np.allclose(S.conj().T @ S, np.eye(b.dim_sigma), atol=1e-10)


@pytest.mark.parametrize("n,tau,sigma", all_branchings(), ids=str)
def test_tau_is_unitary_and_preserves_v_tau(n, tau, sigma, rng):
    b = branching(n, tau, sigma)
    for _ in range(4):
        k = random_compact(n, rng)
        full = tau_matrix(n, k)
        assert np.allclose(full.conj().T @ full, np.eye(full.shape[0]), atol=1e-10)
        B = b.basis_tau
        # no leakage out of V_tau
        leak = full @ B - B @ (B.T @ full @ B)
        assert np.max(np.abs(leak)) <= 1e-10


@pytest.mark.parametrize("n,tau,sigma", all_branchings(), ids=str)
def test_adjoint_of_iota(n, tau, sigma, rng):
    b = branching(n, tau, sigma)
    v = rng.normal(size=b.dim_sigma) + 1j * rng.normal(size=b.dim_sigma)
    w = rng.normal(size=b.dim_tau) + 1j * rng.normal(size=b.dim_tau)
    assert np.vdot(w, b.embed(v)) == pytest.approx(np.vdot(b.project(w), v), abs=1e-12)


@pytest.mark.parametrize("n,tau,sigma", all_branchings([3, 4, 5, 6]), ids=str)
def test_tau_and_sigma_are_irreducible(n, tau, sigma):
    b = branching(n, tau, sigma)

    def commutant_dim(mats, dim):
        rows = [np.kron(np.eye(dim), A) - np.kron(A.T, np.eye(dim)) for A in mats]
        return null_space(np.vstack(rows)).shape[1]

    sig = euclidean(n)
    gens = [Multivector.blade(sig, i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    assert commutant_dim([b.tau_of(X) for X in gens], b.dim_tau) == 1
    sub = euclidean(n - 1)
    mgens = [Multivector.blade(sub, i, j) for i in range(1, n) for j in range(i + 1, n)]
    assert commutant_dim([b.sigma_of(X) for X in mgens], b.dim_sigma) == 1


@given(st.integers(2, 7), st.sampled_from(["full", "plus", "minus", "both", ""]))
def test_label_validation(n, label):
    ok_tau = label in tau_labels(n)
    try:
        check_labels(n, label, sigma_labels(n)[0])
        assert ok_tau
    except LabelError:
        assert not ok_tau


def test_bad_labels_raise():
    with pytest.raises(LabelError):
        branching(3, "plus", "plus")
    with pytest.raises(LabelError):
        branching(4, "plus", "plus")
    with pytest.raises(LabelError):
        check_labels(1, "full", "full")
