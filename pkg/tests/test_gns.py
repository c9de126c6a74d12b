import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinlattice.errors import GuardError
from spinlattice.gns import (
    commutant_dimension,
    gns_construct,
    gram_matrix,
    matrix_unit,
    purity_irreducibility_crosscheck,
    reconstruction_residual,
)
from spinlattice.sampling import ginibre, random_density_matrix, random_pure_vector, random_unitary

seeds = st.integers(0, 2**32 - 1)


def brute_gram(D, rho):
    units = [matrix_unit(D, i, j) for i in range(D) for j in range(D)]
    return np.array([[np.trace(rho @ a.conj().T @ b) for b in units] for a in units])


def brute_commutant(rep):
    # null space of X -> [X, pi(E_ij)] over every matrix unit, by SVD
    D, r = rep.algebra_dim, rep.gns_dim
    rows = []
    for i, j in itertools.product(range(D), repeat=2):
        p = rep.rep(matrix_unit(D, i, j))
        block = np.zeros((r * r, r * r), dtype=complex)
        for k in range(r * r):
            x = np.zeros(r * r, dtype=complex)
            x[k] = 1
            x = x.reshape(r, r)
            block[:, k] = (x @ p - p @ x).reshape(-1)
        rows.append(block)
    s = np.linalg.svd(np.vstack(rows), compute_uv=False)
    return int(np.sum(s <= 1e-9 * max(s[0], 1)))


def diag_state(*p):
    return np.diag(np.array(p, dtype=complex))


def test_vector_state_on_m2():
    rho = diag_state(1, 0)
    rep = gns_construct(2, rho)
    assert rep.gns_dim == 2 == np.linalg.matrix_rank(brute_gram(2, rho))
    assert commutant_dimension(rep) == 1 == brute_commutant(rep)


def test_mixed_diagonal_state_on_m2():
    rho = diag_state(0.3, 0.7)
    rep = gns_construct(2, rho)
    assert rep.gns_dim == 4
    assert commutant_dimension(rep) == 4 == brute_commutant(rep)
    assert commutant_dimension(gns_construct(2, np.eye(2) / 2)) == 4


def test_gram_matrix_matches_brute_force():
    rng = np.random.default_rng(0)
    for D in (2, 3):
        rho = random_density_matrix(D, rng)
        assert np.allclose(gram_matrix(D, rho), brute_gram(D, rho))


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(2, 4))
def test_reconstruction(seed, D):
    rng = np.random.default_rng(seed)
    rho = random_density_matrix(D, rng)
    rep = gns_construct(D, rho)
    assert abs(np.linalg.norm(rep.cyclic_vector) - 1) <= 1e-12
    assert reconstruction_residual(rep, rho, [ginibre(D, rng) for _ in range(20)]) <= 1e-10


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(2, 4), st.data())
def test_gns_dimension_is_rank_times_d(seed, D, data):
    rng = np.random.default_rng(seed)
    rank = data.draw(st.integers(1, D))
    vecs = random_unitary(D, rng)[:, :rank]
    weights = rng.uniform(0.1, 1, size=rank)
    rho = (vecs * (weights / weights.sum())) @ vecs.conj().T
    rep = gns_construct(D, rho)
    assert rep.gns_dim == np.linalg.matrix_rank(brute_gram(D, rho), tol=1e-9) == rank * D


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_representation_is_star_homomorphism_and_contractive(seed):
    rng = np.random.default_rng(seed)
    D = 3
    rho = random_density_matrix(D, rng)
    rep = gns_construct(D, rho)
    a, b = ginibre(D, rng), ginibre(D, rng)
    assert np.linalg.norm(rep.rep(a @ b) - rep.rep(a) @ rep.rep(b), 2) <= 1e-9
    assert np.linalg.norm(rep.rep(a.conj().T) - rep.rep(a).conj().T, 2) <= 1e-9
    assert np.linalg.norm(rep.rep(a), 2) <= np.linalg.norm(a, 2) + 1e-9


def test_faithful_state_gives_isometric_injective_representation():
    rng = np.random.default_rng(1)
    D = 3
    rho = 0.5 * random_density_matrix(D, rng) + 0.5 * np.eye(D) / D
    rep = gns_construct(D, rho)
    for _ in range(10):
        a = ginibre(D, rng)
        assert np.linalg.norm(rep.rep(a), 2) == pytest.approx(np.linalg.norm(a, 2), rel=1e-8)
    assert rep.gns_dim == D * D


def test_inner_automorphism_is_unitarily_implemented():
    rng = np.random.default_rng(2)
    D = 2
    rho = diag_state(0.3, 0.7)
    rep = gns_construct(D, rho)
    u = random_unitary(D, rng)
    # for the representation on M_D / N the left multiplication by u implements Ad(u)
    pu = rep.rep(u)
    a = ginibre(D, rng)
    assert np.allclose(pu @ rep.rep(a) @ pu.conj().T, rep.rep(u @ a @ u.conj().T), atol=1e-10)


def test_purity_crosscheck_examples():
    rng = np.random.default_rng(3)
    psi = random_pure_vector(3, rng)
    assert purity_irreducibility_crosscheck(3, np.outer(psi, psi.conj())) == (True, 1)
    assert purity_irreducibility_crosscheck(2, np.eye(2) / 2) == (False, 4)
    theta, phase = 0.7, 1.9
    boundary = np.array([np.cos(theta / 2), np.exp(1j * phase) * np.sin(theta / 2)])
    assert purity_irreducibility_crosscheck(2, np.outer(boundary, boundary.conj())) == (True, 1)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_purity_iff_irreducible_on_qubits(seed):
    rho = random_density_matrix(2, np.random.default_rng(seed))
    is_pure, cdim = purity_irreducibility_crosscheck(2, rho)
    assert is_pure == (cdim == 1)


def test_dimension_cap():
    with pytest.raises(GuardError):
        gns_construct(17, np.eye(17) / 17)
