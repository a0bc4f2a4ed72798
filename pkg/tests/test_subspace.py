import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shadowlab import (Subspace, direct_sum_check, inclination, map_subspace,
                       oblique_projector, orthogonal_projector, projection_norm_bound,
                       projector_composition_norm, subspace_intersection)
from shadowlab.errors import ConditioningError, TransversalityError
from shadowlab.subspace import (composition_identity, oblique_matrix, random_subspace,
                                splitting_inclination, subspace_gap)

E1 = Subspace.span([1.0, 0.0])
E2 = Subspace.span([0.0, 1.0])
DIAG = Subspace.span([1.0, 1.0])


def transversal_pair(seed, n=None):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9)) if n is None else n
    k = int(rng.integers(1, n))
    return random_subspace(rng, n, k), random_subspace(rng, n, n - k)


seeds = st.integers(0, 2**32 - 1)


# ---------------------------------------------------------------- examples

def test_orthogonal_projector_examples():
    np.testing.assert_array_equal(orthogonal_projector(E1), [[1, 0], [0, 0]])
    np.testing.assert_array_equal(orthogonal_projector(Subspace.zero(2)), np.zeros((2, 2)))
    P = orthogonal_projector(DIAG)
    np.testing.assert_allclose(P, [[0.5, 0.5], [0.5, 0.5]], atol=1e-15)
    np.testing.assert_allclose(P, P.T, atol=0)
    np.testing.assert_allclose(P @ P, P, atol=1e-15)


def test_oblique_projector_examples():
    P = oblique_projector(E1, E2)
    np.testing.assert_allclose(P.matrix, [[1, 0], [0, 0]], atol=1e-15)
    Q = oblique_projector(E1, DIAG)
    np.testing.assert_allclose(Q.matrix, [[1, -1], [0, 0]], atol=1e-14)
    assert Q.norm == pytest.approx(math.sqrt(2), rel=1e-14)
    np.testing.assert_allclose(composition_identity(E1, DIAG), Q.matrix, atol=1e-14)


def test_oblique_projector_rejects_degenerate_sum():
    with pytest.raises(TransversalityError) as info:
        oblique_projector(E1, Subspace.span([2.0, 0.0]))
    assert info.value.gap == pytest.approx(0.0, abs=1e-12)


def test_composition_norm_examples():
    assert projector_composition_norm(E1, E2) == 0.0
    assert projector_composition_norm(E1, DIAG) == pytest.approx(1 / math.sqrt(2), rel=1e-14)
    pus = np.linalg.norm(oblique_matrix(DIAG, E1), 2)
    assert math.sqrt(1 - 1 / pus**2) == pytest.approx(1 / math.sqrt(2), rel=1e-14)


def test_composition_norm_random_5d():
    S, U = transversal_pair(11, n=5)
    value = projector_composition_norm(S, U)
    oracle = np.linalg.svd(orthogonal_projector(S) @ orthogonal_projector(U),
                           compute_uv=False)[0]
    assert 0 <= value < 1
    assert value == pytest.approx(oracle, abs=1e-12)


def test_inclination_examples():
    assert inclination(E2, E1, E2) == 0.0
    assert inclination(Subspace.span([1.0, 4.0]), E1, E2) == pytest.approx(0.25, rel=1e-14)
    assert inclination(E1, E1, E2) == math.inf


def test_map_subspace_examples():
    S = random_subspace(np.random.default_rng(0), 3, 2)
    assert subspace_gap(map_subspace(np.eye(3), S), S) < 1e-14
    img = map_subspace(np.diag([2.0, 3.0]), E1)
    assert subspace_gap(img, E1) < 1e-15
    pre = map_subspace(np.array([[1.0, 1.0], [0.0, 1.0]]), E2, "preimage")
    assert subspace_gap(pre, Subspace.span([-1.0, 1.0])) < 1e-14


def test_map_subspace_preimage_matches_nullspace_oracle():
    T = np.array([[1.0, 1.0], [0.0, 1.0]])
    # brute force: x with T x in span(e2) <=> first component of T x vanishes
    null = np.array([-T[0, 1], T[0, 0]])
    pre = map_subspace(T, E2, "preimage")
    assert abs(abs(pre.basis[:, 0] @ null) / np.linalg.norm(null) - 1) < 1e-14


def test_map_subspace_rejects_non_injective():
    with pytest.raises(ConditioningError):
        map_subspace(np.diag([0.0, 1.0]), E1)


def test_intersection_examples():
    S = random_subspace(np.random.default_rng(1), 4, 2)
    assert subspace_gap(subspace_intersection(S, S), S) < 1e-12
    E = Subspace.coordinate(3, [0, 1])
    F = Subspace.coordinate(3, [1, 2])
    assert subspace_gap(subspace_intersection(E, F), Subspace.coordinate(3, [1])) < 1e-14
    # nearly parallel lines meet only at the origin
    assert subspace_intersection(E1, Subspace.span([1.0, 1e-3])).dim == 0


def test_direct_sum_examples():
    assert direct_sum_check(E1, E2) == (True, 1.0)
    ok, gap = direct_sum_check(DIAG, DIAG)
    assert not ok and gap == pytest.approx(0.0, abs=1e-15)
    ok, gap = direct_sum_check(E1, DIAG)
    assert ok and gap == pytest.approx(math.sqrt(2) / 2, rel=1e-14)


def test_projection_norm_bound_examples():
    assert projection_norm_bound(0.0) == 2.0
    assert projection_norm_bound(1.0) == 8.0
    with pytest.raises(ValueError):
        projection_norm_bound(-0.1)


def test_projection_norm_bound_monte_carlo():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(2, 7))
        k = int(rng.integers(1, n))
        S, U = random_subspace(rng, n, k), random_subspace(rng, n, n - k)
        M = splitting_inclination(S, U)
        assert oblique_projector(S, U).norm <= projection_norm_bound(M) * (1 + 1e-8)


# ---------------------------------------------------------------- properties

@settings(max_examples=100, deadline=None)
@given(seed=seeds)
def test_complementary_projectors(seed):
    S, U = transversal_pair(seed)
    P = oblique_projector(S, U).matrix
    Q = oblique_projector(U, S).matrix
    n = S.ambient_dim
    scale = max(1.0, np.linalg.norm(P, 2)) ** 2
    assert np.linalg.norm(P + Q - np.eye(n), 2) <= 1e-10 * scale
    assert np.linalg.norm(P @ Q, 2) <= 1e-10 * scale
    assert np.linalg.norm(P @ P - P, 2) <= 1e-10 * scale


@settings(max_examples=100, deadline=None)
@given(seed=seeds)
def test_orthogonal_composition_identity(seed):
    S, U = transversal_pair(seed)
    P = oblique_matrix(S, U)
    err = np.linalg.norm(composition_identity(S, U) - P, 2) / max(1.0, np.linalg.norm(P, 2))
    assert err <= 1e-8


@settings(max_examples=100, deadline=None)
@given(seed=seeds)
def test_composition_norm_below_one_and_bounded(seed):
    S, U = transversal_pair(seed)
    value = projector_composition_norm(S, U)
    pus = np.linalg.norm(oblique_matrix(U, S), 2)
    assert value < 1
    assert value <= math.sqrt(1 - pus**-2) + 1e-12


@settings(max_examples=100, deadline=None)
@given(seed=seeds)
def test_composition_norm_adjoint_symmetry(seed):
    S, U = transversal_pair(seed)
    PS, PU = orthogonal_projector(S), orthogonal_projector(U)
    assert abs(np.linalg.norm(PS @ PU, 2) - np.linalg.norm(PU @ PS, 2)) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(seed=seeds)
def test_range_gap_agrees_for_either_projector(seed):
    # two projectors with the same range induce the same orthogonal projector
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    k = int(rng.integers(1, n))
    S = random_subspace(rng, n, k)
    U1, U2 = random_subspace(rng, n, n - k), random_subspace(rng, n, n - k)
    V = random_subspace(rng, n, k)
    r1 = Subspace.span(oblique_matrix(S, U1))
    r2 = Subspace.span(oblique_matrix(S, U2))
    assert abs(subspace_gap(r1, V) - subspace_gap(r2, V)) <= 1e-10


@settings(max_examples=50, deadline=None)
@given(seed=seeds)
def test_small_perturbation_keeps_direct_sum(seed):
    S, U = transversal_pair(seed)
    ok, gap = direct_sum_check(S, U)
    assert ok
    rng = np.random.default_rng(seed + 1)
    eta = 0.24 * gap
    def bump(B):
        D = rng.standard_normal(B.basis.shape)
        return Subspace.span(B.basis + eta * D / np.linalg.norm(D, 2))
    assert direct_sum_check(bump(S), bump(U))[0]


@settings(max_examples=50, deadline=None)
@given(seed=seeds)
def test_image_then_preimage_round_trip(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    k = int(rng.integers(0, n + 1))
    T = rng.standard_normal((n, n)) + 3 * np.eye(n)
    S = random_subspace(rng, n, k)
    back = map_subspace(T, map_subspace(T, S), "preimage")
    assert back.dim == S.dim
    assert subspace_gap(back, S) <= 1e-9


@settings(max_examples=50, deadline=None)
@given(seed=seeds)
def test_inclination_within_a_priori_bound(seed):
    rng = np.random.default_rng([seed, 1])
    S, U = transversal_pair(seed)
    V = random_subspace(rng, S.ambient_dim, U.dim)
    value = inclination(V, S, U)
    Pus = oblique_matrix(U, S) @ V.basis
    smin = np.linalg.svd(Pus, compute_uv=False)[-1]
    assert value <= 1 / smin + 1 + 1e-9
