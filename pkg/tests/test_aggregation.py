import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ilmbm.aggregation import SimplexQP, aggregate, build_qp, solve_simplex_qp
from ilmbm.lmqn import BFGS, SR1, CorrectionStore
from reference import GridQP, phi, random_qp

E1, E2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])

_GRID = None


def grid():
    global _GRID
    if _GRID is None:
        _GRID = GridQP(1e-3)
    return _GRID


# -- build_qp --------------------------------------------------------------


@pytest.mark.parametrize("mode", [BFGS, SR1])
def test_build_qp_identity_metric(mode):
    qp = build_qp(CorrectionStore(2), mode, False, 0.5, E1, E2, E1 + E2, 0.55, 0.1)
    np.testing.assert_allclose(qp.G, [[1, 0, 1], [0, 1, 1], [1, 1, 2]])
    np.testing.assert_allclose(qp.b, [0.0, 0.55, 0.1])


def test_build_qp_correction_scales_identity_gram():
    plain = build_qp(CorrectionStore(2), SR1, False, 0.5, E1, E2, E1 + E2, 0.0, 0.0)
    corrected = build_qp(CorrectionStore(2), SR1, True, 0.5, E1, E2, E1 + E2, 0.0, 0.0)
    np.testing.assert_allclose(corrected.G, 1.5 * plain.G)


def test_build_qp_uses_the_metric():
    store = CorrectionStore(2)
    store.try_push_curvature_pair([1.0, 0.0], [0.5, 0.0])
    V = np.array([E1, E2, E1 + E2])
    qp = build_qp(store, BFGS, False, 0.5, *V, 0.0, 0.0)
    Dv = store.apply(BFGS, V)
    np.testing.assert_allclose(qp.G, V @ Dv.T, rtol=1e-14)
    np.testing.assert_array_equal(qp.G, qp.G.T)


# -- solver for the simplex QP --------------------------------------------


def test_identity_zero_b_gives_barycentre():
    lam = solve_simplex_qp(SimplexQP(np.eye(3), np.zeros(3)))
    np.testing.assert_allclose(lam, [1 / 3, 1 / 3, 1 / 3], atol=1e-15)


def test_identity_large_b_gives_first_vertex():
    lam = solve_simplex_qp(SimplexQP(np.eye(3), np.array([0.0, 10.0, 10.0])))
    np.testing.assert_array_equal(lam, [1.0, 0.0, 0.0])


def test_ties_prefer_third_then_second():
    # phi is identically zero, so every point of the simplex is optimal
    lam = solve_simplex_qp(SimplexQP(np.zeros((3, 3)), np.zeros(3)))
    np.testing.assert_array_equal(lam, [0.0, 0.0, 1.0])
    # first and second vertex tie, third is worse
    lam = solve_simplex_qp(SimplexQP(np.zeros((3, 3)), np.array([0.0, 0.0, 1.0])))
    np.testing.assert_array_equal(lam, [0.0, 1.0, 0.0])


def test_tie_preference_is_configurable():
    lam = solve_simplex_qp(SimplexQP(np.zeros((3, 3)), np.zeros(3)), prefer=(0,))
    assert lam[0] == 1.0


def test_rank_one_gram_with_common_vector():
    # all three subgradients equal: G = ones, phi = 1 + 2 b.lam, vertex e1 wins
    qp = SimplexQP(np.ones((3, 3)), np.array([0.0, 0.3, 0.2]))
    np.testing.assert_allclose(solve_simplex_qp(qp), [1.0, 0.0, 0.0])


@given(seed=st.integers(0, 2**32 - 1))
def test_matches_grid_bruteforce(seed):
    G, b = random_qp(np.random.default_rng(seed))
    lam = solve_simplex_qp(SimplexQP(G, b))
    assert np.all(lam >= 0) and abs(lam.sum() - 1.0) <= 1e-12
    best_grid = grid().minima(G[None], b[None])[0]
    assert phi(G, b, lam) <= best_grid + 1e-5


@given(seed=st.integers(0, 2**32 - 1))
def test_no_worse_than_any_vertex(seed):
    G, b = random_qp(np.random.default_rng(seed))
    val = phi(G, b, solve_simplex_qp(SimplexQP(G, b)))
    for i in range(3):
        e = np.eye(3)[i]
        assert val <= phi(G, b, e) + 1e-12 * (1 + abs(phi(G, b, e)))


@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(1e-8, 1e8))
def test_kkt_conditions(seed, scale):
    G, b = random_qp(np.random.default_rng(seed))
    G, b = G * scale, b * scale
    lam = solve_simplex_qp(SimplexQP(G, b))
    grad = 2.0 * (G @ lam + b)
    mu = grad @ lam  # multiplier of the equality constraint
    tol = 1e-8 * (1.0 + np.abs(G).max() + np.abs(b).max())
    assert np.all(grad >= mu - tol)
    assert np.all(np.abs((grad - mu) * lam) <= tol)


def test_monotone_against_previous_aggregate():
    """phi(lam*) never exceeds phi(0, 0, 1), the value carried over from the last step."""
    rng = np.random.default_rng(7)
    for _ in range(200):
        G, b = random_qp(rng)
        lam = solve_simplex_qp(SimplexQP(G, b))
        assert phi(G, b, lam) <= phi(G, b, np.array([0.0, 0.0, 1.0])) + 1e-12


# -- aggregate -------------------------------------------------------------


def test_aggregate_keeps_previous():
    out = aggregate([0.0, 0.0, 1.0], E1, E2, np.array([0.2, 0.4]), 0.5, 0.3)
    np.testing.assert_array_equal(out.xi_tilde, [0.2, 0.4])
    assert out.beta_tilde == 0.3


def test_aggregate_serious_reset():
    out = aggregate([1.0, 0.0, 0.0], E1, E2, np.array([0.2, 0.4]), 0.5, 0.3)
    np.testing.assert_array_equal(out.xi_tilde, E1)
    assert out.beta_tilde == 0.0


def test_aggregate_mixes_locality_measures():
    out = aggregate([0.0, 0.5, 0.5], E1, E2, E1 + E2, 0.4, 0.2)
    assert out.beta_tilde == pytest.approx(0.3)
    np.testing.assert_allclose(out.xi_tilde, [0.5, 1.0])


@given(l1=st.floats(0, 1), l2=st.floats(0, 1), b1=st.floats(0, 10), b2=st.floats(0, 10))
def test_aggregate_beta_nonnegative(l1, l2, b1, b2):
    if l1 + l2 > 1:
        l1, l2 = l1 / (l1 + l2), l2 / (l1 + l2)
    lam = [l1, l2, max(1.0 - l1 - l2, 0.0)]
    assert aggregate(lam, E1, E2, E1, b1, b2).beta_tilde >= 0.0
