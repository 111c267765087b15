import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpqdim.quantum_core import (
    NO_DETECT,
    BipartiteState,
    MeasurementBasis,
    StateEnsemble,
    basis_ket,
    born_probability,
    joint_distribution,
    sample_outcome,
    sample_outcomes,
    tensor,
)
from qpqdim.state_families import same_subspace_branches, same_subspace_state

PLUS = np.array([1, 1]) / math.sqrt(2)


def test_tensor_basis_products():
    out = tensor(basis_ket(2, 0), basis_ket(3, 0))
    assert out.shape == (6,)
    np.testing.assert_array_equal(out, basis_ket(6, 0))
    np.testing.assert_array_equal(tensor(basis_ket(2, 1), basis_ket(3, 2)), basis_ket(6, 5))


def test_tensor_plus_plus():
    # (a|0> + b|1>)(c|0> + d|1>) = ac, ad, bc, bd with all factors 1/sqrt(2)
    np.testing.assert_allclose(tensor(PLUS, PLUS), [0.5, 0.5, 0.5, 0.5], atol=1e-15)


def test_born_orthogonal_first_factor():
    phi0, _ = same_subspace_branches(0.7)
    state = BipartiteState.product(basis_ket(2, 0), phi0)
    assert born_probability(state, basis_ket(2, 1), phi0) == 0.0


def test_born_same_subspace_entries():
    theta = math.pi / 3
    phi0, phi1 = same_subspace_branches(theta)
    state = same_subspace_state(theta)
    assert born_probability(state, basis_ket(2, 0), phi0) == pytest.approx(0.5, abs=1e-12)
    assert born_probability(state, basis_ket(2, 0), phi1) == pytest.approx(0.125, abs=1e-12)


def test_born_dimension_mismatch():
    with pytest.raises(ValueError):
        born_probability(same_subspace_state(0.3), basis_ket(2, 0), basis_ket(2, 0))


def test_state_validation():
    with pytest.raises(ValueError, match="normalized"):
        BipartiteState(2, 3, np.ones(6))
    with pytest.raises(ValueError, match="amplitudes"):
        BipartiteState(2, 3, basis_ket(4, 0))
    with pytest.raises(ValueError, match="dims"):
        BipartiteState(3, 2, basis_ket(6, 0))


def test_basis_validation():
    with pytest.raises(ValueError, match="orthonormal"):
        MeasurementBasis(2, ((0, basis_ket(2, 0)), (1, PLUS)))
    with pytest.raises(ValueError, match="completion"):
        MeasurementBasis(3, ((0, basis_ket(3, 0)),))
    b = MeasurementBasis(3, ((0, basis_ket(3, 0)),), NO_DETECT)
    assert b.labels() == [0, NO_DETECT]


def test_ensemble_validation():
    s = same_subspace_state(0.4)
    with pytest.raises(ValueError):
        StateEnsemble(((0.5, s), (0.4, s)))
    with pytest.raises(ValueError):
        StateEnsemble(((1.5, s), (-0.5, s)))


def _computational(dim):
    return MeasurementBasis(dim, tuple((k, basis_ket(dim, k)) for k in range(dim)))


def test_joint_point_mass():
    state = BipartiteState(2, 3, basis_ket(6, 4))  # |1>|1>
    dist = joint_distribution(state, _computational(2), _computational(3))
    assert dist[(1, 1)] == pytest.approx(1.0)
    assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)
    assert list(dist) == [(b, a) for b in (0, 1) for a in (0, 1, 2)]


def test_joint_with_completion_outcome():
    state = same_subspace_state(0.9, offset_i=1)  # support on |1>, |2>
    partial = MeasurementBasis(3, ((0, basis_ket(3, 0)), (1, basis_ket(3, 1))), NO_DETECT)
    dist = joint_distribution(state, _computational(2), partial)
    assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)
    # |2> mass per Bob outcome is (1/2) sin^2(theta/2)
    assert dist[(0, NO_DETECT)] == pytest.approx(0.5 * math.sin(0.45) ** 2, abs=1e-12)


def _random_state(data, dim_a):
    re = data.draw(st.lists(st.floats(-1, 1), min_size=2 * dim_a, max_size=2 * dim_a))
    im = data.draw(st.lists(st.floats(-1, 1), min_size=2 * dim_a, max_size=2 * dim_a))
    v = np.array(re) + 1j * np.array(im)
    n = np.linalg.norm(v)
    if n < 1e-3:
        v, n = basis_ket(2 * dim_a, 0), 1.0
    return BipartiteState(2, dim_a, v / n)


def _random_unitary(seed, dim):
    r = np.random.default_rng(seed)
    q, _ = np.linalg.qr(r.normal(size=(dim, dim)) + 1j * r.normal(size=(dim, dim)))
    return q


@settings(max_examples=60, deadline=None)
@given(st.data(), st.integers(0, 2**32 - 1), st.floats(0, 2 * math.pi))
def test_born_global_phase_invariance(data, seed, phase):
    state = _random_state(data, 3)
    u, v = _random_unitary(seed, 2)[:, 0], _random_unitary(seed + 1, 3)[:, 0]
    assert born_probability(state.with_phase(phase), u, v) == pytest.approx(
        born_probability(state, u, v), abs=1e-12
    )


@settings(max_examples=60, deadline=None)
@given(st.data(), st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_joint_marginals_match_partial_trace(data, seed, keep):
    state = _random_state(data, 3)
    ub, ua = _random_unitary(seed, 2), _random_unitary(seed + 7, 3)
    basis_b = MeasurementBasis(2, tuple((k, ub[:, k]) for k in range(2)))
    basis_a = MeasurementBasis(3, tuple((k, ua[:, k]) for k in range(keep)), NO_DETECT if keep < 3 else None)
    dist = joint_distribution(state, basis_b, basis_a)
    assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)
    rho_b = state.matrix() @ state.matrix().conj().T
    rho_a = state.matrix().T @ state.matrix().conj()
    for k in range(2):
        marg = sum(p for (lb, la), p in dist.items() if lb == k)
        assert marg == pytest.approx((ub[:, k].conj() @ rho_b @ ub[:, k]).real, abs=1e-12)
    for k in range(keep):
        marg = sum(p for (lb, la), p in dist.items() if la == k)
        assert marg == pytest.approx((ua[:, k].conj() @ rho_a @ ua[:, k]).real, abs=1e-12)


def test_sample_point_mass(rng):
    assert all(sample_outcome({"a": 0.0, "b": 1.0, "c": 0.0}, rng) == "b" for _ in range(100))


def test_sample_fair_coin(rng):
    n = 10**6
    draws = np.array(sample_outcomes({0: 0.5, 1: 0.5}, rng, n))
    assert abs(draws.mean() - 0.5) <= 3 * math.sqrt(0.25 / n)


def test_sample_deterministic():
    dist = {0: 0.2, 1: 0.3, 2: 0.5}
    a = sample_outcomes(dist, np.random.default_rng(7), 1000)
    b = sample_outcomes(dist, np.random.default_rng(7), 1000)
    assert a == b
