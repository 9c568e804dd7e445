import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st

from ncq.algebra import (
    INF,
    BlockAlgebra,
    NotAStateError,
    NotHermitianError,
    absolute_value,
    as_state,
    functional_calculus,
    inner,
    lp_norm,
    p_power_derivative,
    p_power_derivative_fd,
    pure_state,
    random_element,
    random_hermitian,
    random_state,
    random_unitary,
    rescale_trace,
    segal_entropy,
    tensor,
    tensor_algebra,
    trace,
)

ALGEBRAS = [
    BlockAlgebra.matrix(2),
    BlockAlgebra.matrix(3, 1.0),
    BlockAlgebra.commutative(3),
    BlockAlgebra((1, 2), (1 / 3, 1 / 3)),
    BlockAlgebra((1, 1, 1, 1, 2), (1 / 8,) * 4 + (1 / 4,)),
    BlockAlgebra((2, 3), (0.7, 0.1)),
]
alg_st = st.sampled_from(ALGEBRAS)
seed_st = st.integers(0, 2**31 - 1)


def schatten_oracle(x, p):
    """τ(|x|^p)^{1/p} through scipy's fractional matrix power."""
    total = 0.0
    for w, b in zip(x.parent.trace_weights, x.blocks):
        total += w * np.trace(sla.fractional_matrix_power(b.conj().T @ b, p / 2)).real
    return total ** (1 / p)


def entropy_oracle(rho):
    return -sum(w * np.trace(b @ sla.logm(b)).real for w, b in zip(rho.parent.trace_weights, rho.blocks))


def test_algebra_geometry():
    a = BlockAlgebra((1, 1, 1, 1, 2), (1 / 8,) * 4 + (1 / 4,))
    assert a.dim == 8 and a.ambient_size == 6
    assert a.offsets == (0, 1, 2, 3, 4)
    assert a.unit_trace == pytest.approx(1.0)
    assert a.is_normalized
    assert BlockAlgebra.matrix(3).trace_weights == (1 / 3,)


@pytest.mark.parametrize("sizes, weights", [((0,), (1.0,)), ((2,), (-1.0,)), ((2, 2), (1.0,))])
def test_invalid_algebras_rejected(sizes, weights):
    with pytest.raises(ValueError):
        BlockAlgebra(sizes, weights)


def test_coordinates_are_trace_orthonormal():
    rng = np.random.default_rng(0)
    for alg in ALGEBRAS:
        x, y = random_element(alg, rng), random_element(alg, rng)
        assert inner(x, y) == pytest.approx(trace(x.H @ y), abs=1e-12)


@pytest.mark.parametrize("alg", ALGEBRAS)
@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.7])
def test_lp_norm_matches_fractional_power(alg, p):
    x = random_element(alg, np.random.default_rng(3))
    assert lp_norm(x, p) == pytest.approx(schatten_oracle(x, p), rel=1e-10)


def test_lp_norm_infinity_is_operator_norm():
    alg = ALGEBRAS[5]
    x = random_element(alg, np.random.default_rng(1))
    assert lp_norm(x, INF) == pytest.approx(max(sla.norm(b, 2) for b in x.blocks))
    assert lp_norm(x, float("inf")) == lp_norm(x, INF)
    with pytest.raises(ValueError):
        lp_norm(x, 0.5)


@pytest.mark.parametrize("alg", ALGEBRAS)
def test_segal_entropy_matches_logm(alg):
    rho = random_state(alg, 11, full_support=True).element
    assert segal_entropy(rho) == pytest.approx(entropy_oracle(rho), abs=1e-10)


def test_entropy_known_values():
    m2 = BlockAlgebra.matrix(2)
    assert segal_entropy(m2.unit()) == pytest.approx(0.0, abs=1e-15)
    pure = pure_state(m2, 0, np.array([1.0, 0.0]))
    assert segal_entropy(pure) == pytest.approx(-math.log(2))
    # Tr convention on M_3: maximally mixed state has entropy ln 3
    m3 = BlockAlgebra.matrix(3, 1.0)
    assert segal_entropy(m3.unit() * (1 / 3)) == pytest.approx(math.log(3))


def test_state_validation():
    m2 = BlockAlgebra.matrix(2)
    with pytest.raises(NotAStateError):
        as_state(m2.unit() * 2)
    with pytest.raises(NotAStateError):
        as_state(m2.element([np.diag([2.0, -0.5])]) * (1 / 0.75))
    with pytest.raises(NotAStateError):
        as_state(m2.element([np.array([[1, 1], [0, 1]])]))
    with pytest.raises(NotHermitianError):
        functional_calculus(m2.element([np.array([[1, 1], [0, 1]])]), np.sqrt)


def test_p_power_derivative_routes_agree():
    for alg in ALGEBRAS:
        rho = random_state(alg, 5, full_support=True)
        assert p_power_derivative_fd(rho) == pytest.approx(p_power_derivative(rho), abs=1e-6)


def test_rescale_trace_identity():
    alg = ALGEBRAS[3]
    rho = random_state(alg, 2, full_support=True)
    for t in (0.25, 3.0, 10.0):
        moved, shift = rescale_trace(rho, t)
        assert segal_entropy(rho) == pytest.approx(segal_entropy(moved) + shift, abs=1e-12)
    with pytest.raises(ValueError):
        rescale_trace(rho, 0.0)


def test_tensor_is_multiplicative_on_traces():
    rng = np.random.default_rng(4)
    a, b = ALGEBRAS[3], ALGEBRAS[0]
    x, y = random_element(a, rng), random_element(b, rng)
    assert trace(tensor(x, y)) == pytest.approx(trace(x) * trace(y))
    assert tensor_algebra(a, b).unit_trace == pytest.approx(a.unit_trace * b.unit_trace)


def test_absolute_value_and_functional_calculus():
    rng = np.random.default_rng(8)
    alg = ALGEBRAS[5]
    x = random_element(alg, rng)
    ax = absolute_value(x)
    assert (ax @ ax).distance(x.H @ x) < 1e-10
    h = random_hermitian(alg, rng)
    e = functional_calculus(h, np.exp)
    for b, hb in zip(e.blocks, h.blocks):
        assert np.allclose(b, sla.expm(hb))


def test_random_unitary_is_unitary():
    u = random_unitary(4, np.random.default_rng(0))
    assert np.allclose(u @ u.conj().T, np.eye(4))


# ----------------------------------------------------------------- properties


@given(alg_st, seed_st, st.floats(1.01, 8.0))
def test_holder_inequality(alg, seed, p):
    rng = np.random.default_rng(seed)
    x, y = random_element(alg, rng), random_element(alg, rng)
    q = p / (p - 1)
    assert abs(trace(x @ y)) <= lp_norm(x, p) * lp_norm(y, q) * (1 + 1e-12)


@given(alg_st, seed_st)
def test_entropy_at_most_log_unit_trace(alg, seed):
    rho = random_state(alg, seed)
    assert segal_entropy(rho) <= math.log(alg.unit_trace) + 1e-12


@given(seed_st, st.lists(st.floats(1.0, 10.0), min_size=2, max_size=4))
def test_norms_increase_with_p_for_normalized_trace(seed, ps):
    x = random_element(BlockAlgebra((1, 2), (1 / 3, 1 / 3)), np.random.default_rng(seed))
    vals = [lp_norm(x, p) for p in sorted(ps)] + [lp_norm(x, INF)]
    assert all(a <= b * (1 + 1e-12) for a, b in zip(vals, vals[1:]))


@given(alg_st, seed_st)
def test_norm_triangle_and_unitary_invariance(alg, seed):
    rng = np.random.default_rng(seed)
    x, y = random_element(alg, rng), random_element(alg, rng)
    for p in (1.0, 2.5, INF):
        assert lp_norm(x + y, p) <= (lp_norm(x, p) + lp_norm(y, p)) * (1 + 1e-12)
    us = [random_unitary(n, rng) for n in alg.block_sizes]
    ux = alg.element([u @ b for u, b in zip(us, x.blocks)])
    assert lp_norm(ux, 1.7) == pytest.approx(lp_norm(x, 1.7), rel=1e-10)
