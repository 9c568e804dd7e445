import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ncq.algebra import BlockAlgebra, random_element, random_state, segal_entropy, tensor, tensor_algebra, trace
from ncq.channel import (
    Channel,
    EBClass,
    IncommensurateWeightsError,
    adjoint_channel,
    apply,
    choi,
    classify_entanglement_breaking,
    completely_depolarizing,
    compose,
    conditional_expectation,
    covariant_channel,
    embed_to_matrix_algebra,
    embedding_for,
    fourier_multiplier_vn,
    herz_schur_channel,
    identity_channel,
    multiplicative_domain,
    pinching,
    random_channel,
    subgroup_expectation,
    tensor_channel,
    transpose_map,
)
from ncq.groups import (
    GroupFunction,
    build_cyclic,
    build_symmetric3,
    indicator,
    pauli_rep,
    random_positive_definite,
    s3_irreps,
)
from ncq.qgroup import build_group_vn

M2 = BlockAlgebra.matrix(2)
MIXED = BlockAlgebra((1, 2), (1 / 3, 1 / 3))


def test_identity_choi_is_rank_one_and_positive():
    c = choi(identity_channel(BlockAlgebra.matrix(3)))
    mu = np.linalg.eigvalsh(c.matrix)
    assert np.sum(mu > 1e-9) == 1
    assert mu.min() > -1e-12


def test_identity_channel_flags():
    t = identity_channel(MIXED)
    assert t.cp and t.tp and t.unital and t.ppt is False


@pytest.mark.parametrize("n", [2, 3])
def test_transpose_is_positive_but_not_completely_positive(n):
    t = transpose_map(BlockAlgebra.matrix(n))
    assert t.tp and t.unital
    assert not t.cp
    # positive: eigenvalues of x^T equal those of x
    x = random_state(BlockAlgebra.matrix(n), 3).element
    assert apply(t, x).min_eigenvalue() >= -1e-12


def test_superoperator_shape_is_checked():
    with pytest.raises(ValueError):
        Channel(M2, M2, np.eye(3))


def test_herz_schur_is_a_schur_product():
    g = build_symmetric3()
    phi = random_positive_definite(g, 11)
    t = herz_schur_channel(phi)
    alg = t.domain
    x = random_element(alg, np.random.default_rng(2))
    pattern = np.array([[phi.values[g.op(s, g.inv[u])] for u in range(6)] for s in range(6)])
    assert np.allclose(apply(t, x).blocks[0], x.blocks[0] * pattern)
    assert t.cp and t.tp and t.unital


def test_covariant_channel_matches_explicit_sum():
    rep = pauli_rep()
    f = np.array([2.0, 1.0, 0.5, 0.5])
    t = covariant_channel(rep, f)
    x = random_element(M2, np.random.default_rng(4))
    want = sum(fs * u @ x.blocks[0] @ u.conj().T for fs, u in zip(f, rep.matrices)) / 4
    assert np.allclose(apply(t, x).blocks[0], want)


def test_covariant_channel_rejects_bad_density():
    with pytest.raises(ValueError):
        covariant_channel(pauli_rep(), [1.0, 1.0, 1.0, -1.0])


def test_fourier_multiplier_scales_group_unitaries():
    g = build_symmetric3()
    qg = build_group_vn(g)
    phi = random_positive_definite(g, 5)
    t = fourier_multiplier_vn(phi)
    for s in range(6):
        assert apply(t, qg.basis[s]).distance(qg.basis[s] * phi.values[s]) < 1e-12


def test_compose_and_adjoint():
    a = random_channel(MIXED, 1)
    b = random_channel(MIXED, 2)
    x = random_element(MIXED, np.random.default_rng(0))
    assert apply(compose(a, b), x).distance(apply(a, apply(b, x))) < 1e-12
    y = random_element(MIXED, np.random.default_rng(1))
    # τ(T(x)* y) = τ(x* T*(y))
    lhs = trace(apply(a, x).H @ y)
    rhs = trace(x.H @ apply(adjoint_channel(a), y))
    assert lhs == pytest.approx(rhs)


def test_tensor_channel_acts_on_simple_tensors():
    a, b = random_channel(M2, 3), random_channel(MIXED, 4)
    rng = np.random.default_rng(5)
    x, y = random_element(M2, rng), random_element(MIXED, rng)
    t = tensor_channel(a, b)
    assert t.domain == tensor_algebra(M2, MIXED)
    assert apply(t, tensor(x, y)).distance(tensor(apply(a, x), apply(b, y))) < 1e-12


# ------------------------------------------------------------------ embedding


@pytest.mark.parametrize("alg", [MIXED, BlockAlgebra((1, 1, 1, 1, 2), (1 / 8,) * 4 + (1 / 4,)),
                                 BlockAlgebra((2, 1), (0.5, 1.5))])
def test_embedding_is_a_trace_preserving_isometry(alg):
    emb = embedding_for(alg)
    j = emb.j_matrix
    assert np.allclose(j.T @ j, np.eye(alg.dim))
    assert emb.scale == pytest.approx(alg.unit_trace)
    rho = random_state(alg, 7).element
    assert trace(emb.J(rho)) == pytest.approx(1)
    assert segal_entropy(emb.J(rho)) == pytest.approx(segal_entropy(rho))
    x, y = random_element(alg, np.random.default_rng(1)), random_element(alg, np.random.default_rng(2))
    assert emb.J(x @ y).distance(emb.J(x) @ emb.J(y)) < 1e-12


def test_kac_paljutkin_embedding_multiplicities():
    emb = embedding_for(BlockAlgebra((1, 1, 1, 1, 2), (1 / 8,) * 4 + (1 / 4,)))
    assert emb.multiplicities == (1, 1, 1, 1, 2)
    assert emb.size == 8


def test_incommensurate_weights_are_rejected():
    with pytest.raises(IncommensurateWeightsError):
        embedding_for(BlockAlgebra((1, 1), (1.0, math.sqrt(2))))


def test_embedded_channel_preserves_flags():
    t = random_channel(MIXED, 9)
    e = embed_to_matrix_algebra(t).channel
    assert e.cp and e.tp


# ------------------------------------------------------ entanglement breaking


def test_entanglement_breaking_classes():
    assert classify_entanglement_breaking(completely_depolarizing(M2)) is EBClass.EB
    assert classify_entanglement_breaking(pinching(BlockAlgebra.matrix(3))) is EBClass.EB
    assert classify_entanglement_breaking(identity_channel(M2)) is EBClass.NOT_EB


def test_commutative_domain_is_entanglement_breaking():
    alg = BlockAlgebra.commutative(3)
    assert classify_entanglement_breaking(random_channel(alg, 2)) is EBClass.EB


# ------------------------------------------------------ multiplicative domain


def test_multiplicative_domain_of_identity_and_depolarizing():
    assert multiplicative_domain(identity_channel(MIXED)).dimension == MIXED.dim
    assert multiplicative_domain(completely_depolarizing(M2)).dimension == 1


def test_multiplicative_domain_of_fourier_multiplier_is_vn_of_g_phi():
    g = build_symmetric3()
    a3 = g.generated_subgroup([1]) if len(g.generated_subgroup([1])) == 3 else g.generated_subgroup([3])
    md = multiplicative_domain(fourier_multiplier_vn(indicator(g, a3)))
    assert md.dimension == 3
    assert md.is_subalgebra
    assert md.homomorphism_residual < 1e-10


def test_multiplicative_domain_of_schur_multiplier():
    g = build_cyclic(2)
    md = multiplicative_domain(herz_schur_channel(GroupFunction(g, np.array([1.0, 0.3]))))
    assert md.dimension == 2  # the diagonal


def test_conditional_expectation_is_idempotent_and_self_adjoint():
    g = build_symmetric3()
    qg = build_group_vn(g)
    e = subgroup_expectation(qg, g.generated_subgroup([3]))
    assert np.allclose(e.matrix @ e.matrix, e.matrix)
    assert np.allclose(e.matrix, e.matrix.conj().T)
    assert e.cp and e.tp and e.unital


def test_conditional_expectation_rejects_non_subalgebras():
    x = BlockAlgebra.matrix(2).matrix_unit(0, 0, 1)
    with pytest.raises(ValueError):
        conditional_expectation(M2, [M2.unit(), x])


def test_irreducible_covariant_channel_commutant():
    rep = s3_irreps()[-1]
    assert rep.commutant_dimension() == 1


# ----------------------------------------------------------------- properties

alg_st = st.sampled_from([M2, MIXED, BlockAlgebra.matrix(3), BlockAlgebra.commutative(3),
                          BlockAlgebra((2, 2), (0.5, 1.5))])


@given(alg_st, st.integers(0, 2**31 - 1), st.integers(1, 4))
def test_random_channels_are_cp_and_tp(alg, seed, rank):
    t = random_channel(alg, seed, kraus_rank=rank)
    assert t.cp and t.tp


@given(alg_st, st.integers(0, 2**31 - 1))
def test_random_unital_channels_are_markov(alg, seed):
    t = random_channel(alg, seed, unital=True)
    assert t.is_markov


@given(alg_st, st.integers(0, 2**31 - 1))
def test_channels_map_states_to_states(alg, seed):
    t = random_channel(alg, seed)
    out = apply(t, random_state(alg, seed + 1).element)
    assert trace(out) == pytest.approx(1)
    assert out.min_eigenvalue() >= -1e-10


@given(st.integers(0, 2**31 - 1))
def test_multiplicative_domain_is_a_subalgebra(seed):
    t = random_channel(MIXED, seed, unital=True)
    md = multiplicative_domain(t)
    assert md.is_subalgebra
    assert md.homomorphism_residual < 1e-7
