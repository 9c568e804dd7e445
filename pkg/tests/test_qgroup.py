import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ncq.acceptance import (
    kp_density,
    kp_functional,
    kp_matrix_from_coproduct,
    kp_printed_matrix,
    kp_superoperator_on_basis,
    random_kp_parameters,
)
from ncq.algebra import random_element, random_state, segal_entropy, trace
from ncq.channel import convolution_channel
from ncq.groups import build_symmetric3, parse_group
from ncq.qgroup import (
    QuantumGroup,
    build_function_algebra,
    build_group_vn,
    build_kac_paljutkin,
    closed_form_entropy,
    convolution_matrix,
    convolve,
    density_flags,
    duality_bracket,
    parse_qgroup,
    qgroup_from_obj,
    qgroup_to_obj,
    verify_axioms,
)

BUILTINS = ["kp", "cg:s3", "vng:s3", "vng:dihedral:4", "cg:cyclic:2", "vng:pauli", "cg:dihedral:3",
            "vng:cyclic:5"]


@pytest.mark.parametrize("name", BUILTINS)
def test_builtin_axioms(name):
    rep = verify_axioms(parse_qgroup(name))
    assert rep.passed, rep.failures()
    assert max(rep.residuals.values()) <= 1e-10


def test_broken_coproduct_is_detected():
    kp = build_kac_paljutkin()
    c = kp.coproduct.copy()
    c[1, 6, 5] *= -1  # flip one sign in Δ(e2)
    bad = QuantumGroup("kp-broken", kp.algebra, kp.basis_matrix, c, kp.antipode)
    rep = verify_axioms(bad)
    assert not rep.passed
    assert "multiplicative" in rep.failures()


def test_broken_antipode_is_detected():
    kp = build_kac_paljutkin()
    bad = QuantumGroup("kp-no-antipode", kp.algebra, kp.basis_matrix, kp.coproduct, np.eye(8))
    assert not verify_axioms(bad).passed


def test_kp_haar_state():
    kp = build_kac_paljutkin()
    assert np.allclose(kp.haar_values, [1 / 8] * 4 + [1 / 4, 0, 0, 1 / 4])
    assert trace(kp.algebra.unit()) == pytest.approx(1)


def test_unknown_qgroup():
    with pytest.raises(ValueError):
        parse_qgroup("sekine")


def test_classical_convolution_matches_group_sum():
    # (f∗x)(u) = (1/|G|) Σ_t f(u t⁻¹) x(t)
    g = build_symmetric3()
    qg = build_function_algebra(g)
    rng = np.random.default_rng(0)
    f, x = rng.normal(size=6), rng.normal(size=6)
    want = np.array([sum(f[g.op(u, g.inv[t])] * x[t] for t in range(6)) / 6 for u in range(6)])
    got = qg.coefficients(convolve(qg.from_coefficients(f), qg.from_coefficients(x), qg))
    assert np.allclose(got, want)


def test_group_vn_convolution_is_pointwise_on_symbols():
    g = parse_group("dihedral:4")
    qg = build_group_vn(g)
    rng = np.random.default_rng(1)
    phi, c = rng.normal(size=8) + 1j * rng.normal(size=8), rng.normal(size=8)
    got = qg.coefficients(convolve(qg.from_coefficients(phi), qg.from_coefficients(c), qg))
    assert np.allclose(got, phi * c)


def test_duality_bracket_on_kp_matches_printed_pairing():
    kp = build_kac_paljutkin()
    mu, x, y, z = random_kp_parameters(np.random.default_rng(3))
    f = kp_density(mu, x, y, z)
    psi = kp_functional(mu, x, y, z)
    for m in range(8):
        assert duality_bracket(f, kp.basis[m], kp) == pytest.approx(psi[m], abs=1e-14)


def test_kp_matrix_routes_agree_and_printed_typos_are_isolated():
    kp = build_kac_paljutkin()
    rng = np.random.default_rng(4)
    bad = set()
    for _ in range(20):
        mu, x, y, z = random_kp_parameters(rng)
        f = kp_density(mu, x, y, z)
        computed = kp_superoperator_on_basis(convolution_channel(f, kp))
        assert np.abs(computed - kp_matrix_from_coproduct(kp_functional(mu, x, y, z))).max() < 1e-12
        assert np.abs(computed - convolution_matrix(f, kp)).max() < 1e-12
        diff = np.abs(kp_printed_matrix(mu, x, y, z) - computed)
        bad |= {(int(r) + 1, int(c) + 1) for r, c in zip(*np.nonzero(diff > 1e-12))}
    assert bad == {(2, 6), (2, 7), (3, 7), (5, 3), (5, 5), (7, 2), (8, 4)}


def test_kp_density_is_a_state():
    mu, x, y, z = random_kp_parameters(np.random.default_rng(5))
    kp = build_kac_paljutkin()
    f = kp_density(mu, x, y, z)
    assert density_flags(f, kp).eligible
    assert trace(f) == pytest.approx(1)


def test_density_flags_reject_bad_densities():
    kp = build_kac_paljutkin()
    assert not density_flags(kp.algebra.unit() * 2, kp).eligible
    neg = kp.algebra.element([np.array([[2.0]]), np.array([[-1.0]]), np.array([[1.0]]), np.array([[1.0]]),
                              np.eye(2)])
    assert not density_flags(neg, kp).positive
    with pytest.raises(ValueError):
        closed_form_entropy(neg, kp)
    with pytest.raises(ValueError):
        convolution_channel(neg, kp)


def test_unit_density_gives_conditional_expectation_onto_scalars():
    kp = build_kac_paljutkin()
    x = random_element(kp.algebra, np.random.default_rng(6))
    out = convolve(kp.algebra.unit(), x, kp)
    assert out.distance(kp.algebra.unit() * trace(x)) < 1e-12


def test_closed_form_entropy_is_segal_entropy():
    kp = build_kac_paljutkin()
    f = random_state(kp.algebra, 9).element
    assert closed_form_entropy(f, kp) == pytest.approx(segal_entropy(f))


@pytest.mark.parametrize("name", ["kp", "vng:s3"])
def test_serialization_round_trip(name):
    qg = parse_qgroup(name)
    back = qgroup_from_obj(qgroup_to_obj(qg))
    assert np.allclose(back.coproduct, qg.coproduct)
    assert np.allclose(back.antipode, qg.antipode)
    assert verify_axioms(back).passed


# ----------------------------------------------------------------- properties

qg_st = st.sampled_from(["kp", "vng:s3", "cg:s3", "vng:pauli"])


@given(qg_st, st.integers(0, 2**31 - 1))
def test_convolution_is_associative(name, seed):
    qg = parse_qgroup(name)
    rng = np.random.default_rng(seed)
    f, g, x = (random_element(qg.algebra, rng) for _ in range(3))
    lhs = convolve(f, convolve(g, x, qg), qg)
    rhs = convolve(convolve(f, g, qg), x, qg)
    assert lhs.distance(rhs) < 1e-10 * max(1.0, lhs.max_abs())


@given(qg_st, st.integers(0, 2**31 - 1))
def test_convolution_by_a_density_is_markov(name, seed):
    qg = parse_qgroup(name)
    t = convolution_channel(random_state(qg.algebra, seed).element, qg)
    assert t.cp and t.tp and t.unital


@given(qg_st, st.integers(0, 2**31 - 1))
def test_convolution_of_states_is_a_state(name, seed):
    qg = parse_qgroup(name)
    f, g = random_state(qg.algebra, seed).element, random_state(qg.algebra, seed + 1).element
    h = convolve(f, g, qg)
    assert trace(h) == pytest.approx(1)
    assert h.min_eigenvalue() >= -1e-10
