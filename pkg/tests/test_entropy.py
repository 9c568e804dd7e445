import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import entropy as shannon_oracle

from ncq.algebra import INF, BlockAlgebra, lp_norm, random_state, segal_entropy
from ncq.channel import (
    Channel,
    completely_depolarizing,
    covariant_channel,
    fourier_multiplier_vn,
    herz_schur_channel,
    identity_channel,
    random_channel,
    transpose_map,
)
from ncq.entropy import (
    additivity_check,
    blahut_arimoto,
    classical_convolution_capacity,
    h_cb_min,
    h_cb_min_hs_closed,
    h_min_derivative,
    h_min_optimize,
    holevo_chi_lower,
    in_unit,
    norm_1_to_p,
)
from ncq.groups import GroupFunction, build_cyclic, pauli_rep, random_positive_definite
from ncq.optimize import OptimizerConfig
from ncq.qgroup import build_group_vn, build_kac_paljutkin

CFG = OptimizerConfig(restarts=8)
M2 = BlockAlgebra.matrix(2)


def depolarizing(q: float) -> Channel:
    return Channel.from_map(M2, M2, lambda x: x * (1 - q) + M2.unit() * (q * x.blocks[0].trace().real / 2))


@pytest.mark.parametrize("q", [0.1, 0.4, 0.9])
def test_qubit_depolarizing_minimum_entropy(q):
    # normalized trace: H_τ = H_vN − ln 2, with output spectrum (1 − q/2, q/2)
    want = shannon_oracle([1 - q / 2, q / 2]) - math.log(2)
    t = depolarizing(q)
    assert h_min_optimize(t, CFG).value == pytest.approx(want, abs=1e-7)
    assert h_min_derivative(t, CFG).value == pytest.approx(want, abs=5e-3)


@pytest.mark.parametrize("q", [0.2, 0.7])
def test_qubit_depolarizing_norms(q):
    t = depolarizing(q)
    a, b = 2 - q, q  # τ-density eigenvalues
    for p in (1.5, 2.0, 4.0):
        want = ((a ** p + b ** p) / 2) ** (1 / p)
        assert norm_1_to_p(t, p, CFG).value == pytest.approx(want, rel=1e-7)
    assert norm_1_to_p(t, INF, CFG).value == pytest.approx(a, rel=1e-9)
    assert norm_1_to_p(t, float("inf"), CFG).value == pytest.approx(a, rel=1e-9)


def test_norm_at_one_is_one_for_channels():
    t = random_channel(BlockAlgebra((1, 2), (1 / 3, 1 / 3)), 3)
    assert norm_1_to_p(t, 1.0, CFG).value == pytest.approx(1.0, abs=1e-9)


def test_norm_rejects_small_exponent():
    with pytest.raises(ValueError):
        norm_1_to_p(identity_channel(M2), 0.5, CFG)


def test_identity_minimum_entropy_is_minus_log_dimension():
    assert h_min_optimize(identity_channel(BlockAlgebra.matrix(3)), CFG).value == pytest.approx(-math.log(3))


def test_completely_depolarizing_has_zero_minimum_entropy():
    assert h_min_optimize(completely_depolarizing(M2), CFG).value == pytest.approx(0, abs=1e-12)


def test_non_channels_are_rejected():
    with pytest.raises(ValueError):
        h_min_optimize(transpose_map(M2), CFG)


def test_kp_fourier_multiplier_entropy_routes_agree():
    kp = build_kac_paljutkin()
    f = random_state(kp.algebra, 12, full_support=True).element
    from ncq.channel import convolution_channel

    t = convolution_channel(f, kp)
    want = segal_entropy(f)
    assert h_min_optimize(t, CFG).value == pytest.approx(want, abs=1e-6)
    assert h_min_derivative(t, CFG).value == pytest.approx(want, abs=5e-3)
    assert h_cb_min(t, CFG).value == pytest.approx(want, abs=1e-6)
    for p in (1.5, 4.0):
        assert norm_1_to_p(t, p, CFG).value == pytest.approx(lp_norm(f, p), rel=1e-6)


def test_identity_cb_entropy_is_minus_log_dimension_squared():
    # a maximally entangled input gives H_cb,min(id_{M_n}) = −2 ln n for the normalized trace
    assert h_cb_min(identity_channel(M2), CFG).value == pytest.approx(-2 * math.log(2), abs=1e-7)


def test_herz_schur_cb_closed_forms():
    g = build_cyclic(2)
    phi = GroupFunction(g, np.array([1.0, 0.3]))
    tr_form, vn_form = h_cb_min_hs_closed(phi)
    want = shannon_oracle([0.65, 0.35])
    assert vn_form == pytest.approx(want - math.log(2))
    assert h_cb_min(herz_schur_channel(phi), CFG).value == pytest.approx(tr_form, abs=1e-6)


# ------------------------------------------------------------------ capacity


def test_blahut_arimoto_binary_symmetric():
    eps = 0.11
    w = np.array([[1 - eps, eps], [eps, 1 - eps]])
    res = blahut_arimoto(w)
    assert res.capacity == pytest.approx(math.log(2) - shannon_oracle([eps, 1 - eps]), abs=1e-9)
    assert np.allclose(res.input_distribution, [0.5, 0.5])
    assert res.gap <= 1e-9


def test_blahut_arimoto_erasure_channel():
    e = 0.3
    w = np.array([[1 - e, e, 0], [0, e, 1 - e]])
    assert blahut_arimoto(w).capacity == pytest.approx((1 - e) * math.log(2), abs=1e-8)


def test_classical_convolution_capacity_closed_form():
    g = build_cyclic(3)
    nu = [0.6, 0.3, 0.1]
    closed, ba = classical_convolution_capacity(g, nu)
    assert closed == pytest.approx(math.log(3) - shannon_oracle(nu))
    assert ba.capacity == pytest.approx(closed, abs=1e-8)


def test_classical_capacity_rejects_non_distributions():
    with pytest.raises(ValueError):
        classical_convolution_capacity(build_cyclic(2), [0.5, 0.6])


def test_holevo_lower_bound_on_identity_is_log_dimension():
    res = holevo_chi_lower(identity_channel(M2), CFG)
    assert res.value == pytest.approx(math.log(2), abs=1e-6)


def test_holevo_bounded_by_negative_minimum_entropy_for_fourier_multiplier():
    g = build_cyclic(3)
    phi = random_positive_definite(g, 2)
    t = fourier_multiplier_vn(phi)
    f = build_group_vn(g).from_coefficients(phi.values)
    assert holevo_chi_lower(t, CFG).value <= -segal_entropy(f) + 1e-8


def test_pauli_covariant_holevo_identity():
    t = covariant_channel(pauli_rep(), [2.8, 0.4, 0.4, 0.4])
    hmin = h_min_optimize(t, CFG)
    chi = holevo_chi_lower(t, CFG, start=hmin).value
    assert chi == pytest.approx(-hmin.value, abs=1e-6)


def test_additivity_on_group_vn():
    t1 = fourier_multiplier_vn(random_positive_definite(build_cyclic(2), 7))
    t2 = fourier_multiplier_vn(random_positive_definite(build_cyclic(3), 8))
    rep = additivity_check(t1, t2, CFG)
    assert rep.cb_gap <= 1e-5
    assert rep.subadditivity_slack >= -1e-8


def test_additivity_respects_size_cap():
    with pytest.raises(ValueError):
        additivity_check(identity_channel(BlockAlgebra.matrix(4)), identity_channel(BlockAlgebra.matrix(4)), CFG,
                         cap=8)


def test_units():
    assert in_unit(math.log(2), "bits") == pytest.approx(1.0)
    assert in_unit(0.3, "nats") == 0.3
    with pytest.raises(ValueError):
        in_unit(1.0, "hartleys")


# ----------------------------------------------------------------- properties

alg_st = st.sampled_from([M2, BlockAlgebra((1, 2), (1 / 3, 1 / 3)), BlockAlgebra.commutative(3)])


@settings(max_examples=15)
@given(alg_st, st.integers(0, 2**31 - 1))
def test_cb_entropy_never_exceeds_minimum_entropy(alg, seed):
    t = random_channel(alg, seed)
    assert h_cb_min(t, CFG).value <= h_min_optimize(t, CFG).value + 5e-3


@settings(max_examples=15)
@given(alg_st, st.integers(0, 2**31 - 1))
def test_minimum_entropy_bounds(alg, seed):
    # −ln max block weight ≤ H(T(ρ)) ≤ ln τ(1) for every state, hence for the minimum
    t = random_channel(alg, seed)
    h = h_min_optimize(t, CFG)
    assert h.value <= math.log(alg.unit_trace) + 1e-10
    assert h.value <= min(h.restart_values) + 1e-15
    rho = random_state(alg, seed).element
    from ncq.channel import apply

    assert h.value <= segal_entropy(apply(t, rho)) + 1e-7


@settings(max_examples=15)
@given(alg_st, st.integers(0, 2**31 - 1))
def test_holevo_lower_bound_below_upper_bound(alg, seed):
    t = random_channel(alg, seed)
    hmin = h_min_optimize(t, CFG)
    chi = holevo_chi_lower(t, CFG, start=hmin).value
    assert -1e-9 <= chi <= math.log(alg.unit_trace) - hmin.value + 1e-6
