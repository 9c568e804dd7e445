"""The ten acceptance criteria as runnable checks.

Each ``criterion_N`` returns a :class:`CriterionResult` with the measured
quantities, so tests, the CLI suite and humans read the same numbers.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import (
    INF,
    BlockAlgebra,
    eigenvalues,
    lp_norm,
    random_element,
    random_state,
    segal_entropy,
    trace,
)
from .channel import (
    EBClass,
    Channel,
    classify_entanglement_breaking,
    completely_depolarizing,
    convolution_channel,
    covariant_channel,
    embed_to_matrix_algebra,
    fourier_multiplier_vn,
    herz_schur_channel,
    identity_channel,
    multiplicative_domain,
    pinching,
    random_channel,
    subgroup_expectation,
)
from .entropy import (
    additivity_check,
    classical_convolution_capacity,
    covariant_chi_identity,
    entropy_report,
    h_cb_min,
    h_cb_min_hs_closed,
    h_min_optimize,
    holevo_chi_lower,
    norm_1_to_p,
    shannon_entropy,
    transference_bound_check,
)
from .groups import (
    GroupFunction,
    build_cyclic,
    build_symmetric3,
    indicator,
    pauli_rep,
    random_positive_definite,
    subgroup_of_modulus_one,
)
from .optimize import OptimizerConfig
from .qgroup import build_group_vn, build_kac_paljutkin, convolution_matrix, parse_qgroup, verify_axioms

FULL_SUPPORT_MIN_EIG = 1e-3


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    elapsed: float
    details: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d}: {self.title} ({self.elapsed:.2f} s)"


class _Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def _worst(values) -> float:
    values = list(values)
    return float(max(values)) if values else 0.0


# --------------------------------------------------------------------------
# 1. axioms

AXIOM_BUILTINS = ("kp", "cg:s3", "vng:s3", "vng:dihedral:4")


def criterion_1() -> CriterionResult:
    with _Timer() as tm:
        worst = {}
        for name in AXIOM_BUILTINS:
            rep = verify_axioms(parse_qgroup(name))
            worst[name] = max(rep.residuals.values())
    ok = all(v <= 1e-10 for v in worst.values()) and tm.elapsed < 5
    return CriterionResult(1, "quantum-group axioms", ok, tm.elapsed, {"max_residual": worst})


# --------------------------------------------------------------------------
# 2. Kac-Paljutkin convolution matrix


def kp_functional(mu, x, y, z) -> np.ndarray:
    """The state's values on (e1..e4, e11, e12, e21, e22), read off the duality bracket."""
    m5 = mu[4] / 2
    return np.array([mu[0], mu[1], mu[2], mu[3],
                     m5 * (1 + z), m5 * (x + 1j * y), m5 * (x - 1j * y), m5 * (1 - z)])


def kp_density(mu, x, y, z):
    """Density F with τ(F R(b)) equal to the bracket functional."""
    alg = build_kac_paljutkin().algebra
    m5 = 2 * mu[4]
    blocks = [np.array([[8 * m]]) for m in mu[:4]]
    blocks.append(m5 * np.array([[1 + z, x + 1j * y], [x - 1j * y, 1 - z]]))
    return alg.element(blocks)


def kp_matrix_from_coproduct(psi: np.ndarray) -> np.ndarray:
    """(ψ ⊗ Id)Δ(e_m) expanded on the basis, straight from the coproduct table."""
    from .qgroup import KP_COPRODUCT

    out = np.zeros((8, 8), complex)
    for m, terms in KP_COPRODUCT.items():
        for coef, i, j in terms:
            out[j, m] += coef * psi[i]
    return out


KP_PRINTED_TEXT = (
    ("μ1", "μ2", "μ3", "μ4", "(1+z)/2 μ5", "(x+iy)/2 μ5", "(x−iy)/2 μ5", "(1−z)/2 μ5"),
    ("μ2", "μ1", "μ4", "μ3", "(1−z)/2 μ5", "(−x+iy)/2 μ5", "(x+iy)/2 μ5", "(1+z)/2 μ5"),
    ("μ3", "μ4", "μ1", "μ2", "(1−z)/2 μ5", "(ix+y)/2 μ5", "−(−x+iy)/2 μ5", "(1+z)/2 μ5"),
    ("μ4", "μ3", "μ2", "μ1", "(1+z)/2 μ5", "(−x−iy)/2 μ5", "(−x+iy)/2 μ5", "(1−z)/2 μ5"),
    ("(1+z)/4 μ5", "(1−z)/4 μ5", "(1+z)/4 μ5", "(1+z)/4 μ5", "μ1−μ4", "0", "0", "μ2+μ3"),
    ("(x+iy)/4 μ5", "(ix+y)/4 μ5", "(−ix−y)/4 μ5", "(−x−iy)/4 μ5", "0", "μ1−μ4", "−iμ2+iμ3", "0"),
    ("(x−iy)/4 μ5", "(ix−y)/2 μ5", "(ix−y)/4 μ5", "(−x+iy)/4 μ5", "0", "iμ2−iμ3", "μ1−μ4", "0"),
    ("(1−z)/4 μ5", "(1+z)/4 μ5", "(1+z)/4 μ5", "(1−z)/2 μ5", "μ2+μ3", "0", "0", "μ1+μ4"),
)


def kp_printed_matrix(mu, x, y, z) -> np.ndarray:
    """The published 8×8 convolution matrix, transcribed cell by cell (typos included)."""
    m1, m2, m3, m4, m5 = mu
    i = 1j
    a = m5 / 2
    b = m5 / 4
    return np.array([
        [m1, m2, m3, m4, (1 + z) * a, (x + i * y) * a, (x - i * y) * a, (1 - z) * a],
        [m2, m1, m4, m3, (1 - z) * a, (-x + i * y) * a, (x + i * y) * a, (1 + z) * a],
        [m3, m4, m1, m2, (1 - z) * a, (i * x + y) * a, -(-x + i * y) * a, (1 + z) * a],
        [m4, m3, m2, m1, (1 + z) * a, (-x - i * y) * a, (-x + i * y) * a, (1 - z) * a],
        [(1 + z) * b, (1 - z) * b, (1 + z) * b, (1 + z) * b, m1 - m4, 0, 0, m2 + m3],
        [(x + i * y) * b, (i * x + y) * b, (-i * x - y) * b, (-x - i * y) * b, 0, m1 - m4, -i * m2 + i * m3, 0],
        [(x - i * y) * b, (i * x - y) * a, (i * x - y) * b, (-x + i * y) * b, 0, i * m2 - i * m3, m1 - m4, 0],
        [(1 - z) * b, (1 + z) * b, (1 + z) * b, (1 - z) * a, m2 + m3, 0, 0, m1 + m4],
    ], dtype=complex)


def random_kp_parameters(rng: np.random.Generator):
    mu = rng.dirichlet(np.ones(5))
    r = rng.normal(size=3)
    r *= rng.uniform() ** (1 / 3) / np.linalg.norm(r)
    return mu, float(r[0]), float(r[1]), float(r[2])


def kp_superoperator_on_basis(t: Channel) -> np.ndarray:
    """Channel matrix in trace-orthonormal coordinates converted back to basis coefficients."""
    scale = t.domain.coord_scale
    return t.matrix * (1 / t.codomain.coord_scale)[:, None] * scale[None, :]


def criterion_2(points: int = 50, seed: int = 2) -> CriterionResult:
    qg = build_kac_paljutkin()
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_routes = 0.0
    bad_cells: dict[tuple[int, int], float] = {}
    with _Timer() as tm:
        for _ in range(points):
            mu, x, y, z = random_kp_parameters(rng)
            f = kp_density(mu, x, y, z)
            computed = kp_superoperator_on_basis(convolution_channel(f, qg))
            from_displays = kp_matrix_from_coproduct(kp_functional(mu, x, y, z))
            worst = max(worst, float(np.abs(computed - from_displays).max()))
            worst_routes = max(worst_routes, float(np.abs(convolution_matrix(f, qg) - computed).max()))
            diff = np.abs(kp_printed_matrix(mu, x, y, z) - computed)
            for r, c in zip(*np.nonzero(diff > 1e-12)):
                bad_cells[(int(r), int(c))] = max(bad_cells.get((int(r), int(c)), 0.0), float(diff[r, c]))
    notes = [
        f"printed cell (row {r + 1}, col {c + 1}) = {KP_PRINTED_TEXT[r][c]} differs by up to {d:.3g}"
        for (r, c), d in sorted(bad_cells.items())
    ]
    return CriterionResult(
        2, "Kac-Paljutkin convolution matrix", worst <= 1e-12 and worst_routes <= 1e-12, tm.elapsed,
        {"max_deviation_from_coproduct": worst, "max_deviation_between_routes": worst_routes,
         "printed_mismatch_cells": [[r + 1, c + 1] for r, c in sorted(bad_cells)]},
        notes,
    )


# --------------------------------------------------------------------------
# 3. three-route entropy agreement


def full_support_density(alg: BlockAlgebra, seed: int):
    rho = random_state(alg, seed, full_support=True).element
    lo = min(float(e.min()) for e in eigenvalues(rho))
    if lo < FULL_SUPPORT_MIN_EIG:
        raise AssertionError(f"density seed {seed} has minimum eigenvalue {lo}")
    return rho


def criterion_3(count: int = 20, restarts: int = 32) -> CriterionResult:
    cfg = OptimizerConfig(restarts=restarts)
    worst: dict[str, float] = {}
    with _Timer() as tm:
        for name in ("kp", "vng:s3"):
            qg = parse_qgroup(name)
            for s in range(count):
                f = full_support_density(qg.algebra, 1000 + s)
                rep = entropy_report(convolution_channel(f, qg), cfg, segal_entropy(f))
                for key in ("optimize_vs_closed", "derivative_vs_closed", "cb_vs_closed"):
                    k = f"{name}:{key}"
                    worst[k] = max(worst.get(k, 0.0), rep.residuals[key])
    ok = all(v <= 5e-3 for v in worst.values()) and tm.elapsed < 180
    return CriterionResult(3, "entropy route agreement", ok, tm.elapsed, {"max_residual": worst})


# --------------------------------------------------------------------------
# 4. norm identity

NORM_EXPONENTS = (1.5, 2.0, 4.0, INF)


def _label(p) -> str:
    return "inf" if p is INF else f"{p:g}"


def criterion_4(count: int = 10) -> CriterionResult:
    qg = build_kac_paljutkin()
    worst = {_label(p): 0.0 for p in NORM_EXPONENTS}
    with _Timer() as tm:
        for s in range(count):
            f = random_state(qg.algebra, 2000 + s).element
            t = convolution_channel(f, qg)
            for p in NORM_EXPONENTS:
                ref = lp_norm(f, p)
                got = norm_1_to_p(t, p).value
                worst[_label(p)] = max(worst[_label(p)], abs(got - ref) / ref)
    return CriterionResult(4, "norm identity", all(v <= 1e-4 for v in worst.values()), tm.elapsed,
                           {"max_relative_error": worst})


# --------------------------------------------------------------------------
# 5. classical capacity


def binary_entropy(eps: float) -> float:
    return shannon_entropy([eps, 1 - eps])


def criterion_5() -> CriterionResult:
    g = build_cyclic(2)
    out = {}
    with _Timer() as tm:
        for eps in (0.05, 0.1, 0.25):
            closed, ba = classical_convolution_capacity(g, np.array([1 - eps, eps]))
            ref = math.log(2) - binary_entropy(eps)
            out[str(eps)] = {"blahut_arimoto": ba.capacity, "closed_form": closed, "reference": ref,
                             "error": abs(ba.capacity - ref)}
    ok = all(v["error"] <= 1e-6 and abs(v["closed_form"] - v["reference"]) <= 1e-12 for v in out.values())
    return CriterionResult(5, "classical capacity", ok, tm.elapsed, out)


# --------------------------------------------------------------------------
# 6. Herz-Schur closed form


def herz_schur_cases() -> list[tuple[str, GroupFunction]]:
    z2 = build_cyclic(2)
    cases = [(f"Z2 c={c}", GroupFunction(z2, np.array([1.0, c]))) for c in (0.0, 0.3, 0.9)]
    s3 = build_symmetric3()
    cases.append(("S3 1_A3", indicator(s3, {0, 1, 2})))
    return cases


def criterion_6() -> CriterionResult:
    cfg = OptimizerConfig()
    out = {}
    with _Timer() as tm:
        for label, phi in herz_schur_cases():
            first, second = h_cb_min_hs_closed(phi)
            num = h_cb_min(herz_schur_channel(phi), cfg).value
            out[label] = {"numeric": num, "closed_trace": first, "closed_group_vn": second,
                          "numeric_gap": abs(num - first), "closed_gap": abs(first - second)}
    ok = all(v["numeric_gap"] <= 5e-3 and v["closed_gap"] <= 1e-12 for v in out.values())
    return CriterionResult(6, "Herz-Schur closed form", ok, tm.elapsed, out)


# --------------------------------------------------------------------------
# 7. additivity


def criterion_7(seed: int = 7) -> CriterionResult:
    q2, q3 = build_group_vn(build_cyclic(2)), build_group_vn(build_cyclic(3))
    f1 = random_state(q2.algebra, seed, full_support=True).element
    f2 = random_state(q3.algebra, seed + 1, full_support=True).element
    with _Timer() as tm:
        ref = segal_entropy(f1) + segal_entropy(f2)
        rep = additivity_check(convolution_channel(f1, q2), convolution_channel(f2, q3), cb_reference=ref)
    ok = rep.cb_gap <= 1e-2 and rep.subadditivity_slack >= -1e-6
    return CriterionResult(7, "additivity", ok, tm.elapsed, {
        "cb_tensor": rep.cb_tensor, "closed_sum": ref, "cb_gap": rep.cb_gap,
        "h_min_tensor": rep.h_min_tensor, "h_min_sum": rep.h_min_sum,
        "subadditivity_slack": rep.subadditivity_slack})


# --------------------------------------------------------------------------
# 8. structure

S3_SUBGROUPS = (frozenset({0}), frozenset({0, 1, 2}), frozenset({0, 3}), frozenset({0, 4}),
                frozenset({0, 5}))


def criterion_8(count: int = 20) -> CriterionResult:
    g = build_symmetric3()
    qg = build_group_vn(g)
    md_rows = []
    with _Timer() as tm:
        for s in range(count):
            phi = random_positive_definite(g, 3000 + s, S3_SUBGROUPS[s % len(S3_SUBGROUPS)])
            gphi = subgroup_of_modulus_one(phi)
            md = multiplicative_domain(fourier_multiplier_vn(phi))
            md_rows.append({"seed": 3000 + s, "g_phi": len(gphi), "md_dimension": md.dimension,
                            "gap": md.gap, "subalgebra": md.is_subalgebra})
        m2 = BlockAlgebra.matrix(2)
        pin, ident = pinching(m2), identity_channel(m2)
        classes = {
            "pinching_M2": (classify_entanglement_breaking(pin).value, pin.ppt),
            "identity_M2": (classify_entanglement_breaking(ident).value, ident.ppt),
            "E_A3": classify_entanglement_breaking(subgroup_expectation(qg, {0, 1, 2})).value,
            "E_S3": classify_entanglement_breaking(subgroup_expectation(qg, set(range(6)))).value,
        }
    md_ok = all(r["g_phi"] == r["md_dimension"] and r["gap"] >= 1e-3 and r["subalgebra"] for r in md_rows)
    cls_ok = (classes["pinching_M2"] == (EBClass.EB.value, True)
              and classes["identity_M2"] == (EBClass.NOT_EB.value, False)
              and classes["E_A3"] == EBClass.EB.value and classes["E_S3"] == EBClass.NOT_EB.value)
    return CriterionResult(8, "structure suite", md_ok and cls_ok, tm.elapsed, {
        "multiplicative_domains": md_rows, "min_gap": min(r["gap"] for r in md_rows),
        "classifications": {k: list(v) if isinstance(v, tuple) else v for k, v in classes.items()}})


# --------------------------------------------------------------------------
# 9. transference and covariance

PAULI_P = (0.7, 0.1, 0.1, 0.1)


def criterion_9() -> CriterionResult:
    rep = pauli_rep()
    f = 4 * np.array(PAULI_P)
    with _Timer() as tm:
        tr = transference_bound_check(rep, f)
        cov = covariant_chi_identity(rep, f)
    bound = shannon_entropy(PAULI_P) - math.log(4)
    ok = tr.h_cb_min >= bound - 1e-3 and cov.gap <= 5e-3
    return CriterionResult(9, "transference and covariance", ok, tm.elapsed, {
        "h_cb_min": tr.h_cb_min, "entropy_bound": bound, "h_min": cov.h_min,
        "chi_lower": cov.chi_lower, "chi_identity_gap": cov.gap})


# --------------------------------------------------------------------------
# 10. inequality battery


def battery_channel(i: int) -> tuple[str, Channel]:
    """The i-th channel of the mixed battery; kinds rotate, seeds follow i."""
    seed = 4000 + i
    kind = i % 10
    if kind == 0:
        qg = build_kac_paljutkin()
        return "fourier:kp", convolution_channel(random_state(qg.algebra, seed).element, qg)
    if kind == 1:
        qg = build_group_vn(build_symmetric3())
        return "fourier:vng:s3", convolution_channel(random_state(qg.algebra, seed).element, qg)
    if kind == 2:
        qg = parse_qgroup("cg:cyclic:3")
        return "fourier:cg:cyclic:3", convolution_channel(random_state(qg.algebra, seed).element, qg)
    if kind == 3:
        return "random:M2", random_channel(BlockAlgebra.matrix(2), seed)
    if kind == 4:
        return "random:C+M2", random_channel(BlockAlgebra((1, 2), (1 / 3, 1 / 3)), seed, kraus_rank=3)
    if kind == 5:
        return "random-unital:kp", random_channel(build_kac_paljutkin().algebra, seed, unital=True)
    if kind == 6:
        rng = np.random.default_rng(seed)
        return "covariant:pauli", covariant_channel(pauli_rep(), 4 * rng.dirichlet(np.ones(4)))
    if kind == 7:
        return "herz_schur:cyclic:3", herz_schur_channel(random_positive_definite(build_cyclic(3), seed))
    if kind == 8:
        alg = BlockAlgebra.matrix(3)
        t = pinching(alg)
        u = random_channel(alg, seed)
        return "pinching∘random:M3", Channel(alg, alg, t.matrix @ u.matrix, "pinch")
    rng = np.random.default_rng(seed)
    alg = BlockAlgebra.matrix(2)
    w = rng.uniform()
    mix = w * identity_channel(alg).matrix + (1 - w) * completely_depolarizing(alg).matrix
    return "depolarizing:M2", Channel(alg, alg, mix, "depol")


def holder_violation(alg: BlockAlgebra, rng: np.random.Generator) -> float:
    """max(0, |τ(xy)| − ‖x‖_p ‖y‖_q) for random x, y and a random conjugate pair."""
    x, y = random_element(alg, rng), random_element(alg, rng)
    p = float(rng.uniform(1.05, 6.0))
    q = p / (p - 1)
    worst = abs(trace(x @ y)) - lp_norm(x, p) * lp_norm(y, q)
    worst = max(worst, abs(trace(x @ y)) - lp_norm(x, 1) * lp_norm(y, INF))
    return max(0.0, worst)


def battery_case(i: int, cfg: OptimizerConfig) -> dict:
    kind, t = battery_channel(i)
    rng = np.random.default_rng([5000, i])
    hmin = h_min_optimize(t, cfg)
    cb = h_cb_min(t, cfg).value
    chi = holevo_chi_lower(t, cfg, start=hmin).value
    log_unit = math.log(t.domain.unit_trace)
    rho = random_state(t.domain, int(rng.integers(1 << 31))).element
    emb = embed_to_matrix_algebra(t).channel
    hmin_emb = h_min_optimize(emb, cfg).value
    return {
        "index": i, "kind": kind, "h_min": hmin.value, "h_cb_min": cb, "chi_lower": chi,
        "cb_excess": cb - hmin.value,
        "chi_excess": chi - (log_unit - hmin.value),
        "entropy_excess": segal_entropy(rho) - log_unit,
        "holder_violation": holder_violation(t.domain, rng),
        "embedding_gap": abs(hmin_emb - hmin.value),
    }


BATTERY_LIMITS = {
    "cb_excess": ("H_cb,min <= H_min + 5e-3", 5e-3),
    "chi_excess": ("chi lower bound <= ln tau(1) - H_min + 1e-6", 1e-6),
    "entropy_excess": ("H(rho) <= ln tau(1)", 1e-12),
    "holder_violation": ("Hoelder inequality", 1e-10),
    "embedding_gap": ("embedding invariance of H_min", 5e-3),
}


def battery_failures(case: dict) -> list[str]:
    return [f"case {case['index']} ({case['kind']}): {name} violated by {case[key]:.3g}"
            for key, (name, lim) in BATTERY_LIMITS.items() if case[key] > lim]


def criterion_10(count: int = 100, restarts: int = 32) -> CriterionResult:
    cfg = OptimizerConfig(restarts=restarts)
    with _Timer() as tm:
        cases = [battery_case(i, cfg) for i in range(count)]
    failures = [msg for c in cases for msg in battery_failures(c)]
    worst = {key: _worst(c[key] for c in cases) for key in BATTERY_LIMITS}
    ok = not failures and tm.elapsed < 600
    return CriterionResult(10, "inequality battery", ok, tm.elapsed,
                           {"cases": count, "restarts": restarts, "worst": worst}, failures)


CRITERIA: dict[int, Callable[[], CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
}


def run_criterion(n: int) -> CriterionResult:
    return CRITERIA[n]()
