"""Named verification suites: the acceptance criteria and a randomized property sweep."""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .acceptance import CRITERIA, holder_violation, run_criterion
from .algebra import (
    INF,
    BlockAlgebra,
    lp_norm,
    random_element,
    random_state,
    segal_entropy,
)
from .channel import (
    convolution_channel,
    embedding_for,
    fourier_multiplier_vn,
    herz_schur_channel,
    random_channel,
    transpose_map,
)
from .entropy import blahut_arimoto, h_cb_min, h_min_optimize
from .groups import build_cyclic, build_dihedral, build_symmetric3, random_positive_definite
from .optimize import OptimizerConfig
from .qgroup import build_group_vn, build_kac_paljutkin, convolve
from .serialize import dumps_element, loads_element

SUITES = ("paper-regression", "properties")
PROPERTY_CASES = 240
PROPERTY_SEED = 20240601


def thread_cap() -> int:
    """Worker count from NCQ_THREADS (default 1)."""
    raw = os.environ.get("NCQ_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass
class CaseResult:
    index: int
    invariant: str
    passed: bool
    measure: float
    detail: str = ""


@dataclass
class SuiteResult:
    name: str
    passed: bool
    cases: list = field(default_factory=list)

    @property
    def failures(self) -> list:
        return [c for c in self.cases if not c.passed]


# --------------------------------------------------------------------------
# acceptance regression


def paper_regression(criteria=None) -> SuiteResult:
    numbers = sorted(criteria or CRITERIA)
    workers = min(thread_cap(), len(numbers))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_criterion, numbers))
    else:
        results = [run_criterion(n) for n in numbers]
    return SuiteResult("paper-regression", all(r.passed for r in results), results)


# --------------------------------------------------------------------------
# randomized properties

_ALGEBRAS = (
    BlockAlgebra.matrix(2),
    BlockAlgebra.matrix(3),
    BlockAlgebra((1, 2), (1 / 3, 1 / 3)),
    BlockAlgebra.commutative(4),
    BlockAlgebra((1, 1, 1, 1, 2), (1 / 8, 1 / 8, 1 / 8, 1 / 8, 1 / 4)),
    BlockAlgebra((2, 2), (0.5, 1.5)),
)
_SMALL_CFG = OptimizerConfig(restarts=6)


def _alg(rng) -> BlockAlgebra:
    return _ALGEBRAS[int(rng.integers(len(_ALGEBRAS)))]


def _entropy_bound(i, rng):
    alg = _alg(rng)
    rho = random_state(alg, int(rng.integers(1 << 31))).element
    excess = segal_entropy(rho) - math.log(alg.unit_trace)
    return excess <= 1e-12, excess


def _holder(i, rng):
    v = holder_violation(_alg(rng), rng)
    return v <= 1e-10, v


def _norm_monotone(i, rng):
    # for a normalized trace, ‖x‖_p increases with p
    alg = BlockAlgebra.matrix(int(rng.integers(2, 5)))
    x = random_element(alg, rng)
    ps = sorted(rng.uniform(1, 8, size=3))
    vals = [lp_norm(x, p) for p in ps] + [lp_norm(x, INF)]
    drop = max(a - b for a, b in zip(vals, vals[1:]))
    return drop <= 1e-10 * max(vals), drop


def _random_channel_markov(i, rng):
    alg = _alg(rng)
    t = random_channel(alg, int(rng.integers(1 << 31)), kraus_rank=int(rng.integers(1, 4)))
    dev = -t.choi_matrix.min_eigenvalue
    return t.cp and t.tp, dev


def _transpose_not_cp(i, rng):
    alg = BlockAlgebra.matrix(int(rng.integers(2, 4)))
    t = transpose_map(alg)
    return (not t.cp) and t.tp, t.choi_matrix.min_eigenvalue


def _convolution_associative(i, rng):
    qg = build_kac_paljutkin()
    f, g = (random_state(qg.algebra, int(rng.integers(1 << 31))).element for _ in range(2))
    x = random_element(qg.algebra, rng)
    err = convolve(f, convolve(g, x, qg), qg).distance(convolve(convolve(f, g, qg), x, qg))
    return err <= 1e-10, err


def _multiplier_matches_convolution(i, rng):
    g = (build_symmetric3(), build_dihedral(4), build_cyclic(5))[int(rng.integers(3))]
    phi = random_positive_definite(g, int(rng.integers(1 << 31)))
    qg = build_group_vn(g)
    f = qg.from_coefficients(phi.values)
    err = float(np.abs(fourier_multiplier_vn(phi).matrix - convolution_channel(f, qg).matrix).max())
    return err <= 1e-12, err


def _cb_below_min(i, rng):
    alg = (BlockAlgebra.matrix(2), BlockAlgebra((1, 2), (1 / 3, 1 / 3)))[int(rng.integers(2))]
    t = random_channel(alg, int(rng.integers(1 << 31)))
    gap = h_cb_min(t, _SMALL_CFG).value - h_min_optimize(t, _SMALL_CFG).value
    return gap <= 5e-3, gap


def _capacity_range(i, rng):
    n_in, n_out = rng.integers(2, 5, size=2)
    w = rng.dirichlet(np.ones(n_out), size=n_in)
    c = blahut_arimoto(w).capacity
    top = math.log(min(n_in, n_out))
    return -1e-9 <= c <= top + 1e-9, c


def _embedding_isometry(i, rng):
    alg = _alg(rng)
    emb = embedding_for(alg)
    x = random_element(alg, rng)
    rho = random_state(alg, int(rng.integers(1 << 31))).element
    # J is a trace-preserving *-homomorphism, so it preserves entropy too
    err = max(emb.E(emb.J(x)).distance(x), abs(segal_entropy(emb.J(rho)) - segal_entropy(rho)))
    return err <= 1e-12, err


def _herz_schur_channel(i, rng):
    g = (build_cyclic(3), build_symmetric3())[int(rng.integers(2))]
    t = herz_schur_channel(random_positive_definite(g, int(rng.integers(1 << 31))))
    return t.cp and t.tp and t.unital, -t.choi_matrix.min_eigenvalue


def _serialization_roundtrip(i, rng):
    x = random_element(_alg(rng), rng)
    err = loads_element(dumps_element(x)).distance(x)
    return err <= 1e-11 * max(1.0, x.max_abs()), err


PROPERTIES: tuple[tuple[str, Callable], ...] = (
    ("segal entropy of a state is at most ln tau(1)", _entropy_bound),
    ("Hoelder inequality", _holder),
    ("Lp norms increase with p under a normalized trace", _norm_monotone),
    ("random Kraus channels are CP and TP", _random_channel_markov),
    ("the transpose is TP but not CP", _transpose_not_cp),
    ("convolution is associative", _convolution_associative),
    ("Fourier multiplier equals convolution by its symbol", _multiplier_matches_convolution),
    ("H_cb,min <= H_min + 5e-3", _cb_below_min),
    ("0 <= classical capacity <= ln min(|X|, |Y|)", _capacity_range),
    ("E J = Id for the matrix embedding", _embedding_isometry),
    ("Herz-Schur multipliers of positive definite functions are unital channels", _herz_schur_channel),
    ("element serialization round-trips", _serialization_roundtrip),
)


def property_case(index: int, seed: int = PROPERTY_SEED) -> CaseResult:
    name, fn = PROPERTIES[index % len(PROPERTIES)]
    rng = np.random.default_rng([seed, index])
    try:
        ok, measure = fn(index, rng)
        return CaseResult(index, name, bool(ok), float(measure))
    except Exception as exc:  # a crash is a failure of that invariant
        return CaseResult(index, name, False, math.nan, f"{type(exc).__name__}: {exc}")


def properties(cases: int = PROPERTY_CASES, seed: int = PROPERTY_SEED) -> SuiteResult:
    workers = thread_cap()
    idx = list(range(cases))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(property_case, idx, [seed] * cases))
    else:
        results = [property_case(i, seed) for i in idx]
    return SuiteResult("properties", all(r.passed for r in results), results)


def run_suite(name: str, **kw) -> SuiteResult:
    if name == "paper-regression":
        return paper_regression(**kw)
    if name == "properties":
        return properties(**kw)
    raise ValueError(f"unknown suite {name!r}; expected one of {SUITES}")


def suite_summary(res: SuiteResult) -> dict:
    """Machine-readable pass/fail summary; failing cases name their invariant."""
    if res.name == "paper-regression":
        rows = [{"criterion": r.number, "title": r.title, "passed": r.passed, "details": r.details,
                 "notes": r.notes} for r in res.cases]
        failed = [f"criterion {r.number}: {r.title}" for r in res.cases if not r.passed]
    else:
        rows = None
        failed = [f"case {c.index}: {c.invariant} (measure {c.measure:.3g}{'; ' + c.detail if c.detail else ''})"
                  for c in res.failures]
    out = {"suite": res.name, "passed": res.passed, "cases": len(res.cases), "failed": failed}
    if rows is not None:
        out["criteria"] = rows
    else:
        counts: dict[str, list[int]] = {}
        for c in res.cases:
            counts.setdefault(c.invariant, [0, 0])
            counts[c.invariant][0] += 1
            counts[c.invariant][1] += int(c.passed)
        out["invariants"] = [{"name": k, "cases": v[0], "passed": v[1]} for k, v in counts.items()]
    return out
