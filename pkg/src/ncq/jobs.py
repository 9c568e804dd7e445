"""Execute a JobSpec and assemble its deterministic report.

All numbers in a report come from here; the CLI only parses and writes.
Reports contain no timings, so identical (spec, seed) pairs give identical bytes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .algebra import INF, lp_norm
from .channel import classify_entanglement_breaking, multiplicative_domain
from .entropy import (
    classical_convolution_capacity,
    covariant_chi_identity,
    entropy_report,
    h_min_optimize,
    holevo_chi_lower,
    in_unit,
    norm_1_to_p,
    transference_bound_check,
)
from .groups import GroupFunction, parse_group, subgroup_of_modulus_one
from .qgroup import AXIOM_TOL, parse_qgroup, qgroup_from_obj, verify_axioms
from .serialize import FormatError, pair_to_complex, require_keys
from .specs import ChannelContext, JobSpec, parse_channel_spec
from .suites import run_suite, suite_summary

DEFAULT_TOL = {
    "verify-qgroup": AXIOM_TOL,
    "entropy": 5e-3,
    "norms": 1e-4,
    "capacity": 1e-6,
    "structure": 1e-8,
}


@dataclass
class JobOutcome:
    report: dict
    assertions: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(a["passed"] for a in self.assertions)


def _assert(out: list, name: str, value: float, limit: float, below: bool = True):
    ok = value <= limit if below else value >= limit
    out.append({"name": name, "value": value, "limit": limit, "passed": bool(ok)})


def _parse_exponent(p: str):
    p = str(p).strip().lower()
    if p in ("inf", "infinity", "∞"):
        return INF
    try:
        val = float(p)
    except ValueError as exc:
        raise FormatError(f"invalid exponent {p!r}") from exc
    if math.isinf(val):
        return INF
    if val < 1:
        raise FormatError("exponents must be >= 1")
    return val


def _label(p) -> str:
    return "inf" if p is INF else format(p, "g")


# --------------------------------------------------------------------------
# job kinds


def _verify_qgroup(job: JobSpec, asserts: list) -> dict:
    target = job.target
    qg = parse_qgroup(target) if isinstance(target, str) else qgroup_from_obj(target)
    tol = job.tol or DEFAULT_TOL["verify-qgroup"]
    rep = verify_axioms(qg, tol)
    for k, v in rep.residuals.items():
        _assert(asserts, f"axiom {k}", v, tol)
    return {"qgroup": qg.name, "dimension": qg.dim, "residuals": rep.residuals}


def _entropy(job: JobSpec, ctx: ChannelContext, asserts: list) -> dict:
    cfg = job.config()
    tol = job.tol or DEFAULT_TOL["entropy"]
    closed = ctx.closed_entropy
    rep = entropy_report(ctx.channel, cfg, closed)
    u = job.unit
    for key in ("optimize_vs_closed", "derivative_vs_closed", "cb_vs_closed"):
        if key in rep.residuals:
            _assert(asserts, key, rep.residuals[key], tol)
    _assert(asserts, "h_cb_min <= h_min", rep.residuals["cb_minus_min"], tol)
    out = {
        "routes": {
            "h_min_optimize": in_unit(rep.h_min_optimize, u),
            "h_min_derivative": in_unit(rep.h_min_derivative, u),
            "h_cb_min": in_unit(rep.h_cb_min, u),
            "closed_form": None if closed is None else in_unit(closed, u),
        },
        "residuals": {k: in_unit(v, u) for k, v in rep.residuals.items()},
        "certificates": rep.certificates,
        "iterations": rep.iterations,
    }
    if ctx.kind == "covariant":
        tr = transference_bound_check(ctx.extras["rep"], ctx.density, cfg)
        _assert(asserts, "h_cb_min >= H(f)", tr.cb_slack, -1e-3, below=False)
        out["transference"] = {"h_f": in_unit(tr.h_f, u), "cb_slack": in_unit(tr.cb_slack, u)}
    return out


def _norms(job: JobSpec, ctx: ChannelContext, asserts: list) -> dict:
    cfg = job.config()
    tol = job.tol or DEFAULT_TOL["norms"]
    rows = {}
    for raw in job.p:
        p = _parse_exponent(raw)
        res = norm_1_to_p(ctx.channel, p, cfg)
        row = {"norm": res.value, "certificate": res.certificate()}
        if ctx.density is not None and ctx.kind == "fourier" and ctx.closed_entropy is not None:
            ref = lp_norm(ctx.density, p)
            row["closed_form"] = ref
            row["relative_error"] = abs(res.value - ref) / ref
            _assert(asserts, f"norm identity p={_label(p)}", row["relative_error"], tol)
        rows[_label(p)] = row
    return {"norms": rows}


def _classical_capacity(job: JobSpec, asserts: list) -> dict:
    obj = require_keys(job.target, {"classical", "nu"}, where="capacity target")
    g = parse_group(obj["classical"])
    nu = obj["nu"]
    if not isinstance(nu, list) or len(nu) != g.order:
        raise FormatError(f"'nu' must list {g.order} probabilities")
    vals = [pair_to_complex(v, "nu").real for v in nu]
    try:
        closed, ba = classical_convolution_capacity(g, vals)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    tol = job.tol or DEFAULT_TOL["capacity"]
    gap = abs(ba.capacity - closed)
    _assert(asserts, "blahut_arimoto vs closed form", gap, tol)
    u = job.unit
    return {
        "group": g.label,
        "capacity": {"blahut_arimoto": in_unit(ba.capacity, u), "closed_form": in_unit(closed, u)},
        "residuals": {"blahut_arimoto_vs_closed": in_unit(gap, u), "duality_gap": in_unit(ba.gap, u)},
        "input_distribution": [float(x) for x in ba.input_distribution],
        "iterations": ba.iterations,
    }


def _quantum_capacity_bounds(job: JobSpec, ctx: ChannelContext, asserts: list) -> dict:
    cfg = job.config()
    u = job.unit
    t = ctx.channel
    hmin = h_min_optimize(t, cfg)
    chi = holevo_chi_lower(t, cfg, start=hmin)
    upper = math.log(t.domain.unit_trace) - hmin.value
    _assert(asserts, "chi lower bound <= ln tau(1) - H_min", chi.value - upper, 1e-6)
    out = {
        "chi_lower": in_unit(chi.value, u),
        "h_min_optimize": in_unit(hmin.value, u),
        "chi_upper_from_h_min": in_unit(upper, u),
        "ensemble_weights": [float(x) for x in chi.weights],
        "iterations": chi.iterations,
    }
    if ctx.kind == "fourier" and ctx.closed_entropy is not None:
        bound = -ctx.closed_entropy
        out["capacity_upper_bound"] = in_unit(bound, u)
        _assert(asserts, "chi lower bound <= -H(f)", chi.value - bound, 1e-6)
    if ctx.kind == "covariant":
        cov = covariant_chi_identity(ctx.extras["rep"], ctx.density, cfg, tol=job.tol or 5e-3)
        out["covariant_identity_gap"] = in_unit(cov.gap, u)
        _assert(asserts, "|chi + H_min| for an irreducible covariant channel", cov.gap, job.tol or 5e-3)
    return out


def _capacity(job: JobSpec, asserts: list) -> dict:
    if isinstance(job.target, dict) and "classical" in job.target:
        return _classical_capacity(job, asserts)
    ctx = parse_channel_spec(job.target, job.seed)
    return _quantum_capacity_bounds(job, ctx, asserts)


def _structure(job: JobSpec, ctx: ChannelContext, asserts: list) -> dict:
    t = ctx.channel
    out = {"flags": t.flags(), "entanglement_breaking": classify_entanglement_breaking(t).value}
    if t.is_markov:
        md = multiplicative_domain(t, job.tol or DEFAULT_TOL["structure"])
        out["multiplicative_domain"] = {
            "dimension": md.dimension,
            "gap": md.gap,
            "closure": md.closure,
            "homomorphism_residual": md.homomorphism_residual,
        }
        _assert(asserts, "multiplicative domain is a subalgebra", max(md.closure.values(), default=0.0),
                1e-8)
        phi = ctx.density if isinstance(ctx.density, GroupFunction) else None
        if phi is None and ctx.kind == "fourier" and ctx.qgroup is not None and ctx.qgroup.group is not None \
                and ctx.qgroup.name.startswith("vng:"):
            phi = GroupFunction(ctx.qgroup.group, ctx.qgroup.coefficients(ctx.density))
        if phi is not None:
            g_phi = subgroup_of_modulus_one(phi)
            out["multiplicative_domain"]["g_phi_order"] = len(g_phi)
            if ctx.kind == "herz_schur":
                # Schur multipliers fix every E_st with |φ(st⁻¹)| = 1
                expected, label = phi.group.order * len(g_phi), "dim MD equals |G| |G_phi|"
            else:
                expected, label = len(g_phi), "dim MD equals |G_phi|"
            _assert(asserts, label, abs(md.dimension - expected), 0)
    return out


def run_job(job: JobSpec) -> JobOutcome:
    """Run one job; raises FormatError for invalid input."""
    asserts: list = []
    header = {"job": job.kind, "seed": job.seed, "unit": job.unit,
              "options": {"restarts": job.restarts, "max_iters": job.max_iters,
                          "objective_tol": job.objective_tol, "tol": job.tol}}
    try:
        if job.kind == "verify-qgroup":
            body = _verify_qgroup(job, asserts)
        elif job.kind == "capacity":
            body = _capacity(job, asserts)
        elif job.kind == "suite":
            res = run_suite(job.target)
            body = suite_summary(res)
            asserts.append({"name": f"suite {job.target}", "value": len(res.failures), "limit": 0,
                            "passed": res.passed})
        else:
            ctx = parse_channel_spec(job.target, job.seed)
            if not (ctx.channel.cp and ctx.channel.tp) and job.kind in ("entropy", "norms"):
                if job.kind == "entropy" or not ctx.channel.cp:
                    raise FormatError("the target map is not a quantum channel (CP and trace preserving)")
            body = {"entropy": _entropy, "norms": _norms, "structure": _structure}[job.kind](job, ctx, asserts)
            body = {"channel": ctx.kind, "flags": ctx.channel.flags(), **body}
    except ValueError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(str(exc)) from exc
    report = {**header, "results": body, "assertions": asserts,
              "passed": all(a["passed"] for a in asserts)}
    return JobOutcome(report, asserts)
