"""Minimum output entropy (three routes), cb-minimal entropy, 1→p norms,
Holevo lower bounds and classical capacities."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._kernels import ENTROPY, MAXEIG, PPOWER
from .algebra import INF, segal_entropy
from .channel import (
    Channel,
    covariant_channel,
    tensor_channel,
)
from .groups import FiniteGroup, GroupFunction, UnitaryRep, is_positive_definite, schur_pattern
from .optimize import (
    CbEntropyObjective,
    OptimizerConfig,
    OptResult,
    Problem,
    SpectralObjective,
    basis_starts,
    block_input_map,
    multistart,
    random_unit_vector,
)
from .qgroup import QuantumGroup, is_channel_density

DEFAULT_CONFIG = OptimizerConfig()
DERIVATIVE_STEPS = (1e-3, 5e-4)


def _require_channel(t: Channel):
    if not (t.cp and t.tp):
        raise ValueError("expected a completely positive trace-preserving map")


def _extra_starts(extra, key):
    return [v for k, v in (extra or []) if tuple(k) == tuple(key)]


def _pure_state_problems(t: Channel, mode: int, p: float, sign: float, const: float, extra=None):
    probs = []
    for k, n in enumerate(t.domain.block_sizes):
        obj = SpectralObjective(block_input_map(t, k), t.codomain, mode, p, sign, const)
        probs.append(Problem((k,), obj, n, _extra_starts(extra, (k,)) + basis_starts(n)))
    return probs


def h_min_optimize(t: Channel, cfg: OptimizerConfig = DEFAULT_CONFIG, extra_starts=None) -> OptResult:
    """min over pure states of H(T(x))."""
    _require_channel(t)
    return multistart(_pure_state_problems(t, ENTROPY, 1.0, 1.0, 0.0, extra_starts), cfg)


def norm_1_to_p(t: Channel, p, cfg: OptimizerConfig = DEFAULT_CONFIG) -> OptResult:
    """sup over states of ‖T(x)‖_p; the returned ``value`` is the norm itself."""
    if not t.cp:
        raise ValueError("the positive-cone formula needs a completely positive map")
    if p is INF or (isinstance(p, float) and math.isinf(p)):
        res = multistart(_pure_state_problems(t, MAXEIG, 1.0, -1.0, 0.0), cfg)
        res.value = -res.value
        return res
    p = float(p)
    if p < 1:
        raise ValueError("p must be >= 1")
    res = multistart(_pure_state_problems(t, PPOWER, p, -1.0, 0.0), cfg)
    res.value = max(-res.value, 0.0) ** (1.0 / p)
    return res


@dataclass
class DerivativeResult:
    value: float
    quotients: dict[float, float]
    argmins: dict[float, OptResult] = field(repr=False, default_factory=dict)


def h_min_derivative(t: Channel, cfg: OptimizerConfig = DEFAULT_CONFIG,
                     steps: tuple[float, float] = DERIVATIVE_STEPS) -> DerivativeResult:
    """-d/dp ‖T‖_{1→p}^p at p = 1⁺ by one-sided differences and Richardson extrapolation.

    For each step h the quotient (1 - sup_x τ(T(x)^{1+h})) / h is minimized
    directly over pure states.
    """
    _require_channel(t)
    h1, h2 = steps
    quot, argmins = {}, {}
    for h in (h1, h2):
        res = multistart(_pure_state_problems(t, PPOWER, 1.0 + h, -1.0 / h, 1.0 / h), cfg)
        quot[h] = res.value
        argmins[h] = res
    ratio = h1 / h2
    value = (ratio * quot[h2] - quot[h1]) / (ratio - 1)
    return DerivativeResult(float(value), quot, argmins)


def h_min_closed_form(f, qg: QuantumGroup) -> float:
    """H_min of x ↦ f∗x, which equals H(f)."""
    if not is_channel_density(f, qg):
        raise ValueError("f must be positive with unit L1 norm")
    return segal_entropy(f)


def maximally_entangled(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex).reshape(-1) / math.sqrt(n)


def h_cb_min(t: Channel, cfg: OptimizerConfig = DEFAULT_CONFIG, extra_starts=None) -> OptResult:
    """inf over pure states ρ of ℳ⊗ℳ of H[(Id⊗T)ρ] − H[(Id⊗τ)ρ]."""
    _require_channel(t)
    if t.domain != t.codomain:
        raise ValueError("h_cb_min expects a channel on a single algebra")
    sizes = t.domain.block_sizes
    probs = []
    for k, nk in enumerate(sizes):
        for l, nl in enumerate(sizes):
            starts = _extra_starts(extra_starts, (k, l))
            if nk == nl:
                starts.append(maximally_entangled(nk))
            probs.append(Problem((k, l), CbEntropyObjective(t, k, l), nk * nl, starts))
    return multistart(probs, cfg)


def h_cb_min_hs_closed(phi: GroupFunction) -> tuple[float, float]:
    """The two closed forms of H_cb,min for a Herz-Schur multiplier.

    Returns (H(C_φ/|G|) − log|G| with the trace Tr, H(Σ φ(s)λ_s) in VN(G)).
    """
    from .channel import build_group_vn
    from .qgroup import group_function_element

    if not is_positive_definite(phi) or abs(phi[phi.group.identity] - 1) > 1e-12:
        raise ValueError("φ must be positive definite with φ(e) = 1")
    g = phi.group
    c = schur_pattern(phi) / g.order
    mu = np.clip(np.linalg.eigvalsh((c + c.conj().T) / 2), 0, None)
    pos = mu[mu > 0]
    first = float(-np.sum(pos * np.log(pos))) - math.log(g.order)
    second = segal_entropy(group_function_element(phi, build_group_vn(g)))
    return first, second


# --------------------------------------------------------------------------
# Holevo χ


@dataclass
class HolevoResult:
    value: float
    weights: np.ndarray
    members: list[tuple[int, np.ndarray]]
    iterations: int


def _ensemble_outputs(t: Channel, members, lmaps):
    return [lmaps[k] @ np.outer(v, v.conj()).reshape(-1) for k, v in members]


def _chi(t: Channel, lam, outs, layout):
    avg = sum(l * y for l, y in zip(lam, outs))
    h_avg, g_avg = _kernels.block_spectral(avg, *layout, ENTROPY)
    hs, gs = zip(*(_kernels.block_spectral(y, *layout, ENTROPY) for y in outs))
    return h_avg - float(np.dot(lam, hs)), g_avg, np.array(hs), gs


def holevo_chi_lower(t: Channel, cfg: OptimizerConfig = DEFAULT_CONFIG, size: int | None = None,
                     start: OptResult | None = None, outer_iters: int = 300) -> HolevoResult:
    """Heuristic lower bound for χ(T) = sup H(Σ λ_i T(ρ_i)) − Σ λ_i H(T(ρ_i)).

    Alternates Blahut-Arimoto updates of the weights with projected gradient
    ascent on the pure members. The result is a lower bound, never χ itself.
    """
    _require_channel(t)
    dom, cod = t.domain, t.codomain
    layout = _kernels.layout(cod.block_sizes, cod.trace_weights)
    lmaps = [block_input_map(t, k) for k in range(dom.num_blocks)]
    w_flat = cod.flat_weights
    from .optimize import transpose_index

    tp = transpose_index(cod)
    pulls = [(lm[tp] * w_flat[:, None]).T for lm in lmaps]

    size = size or max(dom.dim, 2)
    rng = np.random.default_rng([cfg.seed, 7])
    if start is None:
        start = h_min_optimize(t, cfg)
    members = [(start.block[0], start.vector.copy())]
    k = 0
    while len(members) < size:
        k = (k + 1) % dom.num_blocks
        members.append((k, random_unit_vector(dom.block_sizes[k], rng)))
    lam = np.full(len(members), 1.0 / len(members))

    outs = _ensemble_outputs(t, members, lmaps)
    chi, g_avg, hs, gs = _chi(t, lam, outs, layout)
    step = 0.5
    it = 0
    for it in range(1, outer_iters + 1):
        old = chi
        # weights: Blahut-Arimoto with D_i = D(T(ρ_i) ‖ avg) = −H_i + τ(T(ρ_i) G_avg) + 1
        for _ in range(50):
            d = np.array([-h + float(np.real(np.dot(w_flat * y, g_avg[tp]))) + 1.0 for h, y in zip(hs, outs)])
            new = lam * np.exp(np.clip(d - d.max(), -700, 0))
            new /= new.sum()
            moved = float(np.abs(new - lam).max())
            lam = new
            chi, g_avg, hs, gs = _chi(t, lam, outs, layout)
            if moved < 1e-12:
                break
        # members: ascend χ in every member vector jointly
        grads = []
        for (kb, v), li, gi in zip(members, lam, gs):
            a = (pulls[kb] @ (g_avg - gi)).reshape(len(v), len(v)).T
            a = (a + a.conj().T) / 2
            g = 2 * li * (a @ v)
            grads.append(g - np.real(np.vdot(v, g)) * v)
        gnorm = math.sqrt(sum(float(np.real(np.vdot(g, g))) for g in grads))
        if gnorm < cfg.grad_tol:
            break
        tstep = step
        while tstep > 1e-12:
            trial = []
            for (kb, v), g in zip(members, grads):
                w = v + tstep * g
                trial.append((kb, w / np.linalg.norm(w)))
            touts = _ensemble_outputs(t, trial, lmaps)
            tchi, tg, ths, tgs = _chi(t, lam, touts, layout)
            if tchi >= chi + 1e-4 * tstep * gnorm ** 2:
                members, outs, chi, g_avg, hs, gs = trial, touts, tchi, tg, ths, tgs
                step = min(tstep * 2, 1e3)
                break
            tstep *= 0.5
        if abs(chi - old) <= cfg.objective_tol * 1e-2:
            break
    return HolevoResult(float(chi), lam, members, it)


# --------------------------------------------------------------------------
# classical capacities


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    pos = p[p > 0]
    return float(-np.sum(pos * np.log(pos)))


@dataclass
class BAResult:
    capacity: float
    input_distribution: np.ndarray
    iterations: int
    gap: float


def blahut_arimoto(w, tol: float = 1e-9, max_iters: int = 100_000) -> BAResult:
    """Capacity (nats) of the discrete memoryless channel with rows W[x, :] = p(·|x)."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.min() < -1e-12 or np.abs(w.sum(axis=1) - 1).max() > 1e-9:
        raise ValueError("W must be a row-stochastic matrix")
    w = np.clip(w, 0, None)
    nx = w.shape[0]
    p = np.full(nx, 1.0 / nx)
    logw = np.log(np.where(w > 0, w, 1.0))
    lower = upper = 0.0
    it = 0
    for it in range(1, max_iters + 1):
        q = p @ w
        logq = np.log(np.where(q > 0, q, 1.0))
        d = np.sum(np.where(w > 0, w * (logw - logq), 0.0), axis=1)
        lower = float(np.log(np.dot(p, np.exp(d))))
        upper = float(d.max())
        if upper - lower < tol:
            break
        p = p * np.exp(d - d.max())
        p /= p.sum()
    return BAResult(0.5 * (lower + upper), p, it, upper - lower)


def convolution_stochastic_matrix(nu: GroupFunction | np.ndarray, g: FiniteGroup) -> np.ndarray:
    """W[r, t] = ν(t r^{-1}): input r, output t."""
    vals = np.real(nu.values if isinstance(nu, GroupFunction) else np.asarray(nu, float))
    return vals[g.table[:, list(g.inv)].T]


def classical_convolution_capacity(g: FiniteGroup, nu) -> tuple[float, BAResult]:
    """(log|G| − H(ν), Blahut-Arimoto cross-check on the matrix [ν(t r^{-1})])."""
    vals = np.real(np.asarray(nu.values if isinstance(nu, GroupFunction) else nu, float))
    if vals.shape != (g.order,) or vals.min() < -1e-12 or abs(vals.sum() - 1) > 1e-9:
        raise ValueError("ν must be a probability vector on G")
    closed = math.log(g.order) - shannon_entropy(vals)
    return closed, blahut_arimoto(convolution_stochastic_matrix(vals, g))


# --------------------------------------------------------------------------
# reports tying the routes together


@dataclass
class EntropyReport:
    h_min_optimize: float
    h_min_derivative: float
    h_cb_min: float
    h_min_closed: float | None
    residuals: dict[str, float]
    wall_time: float
    certificates: dict = field(default_factory=dict)
    iterations: dict = field(default_factory=dict)


def entropy_report(t: Channel, cfg: OptimizerConfig = DEFAULT_CONFIG, closed: float | None = None) -> EntropyReport:
    start = time.perf_counter()
    opt = h_min_optimize(t, cfg)
    der = h_min_derivative(t, cfg)
    cb = h_cb_min(t, cfg)
    res = {"cb_minus_min": cb.value - opt.value}
    if closed is not None:
        res.update(
            optimize_vs_closed=abs(opt.value - closed),
            derivative_vs_closed=abs(der.value - closed),
            cb_vs_closed=abs(cb.value - closed),
        )
    res["optimize_vs_derivative"] = abs(opt.value - der.value)
    return EntropyReport(
        opt.value, der.value, cb.value, closed, res, time.perf_counter() - start,
        {"h_min": opt.certificate(), "h_cb_min": cb.certificate()},
        {"h_min": opt.iterations, "h_cb_min": cb.iterations,
         "derivative": sum(r.iterations for r in der.argmins.values())},
    )


@dataclass
class CapacityBound:
    bound: float
    chi_lower: float
    consistent: bool


def capacity_bound_fourier(f, qg: QuantumGroup, cfg: OptimizerConfig = DEFAULT_CONFIG) -> CapacityBound:
    """C(T_f) ≤ −H(f), reported with a χ lower estimate that must not exceed it."""
    from .channel import convolution_channel

    bound = -h_min_closed_form(f, qg)
    chi = holevo_chi_lower(convolution_channel(f, qg), cfg).value
    return CapacityBound(bound, chi, chi <= bound + 1e-6)


def _density_on_group(g: FiniteGroup, f) -> np.ndarray:
    vals = np.real(np.asarray(f.values if isinstance(f, GroupFunction) else f, float))
    if vals.shape != (g.order,) or vals.min() < -1e-12 or abs(vals.mean() - 1) > 1e-9:
        raise ValueError("f must be a nonnegative density with mean 1 on G")
    return vals


def group_density_entropy(f: np.ndarray) -> float:
    """H(f) = −(1/|G|) Σ f ln f for the normalized counting measure."""
    pos = f[f > 0]
    return float(-np.sum(pos * np.log(pos)) / len(f))


@dataclass
class TransferenceReport:
    h_f: float
    h_cb_min: float
    h_min: float
    chi_lower: float
    cb_slack: float
    chi_slack: float
    passed: bool


def transference_bound_check(rep: UnitaryRep, f, cfg: OptimizerConfig = DEFAULT_CONFIG,
                             slack: float = 1e-3) -> TransferenceReport:
    """H_cb,min(T) ≥ H(f) and χ(T) ≤ −H(f) for the covariant channel of an irreducible rep."""
    if rep.commutant_dimension() != 1:
        raise ValueError("the representation must be irreducible")
    vals = _density_on_group(rep.group, f)
    t = covariant_channel(rep, vals)
    hf = group_density_entropy(vals)
    hmin = h_min_optimize(t, cfg)
    cb = h_cb_min(t, cfg).value
    chi = holevo_chi_lower(t, cfg, start=hmin).value
    cb_slack, chi_slack = cb - hf, -hf - chi
    return TransferenceReport(hf, cb, hmin.value, chi, cb_slack, chi_slack,
                              cb_slack >= -slack and chi_slack >= -slack)


@dataclass
class CovariantChiReport:
    h_min: float
    chi_lower: float
    gap: float
    passed: bool


def covariant_chi_identity(rep: UnitaryRep, f, cfg: OptimizerConfig = DEFAULT_CONFIG,
                           tol: float = 5e-3) -> CovariantChiReport:
    """χ(T) = −H_min(T) for covariant channels of irreducible reps (normalized trace)."""
    if rep.commutant_dimension() != 1:
        raise ValueError("the representation must be irreducible")
    t = covariant_channel(rep, _density_on_group(rep.group, f))
    hmin = h_min_optimize(t, cfg)
    chi = holevo_chi_lower(t, cfg, start=hmin).value
    gap = abs(chi + hmin.value)
    return CovariantChiReport(hmin.value, chi, gap, gap <= tol)


@dataclass
class AdditivityReport:
    cb_tensor: float
    cb_sum: float
    cb_gap: float
    h_min_tensor: float
    h_min_sum: float
    subadditivity_slack: float


def _product_vector(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.kron(u, v)


def additivity_check(t1: Channel, t2: Channel, cfg: OptimizerConfig = DEFAULT_CONFIG,
                     cap: int = 36, cb_reference: float | None = None) -> AdditivityReport:
    """H_cb,min(T1⊗T2) vs H_cb,min(T1)+H_cb,min(T2), and subadditivity of H_min.

    The tensor problems are also started from products of the factors' optimizers.
    ``cb_reference`` replaces the numeric sum when closed forms are known.
    """
    amb = t1.domain.ambient_size * t2.domain.ambient_size
    if amb > cap:
        raise ValueError(f"tensor algebra of ambient size {amb} exceeds the cap {cap}")
    tt = tensor_channel(t1, t2)
    m2 = t2.domain.num_blocks

    h1, h2 = h_min_optimize(t1, cfg), h_min_optimize(t2, cfg)
    key = (h1.block[0] * m2 + h2.block[0],)
    ht = h_min_optimize(tt, cfg, extra_starts=[(key, _product_vector(h1.vector, h2.vector))])

    c1, c2 = h_cb_min(t1, cfg), h_cb_min(t2, cfg)
    # a product of cb optimizers lives in block ((k1,k2),(l1,l2)); reorder its legs
    (k1, l1), (k2, l2) = c1.block, c2.block
    n = t1.domain.block_sizes
    m = t2.domain.block_sizes
    v = np.kron(c1.vector, c2.vector).reshape(n[k1], n[l1], m[k2], m[l2]).transpose(0, 2, 1, 3).reshape(-1)
    ct = h_cb_min(tt, cfg, extra_starts=[((k1 * m2 + k2, l1 * m2 + l2), v)])
    cb_sum = cb_reference if cb_reference is not None else c1.value + c2.value
    return AdditivityReport(ct.value, cb_sum, abs(ct.value - cb_sum), ht.value,
                            h1.value + h2.value, h1.value + h2.value - ht.value)


# --------------------------------------------------------------------------
# units

UNITS = ("nats", "bits")


def in_unit(value: float, unit: str) -> float:
    """Convert an entropy from nats to ``unit``."""
    if unit == "nats":
        return value
    if unit == "bits":
        return value / math.log(2)
    raise ValueError(f"unit must be one of {UNITS}")
