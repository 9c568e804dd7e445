"""Multi-start Riemannian gradient descent over pure states.

A pure state of block k is x = (1/λ_k) v v* with ‖v‖ = 1. Every objective
here is a spectral functional Φ of a linear image y = L(vv*), so its gradient
in v is 2 A v with A the pull-back of ∇Φ through L.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from ._kernels import ENTROPY
from .algebra import BlockAlgebra
from .channel import Channel

FG = Callable[[np.ndarray], tuple[float, np.ndarray]]


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 32
    max_iters: int = 2000
    objective_tol: float = 1e-8
    grad_tol: float = 1e-9
    initial_step: float = 0.25
    armijo: float = 1e-4
    backtrack: float = 0.5
    min_step: float = 1e-14
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class RunResult:
    value: float
    vector: np.ndarray
    iterations: int


@dataclass
class OptResult:
    """Best value found over all restarts, with its certificate."""

    value: float
    block: tuple[int, ...]
    vector: np.ndarray
    restart_values: list[float] = field(default_factory=list)
    iterations: int = 0
    evaluations: int = 0

    def certificate(self) -> dict:
        return {
            "block": list(self.block),
            "vector": [[float(z.real), float(z.imag)] for z in self.vector],
        }


def _tangent(v: np.ndarray, g: np.ndarray) -> np.ndarray:
    return g - np.real(np.vdot(v, g)) * v


def minimize_on_sphere(fg: FG, v0: np.ndarray, cfg: OptimizerConfig) -> RunResult:
    """Projected gradient descent with Barzilai-Borwein steps and Armijo backtracking."""
    v = v0 / np.linalg.norm(v0)
    f, g = fg(v)
    rg = _tangent(v, g)
    gn2 = float(np.real(np.vdot(rg, rg)))
    step = cfg.initial_step / max(math.sqrt(gn2), 1.0)
    small = 0
    it = 0
    for it in range(1, cfg.max_iters + 1):
        if math.sqrt(gn2) <= cfg.grad_tol:
            break
        t = step
        while True:
            w = v - t * rg
            w /= np.linalg.norm(w)
            fw, gw = fg(w)
            if fw <= f - cfg.armijo * t * gn2 or t < cfg.min_step:
                break
            t *= cfg.backtrack
        if t < cfg.min_step and fw > f:
            break
        rgw = _tangent(w, gw)
        s = w - v
        yv = rgw - rg
        sy = float(np.real(np.vdot(s, yv)))
        step = float(np.real(np.vdot(s, s))) / sy if sy > 1e-300 else 2 * t
        step = min(max(step, 1e-8), 1e3)
        gain = f - fw
        v, f, rg = w, fw, rgw
        gn2 = float(np.real(np.vdot(rg, rg)))
        small = small + 1 if gain <= cfg.objective_tol * 1e-3 * max(1.0, abs(f)) else 0
        if small >= 3:
            break
    return RunResult(float(f), v, it)


def random_unit_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


# --------------------------------------------------------------------------
# objectives


def output_layout(alg: BlockAlgebra):
    return _kernels.layout(alg.block_sizes, alg.trace_weights)


def transpose_index(alg: BlockAlgebra) -> np.ndarray:
    """Permutation of flat entries sending each block to its transpose (an involution)."""
    idx = []
    for k, n in enumerate(alg.block_sizes):
        o = alg.offsets[k]
        idx.append((o + np.arange(n * n).reshape(n, n).T).reshape(-1))
    return np.concatenate(idx)


def block_input_map(t: Channel, k: int) -> np.ndarray:
    """L_k with flat(T((1/λ_k) P)) = L_k vec(P) for P in block k."""
    dom, cod = t.domain, t.codomain
    cols = t.matrix[:, dom.block_slice(k)]
    return cols / cod.coord_scale[:, None] / math.sqrt(dom.trace_weights[k])


class SpectralObjective:
    """v ↦ sign · Φ(L(vv*)) + const, where Φ is one of the kernel functionals."""

    def __init__(self, lmap: np.ndarray, out: BlockAlgebra, mode: int, p: float = 1.0,
                 sign: float = 1.0, const: float = 0.0):
        self.lmap = lmap
        self.n = math.isqrt(lmap.shape[1])
        self.layout = output_layout(out)
        self.mode, self.p, self.sign, self.const = mode, p, sign, const
        tp = transpose_index(out)
        # a = Q @ G gives the coefficients of vec(dP) in dΦ
        self.pull = (lmap[tp] * out.flat_weights[:, None]).T.copy()
        self.evaluations = 0

    def output(self, v: np.ndarray) -> np.ndarray:
        return self.lmap @ np.outer(v, v.conj()).reshape(-1)

    def value(self, v: np.ndarray) -> float:
        val, _ = _kernels.block_spectral(self.output(v), *self.layout, self.mode, self.p)
        return self.sign * val + self.const

    def __call__(self, v: np.ndarray) -> tuple[float, np.ndarray]:
        self.evaluations += 1
        val, g = _kernels.block_spectral(self.output(v), *self.layout, self.mode, self.p)
        a = (self.pull @ g).reshape(self.n, self.n).T
        a = (a + a.conj().T) / 2
        return self.sign * val + self.const, 2 * self.sign * (a @ v)


class CbEntropyObjective:
    """v ↦ H[(Id⊗T)(ρ)] − H[(Id⊗τ)(ρ)] for ρ = vv*/(λ_k λ_l) in block (k, l) of ℳ⊗ℳ."""

    def __init__(self, t: Channel, k: int, l: int):
        dom, cod = t.domain, t.codomain
        self.nk, self.nl = dom.block_sizes[k], dom.block_sizes[l]
        self.lam_k = dom.trace_weights[k]
        self.lmap = block_input_map(t, l)  # (D_out, n_l²)
        self.cod = cod
        sizes = [self.nk * m for m in cod.block_sizes]
        weights = [self.lam_k * mu for mu in cod.trace_weights]
        self.layout = _kernels.layout(sizes, weights)
        self.marg_layout = _kernels.layout([self.nk], [self.lam_k])
        self.evaluations = 0

    def _outputs(self, v):
        nk, nl = self.nk, self.nl
        vm = v.reshape(nk, nl)
        pab = np.einsum("ai,bj->abij", vm, vm.conj()).reshape(nk * nk, nl * nl)
        yab = pab @ self.lmap.T  # (nk², D_out)
        parts = []
        for o, m in zip(self.cod.offsets, self.cod.block_sizes):
            sub = yab[:, o:o + m * m].reshape(nk, nk, m, m).transpose(0, 2, 1, 3)
            parts.append(sub.reshape(-1) / self.lam_k)
        return vm, np.concatenate(parts)

    def value(self, v):
        vm, y = self._outputs(v)
        hy, _ = _kernels.block_spectral(y, *self.layout, ENTROPY)
        marg = (vm @ vm.conj().T / self.lam_k).reshape(-1)
        hm, _ = _kernels.block_spectral(marg, *self.marg_layout, ENTROPY)
        return hy - hm

    def __call__(self, v):
        self.evaluations += 1
        nk, nl = self.nk, self.nl
        vm, y = self._outputs(v)
        hy, gy = _kernels.block_spectral(y, *self.layout, ENTROPY)
        marg = (vm @ vm.conj().T / self.lam_k).reshape(-1)
        hm, gm = _kernels.block_spectral(marg, *self.marg_layout, ENTROPY)

        hab = np.zeros((nk * nk, self.cod.dim), complex)
        pos = 0
        for o, m, mu in zip(self.cod.offsets, self.cod.block_sizes, self.cod.trace_weights):
            size = nk * m
            gr = gy[pos:pos + size * size].reshape(nk, m, nk, m)  # [b, j', a, i']
            hab[:, o:o + m * m] = (mu * gr.transpose(2, 0, 3, 1)).reshape(nk * nk, m * m)
            pos += size * size
        a4 = (hab @ self.lmap).reshape(nk, nk, nl, nl)  # [a, b, i, j]
        a_mat = a4.transpose(1, 3, 0, 2).reshape(nk * nl, nk * nl)
        a_mat = a_mat - np.kron(gm.reshape(nk, nk), np.eye(nl))
        a_mat = (a_mat + a_mat.conj().T) / 2
        return hy - hm, 2 * (a_mat @ v)


# --------------------------------------------------------------------------
# multi-start driver


@dataclass
class Problem:
    """One block's objective plus deterministic extra starting vectors."""

    key: tuple[int, ...]
    objective: object
    dim: int
    starts: list[np.ndarray] = field(default_factory=list)


def multistart(problems: Sequence[Problem], cfg: OptimizerConfig) -> OptResult:
    """Minimize every block problem from ``cfg.restarts`` starts and keep the best.

    One-dimensional blocks have a single pure state and are evaluated directly.
    """
    best: OptResult | None = None
    values, iters, evals = [], 0, 0
    for pi, prob in enumerate(problems):
        if prob.dim == 1:
            v = np.ones(1, complex)
            runs = [RunResult(float(prob.objective.value(v)), v, 0)]
        else:
            rng = np.random.default_rng([cfg.seed, pi])
            starts = list(prob.starts)[: cfg.restarts]
            while len(starts) < cfg.restarts:
                starts.append(random_unit_vector(prob.dim, rng))
            runs = [minimize_on_sphere(prob.objective, s, cfg) for s in starts]
        for r in runs:
            values.append(r.value)
            iters += r.iterations
            if best is None or r.value < best.value:
                best = OptResult(r.value, prob.key, r.vector)
        evals += getattr(prob.objective, "evaluations", 0)
    assert best is not None
    best.restart_values = values
    best.iterations = iters
    best.evaluations = evals
    return best


def basis_starts(n: int, limit: int = 4) -> list[np.ndarray]:
    out = []
    for i in range(min(n, limit)):
        e = np.zeros(n, complex)
        e[i] = 1.0
        out.append(e)
    return out
