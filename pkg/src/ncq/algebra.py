"""Finite-dimensional tracial von Neumann algebras ⊕ M_{n_k} with weighted traces.

An element is a tuple of square complex blocks. The trace is
``τ(x) = Σ_k λ_k Tr(x_k)``. All logarithms are natural.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
POSITIVITY_TOL = 1e-9
CLAMP_TOL = 1e-12
STATE_TRACE_TOL = 1e-10


class Exponent(enum.Enum):
    """Marker for the operator-norm exponent p = ∞."""

    INF = "inf"

    def __repr__(self) -> str:
        return "INF"


INF = Exponent.INF


class NotHermitianError(ValueError):
    pass


class NotAStateError(ValueError):
    pass


@dataclass(frozen=True)
class BlockAlgebra:
    """⊕_k M_{n_k} with trace weights λ_k > 0."""

    block_sizes: tuple[int, ...]
    trace_weights: tuple[float, ...]

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.block_sizes)
        weights = tuple(float(w) for w in self.trace_weights)
        if not sizes:
            raise ValueError("an algebra needs at least one block")
        if len(sizes) != len(weights):
            raise ValueError("block_sizes and trace_weights differ in length")
        if any(n < 1 for n in sizes):
            raise ValueError(f"block sizes must be >= 1, got {sizes}")
        if any(not (w > 0 and math.isfinite(w)) for w in weights):
            raise ValueError(f"trace weights must be finite and > 0, got {weights}")
        object.__setattr__(self, "block_sizes", sizes)
        object.__setattr__(self, "trace_weights", weights)

    @classmethod
    def matrix(cls, n: int, weight: float | None = None) -> "BlockAlgebra":
        """M_n, by default with the normalized trace tr/n."""
        return cls((n,), (1.0 / n if weight is None else weight,))

    @classmethod
    def commutative(cls, n: int) -> "BlockAlgebra":
        """ℓ^∞ on n points with the uniform probability trace."""
        return cls((1,) * n, (1.0 / n,) * n)

    @property
    def num_blocks(self) -> int:
        return len(self.block_sizes)

    @cached_property
    def dim(self) -> int:
        """Linear dimension Σ n_k²."""
        return sum(n * n for n in self.block_sizes)

    @cached_property
    def ambient_size(self) -> int:
        return sum(self.block_sizes)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        """Start of each block inside the flat coordinate vector."""
        out, pos = [], 0
        for n in self.block_sizes:
            out.append(pos)
            pos += n * n
        return tuple(out)

    @cached_property
    def unit_trace(self) -> float:
        return float(sum(w * n for w, n in zip(self.trace_weights, self.block_sizes)))

    @property
    def is_normalized(self) -> bool:
        return abs(self.unit_trace - 1.0) <= 1e-12

    @cached_property
    def flat_weights(self) -> np.ndarray:
        """λ_k repeated over the n_k² flat entries of block k."""
        return np.concatenate(
            [np.full(n * n, w) for n, w in zip(self.block_sizes, self.trace_weights)]
        )

    @cached_property
    def coord_scale(self) -> np.ndarray:
        """Multiply flat entries by this to get trace-orthonormal coordinates."""
        return np.sqrt(self.flat_weights)

    def block_slice(self, k: int) -> slice:
        o = self.offsets[k]
        return slice(o, o + self.block_sizes[k] ** 2)

    def zeros(self) -> "AlgebraElement":
        return AlgebraElement(self, tuple(np.zeros((n, n), complex) for n in self.block_sizes))

    def unit(self) -> "AlgebraElement":
        return AlgebraElement(self, tuple(np.eye(n, dtype=complex) for n in self.block_sizes))

    def from_flat(self, vec: np.ndarray) -> "AlgebraElement":
        """Inverse of :meth:`AlgebraElement.flat` (row-major per block)."""
        vec = np.asarray(vec, dtype=complex)
        if vec.shape != (self.dim,):
            raise ValueError(f"expected flat vector of length {self.dim}, got {vec.shape}")
        return AlgebraElement(
            self,
            tuple(vec[self.block_slice(k)].reshape(n, n).copy() for k, n in enumerate(self.block_sizes)),
        )

    def from_coords(self, coords: np.ndarray) -> "AlgebraElement":
        """Element with the given trace-orthonormal coordinates."""
        return self.from_flat(np.asarray(coords, dtype=complex) / self.coord_scale)

    def matrix_unit(self, k: int, i: int, j: int) -> "AlgebraElement":
        vec = np.zeros(self.dim, complex)
        vec[self.offsets[k] + i * self.block_sizes[k] + j] = 1.0
        return self.from_flat(vec)

    def element(self, blocks: Sequence[np.ndarray]) -> "AlgebraElement":
        return AlgebraElement(self, tuple(np.array(b, dtype=complex) for b in blocks))

    def scaled(self, t: float) -> "BlockAlgebra":
        """Same blocks, trace multiplied by t."""
        return BlockAlgebra(self.block_sizes, tuple(w * t for w in self.trace_weights))


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """One complex matrix per block of ``parent``."""

    parent: BlockAlgebra
    blocks: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        blocks = tuple(np.asarray(b, dtype=complex) for b in self.blocks)
        if len(blocks) != self.parent.num_blocks:
            raise ValueError(
                f"expected {self.parent.num_blocks} blocks, got {len(blocks)}"
            )
        for k, (b, n) in enumerate(zip(blocks, self.parent.block_sizes)):
            if b.shape != (n, n):
                raise ValueError(f"block {k} has shape {b.shape}, expected {(n, n)}")
        object.__setattr__(self, "blocks", blocks)

    def flat(self) -> np.ndarray:
        return np.concatenate([b.reshape(-1) for b in self.blocks])

    def coords(self) -> np.ndarray:
        """Trace-orthonormal coordinates √λ_k x_ij."""
        return self.flat() * self.parent.coord_scale

    def _check(self, other: "AlgebraElement"):
        if other.parent != self.parent:
            raise ValueError("elements belong to different algebras")

    def __add__(self, other):
        self._check(other)
        return AlgebraElement(self.parent, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other):
        self._check(other)
        return AlgebraElement(self.parent, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __neg__(self):
        return AlgebraElement(self.parent, tuple(-a for a in self.blocks))

    def __mul__(self, scalar):
        if isinstance(scalar, AlgebraElement):
            raise TypeError("use @ for the algebra product")
        return AlgebraElement(self.parent, tuple(scalar * a for a in self.blocks))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return AlgebraElement(self.parent, tuple(a / scalar for a in self.blocks))

    def __matmul__(self, other):
        self._check(other)
        return AlgebraElement(self.parent, tuple(a @ b for a, b in zip(self.blocks, other.blocks)))

    @property
    def H(self) -> "AlgebraElement":
        """Adjoint x*."""
        return AlgebraElement(self.parent, tuple(a.conj().T for a in self.blocks))

    def transpose(self) -> "AlgebraElement":
        return AlgebraElement(self.parent, tuple(a.T for a in self.blocks))

    def max_abs(self) -> float:
        return max(float(np.abs(b).max()) for b in self.blocks)

    def distance(self, other: "AlgebraElement") -> float:
        return (self - other).max_abs()

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return all(np.abs(b - b.conj().T).max() <= tol for b in self.blocks)

    def min_eigenvalue(self) -> float:
        return min(float(np.linalg.eigvalsh(b).min()) for b in hermitian_blocks(self))

    def is_positive(self, tol: float = POSITIVITY_TOL) -> bool:
        return self.is_hermitian(max(tol, HERMITIAN_TOL)) and self.min_eigenvalue() >= -tol


def hermitian_blocks(x: AlgebraElement) -> tuple[np.ndarray, ...]:
    """Blocks symmetrized as (x + x*)/2, refusing visibly non-Hermitian input."""
    out = []
    for k, b in enumerate(x.blocks):
        gap = np.abs(b - b.conj().T).max()
        if gap > HERMITIAN_TOL * max(1.0, np.abs(b).max()):
            raise NotHermitianError(f"block {k} is not Hermitian (asymmetry {gap:.3g})")
        out.append((b + b.conj().T) / 2)
    return tuple(out)


def eigenvalues(x: AlgebraElement) -> list[np.ndarray]:
    return [np.linalg.eigvalsh(b) for b in hermitian_blocks(x)]


def functional_calculus(x: AlgebraElement, fn) -> AlgebraElement:
    """fn applied to the spectrum of a Hermitian element, blockwise."""
    blocks = []
    for b in hermitian_blocks(x):
        mu, u = np.linalg.eigh(b)
        blocks.append((u * fn(mu)) @ u.conj().T)
    return AlgebraElement(x.parent, tuple(blocks))


def absolute_value(x: AlgebraElement) -> AlgebraElement:
    """|x| = (x*x)^{1/2}."""
    blocks = []
    for b in x.blocks:
        w, s, vh = np.linalg.svd(b)
        blocks.append((vh.conj().T * s) @ vh)
    return AlgebraElement(x.parent, tuple(blocks))


@dataclass(frozen=True, eq=False)
class DensityState:
    """A positive element of unit trace, validated on construction."""

    element: AlgebraElement

    def __post_init__(self):
        x = self.element
        try:
            lo = x.min_eigenvalue()
        except NotHermitianError as exc:
            raise NotAStateError(str(exc)) from exc
        if lo < -POSITIVITY_TOL:
            raise NotAStateError(f"minimum eigenvalue {lo:.3g} is below -{POSITIVITY_TOL}")
        t = trace(x)
        if abs(t - 1) > STATE_TRACE_TOL:
            raise NotAStateError(f"trace {t.real:.12g} differs from 1")

    @property
    def parent(self) -> BlockAlgebra:
        return self.element.parent

    @property
    def trace_certificate(self) -> float:
        return abs(trace(self.element) - 1)


def as_element(x) -> AlgebraElement:
    return x.element if isinstance(x, DensityState) else x


def as_state(x) -> DensityState:
    return x if isinstance(x, DensityState) else DensityState(x)


def trace(x) -> complex:
    x = as_element(x)
    return complex(sum(w * np.trace(b) for w, b in zip(x.parent.trace_weights, x.blocks)))


def inner(x: AlgebraElement, y: AlgebraElement) -> complex:
    """τ(x* y)."""
    return complex(np.vdot(x.coords(), y.coords()))


def singular_values(x) -> list[np.ndarray]:
    return [np.linalg.svd(b, compute_uv=False) for b in as_element(x).blocks]


def lp_norm(x, p) -> float:
    """‖x‖_p = τ(|x|^p)^{1/p}; ``p`` is a real ≥ 1 or :data:`INF`."""
    x = as_element(x)
    if p is INF or (isinstance(p, float) and math.isinf(p) and p > 0):
        return max(float(s.max()) for s in singular_values(x))
    p = float(p)
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    total = sum(w * float(np.sum(s ** p)) for w, s in zip(x.parent.trace_weights, singular_values(x)))
    return total ** (1.0 / p)


def _clamped_spectrum(mu: np.ndarray) -> np.ndarray:
    if mu.size and mu.min() < -POSITIVITY_TOL:
        raise NotAStateError(f"negative eigenvalue {mu.min():.3g}")
    return np.where(mu < 0, 0.0, mu)


def entropy_terms(mu: np.ndarray) -> float:
    """Σ μ ln μ with 0 ln 0 = 0."""
    pos = mu[mu > 0]
    return float(np.sum(pos * np.log(pos)))


def segal_entropy(rho) -> float:
    """H(ρ) = -τ(ρ log ρ) in nats."""
    rho = as_state(rho).element
    return -sum(
        w * entropy_terms(_clamped_spectrum(mu))
        for w, mu in zip(rho.parent.trace_weights, eigenvalues(rho))
    )


def entropy_of_positive(x: AlgebraElement) -> float:
    """-τ(x log x) for a positive element that need not have unit trace."""
    return -sum(
        w * entropy_terms(_clamped_spectrum(mu))
        for w, mu in zip(x.parent.trace_weights, eigenvalues(x))
    )


def p_power_derivative(x) -> float:
    """d/dp τ(x^p) at p = 1, which equals τ(x log x) = -H(x)."""
    return -segal_entropy(x)


def p_power_derivative_fd(x, h: float = 1e-4) -> float:
    """Richardson-extrapolated one-sided difference of p ↦ ‖x‖_p^p at p = 1."""
    x = as_state(x).element

    def q(step):
        return (lp_norm(x, 1 + step) ** (1 + step) - 1.0) / step

    return 2 * q(h / 2) - q(h)


def tensor_algebra(a: BlockAlgebra, b: BlockAlgebra) -> BlockAlgebra:
    sizes, weights = [], []
    for n, w in zip(a.block_sizes, a.trace_weights):
        for m, v in zip(b.block_sizes, b.trace_weights):
            sizes.append(n * m)
            weights.append(w * v)
    return BlockAlgebra(tuple(sizes), tuple(weights))


def tensor(x, y) -> AlgebraElement:
    """x ⊗ y with blocks ordered lexicographically by (k, l)."""
    x, y = as_element(x), as_element(y)
    alg = tensor_algebra(x.parent, y.parent)
    return AlgebraElement(alg, tuple(np.kron(a, b) for a in x.blocks for b in y.blocks))


def rescale_trace(rho, t: float) -> tuple[DensityState, float]:
    """Move a state to the trace tτ.

    Returns ``(ρ/t, -log t)``, so that ``H(ρ, τ) = H(ρ/t, tτ) - log t``.
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    rho = as_state(rho).element
    alg = rho.parent.scaled(t)
    moved = AlgebraElement(alg, tuple(b / t for b in rho.blocks))
    return DensityState(moved), -math.log(t)


def random_element(alg: BlockAlgebra, rng: np.random.Generator) -> AlgebraElement:
    """Complex Ginibre blocks."""
    return AlgebraElement(
        alg,
        tuple(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) for n in alg.block_sizes),
    )


def random_hermitian(alg: BlockAlgebra, rng: np.random.Generator) -> AlgebraElement:
    g = random_element(alg, rng)
    return (g + g.H) * 0.5


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR with phase correction."""
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_state(alg: BlockAlgebra, seed=0, full_support: bool = False) -> DensityState:
    """Random state: Ginibre WW* per block, normalized to τ = 1.

    With ``full_support`` the state is mixed with the unit so that every
    eigenvalue is at least 1e-3.
    """
    rng = np.random.default_rng(seed)
    g = random_element(alg, rng)
    x = g @ g.H
    x = x / trace(x).real
    if full_support:
        eps = min(1.0, max(0.05, 1.01e-3 * alg.unit_trace))
        x = x * (1 - eps) + alg.unit() * (eps / alg.unit_trace)
    return DensityState(x)


def random_pure_state(alg: BlockAlgebra, rng: np.random.Generator, block: int | None = None) -> DensityState:
    """(1/λ_k) vv* for a Haar-random unit vector v in block k."""
    if block is None:
        block = int(rng.integers(alg.num_blocks))
    n = alg.block_sizes[block]
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    v /= np.linalg.norm(v)
    return DensityState(pure_state(alg, block, v))


def pure_state(alg: BlockAlgebra, block: int, v: np.ndarray) -> AlgebraElement:
    blocks = [np.zeros((n, n), complex) for n in alg.block_sizes]
    blocks[block] = np.outer(v, v.conj()) / alg.trace_weights[block]
    return AlgebraElement(alg, tuple(blocks))


def block_unitary_conjugate(x: AlgebraElement, unitaries: Iterable[np.ndarray]) -> AlgebraElement:
    return AlgebraElement(x.parent, tuple(u @ b @ u.conj().T for u, b in zip(unitaries, x.blocks)))
