"""Linear maps between block algebras, stored as superoperators.

Coordinates are trace-orthonormal: the entry (i, j) of block k contributes
``√λ_k x_ij``. In these coordinates ``τ(x* y)`` is the standard inner product,
so the trace-dual map is the conjugate transpose.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Callable, Sequence

import numpy as np

from .algebra import (
    AlgebraElement,
    BlockAlgebra,
    as_element,
    random_unitary,
    tensor_algebra,
)
from .groups import FiniteGroup, GroupFunction, UnitaryRep, schur_pattern
from .qgroup import QuantumGroup, build_group_vn, convolution_matrix, density_flags

CP_TOL = 1e-9
TP_TOL = 1e-10
MD_TOL = 1e-8
CLOSURE_TOL = 1e-8


class IncommensurateWeightsError(ValueError):
    def __init__(self, ratio: float, k: int):
        super().__init__(f"trace weights are not rationally commensurate: ratio {ratio!r} (block {k})")
        self.ratio = ratio
        self.block = k


class EBClass(enum.Enum):
    EB = "EB"
    NOT_EB = "NOT_EB"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True, eq=False)
class Channel:
    """A linear map ``domain → codomain`` (flags are computed on first use and cached)."""

    domain: BlockAlgebra
    codomain: BlockAlgebra
    matrix: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (self.codomain.dim, self.domain.dim):
            raise ValueError(
                f"superoperator shape {m.shape} does not match ({self.codomain.dim}, {self.domain.dim})"
            )
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_map(cls, domain: BlockAlgebra, codomain: BlockAlgebra, fn: Callable, label: str = "") -> "Channel":
        cols = []
        for c in range(domain.dim):
            e = np.zeros(domain.dim, complex)
            e[c] = 1.0
            y = fn(domain.from_coords(e))
            if y.parent != codomain:
                raise ValueError("map output lies in the wrong algebra")
            cols.append(y.coords())
        return cls(domain, codomain, np.stack(cols, axis=1), label)

    def __call__(self, x) -> AlgebraElement:
        return apply(self, x)

    # cached structural facts -------------------------------------------------
    @cached_property
    def embedded(self) -> "EmbeddedChannel":
        return embed_to_matrix_algebra(self)

    @cached_property
    def choi_matrix(self) -> "ChoiMatrix":
        return choi(self)

    @cached_property
    def cp(self) -> bool:
        return self.choi_matrix.min_eigenvalue >= -CP_TOL

    @cached_property
    def ppt(self) -> bool:
        return self.cp and self.choi_matrix.partial_transpose_min_eigenvalue >= -CP_TOL

    @cached_property
    def tp(self) -> bool:
        return trace_preservation_residual(self) <= TP_TOL

    @cached_property
    def unital(self) -> bool:
        return unitality_residual(self) <= TP_TOL

    def flags(self) -> dict[str, bool]:
        return {"cp": self.cp, "tp": self.tp, "unital": self.unital, "ppt": self.ppt}

    @property
    def is_markov(self) -> bool:
        return self.cp and self.tp and self.unital


# --------------------------------------------------------------------------
# basic operations


def apply(t: Channel, x) -> AlgebraElement:
    x = as_element(x)
    if x.parent != t.domain:
        raise ValueError("input does not belong to the channel's domain")
    return t.codomain.from_coords(t.matrix @ x.coords())


def compose(t1: Channel, t2: Channel) -> Channel:
    """t1 ∘ t2."""
    if t2.codomain != t1.domain:
        raise ValueError("cannot compose: algebras do not match")
    return Channel(t2.domain, t1.codomain, t1.matrix @ t2.matrix, f"{t1.label}∘{t2.label}")


def tensor_permutation(a: BlockAlgebra, b: BlockAlgebra) -> np.ndarray:
    """perm[t] = index in kron(coords_a, coords_b) of tensor-algebra coordinate t."""
    perm = []
    for k, n in enumerate(a.block_sizes):
        for l, m in enumerate(b.block_sizes):
            oa, ob = a.offsets[k], b.offsets[l]
            i, ip, j, jp = np.meshgrid(range(n), range(m), range(n), range(m), indexing="ij")
            ca = oa + i * n + j
            cb = ob + ip * m + jp
            perm.append((ca * b.dim + cb).reshape(-1))
    return np.concatenate(perm)


def tensor_channel(t1: Channel, t2: Channel) -> Channel:
    """T1 ⊗ T2 acting on the lexicographically ordered tensor algebras."""
    p_in = tensor_permutation(t1.domain, t2.domain)
    p_out = tensor_permutation(t1.codomain, t2.codomain)
    big = np.kron(t1.matrix, t2.matrix)
    return Channel(
        tensor_algebra(t1.domain, t2.domain),
        tensor_algebra(t1.codomain, t2.codomain),
        big[np.ix_(p_out, p_in)],
        f"({t1.label})⊗({t2.label})",
    )


def adjoint_channel(t: Channel) -> Channel:
    """The trace-dual map T*, with τ(T*(y) x) = τ(y T(x))."""
    return Channel(t.codomain, t.domain, t.matrix.conj().T, f"{t.label}*")


def identity_channel(alg: BlockAlgebra) -> Channel:
    return Channel(alg, alg, np.eye(alg.dim), "id")


def completely_depolarizing(alg: BlockAlgebra) -> Channel:
    """x ↦ τ(x) 1 / τ(1)."""
    u = alg.unit().coords()
    return Channel(alg, alg, np.outer(u, u.conj()) / alg.unit_trace, "trace")


def transpose_map(alg: BlockAlgebra) -> Channel:
    return Channel.from_map(alg, alg, lambda x: x.transpose(), "transpose")


def unitary_channel(alg: BlockAlgebra, unitaries: Sequence[np.ndarray]) -> Channel:
    return Channel.from_map(
        alg, alg,
        lambda x: AlgebraElement(alg, tuple(u @ b @ u.conj().T for u, b in zip(unitaries, x.blocks))),
        "unitary",
    )


def trace_preservation_residual(t: Channel) -> float:
    u_in, u_out = t.domain.unit().coords(), t.codomain.unit().coords()
    return float(np.abs(t.matrix.conj().T @ u_out - u_in).max())


def unitality_residual(t: Channel) -> float:
    u_in, u_out = t.domain.unit().coords(), t.codomain.unit().coords()
    return float(np.abs(t.matrix @ u_in - u_out).max())


def is_trace_preserving(t: Channel) -> bool:
    return t.tp


def is_unital(t: Channel) -> bool:
    return t.unital


def is_completely_positive(t: Channel) -> bool:
    return t.cp


def is_ppt(t: Channel) -> bool:
    return t.ppt


def is_hermiticity_preserving(t: Channel, tol: float = 1e-10) -> bool:
    rng = np.random.default_rng(0)
    from .algebra import random_hermitian

    x = random_hermitian(t.domain, rng)
    return apply(t, x).is_hermitian(tol)


# --------------------------------------------------------------------------
# embedding ⊕ M_{n_k} → M_N


def _rational(r: float, tol: float) -> Fraction | None:
    f = Fraction(r).limit_denominator(10_000)
    return f if abs(float(f) - r) <= tol * max(1.0, r) else None


@dataclass(frozen=True, eq=False)
class Embedding:
    """J(x) = ⊕_k I_{m_k} ⊗ x_k inside M_N with trace weight ``weight`` per diagonal entry."""

    algebra: BlockAlgebra
    multiplicities: tuple[int, ...]
    weight: float

    @property
    def size(self) -> int:
        return sum(m * n for m, n in zip(self.multiplicities, self.algebra.block_sizes))

    @cached_property
    def target(self) -> BlockAlgebra:
        return BlockAlgebra((self.size,), (self.weight,))

    @cached_property
    def j_matrix(self) -> np.ndarray:
        """J in trace-orthonormal coordinates; an isometry."""
        alg, big = self.algebra, self.size
        out = np.zeros((big * big, alg.dim))
        pos = 0
        for k, (n, m) in enumerate(zip(alg.block_sizes, self.multiplicities)):
            for copy in range(m):
                for i in range(n):
                    for j in range(n):
                        out[(pos + i) * big + pos + j, alg.offsets[k] + i * n + j] = 1 / math.sqrt(m)
                pos += n
        return out

    @cached_property
    def e_matrix(self) -> np.ndarray:
        """The trace-preserving conditional expectation 𝔼 = J*."""
        return self.j_matrix.T.copy()

    def J(self, x) -> AlgebraElement:
        return self.target.from_coords(self.j_matrix @ as_element(x).coords())

    def E(self, x) -> AlgebraElement:
        return self.algebra.from_coords(self.e_matrix @ as_element(x).coords())

    @property
    def scale(self) -> float:
        """τ(1) of the target, equal to that of the source."""
        return self.weight * self.size


def embedding_for(alg: BlockAlgebra, tol: float = 1e-9) -> Embedding:
    """Integer multiplicities m_k with λ_k = m_k · w for a common weight w."""
    base = min(alg.trace_weights)
    fracs = []
    for k, lam in enumerate(alg.trace_weights):
        f = _rational(lam / base, tol)
        if f is None:
            raise IncommensurateWeightsError(lam / base, k)
        fracs.append(f)
    denom = reduce(math.lcm, (f.denominator for f in fracs), 1)
    mults = [int(f * denom) for f in fracs]
    g = reduce(math.gcd, mults)
    mults = tuple(m // g for m in mults)
    weight = alg.trace_weights[0] / mults[0]
    for k, (lam, m) in enumerate(zip(alg.trace_weights, mults)):
        if abs(lam - m * weight) > tol * lam:
            raise IncommensurateWeightsError(lam / base, k)
    return Embedding(alg, mults, weight)


@dataclass(frozen=True, eq=False)
class EmbeddedChannel:
    channel: Channel
    domain_embedding: Embedding
    codomain_embedding: Embedding

    @property
    def scale(self) -> float:
        return self.domain_embedding.weight


def embed_to_matrix_algebra(t: Channel) -> EmbeddedChannel:
    """J T 𝔼 on M_N (codomain embedded by its own J)."""
    ein, eout = embedding_for(t.domain), embedding_for(t.codomain)
    mat = eout.j_matrix @ t.matrix @ ein.e_matrix
    return EmbeddedChannel(Channel(ein.target, eout.target, mat, f"J{t.label}E"), ein, eout)


# --------------------------------------------------------------------------
# Choi matrices


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """Σ_{ij} E_ij ⊗ T(E_ij) for the embedded map."""

    matrix: np.ndarray
    input_size: int
    output_size: int
    embedding: EmbeddedChannel | None = None

    @cached_property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix).min())

    @cached_property
    def partial_transpose(self) -> np.ndarray:
        n, m = self.input_size, self.output_size
        return self.matrix.reshape(n, m, n, m).transpose(0, 3, 2, 1).reshape(n * m, n * m)

    @cached_property
    def partial_transpose_min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.partial_transpose).min())


def choi_of_matrix_map(t: Channel) -> np.ndarray:
    """Choi matrix of a map between single-block algebras."""
    (n,), (m,) = t.domain.block_sizes, t.codomain.block_sizes
    (w,), (wp,) = t.domain.trace_weights, t.codomain.trace_weights
    raw = t.matrix * math.sqrt(w / wp)
    c = raw.reshape(m, m, n, n).transpose(2, 0, 3, 1).reshape(n * m, n * m)
    return (c + c.conj().T) / 2 if np.abs(c - c.conj().T).max() <= 1e-10 * max(1, np.abs(c).max()) else c


def choi(t: Channel) -> ChoiMatrix:
    emb = t.embedded
    c = choi_of_matrix_map(emb.channel)
    return ChoiMatrix(c, emb.domain_embedding.size, emb.codomain_embedding.size, emb)


# --------------------------------------------------------------------------
# multiplicative domains and subalgebras


def _orthonormal_span(coords: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    u, s, _ = np.linalg.svd(coords, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s.max() if s.size else 0)))
    return u[:, :rank]


def subalgebra_residuals(alg: BlockAlgebra, v: np.ndarray) -> dict[str, float]:
    """How far span(v) (orthonormal coordinates) is from being a unital *-subalgebra."""
    proj = v @ v.conj().T
    elems = [alg.from_coords(v[:, i]) for i in range(v.shape[1])]

    def off(x: AlgebraElement) -> float:
        c = x.coords()
        return float(np.linalg.norm(c - proj @ c))

    prod = max((off(a @ b) for a in elems for b in elems), default=0.0)
    star = max((off(a.H) for a in elems), default=0.0)
    unit = off(alg.unit())
    return {"product": prod, "adjoint": star, "unit": unit}


@dataclass(frozen=True, eq=False)
class MultiplicativeDomain:
    basis: tuple[AlgebraElement, ...]
    coords: np.ndarray
    eigenvalues: np.ndarray
    gap: float
    closure: dict[str, float]
    homomorphism_residual: float

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @property
    def is_subalgebra(self) -> bool:
        return all(v <= CLOSURE_TOL for v in self.closure.values())


def multiplicative_domain(t: Channel, tol: float = MD_TOL) -> MultiplicativeDomain:
    """Fix(T* T): the eigenspace of T*T for eigenvalue 1."""
    if not t.is_markov:
        raise ValueError("multiplicative domain needs a unital trace-preserving CP map")
    m = t.matrix.conj().T @ t.matrix
    mu, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    sel = np.abs(mu - 1) <= tol
    others = np.abs(mu[~sel] - 1)
    gap = float(others.min()) if others.size else math.inf
    v = vecs[:, sel]
    basis = tuple(t.domain.from_coords(v[:, i]) for i in range(v.shape[1]))
    closure = subalgebra_residuals(t.domain, v)
    hom = 0.0
    for a in basis:
        for b in basis:
            hom = max(hom, apply(t, a @ b).distance(apply(t, a) @ apply(t, b)))
    return MultiplicativeDomain(basis, v, mu, gap, closure, hom)


def range_basis(t: Channel, tol: float = 1e-8) -> list[AlgebraElement]:
    v = _orthonormal_span(t.matrix, tol)
    return [t.codomain.from_coords(v[:, i]) for i in range(v.shape[1])]


def generates_abelian(elems: Sequence[AlgebraElement], tol: float = 1e-8) -> bool:
    ext = list(elems) + [e.H for e in elems]
    return all((a @ b - b @ a).max_abs() <= tol for i, a in enumerate(ext) for b in ext[i + 1:])


def classify_entanglement_breaking(t: Channel) -> EBClass:
    """EB when the range (or the range of the dual) is commutative; NOT_EB when not PPT."""
    if t.cp and (generates_abelian(range_basis(t)) or generates_abelian(range_basis(adjoint_channel(t)))):
        return EBClass.EB
    if not t.ppt:
        return EBClass.NOT_EB
    return EBClass.UNKNOWN


def conditional_expectation(alg: BlockAlgebra, basis: Sequence[AlgebraElement], label: str = "E") -> Channel:
    """Trace-orthogonal projection onto the *-subalgebra spanned by ``basis``."""
    coords = np.stack([as_element(b).coords() for b in basis], axis=1)
    v = _orthonormal_span(coords)
    res = subalgebra_residuals(alg, v)
    bad = {k: r for k, r in res.items() if r > CLOSURE_TOL}
    if bad:
        raise ValueError(f"span is not a unital *-subalgebra: {bad}")
    return Channel(alg, alg, v @ v.conj().T, label)


def diagonal_basis(alg: BlockAlgebra) -> list[AlgebraElement]:
    return [alg.matrix_unit(k, i, i) for k, n in enumerate(alg.block_sizes) for i in range(n)]


def pinching(alg: BlockAlgebra) -> Channel:
    return conditional_expectation(alg, diagonal_basis(alg), "diag")


def subgroup_expectation(qg: QuantumGroup, subgroup) -> Channel:
    """𝔼 onto VN(H) ⊂ VN(G)."""
    if qg.group is None or not qg.group.is_subgroup(subgroup):
        raise ValueError("expected a subgroup of the quantum group's underlying group")
    return conditional_expectation(qg.algebra, [qg.basis[h] for h in sorted(subgroup)], "E_H")


# --------------------------------------------------------------------------
# multipliers and covariant channels


def convolution_channel(f, qg: QuantumGroup, check: bool = True) -> Channel:
    """x ↦ f∗x."""
    if check and not density_flags(f, qg).eligible:
        raise ValueError("f must be positive with unit L1 norm to define a channel")
    m = convolution_matrix(f, qg)
    alg = qg.algebra
    sc = alg.coord_scale
    mat = (sc[:, None] * (qg.basis_matrix @ m @ qg.basis_inverse)) / sc[None, :]
    return Channel(alg, alg, mat, f"conv[{qg.name}]")


def fourier_multiplier_vn(phi: GroupFunction) -> Channel:
    """λ_s ↦ φ(s) λ_s on VN(G)."""
    qg = build_group_vn(phi.group)
    u = qg.basis_matrix * qg.algebra.coord_scale[:, None]  # orthonormal columns
    return Channel(qg.algebra, qg.algebra, (u * phi.values) @ u.conj().T, "fourier")


def herz_schur_channel(phi: GroupFunction) -> Channel:
    """Schur multiplier e_st ↦ φ(s t^{-1}) e_st on M_|G| with the trace Tr."""
    g = phi.group
    alg = BlockAlgebra((g.order,), (1.0,))
    return Channel(alg, alg, np.diag(schur_pattern(phi).reshape(-1)), "herz_schur")


def covariant_channel(rep: UnitaryRep, f) -> Channel:
    """x ↦ (1/|G|) Σ_s f(s) u(s) x u(s)* on M_d with the normalized trace."""
    g = rep.group
    f = np.asarray(f.values if isinstance(f, GroupFunction) else f, dtype=float).reshape(-1)
    if f.shape != (g.order,):
        raise ValueError("density must have one value per group element")
    if f.min() < -1e-12 or abs(f.mean() - 1) > 1e-9:
        raise ValueError("density must be nonnegative with mean 1")
    d = rep.dim
    mat = sum(fs * np.kron(u, u.conj()) for fs, u in zip(f, rep.matrices)) / g.order
    return Channel(BlockAlgebra.matrix(d), BlockAlgebra.matrix(d), mat, f"covariant[{rep.name}]")


def herz_schur_alpha(g: FiniteGroup) -> Channel:
    """α(e_st) = e_st ⊗ λ_{st^{-1}} from M_|G| into M_|G| ⊗ VN(G)."""
    qg = build_group_vn(g)
    dom = BlockAlgebra((g.order,), (1.0,))
    cod = tensor_algebra(dom, qg.algebra)
    lam = qg.basis

    def alpha(x):
        out = cod.zeros()
        for s in g.elements():
            for t in g.elements():
                e = dom.matrix_unit(0, s, t) * x.blocks[0][s, t]
                from .algebra import tensor

                out = out + tensor(e, lam[g.mul[s][g.inv[t]]])
        return out

    return Channel.from_map(dom, cod, alpha, "alpha")


# --------------------------------------------------------------------------
# random channels


def _random_kraus(n: int, rank: int, rng: np.random.Generator) -> list[np.ndarray]:
    a = [rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) for _ in range(rank)]
    g = sum(x.conj().T @ x for x in a)
    mu, v = np.linalg.eigh(g)
    inv_sqrt = (v / np.sqrt(mu)) @ v.conj().T
    return [x @ inv_sqrt for x in a]


def kraus_superoperator(kraus: Sequence[np.ndarray]) -> np.ndarray:
    return sum(np.kron(k, k.conj()) for k in kraus)


def random_channel(alg: BlockAlgebra, seed=0, kraus_rank: int = 2, unital: bool = False) -> Channel:
    """Random CP trace-preserving map 𝔼 Φ J, with Φ a random channel on the ambient M_N.

    With ``unital`` Φ is a random mixture of unitaries, so the result is Markov.
    """
    rng = np.random.default_rng(seed)
    emb = embedding_for(alg)
    n = emb.size
    if unital:
        w = rng.dirichlet(np.ones(kraus_rank))
        kraus = [math.sqrt(p) * random_unitary(n, rng) for p in w]
    else:
        kraus = _random_kraus(n, kraus_rank, rng)
    phi = kraus_superoperator(kraus)
    return Channel(alg, alg, emb.e_matrix @ phi @ emb.j_matrix, "random")
