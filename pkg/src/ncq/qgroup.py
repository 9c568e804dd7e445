"""Finite quantum groups as checked structure constants, and convolution.

A quantum group is stored over a linear basis (b_m) of its algebra:
``Δ(b_m) = Σ_{i,j} c[m,i,j] b_i ⊗ b_j`` and ``R(b_i) = Σ_k R[k,i] b_k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .algebra import (
    POSITIVITY_TOL,
    AlgebraElement,
    BlockAlgebra,
    as_element,
    lp_norm,
    segal_entropy,
    tensor,
    tensor_algebra,
    trace,
)
from .groups import FiniteGroup, GroupFunction, known_irreps, parse_group

AXIOM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class QuantumGroup:
    name: str
    algebra: BlockAlgebra
    basis_matrix: np.ndarray  # column m = flat(b_m)
    coproduct: np.ndarray  # c[m, i, j]
    antipode: np.ndarray  # R[k, i]
    group: FiniteGroup | None = field(default=None, compare=False)

    def __post_init__(self):
        d = self.algebra.dim
        b = np.asarray(self.basis_matrix, dtype=complex)
        c = np.asarray(self.coproduct, dtype=complex)
        r = np.asarray(self.antipode, dtype=complex)
        if b.shape != (d, d) or c.shape != (d, d, d) or r.shape != (d, d):
            raise ValueError("structure tensors do not match the algebra dimension")
        if np.linalg.matrix_rank(b) < d:
            raise ValueError("basis is not linearly independent")
        for name, arr in (("basis_matrix", b), ("coproduct", c), ("antipode", r)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def dim(self) -> int:
        return self.algebra.dim

    @property
    def haar(self) -> tuple[float, ...]:
        return self.algebra.trace_weights

    @cached_property
    def basis_inverse(self) -> np.ndarray:
        return np.linalg.inv(self.basis_matrix)

    @cached_property
    def basis(self) -> tuple[AlgebraElement, ...]:
        return tuple(self.algebra.from_flat(self.basis_matrix[:, m]) for m in range(self.dim))

    def coefficients(self, x) -> np.ndarray:
        """Coordinates of x in the basis (b_m)."""
        x = as_element(x)
        if x.parent != self.algebra:
            raise ValueError("element does not belong to this quantum group")
        return self.basis_inverse @ x.flat()

    def from_coefficients(self, a: np.ndarray) -> AlgebraElement:
        return self.algebra.from_flat(self.basis_matrix @ a)

    @cached_property
    def haar_values(self) -> np.ndarray:
        """h(b_m) = τ(b_m)."""
        return (self.algebra.flat_weights * self.algebra.unit().flat().real) @ self.basis_matrix

    @cached_property
    def unit_coefficients(self) -> np.ndarray:
        return self.coefficients(self.algebra.unit())

    @cached_property
    def tensor_algebra(self) -> BlockAlgebra:
        return tensor_algebra(self.algebra, self.algebra)

    @cached_property
    def pair_matrix(self) -> np.ndarray:
        """Column (i*D + j) is flat(b_i ⊗ b_j) in the tensor algebra."""
        b = self.basis
        return np.stack([tensor(b[i], b[j]).flat() for i in range(self.dim) for j in range(self.dim)], axis=1)

    @cached_property
    def delta_matrix(self) -> np.ndarray:
        """Δ as a map from basis coefficients to flat tensor-algebra entries."""
        d = self.dim
        return self.pair_matrix @ self.coproduct.reshape(d, d * d).T

    def coproduct_of(self, x) -> AlgebraElement:
        return self.tensor_algebra.from_flat(self.delta_matrix @ self.coefficients(x))

    def apply_antipode(self, x) -> AlgebraElement:
        return self.from_coefficients(self.antipode @ self.coefficients(x))

    def pairing_functional(self, f) -> np.ndarray:
        """The vector (τ(f b_m))_m."""
        f = as_element(f)
        return (self.algebra.flat_weights * f.transpose().flat()) @ self.basis_matrix


# --------------------------------------------------------------------------
# axioms


@dataclass(frozen=True)
class AxiomReport:
    residuals: dict[str, float]
    tol: float = AXIOM_TOL

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.residuals.values())

    def failures(self) -> list[str]:
        return [k for k, v in self.residuals.items() if v > self.tol]


def verify_axioms(qg: QuantumGroup, tol: float = AXIOM_TOL) -> AxiomReport:
    """Maximum residual of every quantum-group axiom."""
    d = qg.dim
    c, r = qg.coproduct, qg.antipode
    alg2 = qg.tensor_algebra
    basis = qg.basis
    deltas = [alg2.from_flat(qg.delta_matrix[:, m]) for m in range(d)]
    res = {}

    one = qg.unit_coefficients
    res["unit"] = float(
        np.abs(qg.delta_matrix @ one - tensor(qg.algebra.unit(), qg.algebra.unit()).flat()).max()
    )

    mult = star = 0.0
    for i in range(d):
        star = max(star, deltas[i].H.distance(qg.coproduct_of(basis[i].H)))
        for j in range(d):
            lhs = qg.coproduct_of(basis[i] @ basis[j])
            mult = max(mult, lhs.distance(deltas[i] @ deltas[j]))
    res["multiplicative"] = mult
    res["star"] = star

    left = np.einsum("mkl,kij->mijl", c, c)
    right = np.einsum("mik,kjl->mijl", c, c)
    res["coassociative"] = float(np.abs(left - right).max())

    h = qg.haar_values
    res["haar_left"] = float(np.abs(np.einsum("mij,i->mj", c, h) - np.outer(h, one)).max())
    res["haar_right"] = float(np.abs(np.einsum("mij,j->mi", c, h) - np.outer(h, one)).max())
    res["haar_trace"] = abs(trace(qg.algebra.unit()) - 1)

    anti = 0.0
    rb = [qg.from_coefficients(r[:, i]) for i in range(d)]
    for i in range(d):
        for j in range(d):
            anti = max(anti, qg.apply_antipode(basis[i] @ basis[j]).distance(rb[j] @ rb[i]))
    res["antipode_antihomomorphism"] = anti
    res["antipode_star"] = max(qg.apply_antipode(basis[i].H).distance(rb[i].H) for i in range(d))
    res["antipode_involution"] = float(np.abs(r @ r - np.eye(d)).max())
    res["antipode_haar"] = float(np.abs(h @ r - h).max())
    lhs = np.einsum("km,kab->mab", r, c)
    rhs = np.einsum("mij,aj,bi->mab", c, r, r)
    res["antipode_coproduct"] = float(np.abs(lhs - rhs).max())
    return AxiomReport({k: float(v) for k, v in res.items()}, tol)


# --------------------------------------------------------------------------
# builders


def build_function_algebra(g: FiniteGroup) -> QuantumGroup:
    """C(G) = ℓ^∞(G) with Δ(δ_u) = Σ_{st=u} δ_s ⊗ δ_t."""
    n = g.order
    c = np.zeros((n, n, n))
    for s in g.elements():
        for t in g.elements():
            c[g.mul[s][t], s, t] = 1.0
    r = np.zeros((n, n))
    for s in g.elements():
        r[g.inv[s], s] = 1.0
    return QuantumGroup(f"cg:{g.label}", BlockAlgebra.commutative(n), np.eye(n), c, r, group=g)


@lru_cache(maxsize=None)
def build_group_vn(g: FiniteGroup) -> QuantumGroup:
    """VN(G) ≅ ⊕_π M_{d_π} with weights d_π/|G| and basis λ_s ↦ ⊕_π π(s)."""
    reps = known_irreps(g)
    n = g.order
    alg = BlockAlgebra(tuple(p.dim for p in reps), tuple(p.dim / n for p in reps))
    basis = np.stack(
        [np.concatenate([p.matrices[s].reshape(-1) for p in reps]) for s in g.elements()], axis=1
    )
    c = np.zeros((n, n, n))
    for s in g.elements():
        c[s, s, s] = 1.0
    r = np.zeros((n, n))
    for s in g.elements():
        r[g.inv[s], s] = 1.0
    return QuantumGroup(f"vng:{g.label}", alg, basis, c, r, group=g)


KP_COPRODUCT = {
    # index: e1 e2 e3 e4 e11 e12 e21 e22 -> 0..7; entries (coefficient, left, right)
    0: [(1, 0, 0), (1, 1, 1), (1, 2, 2), (1, 3, 3),
        (0.5, 4, 4), (0.5, 5, 5), (0.5, 6, 6), (0.5, 7, 7)],
    1: [(1, 0, 1), (1, 1, 0), (1, 2, 3), (1, 3, 2),
        (0.5, 4, 7), (0.5, 7, 4), (0.5j, 6, 5), (-0.5j, 5, 6)],
    2: [(1, 0, 2), (1, 2, 0), (1, 1, 3), (1, 3, 1),
        (0.5, 4, 7), (0.5, 7, 4), (-0.5j, 6, 5), (0.5j, 5, 6)],
    3: [(1, 0, 3), (1, 3, 0), (1, 1, 2), (1, 2, 1),
        (0.5, 4, 4), (0.5, 7, 7), (-0.5, 5, 5), (-0.5, 6, 6)],
    4: [(1, 0, 4), (1, 4, 0), (1, 1, 7), (1, 7, 1),
        (1, 2, 7), (1, 7, 2), (1, 3, 4), (1, 4, 3)],
    5: [(1, 0, 5), (1, 5, 0), (1j, 1, 6), (-1j, 6, 1),
        (-1j, 2, 6), (1j, 6, 2), (-1, 3, 5), (-1, 5, 3)],
    6: [(1, 0, 6), (1, 6, 0), (-1j, 1, 5), (1j, 5, 1),
        (1j, 2, 5), (-1j, 5, 2), (-1, 3, 6), (-1, 6, 3)],
    7: [(1, 0, 7), (1, 7, 0), (1, 1, 4), (1, 4, 1),
        (1, 2, 4), (1, 4, 2), (1, 3, 7), (1, 7, 3)],
}
KP_BASIS_NAMES = ("e1", "e2", "e3", "e4", "e11", "e12", "e21", "e22")


def kp_algebra() -> BlockAlgebra:
    return BlockAlgebra((1, 1, 1, 1, 2), (1 / 8, 1 / 8, 1 / 8, 1 / 8, 1 / 4))


def build_kac_paljutkin() -> QuantumGroup:
    """The 8-dimensional Kac-Paljutkin quantum group on ℂ⁴ ⊕ M₂.

    The flat layout of ℂ⁴ ⊕ M₂ is (x1, x2, x3, x4, a11, a12, a21, a22), so the
    basis (e1, ..., e4, e11, e12, e21, e22) is the identity matrix.
    """
    c = np.zeros((8, 8, 8), complex)
    for m, terms in KP_COPRODUCT.items():
        for coef, i, j in terms:
            c[m, i, j] += coef
    r = np.eye(8)
    r[[5, 6]] = r[[6, 5]]
    return QuantumGroup("kp", kp_algebra(), np.eye(8), c, r)


def parse_qgroup(name: str) -> QuantumGroup:
    """Built-ins: 'kp', 'cg:<group>', 'vng:<group>'."""
    key = name.strip().lower()
    if key == "kp":
        return build_kac_paljutkin()
    kind, _, rest = key.partition(":")
    if kind == "cg":
        return build_function_algebra(parse_group(rest))
    if kind == "vng":
        return build_group_vn(parse_group(rest))
    raise ValueError(f"unknown quantum group {name!r}")


# --------------------------------------------------------------------------
# convolution


def duality_bracket(x, y, qg: QuantumGroup) -> complex:
    """<x, y> = τ(x R(y))."""
    return complex(qg.pairing_functional(x) @ qg.antipode @ qg.coefficients(y))


def convolution_functional(f, qg: QuantumGroup) -> np.ndarray:
    """ψ_i = τ(f R(b_i))."""
    return qg.pairing_functional(f) @ qg.antipode


def convolution_matrix(f, qg: QuantumGroup) -> np.ndarray:
    """Matrix of g ↦ f∗g on basis coefficients; column m is the image of b_m."""
    psi = convolution_functional(f, qg)
    return np.einsum("mij,i->jm", qg.coproduct, psi)


def convolve(f, g, qg: QuantumGroup) -> AlgebraElement:
    """f∗g = (τ(f R(·)) ⊗ Id) Δ(g)."""
    return qg.from_coefficients(convolution_matrix(f, qg) @ qg.coefficients(g))


@dataclass(frozen=True, eq=False)
class ConvolutionDensity:
    f: AlgebraElement
    positive: bool
    unit_norm: bool

    @property
    def eligible(self) -> bool:
        return self.positive and self.unit_norm


def density_flags(f, qg: QuantumGroup, tol: float = POSITIVITY_TOL) -> ConvolutionDensity:
    f = as_element(f)
    if f.parent != qg.algebra:
        raise ValueError("density does not belong to this quantum group")
    positive = f.is_positive(tol)
    unit = positive and abs(lp_norm(f, 1) - 1) <= tol
    return ConvolutionDensity(f, positive, unit)


def is_channel_density(f, qg: QuantumGroup) -> bool:
    return density_flags(f, qg).eligible


def group_function_element(phi: GroupFunction, qg: QuantumGroup) -> AlgebraElement:
    """Σ_s φ(s) λ_s inside VN(G)."""
    if qg.group is None or not qg.name.startswith("vng:") or qg.group != phi.group:
        raise ValueError("expected VN(G) of the function's group")
    return qg.from_coefficients(phi.values)


def closed_form_entropy(f, qg: QuantumGroup) -> float:
    if not is_channel_density(f, qg):
        raise ValueError("f is not a channel density (positive with unit L1 norm)")
    return segal_entropy(f)


# --------------------------------------------------------------------------
# serialization


def qgroup_to_obj(qg: QuantumGroup) -> dict:
    from .serialize import algebra_to_obj, matrix_to_obj

    d = qg.dim
    return {
        "name": qg.name,
        "algebra": algebra_to_obj(qg.algebra),
        "basis": [matrix_to_obj(qg.basis_matrix[:, m]) for m in range(d)],
        "coproduct": [[matrix_to_obj(qg.coproduct[m, i]) for i in range(d)] for m in range(d)],
        "antipode": [matrix_to_obj(qg.antipode[:, i]) for i in range(d)],
    }


def qgroup_from_obj(obj) -> QuantumGroup:
    from .serialize import FormatError, algebra_from_obj, pair_to_complex, require_keys

    obj = require_keys(obj, {"name", "algebra", "basis", "coproduct", "antipode"}, where="qgroup")
    alg = algebra_from_obj(obj["algebra"])
    d = alg.dim

    def vec(v, where):
        if not isinstance(v, list) or len(v) != d:
            raise FormatError(f"{where}: expected {d} entries")
        return np.array([pair_to_complex(z, where) for z in v])

    try:
        basis = np.stack([vec(v, "basis") for v in obj["basis"]], axis=1)
        coprod = np.stack([np.stack([vec(v, "coproduct") for v in row]) for row in obj["coproduct"]])
        anti = np.stack([vec(v, "antipode") for v in obj["antipode"]], axis=1)
        return QuantumGroup(str(obj["name"]), alg, basis, coprod, anti)
    except (ValueError, TypeError) as exc:
        raise FormatError(f"qgroup: {exc}") from exc
