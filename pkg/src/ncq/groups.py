"""Finite groups by multiplication table, unitary (projective) representations,
and positive-definite functions."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

UNITARY_TOL = 1e-10
PSD_TOL = 1e-10


@dataclass(frozen=True)
class FiniteGroup:
    """Group given by its table: ``mul[a][b]`` is the index of a·b."""

    mul: tuple[tuple[int, ...], ...]
    identity: int = 0
    names: tuple[str, ...] | None = field(default=None, compare=False)
    label: str = field(default="", compare=False)

    def __post_init__(self):
        mul = tuple(tuple(int(v) for v in row) for row in self.mul)
        object.__setattr__(self, "mul", mul)
        problems = group_law_violations(np.array(mul), self.identity)
        if problems:
            raise ValueError(f"not a group table: {problems[0]}")

    @property
    def order(self) -> int:
        return len(self.mul)

    @cached_property
    def table(self) -> np.ndarray:
        t = np.array(self.mul, dtype=np.intp)
        t.flags.writeable = False
        return t

    @cached_property
    def inv(self) -> tuple[int, ...]:
        t = self.table
        return tuple(int(np.flatnonzero(t[a] == self.identity)[0]) for a in range(self.order))

    def op(self, a: int, b: int) -> int:
        return self.mul[a][b]

    def name(self, a: int) -> str:
        return self.names[a] if self.names else str(a)

    def elements(self) -> range:
        return range(self.order)

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != self.identity:
            x = self.mul[x][a]
            k += 1
        return k

    def exponent(self) -> int:
        return math.lcm(*(self.element_order(a) for a in self.elements()))

    def conjugacy_classes(self) -> list[list[int]]:
        seen, classes = set(), []
        for a in self.elements():
            if a in seen:
                continue
            cls = sorted({self.mul[self.mul[g][a]][self.inv[g]] for g in self.elements()})
            seen.update(cls)
            classes.append(cls)
        return classes

    def generated_subgroup(self, gens: Sequence[int]) -> frozenset[int]:
        sub = {self.identity}
        frontier = list(sub)
        gens = list(gens)
        while frontier:
            nxt = []
            for a in frontier:
                for g in gens:
                    c = self.mul[a][g]
                    if c not in sub:
                        sub.add(c)
                        nxt.append(c)
            frontier = nxt
        return frozenset(sub)

    def is_subgroup(self, subset) -> bool:
        s = set(subset)
        if self.identity not in s:
            return False
        return all(self.mul[a][b] in s for a in s for b in s) and all(self.inv[a] in s for a in s)


def group_law_violations(t: np.ndarray, e: int) -> list[str]:
    n = t.shape[0]
    if t.shape != (n, n) or n == 0:
        return ["table must be square and non-empty"]
    if t.min() < 0 or t.max() >= n:
        return ["entries out of range"]
    if not 0 <= e < n:
        return ["identity out of range"]
    out = []
    idx = np.arange(n)
    if not (np.array_equal(t[e], idx) and np.array_equal(t[:, e], idx)):
        out.append("identity law fails")
    for a in range(n):
        if len(set(t[a])) != n or len(set(t[:, a])) != n:
            out.append(f"row/column {a} is not a permutation (inverse law fails)")
            break
    # associativity: t[t[a,b],c] == t[a,t[b,c]]
    left = t[t[:, :, None], idx[None, None, :]]
    right = t[idx[:, None, None], t[None, :, :]]
    if not np.array_equal(left, right):
        out.append("associativity fails")
    return out


def build_cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise ValueError("cyclic group needs n >= 1")
    mul = tuple(tuple((a + b) % n for b in range(n)) for a in range(n))
    return FiniteGroup(mul, 0, tuple(str(a) for a in range(n)), f"cyclic:{n}")


def build_dihedral(n: int) -> FiniteGroup:
    """D_n of order 2n, elements r^0..r^{n-1} then s r^0..s r^{n-1}.

    Index ``a*n + j`` stands for s^a r^j, and s r s = r^{-1}.
    """
    if n < 2:
        raise ValueError("dihedral group needs n >= 2")

    def prod(x, y):
        a, i = divmod(x, n)
        b, j = divmod(y, n)
        # s^a r^i s^b r^j = s^{a+b} r^{(-1)^b i + j}
        k = (-i if b else i) + j
        return ((a + b) % 2) * n + k % n

    names = tuple([f"r^{j}" for j in range(n)] + [f"s r^{j}" for j in range(n)])
    mul = tuple(tuple(prod(x, y) for y in range(2 * n)) for x in range(2 * n))
    return FiniteGroup(mul, 0, names, f"dihedral:{n}")


S3_PERMUTATIONS = ((0, 1, 2), (1, 2, 0), (2, 0, 1), (1, 0, 2), (0, 2, 1), (2, 1, 0))
S3_NAMES = ("e", "(123)", "(132)", "(12)", "(23)", "(13)")


def build_symmetric3() -> FiniteGroup:
    """S_3 ordered e, (123), (132), (12), (23), (13); product is composition σ∘τ."""
    perms = S3_PERMUTATIONS
    index = {p: i for i, p in enumerate(perms)}
    mul = tuple(
        tuple(index[tuple(p[q[x]] for x in range(3))] for q in perms) for p in perms
    )
    return FiniteGroup(mul, 0, S3_NAMES, "s3")


def product_group(g: FiniteGroup, h: FiniteGroup) -> FiniteGroup:
    """G×H with (a, b) stored at index a*|H| + b."""
    m = h.order
    mul = tuple(
        tuple(g.mul[x // m][y // m] * m + h.mul[x % m][y % m] for y in range(g.order * m))
        for x in range(g.order * m)
    )
    names = tuple(f"({g.name(a)},{h.name(b)})" for a in g.elements() for b in h.elements())
    return FiniteGroup(mul, g.identity * m + h.identity, names, f"{g.label}x{h.label}")


def find_isomorphism(g: FiniteGroup, h: FiniteGroup) -> tuple[int, ...] | None:
    """Brute-force table bijection φ with φ(ab) = φ(a)φ(b), if one exists."""
    if g.order != h.order:
        return None
    orders_h = [h.element_order(b) for b in h.elements()]
    orders_g = [g.element_order(a) for a in g.elements()]
    candidates = [[b for b in h.elements() if orders_h[b] == orders_g[a]] for a in g.elements()]
    for perm in itertools.product(*candidates):
        if len(set(perm)) != g.order:
            continue
        if all(perm[g.mul[a][b]] == h.mul[perm[a]][perm[b]] for a in g.elements() for b in g.elements()):
            return tuple(perm)
    return None


def parse_group(name: str) -> FiniteGroup:
    """Built-in groups: 'cyclic:n', 'dihedral:n', 's3', 'pauli' (= Z2×Z2)."""
    key = name.strip().lower()
    if key == "s3":
        return build_symmetric3()
    if key in ("pauli", "klein"):
        return product_group(build_cyclic(2), build_cyclic(2))
    kind, _, arg = key.partition(":")
    if kind in ("cyclic", "dihedral") and arg.isdigit():
        return build_cyclic(int(arg)) if kind == "cyclic" else build_dihedral(int(arg))
    raise ValueError(f"unknown group {name!r}")


# --------------------------------------------------------------------------
# representations


@dataclass(frozen=True, eq=False)
class UnitaryRep:
    """u(s)u(t) = σ(s,t) u(st); ``cocycle`` None means σ ≡ 1."""

    group: FiniteGroup
    matrices: np.ndarray
    cocycle: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        mats = np.asarray(self.matrices, dtype=complex)
        if mats.ndim != 3 or mats.shape[0] != self.group.order or mats.shape[1] != mats.shape[2]:
            raise ValueError("matrices must have shape (|G|, d, d)")
        object.__setattr__(self, "matrices", mats)
        if self.cocycle is not None:
            object.__setattr__(self, "cocycle", np.asarray(self.cocycle, dtype=complex))

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    def __call__(self, s: int) -> np.ndarray:
        return self.matrices[s]

    def sigma(self, s: int, t: int) -> complex:
        return 1.0 if self.cocycle is None else complex(self.cocycle[s, t])

    def residuals(self) -> dict[str, float]:
        g, u = self.group, self.matrices
        eye = np.eye(self.dim)
        unit = max(float(np.abs(m.conj().T @ m - eye).max()) for m in u)
        law = 0.0
        for s in g.elements():
            for t in g.elements():
                law = max(law, float(np.abs(u[s] @ u[t] - self.sigma(s, t) * u[g.mul[s][t]]).max()))
        out = {"unitarity": unit, "rep_law": law}
        if self.cocycle is not None:
            c = self.cocycle
            worst = 0.0
            for s, t, r in itertools.product(g.elements(), repeat=3):
                lhs = c[s, t] * c[g.mul[s][t], r]
                rhs = c[t, r] * c[s, g.mul[t][r]]
                worst = max(worst, abs(lhs - rhs))
            out["cocycle_identity"] = float(worst)
            out["cocycle_modulus"] = float(np.abs(np.abs(c) - 1).max())
        return out

    def verify(self, tol: float = UNITARY_TOL) -> bool:
        return all(v <= tol for v in self.residuals().values())

    def commutant_dimension(self, tol: float = 1e-9) -> int:
        """dim {A : A u(s) = u(s) A for all s}, via the null space of the linear system."""
        d = self.dim
        eye = np.eye(d)
        # vec(AU - UA) = (I⊗U^T - U⊗I) vec(A) in row-major vec
        rows = [np.kron(eye, m.T) - np.kron(m, eye) for m in self.matrices]
        sv = np.linalg.svd(np.vstack(rows), compute_uv=False)
        return int(np.sum(sv <= tol * max(1.0, sv.max())))

    def is_irreducible(self) -> bool:
        return self.commutant_dimension() == 1


def left_regular_rep(g: FiniteGroup) -> UnitaryRep:
    """λ_s e_t = e_{st}."""
    n = g.order
    mats = np.zeros((n, n, n))
    for s in g.elements():
        mats[s, g.table[s], np.arange(n)] = 1.0
    return UnitaryRep(g, mats, name="left_regular")


def right_regular_rep(g: FiniteGroup) -> UnitaryRep:
    """ρ_s e_t = e_{t s^{-1}}."""
    n = g.order
    mats = np.zeros((n, n, n))
    for s in g.elements():
        mats[s, g.table[:, g.inv[s]], np.arange(n)] = 1.0
    return UnitaryRep(g, mats, name="right_regular")


def trivial_rep(g: FiniteGroup, dim: int = 1) -> UnitaryRep:
    return UnitaryRep(g, np.broadcast_to(np.eye(dim), (g.order, dim, dim)).copy(), name="trivial")


def dihedral_2d_rep(n: int, zeta_power: int = 1) -> UnitaryRep:
    """u(r^j) = diag(ζ^{jk}, ζ^{-jk}), u(s) = [[0,1],[1,0]] with ζ = e^{2πi/n}, k = zeta_power."""
    g = build_dihedral(n)
    zeta = np.exp(2j * np.pi * zeta_power / n)
    swap = np.array([[0, 1], [1, 0]], complex)
    mats = []
    for a in (0, 1):
        for j in range(n):
            rot = np.diag([zeta ** j, zeta ** (-j)])
            mats.append(swap @ rot if a else rot)
    return UnitaryRep(g, np.array(mats), name=f"dihedral_2d:{n}:{zeta_power}")


def s3_irreps() -> list[UnitaryRep]:
    """Trivial, sign and the 2-dimensional irrep of S_3 (element order as in build_symmetric3)."""
    g = build_symmetric3()
    w = np.exp(2j * np.pi / 3)
    wb = w.conjugate()
    pi = np.array(
        [
            np.eye(2),
            np.diag([w, wb]),
            np.diag([wb, w]),
            [[0, 1], [1, 0]],
            [[0, wb], [w, 0]],
            [[0, w], [wb, 0]],
        ],
        dtype=complex,
    )
    sign = np.array([1, 1, 1, -1, -1, -1], dtype=complex).reshape(6, 1, 1)
    return [trivial_rep(g), UnitaryRep(g, sign, name="sign"), UnitaryRep(g, pi, name="pi")]


def pauli_rep() -> UnitaryRep:
    """Projective rep of Z2×Z2: (a, b) ↦ Z^a X^b, i.e. I, X, Z, ZX in index order."""
    g = parse_group("pauli")
    x = np.array([[0, 1], [1, 0]], complex)
    z = np.diag([1.0, -1.0]).astype(complex)
    mats = np.array([np.linalg.matrix_power(z, a) @ np.linalg.matrix_power(x, b) for a in (0, 1) for b in (0, 1)])
    sigma = np.empty((4, 4), complex)
    for s in g.elements():
        for t in g.elements():
            st = g.mul[s][t]
            # u(s)u(t) u(st)^* is a scalar multiple of the identity
            sigma[s, t] = (mats[s] @ mats[t] @ mats[st].conj().T)[0, 0]
    return UnitaryRep(g, mats, sigma, name="pauli")


def parse_rep(name: str, group: FiniteGroup) -> UnitaryRep:
    """Built-in representations: 'pauli', 'regular', 'trivial', 's3:pi', 'dihedral_2d:k'."""
    key = name.strip().lower()
    if key == "pauli":
        rep = pauli_rep()
    elif key == "regular":
        rep = left_regular_rep(group)
    elif key == "trivial":
        rep = trivial_rep(group)
    elif key in ("s3:pi", "pi") and group == build_symmetric3():
        rep = s3_irreps()[2]
    elif key.startswith("dihedral_2d"):
        _, _, k = key.partition(":")
        rep = dihedral_2d_rep(len(group.mul) // 2, int(k or 1))
    else:
        raise ValueError(f"unknown representation {name!r}")
    if rep.group != group:
        raise ValueError(f"representation {name!r} does not act on group {group.label!r}")
    return rep


# --------------------------------------------------------------------------
# irreducible representations by decomposing the regular representation


@lru_cache(maxsize=None)
def irreducible_reps(g: FiniteGroup, seed: int = 12345) -> tuple[UnitaryRep, ...]:
    """A complete set of inequivalent irreps, computed numerically.

    The isotypic components of ℓ²(G) are eigenspaces of a random Hermitian
    central element; inside each, an eigenspace of a random Hermitian element
    of the right-regular algebra carries one copy of the irrep.
    """
    rng = np.random.default_rng(seed)
    n = g.order
    lam = left_regular_rep(g).matrices
    rho = right_regular_rep(g).matrices

    z = np.zeros((n, n), complex)
    for cls in g.conjugacy_classes():
        inv_cls = sorted(g.inv[a] for a in cls)
        if inv_cls < cls:
            continue
        c = rng.normal() + 1j * rng.normal()
        if inv_cls == cls:
            c = c.real
        z += c * lam[cls].sum(axis=0)
        if inv_cls != cls:
            z += np.conj(c) * lam[inv_cls].sum(axis=0)
    z = (z + z.conj().T) / 2
    comps = _eigen_clusters(z)

    b = np.zeros((n, n), complex)
    for t in g.elements():
        ti = g.inv[t]
        if ti < t:
            continue
        c = rng.normal() + 1j * rng.normal()
        if ti == t:
            c = c.real
        b += c * rho[t]
        if ti != t:
            b += np.conj(c) * rho[ti]
    b = (b + b.conj().T) / 2

    reps = []
    for v in comps:
        d = math.isqrt(v.shape[1])
        if d * d != v.shape[1]:
            raise RuntimeError("isotypic component dimension is not a square")
        inner_clusters = _eigen_clusters(v.conj().T @ b @ v)
        w = inner_clusters[0]
        if w.shape[1] != d:
            raise RuntimeError("could not split an isotypic component")
        u = v @ w
        mats = np.einsum("ia,sij,jb->sab", u.conj(), lam, u)
        rep = UnitaryRep(g, mats, name=f"irrep_d{d}")
        if not rep.verify(1e-9):
            raise RuntimeError("numerical irrep failed verification")
        reps.append(rep)

    def sort_key(rep):
        chars = np.trace(rep.matrices, axis1=1, axis2=2)
        trivial = rep.dim == 1 and np.allclose(chars, 1)
        return (not trivial, rep.dim, tuple(np.round(-chars.real, 8)), tuple(np.round(-chars.imag, 8)))

    reps.sort(key=sort_key)
    if sum(r.dim ** 2 for r in reps) != n:
        raise RuntimeError("irreps do not exhaust the regular representation")
    return tuple(reps)


def _eigen_clusters(h: np.ndarray, tol: float = 1e-7) -> list[np.ndarray]:
    mu, vecs = np.linalg.eigh(h)
    clusters, start = [], 0
    for i in range(1, len(mu) + 1):
        if i == len(mu) or mu[i] - mu[i - 1] > tol * max(1.0, abs(mu).max()):
            clusters.append(vecs[:, start:i])
            start = i
    return clusters


def known_irreps(g: FiniteGroup) -> tuple[UnitaryRep, ...]:
    """Hand-written irreps for S_3, numerical ones for every other group."""
    if g == build_symmetric3():
        return tuple(s3_irreps())
    return irreducible_reps(g)


# --------------------------------------------------------------------------
# functions on groups


@dataclass(frozen=True, eq=False)
class GroupFunction:
    group: FiniteGroup
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex).reshape(-1)
        if vals.shape[0] != self.group.order:
            raise ValueError(f"expected {self.group.order} values, got {vals.shape[0]}")
        object.__setattr__(self, "values", vals)

    def __getitem__(self, s: int) -> complex:
        return complex(self.values[s])

    def conj(self) -> "GroupFunction":
        return GroupFunction(self.group, self.values.conj())


def _values(phi) -> tuple[FiniteGroup, np.ndarray]:
    return phi.group, phi.values


def schur_pattern(phi: GroupFunction) -> np.ndarray:
    """C_φ = [φ(s t^{-1})]_{s,t}, which is also the matrix of Σ φ(s)λ_s."""
    g, v = _values(phi)
    idx = g.table[:, list(g.inv)]  # idx[s, t] = s t^{-1}
    return v[idx]


def is_positive_definite(phi: GroupFunction, tol: float = PSD_TOL) -> bool:
    c = schur_pattern(phi)
    if np.abs(c - c.conj().T).max() > tol:
        return False
    return float(np.linalg.eigvalsh((c + c.conj().T) / 2).min()) >= -tol


def indicator(g: FiniteGroup, subset) -> GroupFunction:
    vals = np.zeros(g.order)
    vals[list(subset)] = 1.0
    return GroupFunction(g, vals)


def subgroup_of_modulus_one(phi: GroupFunction, tol: float = 1e-9) -> frozenset[int]:
    """G_φ = {s : |φ(s)| = 1}; closure failure means φ was not positive definite."""
    g, v = _values(phi)
    sub = frozenset(int(s) for s in np.flatnonzero(np.abs(np.abs(v) - 1) <= tol))
    if not g.is_subgroup(sub):
        raise ValueError("the set {|φ| = 1} is not a subgroup; φ is not positive definite")
    return sub


def random_positive_definite(g: FiniteGroup, seed=0, subgroup=None) -> GroupFunction:
    """ψ(s) = <ξ, λ_s ξ> for a random unit vector ξ.

    If ``subgroup`` H is given, ξ is constant on cosets Ht, so ψ = 1 on H and
    generically |ψ| < 1 off H.
    """
    rng = np.random.default_rng(seed)
    n = g.order
    xi = rng.normal(size=n) + 1j * rng.normal(size=n)
    if subgroup is not None:
        h = sorted(subgroup)
        seen = {}
        for t in g.elements():
            coset = frozenset(g.mul[x][t] for x in h)
            seen.setdefault(coset, xi[t])
            xi[t] = seen[coset]
    xi /= np.linalg.norm(xi)
    lam = left_regular_rep(g).matrices
    vals = np.einsum("i,sij,j->s", xi.conj(), lam, xi)
    vals[g.identity] = 1.0
    return GroupFunction(g, vals)
