"""Standard inhomogeneous cochain complexes of finite groups.

Coefficients are finite abelian p-groups with a validated action; the
complex, cup products, restriction and conjugation all live at the
cochain level so that chain-level identities (Leibniz, cocycle
conditions) can be asserted exactly.  Cohomology is computed by the
brute-force kernel/image oracle over W_n.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import _wnlinalg as la
from .presented import PresentedWnComplex
from .rings import _is_prime

DEFAULT_BUDGET = 10 ** 7


class GroupError(ValueError):
    pass


class FiniteGroup:
    """A finite group as a validated multiplication table."""

    def __init__(self, table, validate: bool = True):
        self.table = [list(map(int, row)) for row in table]
        self.order = len(self.table)
        if validate:
            self._validate()
        self.identity = self._find_identity()
        self.inverse = [self._find_inverse(g) for g in range(self.order)]

    def _validate(self):
        n = self.order
        for row in self.table:
            if len(row) != n or any(not (0 <= x < n) for x in row):
                raise GroupError("malformed multiplication table")
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    if self.table[self.table[a][b]][c] != \
                            self.table[a][self.table[b][c]]:
                        raise GroupError("multiplication is not associative")

    def _find_identity(self) -> int:
        for e in range(self.order):
            if all(self.table[e][g] == g and self.table[g][e] == g
                   for g in range(self.order)):
                return e
        raise GroupError("no identity element")

    def _find_inverse(self, g: int) -> int:
        for h in range(self.order):
            if self.table[g][h] == self.identity:
                if self.table[h][g] != self.identity:
                    raise GroupError("one-sided inverse")
                return h
        raise GroupError(f"element {g} has no inverse")

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def elements(self):
        return range(self.order)

    def tuples(self, k: int):
        return itertools.product(range(self.order), repeat=k)

    def conjugate(self, g: int, x: int) -> int:
        """g^{-1} x g."""
        return self.mul(self.mul(self.inverse[g], x), g)

    def is_abelian(self) -> bool:
        return all(self.table[a][b] == self.table[b][a]
                   for a in range(self.order) for b in range(self.order))

    @classmethod
    def cyclic(cls, m: int) -> "FiniteGroup":
        return cls([[(a + b) % m for b in range(m)] for a in range(m)],
                   validate=False)

    @classmethod
    def abelian(cls, orders) -> "FiniteGroup":
        """Direct product of cyclic groups of the given orders."""
        tuples = list(itertools.product(*[range(m) for m in orders]))
        index = {t: i for i, t in enumerate(tuples)}
        table = [
            [index[tuple((x + y) % m for x, y, m in zip(s, t, orders))]
             for t in tuples]
            for s in tuples
        ]
        return cls(table, validate=False)

    @classmethod
    def symmetric(cls, m: int) -> "FiniteGroup":
        perms = list(itertools.permutations(range(m)))
        index = {s: i for i, s in enumerate(perms)}
        table = [
            [index[tuple(s[t[i]] for i in range(m))] for t in perms]
            for s in perms
        ]
        return cls(table, validate=False)

    def hom_to(self, other: "FiniteGroup", images) -> "GroupHom":
        return GroupHom(self, other, images)


class GroupHom:
    """A validated homomorphism between finite groups."""

    def __init__(self, source: FiniteGroup, target: FiniteGroup, images):
        self.source, self.target = source, target
        self.images = [int(x) for x in images]
        if len(self.images) != source.order:
            raise GroupError("need one image per element")
        for a in range(source.order):
            for b in range(source.order):
                if self.images[source.mul(a, b)] != \
                        target.mul(self.images[a], self.images[b]):
                    raise GroupError("not a homomorphism")

    def __call__(self, g: int) -> int:
        return self.images[g]

    def compose(self, then: "GroupHom") -> "GroupHom":
        return GroupHom(self.source, then.target,
                        [then(self(g)) for g in range(self.source.order)])


def identity_hom(g: FiniteGroup) -> GroupHom:
    return GroupHom(g, g, list(range(g.order)))


class GModule:
    """A finite abelian p-group with a validated group action.

    divisor_exponents (e_1..e_m) give the underlying group as the direct
    sum of Z/p^{e_j}; coefficients live over W_n with n = max e_j.  The
    action assigns each group element a matrix acting on row vectors.
    """

    def __init__(self, group: FiniteGroup, p: int, divisor_exponents,
                 action: dict | None = None):
        if not _is_prime(p):
            raise GroupError(f"p = {p} is not prime")
        self.group = group
        self.p = p
        self.exponents = tuple(int(e) for e in divisor_exponents)
        if not self.exponents or any(e < 1 for e in self.exponents):
            raise GroupError("divisor exponents must be positive")
        self.m = len(self.exponents)
        self.n = max(self.exponents)
        self.pn = p ** self.n
        eye = np.eye(self.m, dtype=np.int64)
        if action is None:
            action = {g: eye for g in group.elements()}
        self.action = {g: np.asarray(a, dtype=np.int64) % self.pn
                       for g, a in action.items()}
        self._validate()

    def _validate(self):
        g0 = self.group.identity
        if not self._same_endo(self.act_mat(g0), np.eye(self.m, dtype=np.int64)):
            raise GroupError("identity must act trivially")
        for g in self.group.elements():
            a = self.act_mat(g)
            for j in range(self.m):
                for l in range(self.m):
                    gap = self.exponents[l] - self.exponents[j]
                    if gap > 0 and a[j, l] % self.p ** gap != 0:
                        raise GroupError(
                            "action matrix not compatible with divisors"
                        )
        for g in self.group.elements():
            for h in self.group.elements():
                lhs = (self.act_mat(g) @ self.act_mat(h)) % self.pn
                if not self._same_endo(lhs, self.act_mat(self.group.mul(g, h))):
                    raise GroupError("action does not respect multiplication")

    def _same_endo(self, a, b) -> bool:
        """Equality as endomorphisms of the presented group."""
        d = (a - b) % self.pn
        for j in range(self.m):
            for l in range(self.m):
                if d[j, l] % self.p ** self.exponents[l] != 0:
                    return False
        return True

    def act_mat(self, g: int) -> np.ndarray:
        return self.action[g]

    def act(self, g: int, v: np.ndarray) -> np.ndarray:
        return (np.asarray(v, dtype=np.int64) @ self.act_mat(g)) % self.pn

    def rel_rows(self) -> np.ndarray:
        return np.diag([self.p ** e for e in self.exponents]).astype(np.int64) \
            % self.pn

    def size(self) -> int:
        return self.p ** sum(self.exponents)

    def is_trivial_action(self) -> bool:
        eye = np.eye(self.m, dtype=np.int64)
        return all(self._same_endo(self.act_mat(g), eye)
                   for g in self.group.elements())

    def elements(self):
        return itertools.product(*[range(self.p ** e) for e in self.exponents])

    def restrict_along(self, hom: GroupHom) -> "GModule":
        """The same underlying group, acted on through the homomorphism."""
        if hom.target is not self.group:
            raise GroupError("homomorphism does not land in the acting group")
        action = {g: self.act_mat(hom(g)) for g in hom.source.elements()}
        return GModule(hom.source, self.p, self.exponents, action)

    def dual(self):
        """Pontryagin dual with contragredient action, plus the pairing.

        Returns (dual module, BilinearPairing into W_n) with
        <u, v> = sum_j u_j v_j p^{n - e_j}; the contragredient action is
        validated to satisfy <u g, v g*> = <u, v>.
        """
        scale = [self.p ** (self.n - e) for e in self.exponents]
        dual_action = {}
        for g in self.group.elements():
            a = self.act_mat(self.group.inverse[g])
            b = np.zeros((self.m, self.m), dtype=np.int64)
            for l in range(self.m):
                for j in range(self.m):
                    num = a[j, l] * scale[l]
                    if num % scale[j] != 0:
                        raise GroupError("dual action not integral")
                    b[l, j] = (num // scale[j]) % self.pn
            dual_action[g] = b
        dual = GModule(self.group, self.p, self.exponents, dual_action)
        tensors = np.zeros((self.m, self.m, 1), dtype=np.int64)
        for j in range(self.m):
            tensors[j, j, 0] = scale[j]
        target = GModule(self.group, self.p, (self.n,))
        pairing = BilinearPairing(self, dual, target, tensors)
        return dual, pairing


@dataclass
class BilinearPairing:
    """A G-equivariant bilinear map M1 x M2 -> M3 given by tensors
    B[j1, j2] in M3-coordinates."""

    m1: GModule
    m2: GModule
    m3: GModule
    tensors: np.ndarray

    def __post_init__(self):
        self.tensors = np.asarray(self.tensors, dtype=np.int64) % self.m3.pn
        if self.tensors.shape != (self.m1.m, self.m2.m, self.m3.m):
            raise GroupError("pairing tensor has wrong shape")
        for g in self.m1.group.elements():
            a1, a2, a3 = (self.m1.act_mat(g), self.m2.act_mat(g),
                          self.m3.act_mat(g))
            lhs = np.einsum("ja,lb,abm->jlm", a1, a2, self.tensors) % self.m3.pn
            rhs = np.einsum("jlk,km->jlm", self.tensors, a3) % self.m3.pn
            for j in range(self.m1.m):
                for l in range(self.m2.m):
                    if not self.m3._same_endo(
                        lhs[j, l].reshape(1, -1), rhs[j, l].reshape(1, -1)
                    ):
                        raise GroupError("pairing is not G-equivariant")

    def pair(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.einsum("j,l,jlm->m", u % self.m3.pn, v % self.m3.pn,
                         self.tensors) % self.m3.pn


def multiplication_pairing(m: GModule) -> BilinearPairing:
    """Ring multiplication on W_n coefficients (rank-1 modules only)."""
    if m.m != 1:
        raise GroupError("default pairing needs a rank-1 module")
    tensors = np.ones((1, 1, 1), dtype=np.int64)
    return BilinearPairing(m, m, m, tensors)


class Cochain:
    """An i-cochain G^i -> M stored as a flat vector over W_n.

    Coordinate layout: index(tuple) * m + module coordinate, tuples in
    row-major order over G^i.
    """

    __slots__ = ("module", "degree", "vec")

    def __init__(self, module: GModule, degree: int, vec):
        self.module = module
        self.degree = degree
        size = module.group.order ** degree * module.m
        self.vec = np.asarray(vec, dtype=np.int64).reshape(size) % module.pn

    @classmethod
    def zero(cls, module, degree):
        return cls(module, degree,
                   np.zeros(module.group.order ** degree * module.m, np.int64))

    def tuple_index(self, tup) -> int:
        idx = 0
        for g in tup:
            idx = idx * self.module.group.order + g
        return idx

    def value(self, tup) -> np.ndarray:
        i = self.tuple_index(tup) * self.module.m
        return self.vec[i : i + self.module.m]

    def set_value(self, tup, v):
        i = self.tuple_index(tup) * self.module.m
        self.vec[i : i + self.module.m] = np.asarray(v) % self.module.pn

    def add(self, other: "Cochain") -> "Cochain":
        return Cochain(self.module, self.degree,
                       (self.vec + other.vec) % self.module.pn)

    def sub(self, other: "Cochain") -> "Cochain":
        return Cochain(self.module, self.degree,
                       (self.vec - other.vec) % self.module.pn)

    def scale(self, c: int) -> "Cochain":
        return Cochain(self.module, self.degree,
                       (c * self.vec) % self.module.pn)

    def is_zero_mod_divisors(self) -> bool:
        m = self.module
        v = self.vec.reshape(-1, m.m)
        for j in range(m.m):
            if (v[:, j] % m.p ** m.exponents[j]).any():
                return False
        return True


class CochainComplex:
    """The standard cochain complex C^*(G, M) through degree maxdeg.

    Stored with the degree-decreasing internal convention: cohomological
    degree i sits in chain degree -i of the underlying presented
    complex (the `cohomological` flag records the sign bookkeeping).
    """

    cohomological = True

    def __init__(self, module: GModule, maxdeg: int,
                 budget: int = DEFAULT_BUDGET):
        g = module.group
        self.module = module
        self.maxdeg = maxdeg
        if maxdeg < 0:
            raise GroupError("maxdeg must be >= 0")
        if g.order ** maxdeg * module.m > budget:
            raise GroupError(
                f"budget exceeded: |G|^{maxdeg} * m = "
                f"{g.order ** maxdeg * module.m} > {budget}"
            )
        self._diffs = {i: self._differential(i) for i in range(maxdeg)}
        ngens = {-i: g.order ** i * module.m for i in range(maxdeg + 1)}
        rels = {}
        for i in range(maxdeg + 1):
            base = module.rel_rows()
            count = g.order ** i
            if base.any():
                rows = np.zeros((count * module.m, count * module.m),
                                dtype=np.int64)
                for t in range(count):
                    rows[t * module.m : (t + 1) * module.m,
                         t * module.m : (t + 1) * module.m] = base
                rels[-i] = rows
        # chain degree -i holds C^i; the chain differential out of degree -i
        # is the cohomological d: C^i -> C^{i+1}
        chain_diffs = {-i: self._diffs[i] for i in range(maxdeg)}
        self.pres = PresentedWnComplex(
            module.p, module.n, -maxdeg, 0, ngens, chain_diffs, rels
        )

    def _differential(self, i: int) -> np.ndarray:
        """Matrix of d: C^i -> C^{i+1} (row convention)."""
        g = self.module.group
        m = self.module.m
        pn = self.module.pn
        src = g.order ** i * m
        tgt = g.order ** (i + 1) * m
        d = np.zeros((src, tgt), dtype=np.int64)

        def tindex(tup):
            idx = 0
            for x in tup:
                idx = idx * g.order + x
            return idx

        for tup in g.tuples(i + 1):
            col = tindex(tup) * m
            # first face: g_1 . phi(g_2..g_{i+1})
            head, tail = tup[0], tup[1:]
            row = tindex(tail) * m
            a = self.module.act_mat(head)
            d[row : row + m, col : col + m] = (
                d[row : row + m, col : col + m] + a
            ) % pn
            # middle faces
            sign = 1
            for j in range(1, i + 1):
                sign = -sign
                merged = tup[: j - 1] + (g.mul(tup[j - 1], tup[j]),) + tup[j + 1 :]
                row = tindex(merged) * m
                d[row : row + m, col : col + m] = (
                    d[row : row + m, col : col + m]
                    + sign * np.eye(m, dtype=np.int64)
                ) % pn
            # last face
            sign = -sign
            row = tindex(tup[:i]) * m
            d[row : row + m, col : col + m] = (
                d[row : row + m, col : col + m]
                + sign * np.eye(m, dtype=np.int64)
            ) % pn
        return d

    # -- cochain-level operations ---------------------------------------------

    def d(self, c: Cochain) -> Cochain:
        if c.degree >= self.maxdeg:
            raise GroupError("differential beyond computed range")
        return Cochain(self.module, c.degree + 1,
                       c.vec @ self._diffs[c.degree] % self.module.pn)

    def diff_matrix(self, i: int) -> np.ndarray:
        return self._diffs[i]

    # -- cohomology -------------------------------------------------------------

    def cocycles(self, i: int) -> np.ndarray:
        if i >= self.maxdeg:
            raise GroupError(
                f"cocycles in degree {i} need the complex through {i + 1}; "
                "increase maxdeg"
            )
        return self.pres.cycle_rows(-i)

    def coboundaries(self, i: int) -> np.ndarray:
        return self.pres.boundary_rows(-i)

    def cohomology_at(self, i: int) -> tuple[int, ...]:
        if i >= self.maxdeg:
            raise GroupError(
                f"cohomology in degree {i} needs the complex through {i + 1}; "
                "increase maxdeg"
            )
        return self.pres.homology_at(-i)

    def cohomology(self) -> dict:
        return {i: self.cohomology_at(i) for i in range(self.maxdeg)}

    def is_coboundary(self, c: Cochain) -> bool:
        ech = la.Echelon(self.coboundaries(c.degree), self.module.p,
                         self.module.n)
        return ech.contains(c.vec)

    def coboundary_witness(self, c: Cochain):
        """A cochain b with db = c, or None."""
        if c.degree == 0:
            return None if c.vec.any() else Cochain.zero(self.module, 0)
        d = self._diffs[c.degree - 1]
        rel = self.pres.rel(-c.degree)
        stacked = np.vstack([d, rel]) if rel.size else d
        x = la.solve_left(stacked, c.vec, self.module.p, self.module.n)
        if x is None:
            return None
        return Cochain(self.module, c.degree - 1, x[: d.shape[0]])


def cochain_complex(g: FiniteGroup, module: GModule, maxdeg: int,
                    budget: int = DEFAULT_BUDGET) -> CochainComplex:
    if module.group is not g:
        raise GroupError("module is not over this group")
    return CochainComplex(module, maxdeg, budget)


def cup(a: Cochain, b: Cochain, pairing: BilinearPairing) -> Cochain:
    """Front-face/back-face cup product at the cochain level.

    (a cup b)(g_1..g_{p+q}) = pair(a(g_1..g_p), (g_1...g_p) b(g_{p+1}..)).
    """
    if a.module is not pairing.m1 or b.module is not pairing.m2:
        raise GroupError("cochains do not match the pairing")
    g = a.module.group
    p, q = a.degree, b.degree
    out = Cochain.zero(pairing.m3, p + q)
    for tup in g.tuples(p + q):
        front, back = tup[:p], tup[p:]
        walk = g.identity
        for x in front:
            walk = g.mul(walk, x)
        bval = pairing.m2.act(walk, b.value(back))
        out.set_value(tup, pairing.pair(a.value(front), bval))
    return out


def restrict(hom: GroupHom, c: Cochain, restricted_module: GModule) -> Cochain:
    """Pull back a cochain along a group homomorphism."""
    out = Cochain.zero(restricted_module, c.degree)
    for tup in hom.source.tuples(c.degree):
        out.set_value(tup, c.value(tuple(hom(x) for x in tup)))
    return out


def conjugate(g: int, c: Cochain) -> Cochain:
    """The conjugation action (g . c)(x_*) = g^{-1}-twist of arguments
    with the module action; descends to the identity on cohomology."""
    grp = c.module.group
    out = Cochain.zero(c.module, c.degree)
    for tup in grp.tuples(c.degree):
        conj = tuple(grp.conjugate(g, x) for x in tup)
        out.set_value(tup, c.module.act(g, c.value(conj)))
    return out


def fixed_points(module: GModule) -> np.ndarray:
    """Rows spanning M^G = {v : v g = v for all g} (includes divisors)."""
    rows = []
    for g in module.group.elements():
        rows.append(module.act_mat(g) - np.eye(module.m, dtype=np.int64))
    stacked = np.hstack(rows) % module.pn
    return la.preimage(stacked, _block_diag_rep(module), module.p, module.n)


def _block_diag_rep(module: GModule) -> np.ndarray:
    base = module.rel_rows()
    k = module.group.order
    out = np.zeros((base.shape[0] * k, base.shape[1] * k), dtype=np.int64)
    for t in range(k):
        out[t * base.shape[0] : (t + 1) * base.shape[0],
            t * base.shape[1] : (t + 1) * base.shape[1]] = base
    return out


def hom_group_enumeration(g: FiniteGroup, module: GModule):
    """All group homomorphisms G -> M for trivially-acted M (oracle)."""
    if not module.is_trivial_action():
        raise GroupError("enumeration oracle needs trivial action")
    out = []
    size = module.group.order
    for images in itertools.product(module.elements(), repeat=size):
        ok = True
        for a in range(size):
            for b in range(size):
                s = tuple(
                    (images[a][j] + images[b][j]) % module.p ** module.exponents[j]
                    for j in range(module.m)
                )
                if tuple(images[g.mul(a, b)]) != s:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(images)
    return out
