"""Degree-truncated multivariate power series over W_n.

W_n[X_1..X_s] / (all monomials of total degree > T) is a finite free
W_n-module on the monomials of degree <= T, and a genuine quotient
ring, so arithmetic here is exact.  Truncation level T is carried on
the ring handle and recorded in every certificate derived from it.

Elements are dicts {exponent tuple: coefficient};
the zero coefficient is never stored.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .rings import RingSpec, _is_prime


def monomials_up_to(nvars: int, t: int):
    """All exponent tuples of total degree <= t, graded lex order."""
    out = []
    for d in range(t + 1):
        for c in itertools.combinations_with_replacement(range(nvars), d):
            e = [0] * nvars
            for i in c:
                e[i] += 1
            out.append(tuple(e))
    return out


class TruncatedPolyRing:
    """W_n[X_1..X_s] truncated above total degree T."""

    def __init__(self, p: int, n: int, nvars: int, trunc: int):
        if not _is_prime(p):
            raise ValueError(f"p = {p} is not prime")
        if n < 1 or trunc < 1 or nvars < 0:
            raise ValueError("need n >= 1, trunc >= 1, nvars >= 0")
        self.p, self.n, self.nvars, self.trunc = p, n, nvars, trunc
        self.pn = p ** n
        self.basis = monomials_up_to(nvars, trunc)
        self.index = {m: i for i, m in enumerate(self.basis)}
        self.dim = len(self.basis)

    # -- elements ------------------------------------------------------------

    @property
    def zero(self):
        return {}

    @property
    def one(self):
        return {(0,) * self.nvars: 1}

    def scalar(self, c: int):
        c %= self.pn
        return {(0,) * self.nvars: c} if c else {}

    def variable(self, i: int):
        e = [0] * self.nvars
        e[i] = 1
        return {tuple(e): 1}

    def from_terms(self, terms):
        out = {}
        for exps, c in terms:
            exps = tuple(exps)
            if len(exps) != self.nvars:
                raise ValueError("wrong number of variables")
            if sum(exps) > self.trunc:
                continue
            c = (out.get(exps, 0) + c) % self.pn
            if c:
                out[exps] = c
            else:
                out.pop(exps, None)
        return out

    def is_zero(self, f) -> bool:
        return not f

    def eq(self, f, g) -> bool:
        return f == g

    def constant_term(self, f) -> int:
        return f.get((0,) * self.nvars, 0)

    def degree_min(self, f):
        """Least total degree of a term (None for 0)."""
        return min((sum(e) for e in f), default=None)

    def degree_max(self, f):
        return max((sum(e) for e in f), default=None)

    # -- arithmetic ------------------------------------------------------------

    def add(self, f, g):
        out = dict(f)
        for e, c in g.items():
            c2 = (out.get(e, 0) + c) % self.pn
            if c2:
                out[e] = c2
            else:
                out.pop(e, None)
        return out

    def neg(self, f):
        return {e: (-c) % self.pn for e, c in f.items()}

    def sub(self, f, g):
        return self.add(f, self.neg(g))

    def smul(self, c: int, f):
        c %= self.pn
        out = {}
        for e, a in f.items():
            b = (c * a) % self.pn
            if b:
                out[e] = b
        return out

    def mul(self, f, g):
        out = {}
        for e1, c1 in f.items():
            d1 = sum(e1)
            for e2, c2 in g.items():
                if d1 + sum(e2) > self.trunc:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                c = (out.get(e, 0) + c1 * c2) % self.pn
                if c:
                    out[e] = c
                else:
                    out.pop(e, None)
        return out

    def power(self, f, k: int):
        out = self.one
        for _ in range(k):
            out = self.mul(out, f)
        return out

    def is_unit(self, f) -> bool:
        return self.constant_term(f) % self.p != 0

    def inverse(self, f):
        c = self.constant_term(f)
        if c % self.p == 0:
            raise ZeroDivisionError("constant term not a unit")
        cinv = pow(c, -1, self.pn)
        m = self.sub(self.smul(cinv, f), self.one)  # in (p, X)
        acc, term = self.one, self.one
        for _ in range(self.n + self.trunc + 1):
            term = self.neg(self.mul(term, m))
            if not term:
                break
            acc = self.add(acc, term)
        return self.smul(cinv, acc)

    def substitute(self, f, images):
        """f(g_1, ..., g_s) for images a list of elements."""
        out = self.zero
        for e, c in f.items():
            term = self.scalar(c)
            for i, k in enumerate(e):
                for _ in range(k):
                    term = self.mul(term, images[i])
            out = self.add(out, term)
        return out

    # -- linear views -----------------------------------------------------------

    def to_vector(self, f) -> np.ndarray:
        v = np.zeros(self.dim, dtype=np.int64)
        for e, c in f.items():
            v[self.index[e]] = c
        return v

    def from_vector(self, v) -> dict:
        out = {}
        for i, c in enumerate(np.asarray(v) % self.pn):
            if c:
                out[self.basis[i]] = int(c)
        return out

    def mult_matrix(self, f) -> np.ndarray:
        """Matrix of multiplication by f on the monomial basis (rows act)."""
        m = np.zeros((self.dim, self.dim), dtype=np.int64)
        for j, mono in enumerate(self.basis):
            dm = sum(mono)
            for e, c in f.items():
                if dm + sum(e) > self.trunc:
                    continue
                tgt = tuple(a + b for a, b in zip(mono, e))
                m[j, self.index[tgt]] = (m[j, self.index[tgt]] + c) % self.pn
        return m

    def linear_part(self, f) -> np.ndarray:
        """Coefficients of the degree-1 terms, mod p."""
        out = np.zeros(self.nvars, dtype=np.int64)
        for i in range(self.nvars):
            e = [0] * self.nvars
            e[i] = 1
            out[i] = f.get(tuple(e), 0) % self.p
        return out

    def to_json_elem(self, f) -> list:
        return [[list(e), int(c)] for e, c in sorted(f.items())]

    def from_json_elem(self, data) -> dict:
        return self.from_terms((tuple(e), int(c)) for e, c in data)


@dataclass(frozen=True)
class PolyQuotientSpec:
    """A power-series-style ring: either degree-truncated W_n[X..], or the
    group-algebra quotient by (1+X_i)^{p^{m_i}} = 1 (which round-trips to a
    finite local RingSpec)."""

    p: int
    n: int
    nvars: int
    trunc: int | None = None
    group_exponents: tuple[int, ...] | None = None

    def __post_init__(self):
        if (self.trunc is None) == (self.group_exponents is None):
            raise ValueError("specify exactly one of trunc / group_exponents")
        if self.group_exponents is not None:
            if len(self.group_exponents) != self.nvars:
                raise ValueError("one exponent per variable")

    def is_group_algebra(self) -> bool:
        return self.group_exponents is not None

    def ring_spec(self) -> RingSpec:
        if not self.is_group_algebra():
            raise ValueError("not a group-algebra quotient")
        return RingSpec(self.p, self.n, tuple(self.group_exponents))

    def truncated_ring(self) -> TruncatedPolyRing:
        if self.is_group_algebra():
            raise ValueError("group-algebra quotient has no truncation")
        return TruncatedPolyRing(self.p, self.n, self.nvars, self.trunc)
