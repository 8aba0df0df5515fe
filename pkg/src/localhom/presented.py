"""Complexes of finitely presented W_n-modules.

A term is W_n^g / rowspan(rel); differentials are numpy matrices in the
row convention that respect the relation lattices.  This is the engine
behind group cochains with non-free coefficient modules and quotient
complexes of condition lifts; when all relation lattices are empty it
agrees with FreeChainComplex homology.
"""

from __future__ import annotations

import numpy as np

from . import _wnlinalg as la


class PresentedComplexError(ValueError):
    pass


def _rows(mat, ncols):
    if mat is None:
        return np.zeros((0, ncols), dtype=np.int64)
    return la.as_array(mat, ncols)


class PresentedWnComplex:
    """Bounded complex of presented W_n-modules, degree-decreasing d."""

    def __init__(self, p: int, n: int, lo: int, hi: int, ngens: dict,
                 diffs: dict, rels: dict | None = None, check: bool = True):
        self.p, self.n = p, n
        self.pn = p ** n
        self.lo, self.hi = lo, hi
        self.ngens = {i: int(ngens.get(i, 0)) for i in range(lo, hi + 1)}
        rels = rels or {}
        self.rels = {
            i: _rows(rels.get(i), self.ngens[i]) % self.pn
            for i in range(lo, hi + 1)
        }
        self.diffs = {}
        for i in range(lo + 1, hi + 1):
            d = diffs.get(i)
            if d is None:
                d = np.zeros((self.ngens[i], self.ngens[i - 1]), dtype=np.int64)
            self.diffs[i] = np.asarray(d, dtype=np.int64) % self.pn
        self._cache = {}
        if check:
            err = self.validate()
            if err:
                raise PresentedComplexError(err)

    def rank(self, i: int) -> int:
        return self.ngens.get(i, 0)

    def rel(self, i: int) -> np.ndarray:
        return self.rels.get(i, np.zeros((0, self.rank(i)), dtype=np.int64))

    def diff(self, i: int) -> np.ndarray:
        d = self.diffs.get(i)
        if d is None:
            d = np.zeros((self.rank(i), self.rank(i - 1)), dtype=np.int64)
        return d

    def validate(self):
        p, n = self.p, self.n
        for i in range(self.lo + 1, self.hi + 1):
            d = self.diff(i)
            if d.shape != (self.rank(i), self.rank(i - 1)):
                return f"differential at degree {i} has wrong shape"
            tgt = la.Echelon(self.rel(i - 1), p, n)
            r = self.rel(i)
            if r.size and not tgt.contains_rows((r @ d) % self.pn):
                return f"differential at degree {i} not defined on the quotient"
        for i in range(self.lo + 2, self.hi + 1):
            comp = (self.diff(i) @ self.diff(i - 1)) % self.pn
            tgt = la.Echelon(self.rel(i - 2), p, n)
            if comp.size and not tgt.contains_rows(comp):
                return f"d^2 nonzero entering degree {i - 2}"
        return None

    # -- homology -----------------------------------------------------------

    def cycle_rows(self, i: int) -> np.ndarray:
        """Generators of {v : v d_i in rel_{i-1}} (includes rel_i)."""
        g = self.rank(i)
        if g == 0:
            return np.zeros((0, 0), dtype=np.int64)
        if i <= self.lo or self.rank(i - 1) == 0:
            return np.eye(g, dtype=np.int64)
        pre = la.preimage(self.diff(i), self.rel(i - 1), self.p, self.n)
        return np.vstack([pre, self.rel(i)])

    def boundary_rows(self, i: int) -> np.ndarray:
        """Generators of im(d_{i+1}) + rel_i inside W^g_i."""
        g = self.rank(i)
        rows = [self.rel(i)]
        if i + 1 <= self.hi and self.rank(i + 1):
            rows.append(self.diff(i + 1))
        return np.vstack([r for r in rows if r.size] or
                         [np.zeros((0, g), dtype=np.int64)])

    def homology_at(self, i: int) -> tuple[int, ...]:
        if i < self.lo or i > self.hi:
            return ()
        if i not in self._cache:
            self._cache[i] = la.quotient_invariants(
                self.cycle_rows(i), self.boundary_rows(i), self.p, self.n
            )
        return self._cache[i]

    def homology(self) -> dict:
        return {i: self.homology_at(i) for i in range(self.lo, self.hi + 1)}


class PresentedChainMap:
    """Degreewise map of presented complexes, validated on quotients."""

    def __init__(self, source: PresentedWnComplex, target: PresentedWnComplex,
                 mats: dict, check: bool = True):
        if (source.p, source.n) != (target.p, target.n):
            raise PresentedComplexError("mismatched coefficients")
        self.source, self.target = source, target
        self.p, self.n = source.p, source.n
        self.pn = source.pn
        self.mats = {}
        lo = min(source.lo, target.lo)
        hi = max(source.hi, target.hi)
        for i in range(lo, hi + 1):
            m = mats.get(i)
            if m is None:
                m = np.zeros((source.rank(i), target.rank(i)), dtype=np.int64)
            self.mats[i] = np.asarray(m, dtype=np.int64) % self.pn
        if check:
            err = self.validate()
            if err:
                raise PresentedComplexError(err)

    def mat(self, i: int) -> np.ndarray:
        m = self.mats.get(i)
        if m is None:
            m = np.zeros((self.source.rank(i), self.target.rank(i)),
                         dtype=np.int64)
        return m

    def validate(self):
        p, n = self.p, self.n
        for i in self.mats:
            m = self.mat(i)
            if m.shape != (self.source.rank(i), self.target.rank(i)):
                return f"map has wrong shape in degree {i}"
            tgt = la.Echelon(self.target.rel(i), p, n)
            r = self.source.rel(i)
            if r.size and not tgt.contains_rows((r @ m) % self.pn):
                return f"map not defined on the quotient in degree {i}"
        lo = min(self.source.lo, self.target.lo)
        hi = max(self.source.hi, self.target.hi)
        for i in range(lo + 1, hi + 1):
            left = (self.source.diff(i) @ self.mat(i - 1)) % self.pn
            right = (self.mat(i) @ self.target.diff(i)) % self.pn
            tgt = la.Echelon(self.target.rel(i - 1), p, n)
            delta = (left - right) % self.pn
            if delta.size and not tgt.contains_rows(delta):
                return f"does not commute with d in degree {i}"
        return None


def exact_at(mid: PresentedWnComplex, i: int,
             incoming_rows: np.ndarray, outgoing: np.ndarray,
             target: PresentedWnComplex, j: int) -> bool:
    """Exactness at H_i(mid): im(incoming) = ker(H_i(mid) -> H_j(target)).

    incoming_rows: images in W^{g_i} coordinates of cycle generators of
    the previous term (already mapped).  outgoing: the matrix of the
    next map on degree i.  Both sides are compared as subgroups of
    H_i(mid), i.e. modulo boundaries.
    """
    p, n = mid.p, mid.n
    cyc = mid.cycle_rows(i)
    bnd = mid.boundary_rows(i)
    # kernel of the induced map: cycles whose image is a boundary in target
    mapped = (cyc @ outgoing) % mid.pn if cyc.size else cyc
    coeff = la.preimage(mapped, target.boundary_rows(j), p, n)
    ker_rows = (coeff @ cyc) % mid.pn if coeff.size else np.zeros(
        (0, mid.rank(i)), dtype=np.int64
    )
    img = np.vstack([incoming_rows, bnd]) if incoming_rows.size else bnd
    ker = np.vstack([ker_rows, bnd]) if ker_rows.size else bnd
    return la.span_eq_mod(img, ker, bnd, p, n)


def induced_map_kernel(mid, i, outgoing, target, j):
    """Rows generating ker(H_i(mid) -> H_j(target)) in ambient coordinates."""
    cyc = mid.cycle_rows(i)
    mapped = (cyc @ outgoing) % mid.pn if cyc.size else cyc
    coeff = la.preimage(mapped, target.boundary_rows(j), mid.p, mid.n)
    return (coeff @ cyc) % mid.pn if coeff.size else np.zeros(
        (0, mid.rank(i)), dtype=np.int64
    )
