"""Bounded complexes of finite free modules over a finite local ring.

Degree-decreasing differentials d_i: C_i -> C_{i-1}, stored as row-
convention matrices of shape (rank_i, rank_{i-1}).  Homology over W_n
(trivial group part) is returned as elementary-divisor data.  The cone
differential follows d(a, b) = (-da, db + f(a)).

A complex may carry a declared window (wlo, whi): the finite data then
models an unbounded object that is exact outside the window, and
homology queries outside it return 0 by declaration rather than by
computation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _wnlinalg as la
from .rings import FiniteLocalRing, Matrix


@dataclass(frozen=True)
class GradedModule:
    """Per-degree invariant exponents over W_n (Z/p^e summand per entry)."""

    p: int
    n: int
    invariants: dict

    def exponents(self, i: int) -> tuple[int, ...]:
        return tuple(self.invariants.get(i, ()))

    def rank(self, i: int) -> int:
        """Minimal number of generators in degree i."""
        return len(self.exponents(i))

    def free_rank(self, i: int) -> int:
        """Number of full W_n summands in degree i."""
        return sum(1 for e in self.exponents(i) if e == self.n)

    def is_free(self, i: int) -> bool:
        return all(e == self.n for e in self.exponents(i))

    def order(self, i: int) -> int:
        return self.p ** sum(self.exponents(i))

    def degrees(self):
        return sorted(d for d, v in self.invariants.items() if v)

    def is_zero(self) -> bool:
        return not self.degrees()

    def __str__(self):
        parts = []
        for d in self.degrees():
            summands = " + ".join(f"Z/{self.p}^{e}" for e in self.exponents(d))
            parts.append(f"H_{d} = {summands}")
        return "; ".join(parts) or "0"

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "n": self.n,
            "invariants": {str(d): list(v) for d, v in self.invariants.items() if v},
        }


def kron(a: Matrix, b: Matrix) -> Matrix:
    """Kronecker product; basis of the product indexed (i_a, i_b)."""
    ring = a.ring
    rows, cols = a.rows * b.rows, a.cols * b.cols
    ents = []
    for ia in range(a.rows):
        for ib in range(b.rows):
            for ja in range(a.cols):
                for jb in range(b.cols):
                    ents.append(ring.mul(a[ia, ja], b[ib, jb]))
    return Matrix(ring, rows, cols, ents)


def block_matrix(ring, blocks, row_ranks, col_ranks) -> Matrix:
    """Assemble a matrix from a dict {(bi, bj): Matrix}; missing = 0."""
    rows = sum(row_ranks)
    cols = sum(col_ranks)
    grid = [[ring.zero] * cols for _ in range(rows)]
    roff = [0]
    for r in row_ranks:
        roff.append(roff[-1] + r)
    coff = [0]
    for c in col_ranks:
        coff.append(coff[-1] + c)
    for (bi, bj), m in blocks.items():
        if m is None:
            continue
        if m.rows != row_ranks[bi] or m.cols != col_ranks[bj]:
            raise ValueError("block shape mismatch")
        for i in range(m.rows):
            for j in range(m.cols):
                grid[roff[bi] + i][coff[bj] + j] = m[i, j]
    return Matrix.from_rows(ring, grid) if rows else Matrix(ring, 0, cols, [])


class ComplexError(ValueError):
    pass


class FreeChainComplex:
    """Bounded complex of finite free modules with validated d^2 = 0."""

    def __init__(self, ring: FiniteLocalRing, lo: int, hi: int, ranks: dict,
                 diffs: dict, window=None, check: bool = True):
        if lo > hi:
            raise ComplexError("empty degree range")
        self.ring = ring
        self.lo, self.hi = lo, hi
        self.ranks = {i: int(ranks.get(i, 0)) for i in range(lo, hi + 1)}
        self.diffs = {}
        for i in range(lo + 1, hi + 1):
            d = diffs.get(i)
            if d is None:
                d = Matrix.zero(ring, self.ranks[i], self.ranks[i - 1])
            self.diffs[i] = d
        self.window = window
        self._homology_cache = {}
        if check:
            report = self.validate()
            if report is not None:
                raise ComplexError(report)

    # -- structure ---------------------------------------------------------

    def rank(self, i: int) -> int:
        return self.ranks.get(i, 0)

    def diff(self, i: int) -> Matrix:
        """d_i: C_i -> C_{i-1} (zero matrix outside the stored range)."""
        d = self.diffs.get(i)
        if d is None:
            d = Matrix.zero(self.ring, self.rank(i), self.rank(i - 1))
        return d

    def validate(self):
        """None if coherent, else a report naming the first failure."""
        for i in range(self.lo + 1, self.hi + 1):
            d = self.diffs[i]
            if (d.rows, d.cols) != (self.rank(i), self.rank(i - 1)):
                return f"differential at degree {i} has wrong shape"
        for i in range(self.lo + 2, self.hi + 1):
            if not self.diffs[i].matmul(self.diffs[i - 1]).is_zero():
                return f"d^2 != 0 entering degree {i - 2} (from degree {i})"
        return None

    def degrees(self):
        return range(self.lo, self.hi + 1)

    def euler_characteristic(self) -> int:
        return sum((-1) ** i * r for i, r in self.ranks.items())

    # -- homology ----------------------------------------------------------

    def _require_wn(self):
        if getattr(self.ring, "size", 1) != 1:
            raise ComplexError(
                "homology needs trivial group part; base-change first"
            )

    def cycle_rows(self, i: int) -> np.ndarray:
        """Rows spanning ker(d_i) in W_n coordinates."""
        self._require_wn()
        r = self.rank(i)
        if r == 0:
            return np.zeros((0, 0), dtype=np.int64)
        if self.rank(i - 1) == 0 or i <= self.lo:
            return np.eye(r, dtype=np.int64)
        return la.kernel(self.diff(i).to_wn(), self.ring.p, self.ring.n)

    def boundary_rows(self, i: int) -> np.ndarray:
        """Rows spanning im(d_{i+1}) inside C_i."""
        self._require_wn()
        r = self.rank(i)
        if r == 0 or self.rank(i + 1) == 0 or i + 1 > self.hi:
            return np.zeros((0, r), dtype=np.int64)
        return self.diff(i + 1).to_wn()

    def homology_at(self, i: int) -> tuple[int, ...]:
        if self.window is not None and not (self.window[0] <= i <= self.window[1]):
            return ()
        if i < self.lo or i > self.hi:
            return ()
        if i not in self._homology_cache:
            k = self.cycle_rows(i)
            l = self.boundary_rows(i)
            self._homology_cache[i] = la.quotient_invariants(
                k, l, self.ring.p, self.ring.n
            )
        return self._homology_cache[i]

    def homology(self) -> GradedModule:
        inv = {i: self.homology_at(i) for i in self.degrees()}
        return GradedModule(self.ring.p, self.ring.n, inv)

    # -- constructions -------------------------------------------------------

    def shift(self, k: int) -> "FreeChainComplex":
        """C[k] with C[k]_i = C_{i-k}; differential scaled by (-1)^k."""
        sign = 1 if k % 2 == 0 else -1
        ranks = {i + k: r for i, r in self.ranks.items()}
        diffs = {
            i + k: (d if sign == 1 else d.scale_int(-1))
            for i, d in self.diffs.items()
        }
        win = None if self.window is None else (self.window[0] + k, self.window[1] + k)
        return FreeChainComplex(self.ring, self.lo + k, self.hi + k, ranks, diffs,
                                window=win, check=False)

    def base_change(self, f, new_ring) -> "FreeChainComplex":
        """Apply a ring map entrywise to all differentials."""
        diffs = {i: d.map_entries(f, new_ring) for i, d in self.diffs.items()}
        return FreeChainComplex(new_ring, self.lo, self.hi, dict(self.ranks), diffs,
                                window=self.window)

    def direct_sum(self, other: "FreeChainComplex") -> "FreeChainComplex":
        if other.ring is not self.ring:
            raise ComplexError("mismatched rings")
        lo, hi = min(self.lo, other.lo), max(self.hi, other.hi)
        ranks = {i: self.rank(i) + other.rank(i) for i in range(lo, hi + 1)}
        diffs = {}
        for i in range(lo + 1, hi + 1):
            diffs[i] = block_matrix(
                self.ring,
                {(0, 0): self.diff(i), (1, 1): other.diff(i)},
                [self.rank(i), other.rank(i)],
                [self.rank(i - 1), other.rank(i - 1)],
            )
        return FreeChainComplex(self.ring, lo, hi, ranks, diffs, check=False)

    def tensor(self, other: "FreeChainComplex") -> "FreeChainComplex":
        """Levelwise tensor with Koszul signs.

        (C (x) D)_t = sum over i+j = t of C_i (x) D_j, blocks ordered by
        ascending i; d(x (x) y) = dx (x) y + (-1)^{|x|} x (x) dy.
        """
        if other.ring is not self.ring:
            raise ComplexError("mismatched rings")
        ring = self.ring
        lo, hi = self.lo + other.lo, self.hi + other.hi

        def blocks_at(t):
            return [
                (i, t - i)
                for i in range(self.lo, self.hi + 1)
                if other.lo <= t - i <= other.hi
            ]

        ranks = {}
        for t in range(lo, hi + 1):
            ranks[t] = sum(self.rank(i) * other.rank(j) for i, j in blocks_at(t))
        diffs = {}
        for t in range(lo + 1, hi + 1):
            src = blocks_at(t)
            tgt = blocks_at(t - 1)
            tgt_index = {b: k for k, b in enumerate(tgt)}
            blocks = {}
            for bi, (i, j) in enumerate(src):
                if self.rank(i) * other.rank(j) == 0:
                    continue
                # dx (x) y component
                if (i - 1, j) in tgt_index and self.rank(i - 1) * other.rank(j):
                    blocks[(bi, tgt_index[(i - 1, j)])] = kron(
                        self.diff(i), Matrix.identity(ring, other.rank(j))
                    )
                # (-1)^i x (x) dy component
                if (i, j - 1) in tgt_index and self.rank(i) * other.rank(j - 1):
                    m = kron(Matrix.identity(ring, self.rank(i)), other.diff(j))
                    if i % 2:
                        m = m.scale_int(-1)
                    blocks[(bi, tgt_index[(i, j - 1)])] = m
            diffs[t] = block_matrix(
                ring, blocks,
                [self.rank(i) * other.rank(j) for i, j in src],
                [self.rank(i) * other.rank(j) for i, j in tgt],
            )
        return FreeChainComplex(ring, lo, hi, ranks, diffs)

    # -- truncation ----------------------------------------------------------

    def truncate_above(self, m: int) -> "FreeChainComplex":
        """tau_{<= m}: homology preserved in degrees <= m, zero above."""
        if m >= self.hi:
            return self
        if m < self.lo:
            return FreeChainComplex(self.ring, m, m, {m: 0}, {}, check=False)
        ring = self.ring
        ranks = {i: self.rank(i) for i in range(self.lo, m + 1)}
        diffs = {i: self.diff(i) for i in range(self.lo + 1, m + 1)}
        dtop = self.diff(m + 1)
        if dtop.is_zero():
            return FreeChainComplex(ring, self.lo, m, ranks, diffs,
                                    window=self.window, check=False)
        self._require_wn()
        ech = la.Echelon(dtop.to_wn(), ring.p, ring.n)
        rows = ech.rows
        ranks[m + 1] = rows.shape[0]
        diffs[m + 1] = Matrix.from_wn(ring, rows)
        window = None
        if any(v > 0 for (_, v) in ech.pivots):
            # the image is not a free direct summand; the extra term is the
            # start of an infinite resolution, so declare validity <= m
            wlo = self.window[0] if self.window else self.lo
            window = (wlo, m)
        elif self.window is not None:
            window = (self.window[0], min(self.window[1], m))
        return FreeChainComplex(ring, self.lo, m + 1, ranks, diffs, window=window)

    def truncate_below(self, m: int) -> "FreeChainComplex":
        """tau_{>= m}: degree-m term becomes ker(d_m); homology kept >= m."""
        if m <= self.lo:
            return self
        if m > self.hi:
            return FreeChainComplex(self.ring, m, m, {m: 0}, {}, check=False)
        ring = self.ring
        dm = self.diff(m)
        if dm.is_zero():
            ranks = {i: self.rank(i) for i in range(m, self.hi + 1)}
            diffs = {i: self.diff(i) for i in range(m + 1, self.hi + 1)}
            win = None
            if self.window is not None:
                win = (max(self.window[0], m), self.window[1])
            return FreeChainComplex(ring, m, self.hi, ranks, diffs,
                                    window=win, check=False)
        self._require_wn()
        kern = la.Echelon(la.kernel(dm.to_wn(), ring.p, ring.n), ring.p, ring.n)
        if any(v > 0 for (_, v) in kern.pivots):
            raise ComplexError(
                "kernel in degree %d is not a free summand; no bounded free "
                "truncation exists over W_n (length parity obstruction)" % m
            )
        krows = kern.rows
        ranks = {i: self.rank(i) for i in range(m, self.hi + 1)}
        ranks[m] = krows.shape[0]
        diffs = {i: self.diff(i) for i in range(m + 2, self.hi + 1)}
        if m + 1 <= self.hi:
            lifted = la.solve_left(krows, self.diff(m + 1).to_wn(), ring.p, ring.n)
            if lifted is None:
                raise ComplexError("boundaries do not land in cycles")
            diffs[m + 1] = Matrix.from_wn(ring, lifted)
        win = None
        if self.window is not None:
            win = (max(self.window[0], m), self.window[1])
        return FreeChainComplex(ring, m, self.hi, ranks, diffs, window=win)

    # -- io -------------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "ring": self.ring.spec.to_json(),
            "lo": self.lo,
            "hi": self.hi,
            "ranks": [self.rank(i) for i in self.degrees()],
            "differentials": [self.diff(i).to_json()
                              for i in range(self.lo + 1, self.hi + 1)],
        }

    @classmethod
    def from_json(cls, ring, d: dict) -> "FreeChainComplex":
        lo, hi = int(d["lo"]), int(d["hi"])
        ranks = {lo + k: r for k, r in enumerate(d["ranks"])}
        diffs = {
            lo + 1 + k: Matrix.from_json(ring, m)
            for k, m in enumerate(d["differentials"])
        }
        return cls(ring, lo, hi, ranks, diffs)


def unit_complex(ring) -> FreeChainComplex:
    """The ring itself, in degree 0."""
    return FreeChainComplex(ring, 0, 0, {0: 1}, {}, check=False)


class ChainMap:
    """A degreewise map of complexes, validated to commute with d."""

    def __init__(self, source: FreeChainComplex, target: FreeChainComplex,
                 mats: dict, check: bool = True):
        if source.ring is not target.ring:
            raise ComplexError("mismatched rings")
        self.source, self.target = source, target
        self.mats = {}
        lo = min(source.lo, target.lo)
        hi = max(source.hi, target.hi)
        for i in range(lo, hi + 1):
            m = mats.get(i)
            if m is None:
                m = Matrix.zero(source.ring, source.rank(i), target.rank(i))
            self.mats[i] = m
        if check:
            self.validate()

    def mat(self, i: int) -> Matrix:
        m = self.mats.get(i)
        if m is None:
            m = Matrix.zero(self.source.ring, self.source.rank(i),
                            self.target.rank(i))
        return m

    def validate(self):
        for i in self.mats:
            m = self.mat(i)
            if (m.rows, m.cols) != (self.source.rank(i), self.target.rank(i)):
                raise ComplexError(f"chain map has wrong shape in degree {i}")
        lo = min(self.source.lo, self.target.lo)
        hi = max(self.source.hi, self.target.hi)
        for i in range(lo + 1, hi + 1):
            left = self.source.diff(i).matmul(self.mat(i - 1))
            right = self.mat(i).matmul(self.target.diff(i))
            if not left.add(right.scale_int(-1)).is_zero():
                raise ComplexError(f"does not commute with d in degree {i}")

    def homology_matrix(self, i: int) -> np.ndarray:
        """Induced map H_i(source) -> H_i(target) on cycle generators.

        Returns the image rows (in target C_i coordinates) of the source
        cycle generators; callers compare subgroups modulo boundaries.
        """
        k = self.source.cycle_rows(i)
        if k.size == 0:
            return np.zeros((0, self.target.rank(i)), dtype=np.int64)
        return (k @ self.mat(i).to_wn()) % self.source.ring.pn


def identity_map(c: FreeChainComplex) -> ChainMap:
    return ChainMap(c, c, {i: Matrix.identity(c.ring, c.rank(i))
                           for i in c.degrees()}, check=False)


def cone(f: ChainMap) -> FreeChainComplex:
    """Mapping cone: cone(f)_t = A_{t-1} (+) B_t, d(a,b) = (-da, db + f(a))."""
    a, b = f.source, f.target
    ring = a.ring
    lo = min(a.lo + 1, b.lo)
    hi = max(a.hi + 1, b.hi)
    ranks = {t: a.rank(t - 1) + b.rank(t) for t in range(lo, hi + 1)}
    diffs = {}
    for t in range(lo + 1, hi + 1):
        blocks = {
            (0, 0): a.diff(t - 1).scale_int(-1),
            (0, 1): f.mat(t - 1),
            (1, 1): b.diff(t),
        }
        diffs[t] = block_matrix(
            ring, blocks,
            [a.rank(t - 1), b.rank(t)],
            [a.rank(t - 2), b.rank(t - 1)],
        )
    return FreeChainComplex(ring, lo, hi, ranks, diffs)


def hofib(f: ChainMap) -> FreeChainComplex:
    """Homotopy fiber: cone(f) shifted down, so hofib_t = A_t (+) B_{t+1}.

    The triangle hofib -> A -> B is exact in homology:
    H_t(hofib) -> H_t(A) -> H_t(B) -> H_{t-1}(hofib) -> ...
    """
    return cone(f).shift(-1)


def hofib_projection(h: FreeChainComplex, f: ChainMap) -> dict:
    """Matrices of the projection hofib(f) -> A per degree."""
    a, b = f.source, f.target
    ring = a.ring
    mats = {}
    for t in range(h.lo, h.hi + 1):
        blocks = {(0, 0): Matrix.identity(ring, a.rank(t))}
        mats[t] = block_matrix(ring, blocks, [a.rank(t), b.rank(t + 1)],
                               [a.rank(t)])
    return mats
