"""Finite local coefficient rings W_n[Delta] and exact matrix algebra.

W_n = Z/p^n, and Delta is a finite abelian p-group given by exponents
(e_1, ..., e_r), i.e. Delta = prod Z/p^{e_i}.  Ring elements are dense
coefficient tuples indexed by Delta in lexicographic exponent order;
the ring handle owns all arithmetic (elements themselves are plain
tuples of ints).  These rings are local: the maximal ideal is the
kernel of the augmentation to F_p, and every element outside it is a
unit with inverse computable by a finite geometric series.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import _wnlinalg as la

Elem = tuple  # tuple[int, ...] of length |Delta|


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class RingSpec:
    """Defining data: prime p, level n (W_n = Z/p^n), group exponents."""

    p: int
    n: int
    exponents: tuple[int, ...] = ()

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if self.n < 1:
            raise ValueError(f"level n = {self.n} must be >= 1")
        if any(e < 0 for e in self.exponents):
            raise ValueError("group exponents must be nonnegative")
        object.__setattr__(self, "exponents", tuple(self.exponents))

    def to_json(self) -> dict:
        return {"p": self.p, "n": self.n, "exponents": list(self.exponents)}

    @classmethod
    def from_json(cls, d: dict) -> "RingSpec":
        return cls(int(d["p"]), int(d["n"]), tuple(int(e) for e in d.get("exponents", ())))


class FiniteLocalRing:
    """Arithmetic handle for W_n[Delta]."""

    def __init__(self, spec: RingSpec):
        self.spec = spec
        self.p = spec.p
        self.n = spec.n
        self.pn = spec.p ** spec.n
        self.orders = tuple(spec.p ** e for e in spec.exponents)
        self.size = 1
        for o in self.orders:
            self.size *= o
        # index <-> exponent tuple in lexicographic order
        self._tuples = list(itertools.product(*[range(o) for o in self.orders]))
        self._index = {t: i for i, t in enumerate(self._tuples)}
        # precomputed convolution index table g*h -> index
        self._addtab = None

    # -- basic elements -------------------------------------------------

    @property
    def zero(self) -> Elem:
        return (0,) * self.size

    @property
    def one(self) -> Elem:
        return (1,) + (0,) * (self.size - 1)

    def scalar(self, c: int) -> Elem:
        return (c % self.pn,) + (0,) * (self.size - 1)

    def group_element(self, exps) -> Elem:
        """The basis element [g] for g given by exponents."""
        t = tuple(e % o for e, o in zip(exps, self.orders))
        out = [0] * self.size
        out[self._index[t]] = 1
        return tuple(out)

    def generator(self, i: int) -> Elem:
        """[sigma_i] for the i-th cyclic factor of Delta."""
        exps = [0] * len(self.orders)
        exps[i] = 1
        return self.group_element(exps)

    def from_coeffs(self, coeffs) -> Elem:
        if len(coeffs) != self.size:
            raise ValueError("coefficient table has wrong length")
        return tuple(int(c) % self.pn for c in coeffs)

    def element_count(self) -> int:
        return self.pn ** self.size

    def elements(self):
        """All ring elements; guard against use on large rings."""
        if self.element_count() > 100_000:
            raise ValueError("ring too large to enumerate")
        for coeffs in itertools.product(range(self.pn), repeat=self.size):
            yield coeffs

    # -- arithmetic ------------------------------------------------------

    def add(self, x: Elem, y: Elem) -> Elem:
        return tuple((a + b) % self.pn for a, b in zip(x, y))

    def sub(self, x: Elem, y: Elem) -> Elem:
        return tuple((a - b) % self.pn for a, b in zip(x, y))

    def neg(self, x: Elem) -> Elem:
        return tuple((-a) % self.pn for a in x)

    def _addtable(self):
        if self._addtab is None:
            tab = np.empty((self.size, self.size), dtype=np.int64)
            for i, g in enumerate(self._tuples):
                for j, h in enumerate(self._tuples):
                    s = tuple((a + b) % o for a, b, o in zip(g, h, self.orders))
                    tab[i, j] = self._index[s]
            self._addtab = tab
        return self._addtab

    def mul(self, x: Elem, y: Elem) -> Elem:
        if self.size == 1:
            return ((x[0] * y[0]) % self.pn,)
        tab = self._addtable()
        out = [0] * self.size
        for i, a in enumerate(x):
            if a == 0:
                continue
            row = tab[i]
            for j, b in enumerate(y):
                if b:
                    k = row[j]
                    out[k] = (out[k] + a * b) % self.pn
        return tuple(out)

    def smul(self, c: int, x: Elem) -> Elem:
        c %= self.pn
        return tuple((c * a) % self.pn for a in x)

    def is_zero(self, x: Elem) -> bool:
        return not any(x)

    def eq(self, x: Elem, y: Elem) -> bool:
        return x == y

    def power(self, x: Elem, k: int) -> Elem:
        out = self.one
        for _ in range(k):
            out = self.mul(out, x)
        return out

    # -- local structure --------------------------------------------------

    def augment(self, x: Elem) -> int:
        """Ring map to k = F_p: send every group element to 1, reduce mod p."""
        return sum(x) % self.p

    def augment_wn(self, x: Elem) -> int:
        """Ring map to W_n sending Delta to 1 (coefficient sum mod p^n)."""
        return sum(x) % self.pn

    def is_unit(self, x: Elem) -> bool:
        return self.augment(x) != 0

    def inverse(self, x: Elem) -> Elem:
        """Inverse of a unit: unit scalar factor times a geometric series.

        Writes x = u (1 + m) with u a unit of W_n and m in the maximal
        ideal; m is nilpotent so the series sum (-m)^j terminates.
        """
        c = self.augment_wn(x)
        if c % self.p == 0:
            raise ZeroDivisionError("not a unit (augmentation is 0 in k)")
        cinv = pow(c, -1, self.pn)
        m = self.sub(self.smul(cinv, x), self.one)  # in max ideal
        acc = self.one
        term = self.one
        # (p, [g]-1) is nilpotent; the bound n*size + n is generous
        for _ in range(self.n * self.size + self.n + 2):
            term = self.neg(self.mul(term, m))
            if self.is_zero(term):
                break
            acc = self.add(acc, term)
        else:
            raise ArithmeticError("geometric series failed to terminate")
        return self.smul(cinv, acc)

    # -- maps -------------------------------------------------------------

    def reduce_to(self, other: "FiniteLocalRing"):
        """The canonical surjection W_n[Delta] -> W_m[Delta'], m <= n.

        Delta' must have exponents pointwise <= those of Delta (each
        cyclic factor reduces Z/p^e -> Z/p^{e'}).
        """
        if other.p != self.p or other.n > self.n:
            raise ValueError("no canonical surjection between these rings")
        if len(other.orders) != len(self.orders) or any(
            eo > es
            for eo, es in zip(other.spec.exponents, self.spec.exponents)
        ):
            raise ValueError("group exponents must reduce pointwise")

        def f(x: Elem) -> Elem:
            out = [0] * other.size
            for i, a in enumerate(x):
                if a:
                    g = self._tuples[i]
                    h = tuple(e % o for e, o in zip(g, other.orders))
                    j = other._index[h]
                    out[j] = (out[j] + a) % other.pn
            return tuple(out)

        return f

    def to_json_elem(self, x: Elem) -> list:
        return list(x)

    def from_json_elem(self, data) -> Elem:
        return self.from_coeffs(data)


def make_ring(spec: RingSpec) -> FiniteLocalRing:
    return FiniteLocalRing(spec)


class Matrix:
    """Immutable matrix over a ring handle (row-vector convention).

    A Matrix of shape (rows, cols) represents the map R^rows -> R^cols
    sending a row vector v to v @ M; its image is the row span.
    """

    __slots__ = ("ring", "rows", "cols", "entries")

    def __init__(self, ring, rows: int, cols: int, entries):
        entries = tuple(entries)
        if len(entries) != rows * cols:
            raise ValueError(
                f"entry count {len(entries)} != {rows}x{cols}"
            )
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "entries", entries)

    def __setattr__(self, *a):
        raise AttributeError("Matrix is immutable")

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int):
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def __eq__(self, other):
        return (
            isinstance(other, Matrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.entries))

    @classmethod
    def from_rows(cls, ring, row_lists):
        rows = len(row_lists)
        cols = len(row_lists[0]) if rows else 0
        return cls(ring, rows, cols, [e for r in row_lists for e in r])

    @classmethod
    def zero(cls, ring, rows: int, cols: int):
        return cls(ring, rows, cols, [ring.zero] * (rows * cols))

    @classmethod
    def identity(cls, ring, size: int):
        e = []
        for i in range(size):
            for j in range(size):
                e.append(ring.one if i == j else ring.zero)
        return cls(ring, size, size, e)

    def is_zero(self) -> bool:
        return all(self.ring.is_zero(e) for e in self.entries)

    def matmul(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch in matmul")
        r = self.ring
        out = []
        for i in range(self.rows):
            for j in range(other.cols):
                acc = r.zero
                for k in range(self.cols):
                    a = self[i, k]
                    if not r.is_zero(a):
                        acc = r.add(acc, r.mul(a, other[k, j]))
                out.append(acc)
        return Matrix(r, self.rows, other.cols, out)

    def add(self, other: "Matrix") -> "Matrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch in add")
        r = self.ring
        return Matrix(
            r, self.rows, self.cols,
            [r.add(a, b) for a, b in zip(self.entries, other.entries)],
        )

    def scale(self, c) -> "Matrix":
        r = self.ring
        return Matrix(r, self.rows, self.cols, [r.mul(c, e) for e in self.entries])

    def scale_int(self, c: int) -> "Matrix":
        r = self.ring
        return Matrix(r, self.rows, self.cols, [r.smul(c, e) for e in self.entries])

    def map_entries(self, f, new_ring=None) -> "Matrix":
        return Matrix(new_ring or self.ring, self.rows, self.cols,
                      [f(e) for e in self.entries])

    def apply(self, v):
        """Image of the row vector v (a sequence of ring elements)."""
        r = self.ring
        out = [r.zero] * self.cols
        for i, a in enumerate(v):
            if not r.is_zero(a):
                for j in range(self.cols):
                    out[j] = r.add(out[j], r.mul(a, self[i, j]))
        return tuple(out)

    # -- numeric views (trivial Delta) -------------------------------------

    def to_wn(self) -> np.ndarray:
        """View as a numpy matrix over W_n; requires trivial Delta."""
        ring = self.ring
        if getattr(ring, "size", 1) != 1:
            raise ValueError("nontrivial group part; base-change first")
        a = np.fromiter(
            (e[0] for e in self.entries), dtype=np.int64, count=len(self.entries)
        )
        return a.reshape(self.rows, self.cols)

    @classmethod
    def from_wn(cls, ring, array) -> "Matrix":
        array = np.asarray(array, dtype=np.int64) % ring.pn
        rows, cols = array.shape
        return cls(ring, rows, cols, [(int(x),) for x in array.reshape(-1)])

    def expand_wn(self) -> np.ndarray:
        """Expand a group-algebra matrix to a W_n block matrix.

        Each entry becomes the |Delta| x |Delta| matrix of multiplication
        on the group basis, so the result is (rows*|Delta|, cols*|Delta|)
        and represents the same map of W_n-modules.
        """
        ring = self.ring
        d = ring.size
        tab = ring._addtable() if d > 1 else None
        out = np.zeros((self.rows * d, self.cols * d), dtype=np.int64)
        for i in range(self.rows):
            for j in range(self.cols):
                e = self[i, j]
                if not any(e):
                    continue
                block = np.zeros((d, d), dtype=np.int64)
                if d == 1:
                    block[0, 0] = e[0]
                else:
                    for gi, coeff in enumerate(e):
                        if coeff:
                            # row basis g maps to coeff * (g + gi)
                            block[np.arange(d), tab[np.arange(d), gi]] += coeff
                out[i * d : (i + 1) * d, j * d : (j + 1) * d] = block % ring.pn
        return out

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "entries": [list(e) for e in self.entries],
        }

    @classmethod
    def from_json(cls, ring, d: dict) -> "Matrix":
        return cls(
            ring, int(d["rows"]), int(d["cols"]),
            [ring.from_coeffs(e) for e in d["entries"]],
        )


def local_eliminate(m: Matrix):
    """Pivot on unit entries until the residual lies in the maximal ideal.

    Returns (unit_rank, residual, p_mat, q_mat) with p_mat, q_mat
    invertible and p_mat @ m @ q_mat = diag(I_unit_rank, residual);
    the residual is the minimal presentation matrix of coker(m), where
    coker means R^cols / rowspan(m).  Pivot choice is the first unit
    entry in row-major scan, so the normal form is deterministic.
    """
    ring = m.ring
    work = [list(m.row(i)) for i in range(m.rows)]
    p_mat = Matrix.identity(ring, m.rows)
    q_mat = Matrix.identity(ring, m.cols)
    p_rows = [list(p_mat.row(i)) for i in range(m.rows)]
    q_rows = [list(q_mat.row(i)) for i in range(m.cols)]
    used_r: list[int] = []
    used_c: list[int] = []
    while True:
        pivot = None
        for i in range(m.rows):
            if i in used_r:
                continue
            for j in range(m.cols):
                if j in used_c:
                    continue
                if ring.is_unit(work[i][j]):
                    pivot = (i, j)
                    break
            if pivot:
                break
        if pivot is None:
            break
        i, j = pivot
        inv = ring.inverse(work[i][j])
        work[i] = [ring.mul(inv, e) for e in work[i]]
        p_rows[i] = [ring.mul(inv, e) for e in p_rows[i]]
        for k in range(m.rows):
            if k == i:
                continue
            c = work[k][j]
            if ring.is_zero(c):
                continue
            work[k] = [ring.sub(a, ring.mul(c, b)) for a, b in zip(work[k], work[i])]
            p_rows[k] = [
                ring.sub(a, ring.mul(c, b)) for a, b in zip(p_rows[k], p_rows[i])
            ]
        # clear the pivot row to the right via column ops (recorded in q)
        for l in range(m.cols):
            if l == j:
                continue
            c = work[i][l]
            if ring.is_zero(c):
                continue
            for k in range(m.rows):
                work[k][l] = ring.sub(work[k][l], ring.mul(work[k][j], c))
            for k in range(m.cols):
                q_rows[k][l] = ring.sub(q_rows[k][l], ring.mul(q_rows[k][j], c))
        used_r.append(i)
        used_c.append(j)
    rest_r = [i for i in range(m.rows) if i not in used_r]
    rest_c = [j for j in range(m.cols) if j not in used_c]
    residual = Matrix.from_rows(
        ring, [[work[i][j] for j in rest_c] for i in rest_r]
    ) if rest_r and rest_c else Matrix(ring, len(rest_r), len(rest_c), [])
    # reorder transforms so used pivots come first
    order_r = used_r + rest_r
    order_c = used_c + rest_c
    p_out = Matrix.from_rows(ring, [p_rows[i] for i in order_r])
    q_out = Matrix.from_rows(
        ring, [[q_rows[i][j] for j in order_c] for i in range(m.cols)]
    )
    return len(used_r), residual, p_out, q_out


def diagonalize_wn(m: Matrix) -> tuple[int, ...]:
    """Elementary divisors of a matrix over W_n (trivial Delta).

    Returns the diagonal of the local Smith form as actual values
    p^e (with 0 standing for p^n = 0), length min(rows, cols).
    coker(m) = R^cols/rowspan is the direct sum of W_n/(d) over the
    diagonal d plus W_n^(cols - len(diagonal)).
    """
    ring = m.ring
    exps, _ = la.smith(m.to_wn(), ring.p, ring.n)
    return tuple(sorted(ring.p ** e % ring.pn for e in exps))


def cokernel_invariants(m: Matrix) -> tuple[int, ...]:
    """Invariant exponents of coker(m) = W_n^cols / rowspan(m).

    One Z/p^e summand per exponent; e = n summands are free over W_n.
    """
    ring = m.ring
    exps, _ = la.smith(m.to_wn(), ring.p, ring.n)
    full = list(exps) + [ring.n] * (m.cols - len(exps))
    return tuple(sorted((e for e in full if e > 0), reverse=True))
