"""Exact linear algebra over Z/p^n, vectorized with numpy int64.

Conventions used throughout the package:

* A matrix ``A`` of shape (r, c) represents the module map
  (Z/p^n)^r -> (Z/p^n)^c sending a row vector v to v @ A.
  The image of the map is the row span of A.
* All entries are canonical residues in [0, p^n).
* p-adic valuation of the residue 0 is reported as n.

Everything here is exact; no floating point, no probabilistic steps.
Entry magnitudes stay below p^n <= 5**3 at desk scale, so int64 dot
products cannot overflow.
"""

from __future__ import annotations

import numpy as np

Array = np.ndarray


def as_array(rows, ncols: int) -> Array:
    """Coerce a list of row vectors to a well-shaped int64 array."""
    a = np.array(rows, dtype=np.int64)
    if a.size == 0:
        return np.zeros((0, ncols), dtype=np.int64)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.shape[1] != ncols:
        raise ValueError(f"expected {ncols} columns, got {a.shape[1]}")
    return a


def valuations(a: Array, p: int, n: int) -> Array:
    """Entrywise p-adic valuation, with val(0) = n."""
    v = np.full(a.shape, n, dtype=np.int64)
    nz = (a % p ** n) != 0
    cur = a.copy()
    for k in range(n):
        mask = nz & (cur % p != 0)
        v[mask] = k
        nz &= ~mask
        cur //= p
    return v


def _unit_inverse(a: int, p: int, n: int) -> int:
    if a % p == 0:
        raise ValueError(f"{a} is not a unit mod {p}^{n}")
    return pow(int(a), -1, p ** n)


def smith(a: Array, p: int, n: int, want_u: bool = False):
    """Local Smith normal form over Z/p^n.

    Returns (exps, U) where exps is the list of diagonal exponents
    (diagonal entry p^e, with e = n standing for 0), of length
    min(r, c), sorted ascending by construction, and U is an
    invertible (r, r) row transform with U A V diagonal for some
    invertible V (V is not returned; column ops do not affect row
    spans or kernels).
    """
    pn = p ** n
    a = a.astype(np.int64).copy() % pn
    r, c = a.shape
    u = np.eye(r, dtype=np.int64) if want_u else None
    exps: list[int] = []
    m = min(r, c)
    for t in range(m):
        sub = a[t:, t:]
        vals = valuations(sub, p, n)
        v = int(vals.min()) if sub.size else n
        if v >= n:
            exps.extend([n] * (m - t))
            break
        i, j = np.unravel_index(int(vals.argmin()), vals.shape)
        i += t
        j += t
        if i != t:
            a[[t, i]] = a[[i, t]]
            if want_u:
                u[[t, i]] = u[[i, t]]
        if j != t:
            a[:, [t, j]] = a[:, [j, t]]
        pv = p ** v
        inv = _unit_inverse(a[t, t] // pv, p, n)
        a[t] = (a[t] * inv) % pn
        if want_u:
            u[t] = (u[t] * inv) % pn
        f = a[t + 1 :, t] // pv
        if f.size:
            a[t + 1 :] = (a[t + 1 :] - np.outer(f, a[t])) % pn
            if want_u:
                u[t + 1 :] = (u[t + 1 :] - np.outer(f, u[t])) % pn
        g = a[t, t + 1 :] // pv
        if g.size:
            a[:, t + 1 :] = (a[:, t + 1 :] - np.outer(a[:, t], g)) % pn
        exps.append(v)
    return exps, u


def kernel(a: Array, p: int, n: int) -> Array:
    """Rows spanning {v : v A = 0} over Z/p^n."""
    pn = p ** n
    r, c = a.shape
    exps, u = smith(a, p, n, want_u=True)
    rows = []
    for i, e in enumerate(exps):
        if e > 0:
            rows.append((p ** (n - e) * u[i]) % pn)
    for i in range(min(r, c), r):
        rows.append(u[i] % pn)
    return as_array(rows, r)


class Echelon:
    """Row-echelon form over Z/p^n supporting membership and solving.

    Pivot entries are p^v in distinct columns; rows below a pivot are
    exactly zero in its column, rows above are reduced mod p^v.
    """

    __slots__ = ("p", "n", "ncols", "rows", "pivots", "transform")

    def __init__(self, a: Array, p: int, n: int, track: bool = False):
        pn = p ** n
        e = a.astype(np.int64).copy() % pn
        r, c = e.shape
        t = np.eye(r, dtype=np.int64) if track else None
        pivots: list[tuple[int, int]] = []
        row = 0
        for col in range(c):
            if row >= r:
                break
            vals = valuations(e[row:, col], p, n)
            v = int(vals.min()) if vals.size else n
            if v >= n:
                continue
            i = row + int(vals.argmin())
            if i != row:
                e[[row, i]] = e[[i, row]]
                if track:
                    t[[row, i]] = t[[i, row]]
            pv = p ** v
            inv = _unit_inverse(e[row, col] // pv, p, n)
            e[row] = (e[row] * inv) % pn
            if track:
                t[row] = (t[row] * inv) % pn
            f = np.concatenate([e[:row, col] // pv, e[row + 1 :, col] // pv])
            others = np.concatenate([np.arange(row), np.arange(row + 1, r)])
            if others.size:
                e[others] = (e[others] - np.outer(f, e[row])) % pn
                if track:
                    t[others] = (t[others] - np.outer(f, t[row])) % pn
            pivots.append((col, v))
            row += 1
        self.p, self.n, self.ncols = p, n, c
        self.rows = e[:row]
        self.pivots = pivots
        self.transform = t[:row] if track else None

    def reduce(self, v: Array):
        """Reduce v against the span; returns (residue, coefficients).

        v is in the span iff the residue is zero; then
        coefficients @ self.rows == v.
        """
        p, n = self.p, self.n
        pn = p ** n
        v = v.astype(np.int64).copy() % pn
        coeffs = np.zeros(len(self.pivots), dtype=np.int64)
        for i, (col, val) in enumerate(self.pivots):
            a = int(v[col])
            if a % (p ** val) != 0:
                return v, None
            c = a // (p ** val)
            coeffs[i] = c
            v = (v - c * self.rows[i]) % pn
        return v, coeffs

    def contains(self, v: Array) -> bool:
        residue, _ = self.reduce(v)
        return not residue.any()

    def contains_rows(self, rows: Array) -> bool:
        return all(self.contains(r) for r in rows)


def solve_left(a: Array, b: Array, p: int, n: int):
    """Solve X A = B over Z/p^n; returns X or None row-wise.

    B may be a single row or a matrix of rows; returns the matching
    shape, or None if any row is unsolvable.
    """
    single = b.ndim == 1
    rows = b.reshape(1, -1) if single else b
    ech = Echelon(a, p, n, track=True)
    out = []
    for row in rows:
        residue, coeffs = ech.reduce(row)
        if residue.any() or coeffs is None:
            return None
        x = (coeffs @ ech.transform) % p ** n if len(coeffs) else np.zeros(
            a.shape[0], dtype=np.int64
        )
        out.append(x)
    x = as_array(out, a.shape[0])
    return x[0] if single else x


def preimage(a: Array, rel: Array, p: int, n: int) -> Array:
    """Rows spanning {v : v A lies in rowspan(rel)}."""
    ra = a.shape[0]
    stacked = np.vstack([a, rel])
    k = kernel(stacked, p, n)
    return k[:, :ra] if k.size else np.zeros((0, ra), dtype=np.int64)


def quotient_invariants(k_rows: Array, l_rows: Array, p: int, n: int) -> tuple[int, ...]:
    """Invariant exponents of span(K)/span(L), requiring L <= span(K).

    The result lists e >= 1 with one Z/p^e summand each, sorted
    descending; () is the trivial group.
    """
    pn = p ** n
    ech = Echelon(k_rows, p, n)
    m = len(ech.pivots)
    if m == 0:
        if l_rows.size and (l_rows % pn).any():
            raise ValueError("L is not contained in span(K)")
        return ()
    coeff_rows = []
    for row in l_rows:
        residue, coeffs = ech.reduce(row)
        if coeffs is None or residue.any():
            raise ValueError("L is not contained in span(K)")
        coeff_rows.append(coeffs)
    rel = as_array(coeff_rows, m)
    scale = np.diag([p ** (n - v) for (_, v) in ech.pivots]).astype(np.int64)
    rel = np.vstack([rel, scale]) % pn
    exps, _ = smith(rel, p, n)
    # coordinate space W^m modulo rowspan(rel): summand W/p^e per diagonal
    return tuple(sorted((e for e in exps if e > 0), reverse=True))


def subgroup_invariants(gens: Array, l_rows: Array, p: int, n: int) -> tuple[int, ...]:
    """Invariants of (span(gens) + span(L)) / span(L)."""
    k = np.vstack([gens, l_rows])
    return quotient_invariants(k, l_rows, p, n)


def span_eq_mod(a_rows: Array, b_rows: Array, l_rows: Array, p: int, n: int) -> bool:
    """Whether span(A) + span(L) == span(B) + span(L)."""
    ea = Echelon(np.vstack([a_rows, l_rows]), p, n)
    eb = Echelon(np.vstack([b_rows, l_rows]), p, n)
    return ea.contains_rows(b_rows) and eb.contains_rows(a_rows)


def group_order(invariants: tuple[int, ...], p: int) -> int:
    return p ** sum(invariants)
