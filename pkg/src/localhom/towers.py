"""Level complexes over group algebras W_n[(Z/p^n)^s], their transition
maps, and inverse limits of the resulting finite homotopy/Tor groups.

The ring W_n[(Z/p^n)^s] is far too large to expand over W_n (its rank is
p^{n s}), so everything stays factored: a level complex is a tensor
product of rank-one towers, one per coordinate.  A killed coordinate
contributes the standard 2-periodic complex with differentials
alternating between sigma - 1 and the norm element; a surviving
coordinate contributes the ring itself in degree 0.  Base change to W_n
and comparison maps between levels are computed per factor, where the
cyclic algebra is small enough for honest linear solving, and assembled
by tensoring.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import _wnlinalg as la
from .complexes import FreeChainComplex, GradedModule
from .rings import FiniteLocalRing, Matrix, RingSpec, make_ring


class CyclicFactor:
    """The 2-periodic tower for one killed coordinate: W_n[Z/p^e]."""

    def __init__(self, p: int, n: int, e: int):
        self.p, self.n, self.e = p, n, e
        self.ring = make_ring(RingSpec(p, n, (e,)))
        r = self.ring
        sigma = r.generator(0)
        self.sigma_minus_one = r.sub(sigma, r.one)
        # the norm is the sum of all group elements
        self.norm = tuple([1] * r.size)

    def diff_elem(self, i: int):
        """The degree-i differential entry (i >= 1)."""
        return self.sigma_minus_one if i % 2 == 1 else self.norm

    def reduced_diff(self, i: int) -> int:
        """Image of the differential entry under the augmentation to W_n."""
        return self.ring.augment_wn(self.diff_elem(i))

    def resolution_complex(self, maxdeg: int) -> FreeChainComplex:
        """The symbolic rank-one complex over W_n[Z/p^e], degrees 0..maxdeg."""
        ranks = {i: 1 for i in range(maxdeg + 1)}
        diffs = {
            i: Matrix(self.ring, 1, 1, [self.diff_elem(i)])
            for i in range(1, maxdeg + 1)
        }
        return FreeChainComplex(self.ring, 0, maxdeg, ranks, diffs)

    def mult_matrix(self, x) -> np.ndarray:
        """Right-multiplication by x on the group basis (circulant)."""
        size = self.ring.size
        m = np.zeros((size, size), dtype=np.int64)
        idx = np.arange(size)
        for h, coeff in enumerate(x):
            if coeff:
                m[idx, (idx + h) % size] = (m[idx, (idx + h) % size] + coeff) \
                    % self.ring.pn
        return m


def lift_factor_comparison(src: CyclicFactor, dst: CyclicFactor, maxdeg: int):
    """Chain-map entries F_0..F_maxdeg in dst.ring comparing the towers.

    Solves F_i d_i = red(d'_i) F_{i-1} degree by degree, where red is the
    canonical reduction src.ring -> dst.ring; any valid lift is accepted
    (the induced map after base change to W_n is lift-independent).
    """
    red = src.ring.reduce_to(dst.ring)
    r = dst.ring
    fs = [r.one]
    for i in range(1, maxdeg + 1):
        rhs = r.mul(red(src.diff_elem(i)), fs[i - 1])
        a = dst.mult_matrix(dst.diff_elem(i))
        x = la.solve_left(a, np.array(rhs, dtype=np.int64), dst.p, dst.n)
        if x is None:
            raise ArithmeticError("comparison lift failed; towers incompatible")
        f = r.from_coeffs(x.tolist())
        assert r.mul(f, dst.diff_elem(i)) == rhs
        fs.append(f)
    return fs


@dataclass
class LevelComplex:
    """One level of the tower: tensor-structured data base-changed to W_n."""

    p: int
    n: int
    s: int
    delta: int
    maxdeg: int
    factors: list
    basis: dict            # degree -> list of multidegree tuples (len delta)
    reduced: FreeChainComplex

    def rank(self, i: int) -> int:
        return len(self.basis.get(i, []))

    def pi(self, i: int) -> tuple[int, ...]:
        return self.reduced.homology_at(i)

    def pi_graded(self) -> GradedModule:
        """Homotopy in the honest range 0..maxdeg."""
        inv = {i: self.reduced.homology_at(i) for i in range(self.maxdeg + 1)}
        return GradedModule(self.p, self.n, inv)


def multidegrees(delta: int, total: int):
    """All tuples (a_1..a_delta) of nonnegative ints summing to total."""
    if delta == 0:
        return [()] if total == 0 else []
    out = []
    for head in range(total + 1):
        for rest in multidegrees(delta - 1, total - head):
            out.append((head,) + rest)
    return sorted(out)


def build_reduced_tensor(p: int, n: int, exps, maxdeg: int,
                         s: int | None = None) -> LevelComplex:
    """Tensor of cyclic towers with exponents exps, base-changed to W_n.

    Computes the complex whose homology is Tor over W_n[prod Z/p^{e_j}]
    of the full quotient W_n against W_n.  Degrees run to maxdeg + 1 so
    homology at maxdeg is honest.
    """
    exps = list(exps)
    delta = len(exps)
    factors = [CyclicFactor(p, n, e) for e in exps]
    top = maxdeg + 1
    wn = make_ring(RingSpec(p, n))
    basis = {i: multidegrees(delta, i) for i in range(top + 1)}
    ranks = {i: len(basis[i]) for i in range(top + 1)}
    diffs = {}
    for i in range(1, top + 1):
        src, tgt = basis[i], basis[i - 1]
        tindex = {a: k for k, a in enumerate(tgt)}
        m = np.zeros((len(src), len(tgt)), dtype=np.int64)
        for row, a in enumerate(src):
            sign = 1
            for j in range(delta):
                if a[j] > 0:
                    b = a[:j] + (a[j] - 1,) + a[j + 1 :]
                    entry = factors[j].reduced_diff(a[j]) * sign
                    m[row, tindex[b]] = entry % wn.pn
                if a[j] % 2 == 1:
                    sign = -sign
        diffs[i] = Matrix.from_wn(wn, m)
    reduced = FreeChainComplex(wn, 0, top, ranks, diffs)
    return LevelComplex(p, n, s if s is not None else delta, delta,
                        maxdeg, factors, basis, reduced)


def build_level(p: int, n: int, s: int, delta: int, maxdeg: int) -> LevelComplex:
    """The level-n complex for the scenario (p, s, delta).

    The underlying object is the derived tensor product of the quotient
    by delta killed coordinates with W_n over W_n[(Z/p^n)^s], computed
    through the tensor of delta cyclic towers (the s - delta surviving
    coordinates contribute free factors concentrated in degree 0, which
    do not change the base-changed complex).
    """
    if not (0 <= delta <= s):
        raise ValueError("need 0 <= delta <= s")
    return build_reduced_tensor(p, n, [n] * delta, maxdeg, s=s)


def transition_matrices(src: LevelComplex, dst: LevelComplex) -> dict:
    """Degreewise W-matrices of the comparison map level src -> level dst.

    src.n must exceed dst.n.  The map is diagonal on the multidegree
    basis; the entry at a = (a_1..a_delta) is the product over factors
    of the augmented comparison lift in degree a_j, reduced to W_dst.
    """
    if src.n <= dst.n or src.delta != dst.delta or src.p != dst.p:
        raise ValueError("transition needs same shape and higher source level")
    lifts = [
        lift_factor_comparison(fs, fd, src.maxdeg + 1)
        for fs, fd in zip(src.factors, dst.factors)
    ]
    mats = {}
    for i in range(0, src.maxdeg + 2):
        diag = np.zeros((src.rank(i), dst.rank(i)), dtype=np.int64)
        tindex = {a: k for k, a in enumerate(dst.basis.get(i, []))}
        for row, a in enumerate(src.basis.get(i, [])):
            scalar = 1
            for j, aj in enumerate(a):
                scalar = (scalar * dst.factors[j].ring.augment_wn(lifts[j][aj]))
            diag[row, tindex[a]] = scalar % dst.reduced.ring.pn
        mats[i] = diag
    return mats


def check_transition_chain_map(src: LevelComplex, dst: LevelComplex,
                               mats: dict) -> bool:
    """The base-changed comparison commutes with the reduced differentials."""
    pn = dst.reduced.ring.pn
    for i in range(1, src.maxdeg + 2):
        left = (src.reduced.diff(i).to_wn() % pn @ mats[i - 1]) % pn
        right = (mats[i] @ dst.reduced.diff(i).to_wn()) % pn
        if left.shape != right.shape or (left != right).any():
            return False
    return True


# ------------------------------------------------------------------ limits


@dataclass
class DegreeLimit:
    """Inverse-limit analysis of one homotopy degree across levels."""

    degree: int
    level_invariants: list          # invariants of pi_i at each level
    image_invariants: list          # invariants of im(top -> level j), certified j
    certified_levels: list          # the level values n_j where images stabilized
    stable: bool
    stable_rank: int | None         # rank r if stable images are free W_l^r
    witness: str = ""


def _image_rows(src: LevelComplex, dst: LevelComplex, mats, i):
    """Image rows of pi_i(src) -> pi_i(dst), plus boundaries of dst."""
    cyc = src.reduced.cycle_rows(i)
    mapped = (cyc @ mats[i]) % dst.reduced.ring.pn
    bnd = dst.reduced.boundary_rows(i)
    return mapped, bnd


def limit_degree(levels: list, transitions: dict, i: int) -> DegreeLimit:
    """Stabilization analysis at degree i.

    levels: LevelComplex list, ascending level; transitions[(a, b)] for
    a > b gives the degreewise matrices (indices into the list).  A
    limit claim is emitted only for target levels where the images of
    the transition maps from the last two provided levels agree; the
    limit is pro-free of rank r when those certified stable images are
    free of the same rank r at every certified level.
    """
    level_inv = [lv.pi(i) for lv in levels]
    top = len(levels) - 1
    if top < 2:
        return DegreeLimit(i, level_inv, [], [], False, None,
                           "need at least three levels to certify stability")
    image_inv = []
    certified = []
    stable = True
    witness = ""
    for j in range(top - 1):
        rows_top, bnd = _image_rows(levels[top], levels[j],
                                    transitions[(top, j)], i)
        rows_prev, _ = _image_rows(levels[top - 1], levels[j],
                                   transitions[(top - 1, j)], i)
        p, nl = levels[j].p, levels[j].n
        if not la.span_eq_mod(rows_top, rows_prev, bnd, p, nl):
            stable = False
            witness = (
                f"images from levels {levels[top].n} and "
                f"{levels[top - 1].n} differ at level {levels[j].n}"
            )
            continue
        image_inv.append(la.subgroup_invariants(rows_top, bnd, p, nl))
        certified.append(levels[j].n)
    stable_rank = None
    if stable and image_inv:
        ranks = set()
        for inv, nl in zip(image_inv, certified):
            if any(e != nl for e in inv):
                stable = False
                witness = f"stable image at level {nl} is not free"
                break
            ranks.add(len(inv))
        if stable:
            if len(ranks) == 1:
                stable_rank = ranks.pop()
            else:
                stable = False
                witness = f"stable ranks disagree across levels: {sorted(ranks)}"
    return DegreeLimit(i, level_inv, image_inv, certified, stable,
                       stable_rank, witness)


def tate_product(a: tuple, b: tuple, p: int, n: int):
    """Structure constant for the divided-power product on the tower basis.

    Each factor degree decomposes as 2q + r; odd*odd in the same factor
    is zero, and even parts multiply with binomial coefficients.  Returns
    (coefficient mod p^n, result multidegree) or None for zero.
    """
    pn = p ** n
    coeff = 1
    out = []
    for aj, bj in zip(a, b):
        ra, rb = aj % 2, bj % 2
        if ra and rb:
            return None
        qa, qb = aj // 2, bj // 2
        coeff = (coeff * comb(qa + qb, qa)) % pn
        out.append(aj + bj)
    # Koszul sign from moving odd components of b past odd components of a
    exp = 0
    for j in range(len(a)):
        for l in range(j + 1, len(a)):
            exp += (b[j] % 2) * (a[l] % 2)
    if exp % 2:
        coeff = (-coeff) % pn
    return coeff, tuple(out)


def product_on_level(lv: LevelComplex, xa: np.ndarray, deg_a: int,
                     xb: np.ndarray, deg_b: int) -> np.ndarray:
    """Product of two cycles in tower coordinates (divided-power model)."""
    pn = lv.reduced.ring.pn
    out = np.zeros(lv.rank(deg_a + deg_b), dtype=np.int64)
    tgt = {m: k for k, m in enumerate(lv.basis.get(deg_a + deg_b, []))}
    for ia, a in enumerate(lv.basis.get(deg_a, [])):
        if xa[ia] == 0:
            continue
        for ib, b in enumerate(lv.basis.get(deg_b, [])):
            if xb[ib] == 0:
                continue
            t = tate_product(a, b, lv.p, lv.n)
            if t is None:
                continue
            coeff, m = t
            out[tgt[m]] = (out[tgt[m]] + coeff * xa[ia] * xb[ib]) % pn
    return out
