"""Koszul and cyclic resolutions, Tor with its graded product,
inverse-limit Tor, and exterior-algebra comparisons.

Power series are represented by degree truncation at a bound T carried
on the ring; every regularity or exactness statement derived from them
is certified "at truncation T" and the certificate records T.  Group
algebra quotients are converted to exact finite-local-ring arithmetic
whenever the relations match (1+X_i)^{p^m} - 1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from . import _wnlinalg as la
from . import towers
from .complexes import FreeChainComplex, GradedModule
from .rings import FiniteLocalRing, Matrix, RingSpec, make_ring
from .series import TruncatedPolyRing


class ResolutionError(ValueError):
    pass


@dataclass(frozen=True)
class RegularityCertificate:
    regular: bool
    trunc: int
    cutoff: int
    method: str
    witness: tuple | None = None

    def __bool__(self):
        return self.regular


@dataclass
class Resolution:
    """A complex of free S-modules augmented to the module it resolves."""

    ring: object
    complex: FreeChainComplex
    resolves: str
    known_exact: bool
    certificate: RegularityCertificate | None = None


# ---------------------------------------------------------------- Koszul


def _subsets(r: int, k: int):
    return list(itertools.combinations(range(r), k))


def koszul_complex(ring, elements, maxdeg=None) -> FreeChainComplex:
    """The exterior-algebra-shaped complex on the given ring elements.

    Degree-j basis is the sorted j-subsets of the elements;
    d(e_I) = sum over positions m of (-1)^m f_{I[m]} e_{I minus I[m]}.
    """
    r = len(elements)
    top = r if maxdeg is None else min(r, maxdeg)
    ranks = {j: comb(r, j) for j in range(top + 1)}
    diffs = {}
    for j in range(1, top + 1):
        src = _subsets(r, j)
        tgt = {s: i for i, s in enumerate(_subsets(r, j - 1))}
        ents = [[ring.zero] * len(tgt) for _ in src]
        for row, subset in enumerate(src):
            for m, idx in enumerate(subset):
                rest = subset[:m] + subset[m + 1 :]
                val = elements[idx]
                if m % 2 == 1:
                    val = ring.neg(val)
                col = tgt[rest]
                ents[row][col] = ring.add(ents[row][col], val)
        diffs[j] = Matrix.from_rows(ring, ents) if src else Matrix(
            ring, 0, len(tgt), []
        )
    return FreeChainComplex(ring, 0, top, ranks, diffs)


def expand_poly_matrix(m: Matrix) -> np.ndarray:
    """Expand a matrix over a truncated polynomial ring to W_n blocks."""
    ring = m.ring
    d = ring.dim
    out = np.zeros((m.rows * d, m.cols * d), dtype=np.int64)
    for i in range(m.rows):
        for j in range(m.cols):
            e = m[i, j]
            if e:
                out[i * d : (i + 1) * d, j * d : (j + 1) * d] = ring.mult_matrix(e)
    return out


def certify_regular(ring: TruncatedPolyRing, elements) -> RegularityCertificate:
    """Certificate that the elements form a regular sequence, at level
    (W_n, truncation T).

    Detection is by vanishing of degree-1 Koszul homology in coefficient
    degrees <= T - max deg(f); a failure is returned with an explicit
    kernel witness not accounted for by Koszul boundaries.  Homogeneous
    sequences of a common degree are checked slice by slice.
    """
    p, n = ring.p, ring.n
    for f in elements:
        if ring.is_unit(f):
            raise ResolutionError("element has unit constant term; "
                                  "not in the maximal ideal")
    if not elements:
        return RegularityCertificate(True, ring.trunc, ring.trunc, "empty")
    for k, f in enumerate(elements):
        if ring.is_zero(f):
            return RegularityCertificate(
                False, ring.trunc, ring.trunc, "zero-element",
                ((f"relation {k} is zero"),),
            )
    dmax = max(ring.degree_max(f) or 0 for f in elements)
    dmin = min(ring.degree_min(f) or 0 for f in elements)
    cutoff = ring.trunc - dmax
    if cutoff < dmin:
        raise ResolutionError(
            f"truncation {ring.trunc} too small to certify degree-{dmax} "
            "relations; raise it"
        )
    kos = koszul_complex(ring, list(elements), maxdeg=2)
    d1 = expand_poly_matrix(kos.diff(1))
    d2 = expand_poly_matrix(kos.diff(2)) if len(elements) >= 2 else np.zeros(
        (0, d1.shape[0]), dtype=np.int64
    )
    degs = np.array([sum(m) for m in ring.basis], dtype=np.int64)
    r = len(elements)
    homdegs = {ring.degree_min(f) for f in elements} | {
        ring.degree_max(f) for f in elements
    }
    homogeneous = len(homdegs) == 1
    if homogeneous:
        d = homdegs.pop()
        for c in range(0, cutoff + 1):
            rows1 = np.concatenate(
                [np.nonzero(degs == c)[0] + k * ring.dim for k in range(r)]
            )
            cols0 = np.nonzero(degs == c + d)[0]
            sub1 = d1[np.ix_(rows1, cols0)]
            ker = la.kernel(sub1, p, n)
            if not ker.size:
                continue
            rows2 = np.concatenate(
                [np.nonzero(degs == c - d)[0] + k * ring.dim
                 for k in range(comb(r, 2))]
            ) if c >= d else np.array([], dtype=np.int64)
            img = d2[np.ix_(rows2, rows1)] if rows2.size else np.zeros(
                (0, rows1.size), dtype=np.int64
            )
            ech = la.Echelon(img, p, n)
            for row in ker:
                if not ech.contains(row):
                    witness = np.zeros(r * ring.dim, dtype=np.int64)
                    witness[rows1] = row
                    return RegularityCertificate(
                        False, ring.trunc, cutoff, "graded-slice",
                        tuple(ring.from_vector(
                            witness[k * ring.dim : (k + 1) * ring.dim]
                        ).items() for k in range(r)),
                    )
        return RegularityCertificate(True, ring.trunc, cutoff, "graded-slice")
    # general path: full kernel, filtered at the cutoff
    ker = la.kernel(d1, p, n)
    low = np.concatenate(
        [np.nonzero(degs <= cutoff)[0] + k * ring.dim for k in range(r)]
    )
    high = np.setdiff1d(np.arange(r * ring.dim), low)
    perm = np.concatenate([high, low])
    ech_perm = la.Echelon(ker[:, perm], p, n)
    img = la.Echelon(d2, p, n)
    nhigh = high.size
    for row in ech_perm.rows:
        if row[:nhigh].any():
            continue  # supported above the certification cutoff
        v = np.zeros(r * ring.dim, dtype=np.int64)
        v[perm] = row
        if not img.contains(v):
            return RegularityCertificate(
                False, ring.trunc, cutoff, "filtration",
                tuple(ring.from_vector(
                    v[k * ring.dim : (k + 1) * ring.dim]
                ).items() for k in range(r)),
            )
    return RegularityCertificate(True, ring.trunc, cutoff, "filtration")


def koszul(ring: TruncatedPolyRing, elements, maxdeg=None) -> Resolution:
    """Koszul resolution of S/(elements); requires a regular sequence.

    Raises ResolutionError with the first nonzero degree-1 Koszul
    homology witness when the sequence is not certified regular.
    """
    cert = certify_regular(ring, list(elements))
    if not cert.regular:
        raise ResolutionError(
            "sequence not regular at truncation "
            f"{cert.trunc} (degree-1 Koszul homology witness: {cert.witness})"
        )
    cx = koszul_complex(ring, list(elements), maxdeg=maxdeg)
    return Resolution(ring, cx, f"S/(ideal on {len(elements)} elements)",
                      True, cert)


# ---------------------------------------------------------------- cyclic


def cyclic_resolution(p: int, n: int, e: int, maxdeg: int) -> Resolution:
    """The 2-periodic resolution of W_n over W_n[Z/p^e].

    Differentials alternate sigma - 1 and the norm; exactness holds
    because each annihilator equals the next image, which is verified
    on the W_n expansion at construction.
    """
    if e < 1:
        raise ResolutionError("need e >= 1")
    factor = towers.CyclicFactor(p, n, e)
    ring = factor.ring
    m_s = factor.mult_matrix(factor.sigma_minus_one)
    m_n = factor.mult_matrix(factor.norm)
    ann_s = la.kernel(m_s, p, n)
    ann_n = la.kernel(m_n, p, n)
    ok = (
        la.span_eq_mod(ann_s, m_n, np.zeros((0, ring.size), np.int64), p, n)
        and la.span_eq_mod(ann_n, m_s, np.zeros((0, ring.size), np.int64), p, n)
    )
    if not ok:
        raise ResolutionError("periodic complex failed exactness check")
    cx = factor.resolution_complex(maxdeg)
    return Resolution(ring, cx, "W_n over the cyclic group algebra", True)


# ---------------------------------------------------------------- modules


@dataclass(frozen=True)
class QuotientModule:
    """S/(elements); over a truncated polynomial ring."""

    elements: tuple


@dataclass(frozen=True)
class RingModule:
    """S as a module over itself."""


@dataclass(frozen=True)
class ResidueModule:
    """W_n via the augmentation (variables to 0, group elements to 1)."""


def _poly_action_data(ring: TruncatedPolyRing, module):
    """(ngens, relations, entry_matrix) realization over W_n."""
    if isinstance(module, ResidueModule):
        return 1, np.zeros((0, 1), np.int64), \
            lambda f: np.array([[ring.constant_term(f)]], dtype=np.int64)
    if isinstance(module, RingModule):
        return ring.dim, np.zeros((0, ring.dim), np.int64), ring.mult_matrix
    if isinstance(module, QuotientModule):
        rel = np.vstack([
            ring.mult_matrix(g) for g in module.elements
        ]) if module.elements else np.zeros((0, ring.dim), np.int64)
        return ring.dim, rel, ring.mult_matrix
    raise ResolutionError(f"no realization for module {module!r}")


def _resolve_poly(ring: TruncatedPolyRing, module, maxdeg):
    if isinstance(module, RingModule):
        from .complexes import unit_complex
        return Resolution(ring, unit_complex(ring), "S", True)
    if isinstance(module, ResidueModule):
        vars_ = [ring.variable(i) for i in range(ring.nvars)]
        return koszul(ring, vars_, maxdeg=maxdeg)
    if isinstance(module, QuotientModule):
        return koszul(ring, list(module.elements), maxdeg=maxdeg)
    raise ResolutionError(f"no resolution strategy for {module!r}")


def tor_poly(ring: TruncatedPolyRing, m_mod, n_mod, maxdeg: int):
    """Tor_i^S(M, N) for i <= maxdeg over a truncated polynomial ring.

    M must admit a Koszul resolution (quotient by a certified regular
    sequence, the residue module, or S itself); N may be any of the
    three module kinds.
    """
    res = _resolve_poly(ring, m_mod, maxdeg + 1)
    cx = res.complex
    ngens, rel, act = _poly_action_data(ring, n_mod)
    from .presented import PresentedWnComplex
    top = min(cx.hi, maxdeg + 1)
    ngens_d = {i: cx.rank(i) * ngens for i in range(0, top + 1)}
    rels = {}
    diffs = {}
    for i in range(0, top + 1):
        if rel.size:
            blocks = [np.zeros((rel.shape[0], ngens), np.int64)] * cx.rank(i)
            rows = []
            for b in range(cx.rank(i)):
                row = np.zeros((rel.shape[0], cx.rank(i) * ngens), np.int64)
                row[:, b * ngens : (b + 1) * ngens] = rel
                rows.append(row)
            rels[i] = np.vstack(rows) if rows else np.zeros(
                (0, ngens_d[i]), np.int64
            )
        if i >= 1:
            d = cx.diff(i)
            big = np.zeros((d.rows * ngens, d.cols * ngens), dtype=np.int64)
            for a in range(d.rows):
                for b in range(d.cols):
                    e = d[a, b]
                    if not ring.is_zero(e):
                        big[a * ngens : (a + 1) * ngens,
                            b * ngens : (b + 1) * ngens] = act(e)
            diffs[i] = big
    pres = PresentedWnComplex(ring.p, ring.n, 0, top, ngens_d, diffs, rels)
    inv = {i: pres.homology_at(i) for i in range(0, maxdeg + 1)}
    return GradedModule(ring.p, ring.n, inv), res, pres


def tor_group_algebra(spec: RingSpec, killed: int, maxdeg: int) -> GradedModule:
    """Tor_i over W_n[Delta] of (quotient by the last `killed` cyclic
    factors, W_n), computed through the tensor of cyclic towers."""
    exps = spec.exponents
    if killed > len(exps):
        raise ResolutionError("cannot kill more factors than exist")
    lv = towers.build_reduced_tensor(
        spec.p, spec.n, exps[len(exps) - killed :], maxdeg
    )
    return lv.pi_graded()


# ---------------------------------------------------------------- Tor algebra


@dataclass
class TorAlgebra:
    """Graded Tor module with its Koszul-induced graded product.

    Classes are cycle vectors in the reduced Koszul coordinates
    N^{C(r, i)}; the product is the exterior product with coefficient
    multiplication in N.
    """

    p: int
    n: int
    maxdeg: int
    nfactors: int
    invariants: dict
    cycles: dict
    boundaries: dict
    coeff_mul: object          # (vector_a, vector_b) -> W_n scalar mult rule
    subsets: dict

    def graded(self) -> GradedModule:
        return GradedModule(self.p, self.n, dict(self.invariants))

    def product(self, xa, deg_a, xb, deg_b):
        """Exterior product of cycle vectors (coefficients in W_n)."""
        pn = self.p ** self.n
        src_a = self.subsets[deg_a]
        src_b = self.subsets[deg_b]
        tgt = {s: i for i, s in enumerate(self.subsets[deg_a + deg_b])}
        out = np.zeros(len(tgt), dtype=np.int64)
        for ia, sa in enumerate(src_a):
            if xa[ia] == 0:
                continue
            for ib, sb in enumerate(src_b):
                if xb[ib] == 0 or set(sa) & set(sb):
                    continue
                merged = tuple(sorted(sa + sb))
                inversions = sum(
                    1 for x in sa for y in sb if x > y
                )
                sign = -1 if inversions % 2 else 1
                out[tgt[merged]] = (
                    out[tgt[merged]] + sign * xa[ia] * xb[ib]
                ) % pn
        return out


def tor_algebra(ring: TruncatedPolyRing, elements, maxdeg: int) -> TorAlgebra:
    """Tor_*^S(S/(elements), W_n) as a graded ring via the Koszul model."""
    graded, res, pres = tor_poly(
        ring, QuotientModule(tuple(elements)), ResidueModule(), maxdeg
    )
    r = len(elements)
    cycles = {}
    boundaries = {}
    subsets = {i: _subsets(r, i) for i in range(maxdeg + 2)}
    for i in range(maxdeg + 1):
        cycles[i] = pres.cycle_rows(i)
        boundaries[i] = pres.boundary_rows(i)
    return TorAlgebra(ring.p, ring.n, maxdeg, r, dict(graded.invariants),
                      cycles, boundaries, None, subsets)


# -------------------------------------------------------- exterior compare


@dataclass
class ExteriorComparison:
    isomorphic: bool
    delta: int
    generators: list | None
    product_table: dict | None
    failure: str = ""


def minimal_class_generators(cycles, boundaries, p, n):
    """A generating set of H = cycles/boundaries chosen greedily."""
    pn = p ** n
    gens = []
    current = boundaries
    ech = la.Echelon(current, p, n)
    for row in cycles:
        if not ech.contains(row):
            gens.append(row % pn)
            current = np.vstack([current, row.reshape(1, -1)])
            ech = la.Echelon(current, p, n)
    return gens


def exterior_compare(alg: TorAlgebra, delta: int) -> ExteriorComparison:
    """Compare a TorAlgebra with the exterior algebra on delta degree-1
    generators over W_n; returns an explicit matching or a counterexample.
    """
    p, n = alg.p, alg.n
    for i in range(alg.maxdeg + 1):
        want = comb(delta, i)
        inv = alg.invariants.get(i, ())
        if len(inv) != want or any(e != n for e in inv):
            return ExteriorComparison(
                False, delta, None, None,
                f"degree {i}: invariants {inv}, expected free of rank {want}",
            )
    if delta == 0:
        return ExteriorComparison(True, 0, [], {})
    gens = minimal_class_generators(alg.cycles.get(1, np.zeros((0, 0), np.int64)),
                                    alg.boundaries[1], p, n)
    if len(gens) != delta:
        return ExteriorComparison(
            False, delta, None, None,
            f"degree 1 needs exactly {delta} generators, found {len(gens)}",
        )
    table = {}
    for i in range(2, alg.maxdeg + 1):
        prods = []
        for subset in itertools.combinations(range(delta), i):
            v = gens[subset[0]]
            deg = 1
            for idx in subset[1:]:
                v = alg.product(v, deg, gens[idx], 1)
                deg += 1
            prods.append(v)
            table[subset] = v
        if not prods:
            continue  # rank check above already forced H_i = 0
        rows = la.as_array(prods, len(prods[0]))
        got = la.subgroup_invariants(rows, alg.boundaries[i], p, n)
        if list(got) != [n] * comb(delta, i):
            return ExteriorComparison(
                False, delta, gens, None,
                f"degree {i}: products of generators span {got}, "
                f"expected free of rank {comb(delta, i)}",
            )
        full = la.span_eq_mod(np.vstack([rows, alg.boundaries[i]]),
                              np.vstack([alg.cycles[i], alg.boundaries[i]]),
                              alg.boundaries[i], p, n)
        if not full:
            return ExteriorComparison(
                False, delta, gens, None,
                f"degree {i} is not generated by degree-1 classes",
            )
    bnd2 = alg.boundaries.get(2)
    ech2 = la.Echelon(bnd2, p, n) if bnd2 is not None and alg.maxdeg >= 2 \
        else None
    if ech2 is not None:
        for a in range(delta):
            sq = alg.product(gens[a], 1, gens[a], 1)
            if not ech2.contains(sq):
                return ExteriorComparison(
                    False, delta, gens, None,
                    f"generator {a} does not square to zero",
                )
            for b in range(a + 1, delta):
                anti = (alg.product(gens[a], 1, gens[b], 1)
                        + alg.product(gens[b], 1, gens[a], 1)) % p ** n
                if not ech2.contains(anti):
                    return ExteriorComparison(
                        False, delta, gens, None,
                        f"generators {a}, {b} do not anticommute",
                    )
    for a in range(delta):
        table[(a,)] = gens[a]
    return ExteriorComparison(True, delta, gens, table)


# -------------------------------------------------- exterior compatibility


def exterior_compat_check(raising, lowering, dims, pairing, p, n,
                          reconstruct=True):
    """Check the degree-mixing identity for a raising action of V and a
    lowering action of V* on a graded free W_n-module.

    raising[a][i]: matrix M_i -> M_{i+1} for basis vector a of V;
    lowering[b][i]: matrix M_i -> M_{i-1}; dims[i] = rank of M_i;
    pairing[a][b] in W_n.  Checks v* (v m) + v (v* m) = <v, v*> m on
    every degree and basis vector; when the module is generated over
    the exterior algebra in minimal degree, also reconstructs the
    lowering action from the identity and compares.
    """
    pn = p ** n
    degrees = sorted(dims)
    dimv = len(raising)

    def mat(table, a, i, dsrc, ddst):
        m = table[a].get(i)
        if m is None:
            return np.zeros((dsrc, ddst), dtype=np.int64)
        return np.asarray(m, dtype=np.int64) % pn

    for i in degrees:
        di = dims[i]
        if di == 0:
            continue
        for a in range(dimv):
            for b in range(dimv):
                up_then_down = (
                    mat(raising, a, i, di, dims.get(i + 1, 0))
                    @ mat(lowering, b, i + 1, dims.get(i + 1, 0), di)
                ) % pn
                down_then_up = (
                    mat(lowering, b, i, di, dims.get(i - 1, 0))
                    @ mat(raising, a, i - 1, dims.get(i - 1, 0), di)
                ) % pn
                want = (pairing[a][b] * np.eye(di, dtype=np.int64)) % pn
                if ((up_then_down + down_then_up) % pn != want).any():
                    return False, (
                        f"identity fails in degree {i} for v_{a}, v*_{b}"
                    )
    if not reconstruct:
        return True, None
    # reconstruction: assume generation in minimal degree, rebuild lowering
    lowest = degrees[0]
    rebuilt = [dict() for _ in range(dimv)]
    for b in range(dimv):
        rebuilt[b][lowest] = np.zeros((dims[lowest], dims.get(lowest - 1, 0)),
                                      dtype=np.int64)
    for i in degrees:
        if i == lowest or dims[i] == 0:
            continue
        stacked = np.vstack([
            mat(raising, a, i - 1, dims.get(i - 1, 0), dims[i])
            for a in range(dimv)
        ])
        coeffs = la.solve_left(stacked, np.eye(dims[i], dtype=np.int64), p, n)
        if coeffs is None:
            return True, "not generated in minimal degree; reconstruction skipped"
        for b in range(dimv):
            out = np.zeros((dims[i], dims.get(i - 1, 0)), dtype=np.int64)
            for a in range(dimv):
                block = coeffs[:, a * dims[i - 1] : (a + 1) * dims[i - 1]]
                # v*_b (v_a m) = <a,b> m - v_a (v*_b m)
                term1 = (pairing[a][b] * block) % pn
                term2 = (block @ rebuilt[b].get(
                    i - 1, np.zeros((dims[i - 1], dims.get(i - 2, 0)), np.int64)
                ) @ mat(raising, a, i - 2, dims.get(i - 2, 0),
                        dims.get(i - 1, 0))) % pn
                out = (out + term1 - term2) % pn
            rebuilt[b][i] = out % pn
            given = mat(lowering, b, i, dims[i], dims.get(i - 1, 0))
            if (out % pn != given).any():
                return False, f"reconstructed lowering differs in degree {i}"
    return True, None


# ---------------------------------------------------------------- limits


@dataclass
class LimitTorReport:
    p: int
    s: int
    delta: int
    levels: list
    maxdeg: int
    degree_limits: list
    per_level_invariants: dict
    stable: bool
    limit_ranks: list | None

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "s": self.s,
            "delta": self.delta,
            "levels": list(self.levels),
            "maxdeg": self.maxdeg,
            "stable": self.stable,
            "limit_ranks": self.limit_ranks,
            "per_level": {
                str(n): {str(i): list(v) for i, v in inv.items()}
                for n, inv in self.per_level_invariants.items()
            },
            "witnesses": [d.witness for d in self.degree_limits if d.witness],
        }


def limit_tor(p: int, s: int, delta: int, levels, maxdeg: int) -> LimitTorReport:
    """Inverse limit of Tor over the tower of group-algebra quotients.

    Builds, for each level n, the complex computing Tor over
    W_n[(Z/p^n)^s] of the quotient by delta coordinates against W_n,
    with honest comparison lifts between levels; reports per-level
    invariants, image stabilization, and the limit ranks when certified.
    """
    levels = sorted(levels)
    if len(set(levels)) != len(levels):
        raise ValueError("levels must be distinct")
    lvs = [towers.build_level(p, n, s, delta, maxdeg) for n in levels]
    trans = {}
    for a in range(len(lvs)):
        for b in range(a):
            t = towers.transition_matrices(lvs[a], lvs[b])
            if not towers.check_transition_chain_map(lvs[a], lvs[b], t):
                raise ResolutionError("transition maps do not commute")
            trans[(a, b)] = t
    # composition law on homology: top->bottom equals the two-step route
    if len(lvs) >= 3:
        for i in range(maxdeg + 1):
            direct = trans[(len(lvs) - 1, 0)][i]
            via = (trans[(len(lvs) - 1, 1)][i] @ trans[(1, 0)][i]) \
                % lvs[0].reduced.ring.pn
            if (direct != via).any():
                raise ResolutionError(
                    "transition composition law fails on homology"
                )
    degree_limits = [towers.limit_degree(lvs, trans, i)
                     for i in range(maxdeg + 1)]
    per_level = {
        lv.n: {i: lv.pi(i) for i in range(maxdeg + 1)} for lv in lvs
    }
    stable = all(d.stable for d in degree_limits)
    ranks = [d.stable_rank for d in degree_limits] if stable else None
    return LimitTorReport(p, s, delta, levels, maxdeg, degree_limits,
                          per_level, stable, ranks)
