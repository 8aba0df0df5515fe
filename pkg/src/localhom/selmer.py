"""Local condition lifts, the cone complex computing cohomology with
local conditions, and the chain-level duality pairing.

A condition lift realizes subgroups of local cohomology at the cochain
level, subject to four machine-checked axioms: closure under the
differential, conjugation invariance, the quotient complex computing
H^*/L, and (against a dual lift) cup products into degree 3 vanishing
at the chain level.  The pairing follows the explicit recipe: lift the
place witnesses, set eps_v = dy_v + x_v, choose a global z with
dz = x cup x', form (y_v cup x'_v) - (eps_v cup y'_v) + z_v, and take
the sum of local invariants.

Invariant functionals are caller-supplied linear functionals on local
2-cocycles vanishing on coboundaries.  For the sum of invariants to be
independent of the choice of z, the family must vanish on restrictions
of global 2-cocycles; this reciprocity property is validated whenever a
pairing is requested, and mirrored place pairs (same local data,
opposite invariants) provide synthetic families satisfying it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import _wnlinalg as la
from .groupcoh import (
    BilinearPairing,
    Cochain,
    CochainComplex,
    FiniteGroup,
    GModule,
    GroupHom,
    cochain_complex,
    cup,
)
from .presented import PresentedWnComplex


class SelmerError(ValueError):
    pass


def restriction_matrix(hom: GroupHom, degree: int, m: int) -> np.ndarray:
    """Matrix of the pullback C^degree(G, M) -> C^degree(H, M)."""
    gsize = hom.target.order
    hsize = hom.source.order
    rows = gsize ** degree * m
    cols = hsize ** degree * m
    out = np.zeros((rows, cols), dtype=np.int64)
    for tup in itertools.product(range(hsize), repeat=degree):
        gidx = 0
        hidx = 0
        for x in tup:
            gidx = gidx * gsize + hom(x)
            hidx = hidx * hsize + x
        for j in range(m):
            out[gidx * m + j, hidx * m + j] = 1
    return out


def conjugation_apply(module: GModule, g: int, rows: np.ndarray,
                      degree: int) -> np.ndarray:
    """Apply the conjugation action to many cochain rows at once."""
    grp = module.group
    if rows.size == 0:
        return rows
    count = grp.order ** degree
    perm = np.zeros(count, dtype=np.int64)
    for idx, tup in enumerate(itertools.product(range(grp.order),
                                                repeat=degree)):
        cidx = 0
        for x in tup:
            cidx = cidx * grp.order + grp.conjugate(g, x)
        perm[idx] = cidx
    shaped = rows.reshape(rows.shape[0], count, module.m)
    gathered = shaped[:, perm, :]
    acted = np.einsum("rtj,jl->rtl", gathered, module.act_mat(g)) % module.pn
    return acted.reshape(rows.shape[0], count * module.m)


class InvariantFunctional:
    """A linear functional on local 2-cocycles vanishing on coboundaries."""

    def __init__(self, cx: CochainComplex, vec):
        self.cx = cx
        self.module = cx.module
        self.vec = np.asarray(vec, dtype=np.int64) % self.module.pn
        d1 = cx.diff_matrix(1)
        bad = (d1 @ self.vec) % self.module.pn
        rel = cx.pres.rel(-2)
        if bad.any() or (rel.size and ((rel @ self.vec) % self.module.pn).any()):
            raise SelmerError("functional does not vanish on coboundaries")

    def __call__(self, c: Cochain) -> int:
        if c.degree != 2:
            raise SelmerError("invariant functionals take 2-cochains")
        return int((c.vec @ self.vec) % self.module.pn)

    def negate(self) -> "InvariantFunctional":
        return InvariantFunctional(self.cx, (-self.vec) % self.module.pn)


def construct_invariant(cx: CochainComplex) -> InvariantFunctional:
    """An invariant functional restricting to an isomorphism on a cyclic
    H^2 summand of maximal order.

    Solves for all functionals killing coboundaries (a splitting of the
    2-cocycles) and picks the one with image of maximal order in W_n.
    """
    m = cx.module
    d1 = cx.diff_matrix(1)
    rel = cx.pres.rel(-2)
    constraints = np.vstack([d1, rel]) if rel.size else d1
    candidates = la.kernel(constraints.T % m.pn, m.p, m.n)
    if not candidates.size:
        raise SelmerError("no nonzero functional on 2-cocycles exists")
    cocycles = cx.cocycles(2)
    best, best_order = None, -1
    for cand in candidates:
        vals = (cocycles @ cand) % m.pn
        order = 0
        nz = vals[vals != 0]
        if nz.size:
            order = int((m.n - la.valuations(nz, m.p, m.n)).max())
        if order > best_order:
            best, best_order = cand, order
    if best_order <= 0:
        raise SelmerError("H^2 vanishes; no nondegenerate functional")
    return InvariantFunctional(cx, best)


@dataclass
class Place:
    """One local place: a group mapping to the global group, with the
    restricted module, dual data, and cochain complexes through maxdeg."""

    label: str
    hom: GroupHom
    module: GModule
    cx: CochainComplex
    dual_module: GModule | None = None
    dual_cx: CochainComplex | None = None
    local_pairing: BilinearPairing | None = None
    target_cx: CochainComplex | None = None
    inv: InvariantFunctional | None = None


def make_place(label: str, hom: GroupHom, global_module: GModule,
               maxdeg: int, with_dual: bool = True,
               inv="auto") -> Place:
    mv = global_module.restrict_along(hom)
    cx = cochain_complex(hom.source, mv, maxdeg)
    place = Place(label, hom, mv, cx)
    if with_dual:
        dual, pairing = mv.dual()
        place.dual_module = dual
        place.dual_cx = cochain_complex(hom.source, dual, maxdeg)
        place.local_pairing = pairing
        place.target_cx = cochain_complex(hom.source, pairing.m3, maxdeg)
        if inv == "auto":
            place.inv = construct_invariant(place.target_cx)
        elif isinstance(inv, InvariantFunctional):
            place.inv = inv
    return place


def mirrored_places(label: str, hom: GroupHom, global_module: GModule,
                    maxdeg: int) -> tuple[Place, Place]:
    """Two copies of a place with opposite invariant functionals, so
    that the family satisfies reciprocity on global classes."""
    a = make_place(label + "+", hom, global_module, maxdeg, inv="auto")
    b = make_place(label + "-", hom, global_module, maxdeg, inv=None)
    b.inv = a.inv.negate()
    return a, b


def _canonicalize_rows(rows: np.ndarray, module: GModule) -> np.ndarray:
    """Reduce cochain rows to canonical values mod the divisor lattice."""
    if rows.size == 0:
        return rows
    out = rows.copy()
    for j in range(module.m):
        out[:, j :: module.m] %= module.p ** module.exponents[j]
    return out


def _nonzero_rows(rows: np.ndarray) -> np.ndarray:
    if rows.size == 0:
        return rows
    return rows[rows.any(axis=1)]


@dataclass
class ConditionLift:
    """A chain-level lift of local conditions at one place.

    spans[i] has rows spanning C^i_L inside the cochain coordinates;
    declared[i] has cocycle rows spanning the target subgroup of H^i.
    Degrees not present default to the zero subgroup.
    """

    place: Place
    dual: bool = False
    spans: dict = field(default_factory=dict)
    declared: dict = field(default_factory=dict)

    def __post_init__(self):
        cxm = self.complex().module
        self.spans = {
            i: _canonicalize_rows(la.as_array(v, self.size(i)), cxm)
            for i, v in self.spans.items()
        }
        self.declared = {
            i: la.as_array(v, self.size(i)) for i, v in self.declared.items()
        }
        self._ech = {}

    def complex(self) -> CochainComplex:
        return self.place.dual_cx if self.dual else self.place.cx

    def size(self, i: int) -> int:
        cx = self.complex()
        return cx.module.group.order ** i * cx.module.m

    def span(self, i: int) -> np.ndarray:
        return self.spans.get(i, np.zeros((0, self.size(i)), dtype=np.int64))

    def declared_at(self, i: int) -> np.ndarray:
        return self.declared.get(i, np.zeros((0, self.size(i)), dtype=np.int64))

    def span_is_full(self, i: int) -> bool:
        s = self.span(i)
        return s.shape[0] >= self.size(i) and \
            (s[: self.size(i)] == np.eye(self.size(i), dtype=np.int64)).all()

    def _echelon(self, i: int) -> la.Echelon:
        if i not in self._ech:
            cx = self.complex()
            rows = np.vstack([self.span(i), _nonzero_rows(cx.pres.rel(-i))])
            self._ech[i] = la.Echelon(rows, cx.module.p, cx.module.n)
        return self._ech[i]

    def member(self, i: int, vec: np.ndarray) -> bool:
        return self._echelon(i).contains(vec)

    def member_rows(self, i: int, rows: np.ndarray) -> bool:
        ech = self._echelon(i)
        return all(ech.contains(r) for r in rows)


def full_lift(place: Place, maxdeg: int, dual: bool = False) -> ConditionLift:
    """C_L = C with declared subgroups all of H (the trivial dual pair)."""
    cx = place.dual_cx if dual else place.cx
    spans = {i: np.eye(cx.module.group.order ** i * cx.module.m,
                       dtype=np.int64) for i in range(maxdeg + 1)}
    declared = {i: cx.cocycles(i) for i in range(maxdeg)}
    return ConditionLift(place, dual, spans, declared)


def zero_lift(place: Place, maxdeg: int, dual: bool = False) -> ConditionLift:
    """C_L = 0 with declared subgroups zero."""
    return ConditionLift(place, dual, {}, {})


def example_unramified_lift(place: Place, l_rows, pairing_values=None
                            ) -> tuple[ConditionLift, ConditionLift]:
    """The generalized-unramified lift for a subgroup l of H^1.

    C^0_L is everything, C^1_L is the cocycles with class in l, higher
    degrees vanish; declared subgroups are (H^0, l, 0, ...).  The dual
    lift carries the annihilator l-perp under the local H^1 pairing
    inv(a cup b), or under supplied pairing_values(arow, brow).
    """
    cx = place.cx
    if place.dual_cx is None:
        raise SelmerError("dual data required for the unramified pair")
    m = cx.module
    l_rows = la.as_array(l_rows, m.group.order * m.m)
    for row in l_rows:
        if not cx.d(Cochain(m, 1, row)).is_zero_mod_divisors():
            raise SelmerError("l must be spanned by 1-cocycles")
    spans = {
        0: np.eye(m.m, dtype=np.int64),
        1: np.vstack([cx.coboundaries(1), l_rows]),
    }
    declared = {0: cx.cocycles(0), 1: l_rows}
    lift = ConditionLift(place, False, spans, declared)

    if pairing_values is None:
        if place.inv is None:
            raise SelmerError("no pairing available to compute l-perp")

        def pairing_values(arow, brow):
            a = Cochain(place.module, 1, arow)
            b = Cochain(place.dual_module, 1, brow)
            return place.inv(cup(a, b, place.local_pairing))

    dual_cx = place.dual_cx
    dm = dual_cx.module
    zdual = dual_cx.cocycles(1)
    if l_rows.size and zdual.size:
        w = np.zeros((zdual.shape[0], l_rows.shape[0]), dtype=np.int64)
        for jj, brow in enumerate(zdual):
            for kk, arow in enumerate(l_rows):
                w[jj, kk] = pairing_values(arow, brow)
        coeff = la.kernel(w % dm.pn, dm.p, dm.n)
        perp = (coeff @ zdual) % dm.pn
    else:
        perp = zdual
    dual_spans = {
        0: np.eye(dm.m, dtype=np.int64),
        1: np.vstack([dual_cx.coboundaries(1), perp]),
    }
    dual_declared = {0: dual_cx.cocycles(0), 1: perp}
    dual_lift = ConditionLift(place, True, dual_spans, dual_declared)
    return lift, dual_lift


# ----------------------------------------------------------------- axioms


@dataclass
class AxiomReport:
    failures: list

    def ok(self) -> bool:
        return not self.failures


def quotient_complex(lift: ConditionLift, maxdeg: int) -> PresentedWnComplex:
    """C^*(G_v, M)/C^*_L as a presented complex (chain degrees -i)."""
    cx = lift.complex()
    m = cx.module
    ngens = {-i: lift.size(i) for i in range(maxdeg + 1)}
    rels = {
        -i: np.vstack([_nonzero_rows(cx.pres.rel(-i)), lift.span(i)])
        for i in range(maxdeg + 1)
    }
    diffs = {-i: cx.diff_matrix(i) for i in range(maxdeg)}
    return PresentedWnComplex(m.p, m.n, -maxdeg, 0, ngens, diffs, rels)


def check_axioms(lift: ConditionLift, dual_lift: ConditionLift | None = None
                 ) -> AxiomReport:
    """Machine-check the lift axioms; the report lists every failure."""
    cx = lift.complex()
    m = cx.module
    maxdeg = cx.maxdeg
    failures = []
    for i in range(maxdeg):
        if lift.span_is_full(i) and lift.span_is_full(i + 1):
            continue
        span = lift.span(i)
        if span.size:
            images = (span @ cx.diff_matrix(i)) % m.pn
            if not lift.member_rows(i + 1, images):
                failures.append(f"(i) d does not preserve the lift in "
                                f"degree {i}")
    for i in range(maxdeg + 1):
        if lift.span_is_full(i):
            continue
        span = lift.span(i)
        if not span.size:
            continue
        for g in m.group.elements():
            moved = conjugation_apply(m, g, span, i)
            if not lift.member_rows(i, moved):
                failures.append(
                    f"(ii) conjugation by {g} moves the lift in degree {i}"
                )
                break
    if any(f.startswith("(i)") for f in failures):
        failures.append("(iii) skipped: the quotient complex is not defined "
                        "until (i) holds")
        return AxiomReport(failures)
    q = quotient_complex(lift, maxdeg)
    for i in range(maxdeg):
        zc = cx.cocycles(i)
        bq = q.boundary_rows(-i)
        zq = q.cycle_rows(-i)
        if not la.span_eq_mod(np.vstack([zc, bq]), np.vstack([zq, bq]), bq,
                              m.p, m.n):
            failures.append(f"(iii) H^{i}(C) -> H^{i}(C/C_L) not surjective")
        coeff = la.preimage(zc, bq, m.p, m.n)
        kernel_rows = (coeff @ zc) % m.pn
        bc = cx.coboundaries(i)
        if not la.span_eq_mod(kernel_rows,
                              np.vstack([lift.declared_at(i), bc]), bc,
                              m.p, m.n):
            failures.append(
                f"(iii) kernel of H^{i}(C) -> H^{i}(C/C_L) differs from the "
                f"declared subgroup in degree {i}"
            )
    if dual_lift is not None:
        pairing = lift.place.local_pairing
        if pairing is None:
            failures.append("(iv) no local pairing supplied")
        else:
            dm = dual_lift.complex().module
            for i in range(0, 4):
                if i > maxdeg or 3 - i > maxdeg:
                    continue
                for row in lift.span(i):
                    a = Cochain(m, i, row)
                    for row2 in dual_lift.span(3 - i):
                        b = Cochain(dm, 3 - i, row2)
                        if not cup(a, b, pairing).is_zero_mod_divisors():
                            failures.append(
                                f"(iv) cup C^{i}_L x C^{3 - i}_Lperp is "
                                "nonzero at the chain level"
                            )
    return AxiomReport(failures)


# ------------------------------------------------------------------- cone


@dataclass
class SelmerData:
    """Global (G, M, maxdeg) with per-place condition lifts (one side)."""

    group: FiniteGroup
    module: GModule
    maxdeg: int
    places: list
    lifts: list
    check: bool = True

    def __post_init__(self):
        self.cx = cochain_complex(self.group, self.module, self.maxdeg)
        if len(self.places) != len(self.lifts):
            raise SelmerError("need one lift per place")
        for place, lift in zip(self.places, self.lifts):
            if lift.place is not place:
                raise SelmerError("lift list must match the place list")
            if lift.complex().module.exponents != self.module.exponents:
                raise SelmerError("lift module does not match the global one")
        if self.check:
            for k, lift in enumerate(self.lifts):
                rep = check_axioms(lift)
                if not rep.ok():
                    raise SelmerError(
                        f"axioms fail at place {self.places[k].label}: "
                        + "; ".join(rep.failures)
                    )
        self._res_mats = {
            t: [restriction_matrix(pl.hom, t, self.module.m)
                for pl in self.places]
            for t in range(self.maxdeg + 1)
        }
        self._cone = None

    # -- cone ------------------------------------------------------------

    def cone_sizes(self, t: int) -> list:
        sizes = [self.cx.pres.rank(-t)]
        for lift in self.lifts:
            sizes.append(lift.size(t - 1) if t >= 1 else 0)
        return sizes

    def cone_complex(self) -> PresentedWnComplex:
        if self._cone is not None:
            return self._cone
        m = self.module
        maxdeg = self.maxdeg
        ngens = {}
        rels = {}
        diffs = {}
        for t in range(maxdeg + 1):
            sizes = self.cone_sizes(t)
            ngens[-t] = sum(sizes)
            blocks = [_nonzero_rows(self.cx.pres.rel(-t))]
            for place, lift in zip(self.places, self.lifts):
                if t >= 1:
                    blocks.append(np.vstack([
                        _nonzero_rows(lift.complex().pres.rel(-(t - 1))),
                        lift.span(t - 1),
                    ]))
                else:
                    blocks.append(np.zeros((0, 0), dtype=np.int64))
            rels[-t] = _block_diag(blocks, sizes)
        for t in range(maxdeg):
            src_sizes = self.cone_sizes(t)
            tgt_sizes = self.cone_sizes(t + 1)
            d = np.zeros((sum(src_sizes), sum(tgt_sizes)), dtype=np.int64)
            gsize = src_sizes[0]
            d[:gsize, : tgt_sizes[0]] = (-self.cx.diff_matrix(t)) % m.pn
            off = tgt_sizes[0]
            for k in range(len(self.places)):
                d[:gsize, off : off + tgt_sizes[k + 1]] = self._res_mats[t][k]
                off += tgt_sizes[k + 1]
            soff = gsize
            for k, lift in enumerate(self.lifts):
                if t >= 1:
                    toff = tgt_sizes[0] + sum(tgt_sizes[1 : k + 1])
                    d[soff : soff + src_sizes[k + 1],
                      toff : toff + tgt_sizes[k + 1]] = \
                        lift.complex().diff_matrix(t - 1)
                soff += src_sizes[k + 1]
            diffs[-t] = d
        self._cone = PresentedWnComplex(m.p, m.n, -maxdeg, 0, ngens, diffs,
                                        rels)
        return self._cone

    def h_selmer(self, i: int) -> tuple:
        if i >= self.maxdeg:
            raise SelmerError("increase maxdeg to compute this degree")
        return self.cone_complex().homology_at(-i)

    def cone_cocycles(self, i: int) -> np.ndarray:
        return self.cone_complex().cycle_rows(-i)

    def cone_coboundaries(self, i: int) -> np.ndarray:
        return self.cone_complex().boundary_rows(-i)

    def unpack(self, t: int, vec: np.ndarray):
        sizes = self.cone_sizes(t)
        vec = np.asarray(vec, dtype=np.int64)
        x = vec[: sizes[0]]
        ys = []
        off = sizes[0]
        for s in sizes[1:]:
            ys.append(vec[off : off + s])
            off += s
        return x, ys

    def pack(self, t: int, x, ys) -> np.ndarray:
        parts = [np.asarray(x, dtype=np.int64)]
        parts.extend(np.asarray(y, dtype=np.int64) for y in ys)
        return np.concatenate(parts)


def _block_diag(blocks, sizes):
    total = sum(sizes)
    out = np.zeros((sum(b.shape[0] for b in blocks), total), dtype=np.int64)
    roff = 0
    coff = 0
    for b, s in zip(blocks, sizes):
        if b.size:
            out[roff : roff + b.shape[0], coff : coff + s] = b
        roff += b.shape[0]
        coff += s
    return out


# -------------------------------------------------------------------- LES


def les_report(data: SelmerData) -> list:
    """Exactness of the cone long exact sequence at every computable spot.

    Spots named H^t(M), +H^t(Q_v), H^{t+1}_L for t in the honest range;
    the maps are projection, restriction-to-quotient, and the connecting
    inclusion z_v -> (0, z_v).
    """
    m = data.module
    p, n = m.p, m.n
    cone = data.cone_complex()
    maxdeg = data.maxdeg
    quotients = [quotient_complex(lift, maxdeg) for lift in data.lifts]

    def q_rank(t):
        return sum(q.rank(-t) for q in quotients)

    def q_stack(t, extractor):
        rows = []
        for k, q in enumerate(quotients):
            z = extractor(q, t)
            full = np.zeros((z.shape[0], q_rank(t)), dtype=np.int64)
            off = sum(qq.rank(-t) for qq in quotients[:k])
            full[:, off : off + q.rank(-t)] = z
            rows.append(full)
        return np.vstack(rows) if rows else np.zeros((0, q_rank(t)), np.int64)

    def q_cycles(t):
        return q_stack(t, lambda q, tt: q.cycle_rows(-tt))

    def q_boundaries(t):
        return q_stack(t, lambda q, tt: q.boundary_rows(-tt))

    def res_to_q(t):
        return np.hstack(data._res_mats[t]) if data.places else np.zeros(
            (data.cx.pres.rank(-t), 0), dtype=np.int64
        )

    def proj_to_global(t):
        sizes = data.cone_sizes(t)
        out = np.zeros((sum(sizes), sizes[0]), dtype=np.int64)
        out[: sizes[0]] = np.eye(sizes[0], dtype=np.int64)
        return out

    def connect(t):
        sizes = data.cone_sizes(t + 1)
        out = np.zeros((q_rank(t), sum(sizes)), dtype=np.int64)
        roff = 0
        coff = sizes[0]
        for k in range(len(quotients)):
            s = sizes[k + 1]
            out[roff : roff + s, coff : coff + s] = np.eye(s, dtype=np.int64)
            roff += s
            coff += s
        return out

    spots = []
    for t in range(0, maxdeg - 1):
        zc = cone.cycle_rows(-t)
        incoming = (zc @ proj_to_global(t)) % m.pn
        zg = data.cx.cocycles(t)
        mapped = (zg @ res_to_q(t)) % m.pn
        coeff = la.preimage(mapped, q_boundaries(t), p, n)
        ker = (coeff @ zg) % m.pn
        bnd = data.cx.coboundaries(t)
        spots.append((f"H^{t}(M)", la.span_eq_mod(
            np.vstack([incoming, bnd]), np.vstack([ker, bnd]), bnd, p, n
        )))
    for t in range(0, maxdeg - 1):
        zg = data.cx.cocycles(t)
        incoming = (zg @ res_to_q(t)) % m.pn
        zq = q_cycles(t)
        mapped = (zq @ connect(t)) % m.pn
        coeff = la.preimage(mapped, cone.boundary_rows(-(t + 1)), p, n)
        ker = (coeff @ zq) % m.pn
        bnd = q_boundaries(t)
        spots.append((f"+H^{t}(Q_v)", la.span_eq_mod(
            np.vstack([incoming, bnd]), np.vstack([ker, bnd]), bnd, p, n
        )))
    for t in range(0, maxdeg - 1):
        zq = q_cycles(t)
        incoming = (zq @ connect(t)) % m.pn
        zc = cone.cycle_rows(-(t + 1))
        mapped = (zc @ proj_to_global(t + 1)) % m.pn
        coeff = la.preimage(mapped, data.cx.coboundaries(t + 1), p, n)
        ker = (coeff @ zc) % m.pn
        bnd = cone.boundary_rows(-(t + 1))
        spots.append((f"H^{t + 1}_L", la.span_eq_mod(
            np.vstack([incoming, bnd]), np.vstack([ker, bnd]), bnd, p, n
        )))
    return spots


# ------------------------------------------------------------------ pairing


@dataclass
class PairingResult:
    value: int
    cocycle_identity: bool      # d of the local 2-cochain equals eps cup eps'
    z: np.ndarray


class SelmerPair:
    """Primal data for (M, L) and dual data for (M*, L-perp), with the
    global pairing, validated for axioms (iv) and reciprocity."""

    def __init__(self, primal: SelmerData, dual: SelmerData,
                 check: bool = True):
        self.primal = primal
        self.dual = dual
        if primal.places is not dual.places and \
                any(a is not b for a, b in zip(primal.places, dual.places)):
            raise SelmerError("the two sides must share their places")
        dual_mod, pairing = primal.module.dual()
        if dual_mod.exponents != dual.module.exponents:
            raise SelmerError("dual side module is not the dual of the primal")
        self.global_pairing = BilinearPairing(
            primal.module, dual.module, pairing.m3, pairing.tensors
        )
        self.target_cx = cochain_complex(primal.group, pairing.m3,
                                         primal.maxdeg)
        if check:
            for k, (lift, dlift) in enumerate(zip(primal.lifts, dual.lifts)):
                rep = check_axioms(lift, dlift)
                if not rep.ok():
                    raise SelmerError(
                        f"axiom (iv) fails at place {primal.places[k].label}: "
                        + "; ".join(rep.failures)
                    )
            self._check_reciprocity()

    def _check_reciprocity(self):
        t = self.target_cx
        pn = t.module.pn
        total = np.zeros(t.pres.rank(-2), dtype=np.int64)
        for place in self.primal.places:
            if place.inv is None:
                raise SelmerError(
                    f"place {place.label} lacks an invariant functional"
                )
            res = restriction_matrix(place.hom, 2, 1)
            total = (total + res @ place.inv.vec) % pn
        zg = t.cocycles(2)
        if ((zg @ total) % pn).any():
            raise SelmerError(
                "invariant family violates reciprocity: the sum of local "
                "invariants is nonzero on a global 2-cocycle, so the pairing "
                "would depend on the choice of z"
            )

    # -- the pairing -------------------------------------------------------

    def solve_z(self, x: np.ndarray, x2: np.ndarray) -> np.ndarray:
        """A global 2-cochain z with dz = x cup x' (mod divisors)."""
        m = self.primal.module
        xc = Cochain(m, 1, x)
        x2c = Cochain(self.dual.module, 2, x2)
        cupxx = cup(xc, x2c, self.global_pairing)
        t = self.target_cx
        d2 = t.diff_matrix(2)
        rel3 = t.pres.rel(-3)
        stacked = np.vstack([d2, _nonzero_rows(rel3)])
        sol = la.solve_left(stacked, cupxx.vec, m.p, m.n)
        if sol is None:
            raise SelmerError(
                "no global z with dz = x cup x'; the instance violates the "
                "H^3-vanishing hypothesis"
            )
        return sol[: d2.shape[0]] % m.pn

    def pairing(self, xi: np.ndarray, xi2: np.ndarray,
                z: np.ndarray | None = None,
                symmetric_formula: bool = False) -> PairingResult:
        primal, dual = self.primal, self.dual
        m = primal.module
        pn = m.pn
        x, ys = primal.unpack(1, xi)
        x2, y2s = dual.unpack(2, xi2)
        if not Cochain(m, 2, (x @ primal.cx.diff_matrix(1)) % pn
                       ).is_zero_mod_divisors():
            raise SelmerError("xi is not a cone cocycle (dx != 0)")
        if not Cochain(dual.module, 3, (x2 @ dual.cx.diff_matrix(2)) % pn
                       ).is_zero_mod_divisors():
            raise SelmerError("xi2 is not a cone cocycle (dx' != 0)")
        if z is None:
            z = self.solve_z(x, x2)
        identity_ok = True
        total = 0
        for k, place in enumerate(primal.places):
            lift = primal.lifts[k]
            dlift = dual.lifts[k]
            y = Cochain(place.module, 0, ys[k])
            y2 = Cochain(place.dual_module, 1, y2s[k])
            xv = Cochain(place.module, 1, (x @ primal._res_mats[1][k]) % pn)
            x2v = Cochain(place.dual_module, 2,
                          (x2 @ dual._res_mats[2][k]) % pn)
            eps = place.cx.d(y).add(xv)
            eps2 = place.dual_cx.d(y2).add(x2v)
            if not lift.member(1, eps.vec):
                raise SelmerError(
                    f"eps at {place.label} leaves the lift; xi is not a "
                    "cone cocycle"
                )
            if not dlift.member(2, eps2.vec):
                raise SelmerError(
                    f"eps' at {place.label} leaves the dual lift; xi2 is "
                    "not a cone cocycle"
                )
            zv = Cochain(place.target_cx.module, 2,
                         (z @ restriction_matrix(place.hom, 2, 1)) % pn)
            if symmetric_formula:
                w = cup(xv, y2, place.local_pairing).scale(-1) \
                    .add(cup(y, eps2, place.local_pairing)).add(zv)
            else:
                w = cup(y, x2v, place.local_pairing) \
                    .sub(cup(eps, y2, place.local_pairing)).add(zv)
            # d of the formula must equal eps cup eps', which axiom (iv)
            # makes exactly zero
            dw = place.target_cx.d(w)
            eps_cup = cup(eps, eps2, place.local_pairing)
            if eps_cup.vec.any() or dw.vec.any():
                identity_ok = False
            total = (total + place.inv(w)) % pn
        return PairingResult(int(total), identity_ok, z)

    def degree_zero_pairing(self, alpha: np.ndarray, betas: list) -> int:
        """Sum over places of inv_v(alpha_v cup beta_v)."""
        primal, dual = self.primal, self.dual
        m = primal.module
        pn = m.pn
        if not Cochain(m, 1, (alpha @ primal.cx.diff_matrix(0)) % pn
                       ).is_zero_mod_divisors():
            raise SelmerError("alpha is not a 0-cocycle")
        total = 0
        for k, place in enumerate(primal.places):
            av = (alpha @ primal._res_mats[0][k]) % pn
            if not primal.lifts[k].member(0, av):
                raise SelmerError(
                    f"alpha violates the degree-0 condition at {place.label}"
                )
            beta = Cochain(place.dual_module, 2, betas[k])
            if not Cochain(place.dual_module, 3,
                           (beta.vec @ place.dual_cx.diff_matrix(2)) % pn
                           ).is_zero_mod_divisors():
                raise SelmerError("beta is not a local 2-cocycle")
            w = cup(Cochain(place.module, 0, av), beta, place.local_pairing)
            total = (total + place.inv(w)) % pn
        return int(total)

    def pairing_matrix(self):
        """Pairing values on generators of H^1_L x H^2_Lperp, with the
        invariants of the groups; measures (does not assert) perfection."""
        h1 = _class_generators(self.primal, 1)
        h2 = _class_generators(self.dual, 2)
        mat = np.zeros((len(h1), len(h2)), dtype=np.int64)
        for i, a in enumerate(h1):
            for j, b in enumerate(h2):
                mat[i, j] = self.pairing(a, b).value
        return {
            "h1_invariants": self.primal.h_selmer(1),
            "h2_invariants": self.dual.h_selmer(2),
            "matrix": mat,
        }


def _class_generators(data: SelmerData, degree: int) -> list:
    """Cone cocycles generating H^degree_L, chosen greedily."""
    cyc = data.cone_cocycles(degree)
    bnd = data.cone_coboundaries(degree)
    p, n = data.module.p, data.module.n
    gens = []
    current = bnd
    ech = la.Echelon(current, p, n)
    for row in cyc:
        if not ech.contains(row):
            gens.append(row)
            current = np.vstack([current, row.reshape(1, -1)])
            ech = la.Echelon(current, p, n)
    return gens
