import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from localhom import _wnlinalg as la
from localhom.complexes import (
    ChainMap,
    ComplexError,
    FreeChainComplex,
    cone,
    hofib,
    identity_map,
    unit_complex,
)
from localhom.rings import Matrix, RingSpec, make_ring


def ring(p, n):
    return make_ring(RingSpec(p, n))


def two_term(r, entry, lo=0):
    """0 -> R --entry--> R -> 0 in degrees lo+1, lo."""
    m = Matrix.from_rows(r, [[r.scalar(entry)]])
    return FreeChainComplex(r, lo, lo + 1, {lo: 1, lo + 1: 1}, {lo + 1: m})


def koszul_one(r, entry):
    return two_term(r, entry)


def random_complex(r, rng, length=3, maxrank=3):
    """Random valid complex built from composable elimination factors.

    d_{i+1} = A_i B_i with B_i A_{i+1}... we instead build d as products
    through a chain of 'middle' spaces so that d^2 = 0 automatically:
    d_{i} = P_i Q_{i-1} with Q_{i-1} P_{i-1} = 0 arranged by splitting
    coordinates.
    """
    # pick splittings: rank_i = a_i + b_i; d_i maps the a-part of C_i onto
    # the b-part of C_{i-1} with random unimodular twists
    ranks, parts = {}, {}
    for i in range(length + 1):
        a = int(rng.randint(0, maxrank))
        b = int(rng.randint(0, maxrank))
        ranks[i], parts[i] = a + b, (a, b)
    diffs = {}
    pn = r.pn
    for i in range(1, length + 1):
        a_i = parts[i][0]
        b_prev = parts[i - 1][1]
        k = min(a_i, b_prev)
        m = np.zeros((ranks[i], ranks[i - 1]), dtype=np.int64)
        if k:
            blk = np.zeros((a_i, b_prev), dtype=np.int64)
            for t in range(k):
                blk[t, t] = rng.randint(0, pn)
            m[:a_i, parts[i - 1][0]:] = blk
        diffs[i] = Matrix.from_wn(r, m)
    return FreeChainComplex(r, 0, length, ranks, diffs)


def test_validate_ok_and_failure():
    r = ring(2, 2)
    c = koszul_one(r, 2)
    assert c.validate() is None
    bad = Matrix.from_rows(r, [[r.scalar(2)]])
    with pytest.raises(ComplexError):
        FreeChainComplex(
            r, 0, 2, {0: 1, 1: 1, 2: 1},
            {1: bad, 2: Matrix.from_rows(r, [[r.scalar(1)]])},
        )


def test_random_generated_complexes_valid():
    r = ring(3, 2)
    rng = np.random.RandomState(7)
    for _ in range(10):
        c = random_complex(r, rng)
        assert c.validate() is None


def test_homology_of_multiplication_by_p():
    # 0 -> W_n --p--> W_n -> 0 over W_2, p=2: H_0 = Z/2, H_1 = Z/2
    r = ring(2, 2)
    c = two_term(r, 2)
    assert c.homology_at(0) == (1,)
    assert c.homology_at(1) == (1,)


def test_homology_zero_differentials_free():
    r = ring(2, 2)
    c = FreeChainComplex(r, 0, 2, {0: 2, 1: 1, 2: 3}, {})
    h = c.homology()
    assert h.exponents(0) == (2, 2)
    assert h.exponents(1) == (2,)
    assert h.exponents(2) == (2, 2, 2)
    assert all(h.is_free(i) for i in range(3))


def test_cone_of_identity_acyclic():
    r = ring(2, 2)
    rng = np.random.RandomState(3)
    for _ in range(5):
        c = random_complex(r, rng)
        cc = cone(identity_map(c))
        assert all(cc.homology_at(i) == () for i in cc.degrees())


def test_hofib_of_zero_map():
    r = ring(3, 1)
    a = two_term(r, 0)          # H = k in degrees 0, 1
    b = koszul_one(r, 0).shift(0)
    f = ChainMap(a, b, {})      # zero map
    h = hofib(f)
    # H_t(hofib) = H_t(A) + H_{t+1}(B)
    for t in range(-1, 2):
        want = len(a.homology_at(t)) + len(b.homology_at(t + 1))
        assert len(h.homology_at(t)) == want


def _subgroup_rows(c, i, rows):
    return np.vstack([rows, c.boundary_rows(i)])


def test_hofib_triangle_les_exact():
    # exactness of H(hofib) -> H(A) -> H(B) -> H(hofib)[-1] on random maps
    r = ring(2, 2)
    rng = np.random.RandomState(5)
    trials = 0
    while trials < 6:
        a = random_complex(r, rng, length=2)
        b = random_complex(r, rng, length=2)
        # a random chain map a -> b: build by lifting zero/diagonal attempts;
        # easiest valid map: scalar multiples of identity-shaped blocks that
        # commute by construction: use f = 0 and f = d-compatible random
        # cycle-valued maps.  Zero map suffices to exercise the triangle.
        f = ChainMap(a, b, {})
        h = hofib(f)
        p, n = r.p, r.n
        for t in range(0, 2):
            # spot H_t(A): image of H_t(hofib) -> H_t(A) vs kernel of f_*
            hk = h.cycle_rows(t)
            to_a = np.vstack([np.eye(a.rank(t), dtype=np.int64),
                              np.zeros((b.rank(t + 1), a.rank(t)), np.int64)])
            img = (hk @ to_a) % r.pn
            ak = a.cycle_rows(t)
            fmat = f.mat(t).to_wn()
            mapped = (ak @ fmat) % r.pn
            coeff = la.preimage(mapped, b.boundary_rows(t), p, n)
            ker = (coeff @ ak) % r.pn
            bnd = a.boundary_rows(t)
            assert la.span_eq_mod(
                np.vstack([img, bnd]), np.vstack([ker, bnd]), bnd, p, n
            )
        trials += 1


def test_shift_round_trip():
    r = ring(2, 2)
    rng = np.random.RandomState(9)
    c = random_complex(r, rng)
    back = c.shift(2).shift(-2)
    for i in c.degrees():
        assert back.homology_at(i) == c.homology_at(i)


def test_truncate_above_field():
    # Koszul complex on 3 elements over k = F_3 (here: tensor of three
    # two-term complexes with zero maps has H everywhere; use nonzero)
    r = ring(3, 1)
    k1 = koszul_one(r, 0)
    c = k1.tensor(k1).tensor(k1)
    t = c.truncate_above(1)
    for i in (0, 1):
        assert t.homology_at(i) == c.homology_at(i)
    for i in range(2, t.hi + 1):
        assert t.homology_at(i) == ()


def test_truncate_above_wn_nonfree_image_windows():
    r = ring(2, 2)
    c = two_term(r, 2)  # d = p
    t = c.truncate_above(0)
    assert t.homology_at(0) == c.homology_at(0)
    assert t.homology_at(1) == ()


def test_truncate_below_negative_support():
    r = ring(2, 2)
    c = two_term(r, 2, lo=-3)  # degrees -3, -2
    t = c.truncate_below(0)
    assert all(t.homology_at(i) == () for i in t.degrees())


def test_truncate_below_field_keeps_range():
    r = ring(2, 1)
    rng = np.random.RandomState(21)
    c = random_complex(r, rng, length=3)
    t = c.truncate_below(1)
    for i in range(1, c.hi + 1):
        assert t.homology_at(i) == c.homology_at(i), i
    assert t.lo == 1


def test_tensor_unit_identity():
    r = ring(2, 2)
    rng = np.random.RandomState(13)
    c = random_complex(r, rng)
    u = unit_complex(r)
    t = c.tensor(u)
    for i in c.degrees():
        assert t.homology_at(i) == c.homology_at(i)


def test_koszul_tensor_is_koszul_two():
    # Koszul(x) (x) Koszul(y) has the Koszul(x, y) shape: ranks 1,2,1
    r = ring(2, 2)
    a = koszul_one(r, 2)
    b = koszul_one(r, 2)
    t = a.tensor(b)
    assert [t.rank(i) for i in range(3)] == [1, 2, 1]
    d1 = t.diff(1).to_wn()
    assert sorted(d1[:, 0].tolist()) == [2, 2]
    d2 = t.diff(2).to_wn()[0]
    assert sorted((d2 % 4).tolist()) == [2, 2]  # (-y, x) up to sign


def test_kunneth_over_field():
    r = ring(3, 1)
    rng = np.random.RandomState(17)
    for _ in range(5):
        c = random_complex(r, rng, length=2)
        d = random_complex(r, rng, length=2)
        t = c.tensor(d)
        for m in t.degrees():
            want = 0
            for i in range(c.lo, c.hi + 1):
                want += len(c.homology_at(i)) * len(d.homology_at(m - i))
            assert len(t.homology_at(m)) == want


def test_euler_characteristic_over_field():
    r = ring(5, 1)
    rng = np.random.RandomState(23)
    for _ in range(8):
        c = random_complex(r, rng)
        chi_ranks = c.euler_characteristic()
        chi_hom = sum((-1) ** i * len(c.homology_at(i)) for i in c.degrees())
        assert chi_ranks == chi_hom


def test_homology_invariant_under_basis_change():
    r = ring(2, 2)
    rng = np.random.RandomState(31)
    c = random_complex(r, rng, length=2)

    def rand_invertible(k):
        if k == 0:
            return np.zeros((0, 0), np.int64)
        while True:
            m = rng.randint(0, r.pn, size=(k, k)).astype(np.int64)
            exps, _ = la.smith(m, r.p, r.n)
            if all(e == 0 for e in exps):
                return m

    us = {i: rand_invertible(c.rank(i)) for i in c.degrees()}
    uinv = {}
    for i, u in us.items():
        if u.size == 0:
            uinv[i] = u
        else:
            uinv[i] = la.solve_left(u, np.eye(u.shape[0], dtype=np.int64),
                                    r.p, r.n)
    diffs = {}
    for i in range(c.lo + 1, c.hi + 1):
        d = c.diff(i).to_wn()
        if us[i].size and uinv[i - 1].size:
            nd = (us[i] @ d @ uinv[i - 1]) % r.pn
        elif us[i].size:
            nd = (us[i] @ d) % r.pn
        else:
            nd = d
        diffs[i] = Matrix.from_wn(r, nd)
    c2 = FreeChainComplex(r, c.lo, c.hi, dict(c.ranks), diffs)
    for i in c.degrees():
        assert c2.homology_at(i) == c.homology_at(i)


def test_json_round_trip():
    r = ring(2, 2)
    c = two_term(r, 2)
    j = c.to_json()
    c2 = FreeChainComplex.from_json(r, j)
    assert c2.homology_at(0) == c.homology_at(0)
    assert c2.homology_at(1) == c.homology_at(1)
