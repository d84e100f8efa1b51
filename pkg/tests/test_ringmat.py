import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from manyworlds.ringmat import (BOOLEAN, COMPLEX, ISQRT2, NONNEG, QS2,
                                QSQRT2I, RATIONAL, RINGS, SemiringMatrix,
                                kron_all)

ALL_RINGS = list(RINGS.values())


def _samples(ring, n, seed=0):
    rng = random.Random(seed)
    return [ring.sample(rng) for _ in range(n)]


@pytest.mark.parametrize("ring", ALL_RINGS, ids=lambda r: r.name)
def test_semiring_axioms(ring):
    xs = _samples(ring, 6, seed=7)
    for a in xs:
        assert ring.eq(ring.add(a, ring.zero), a)
        assert ring.eq(ring.mul(a, ring.one), a)
        assert ring.eq(ring.mul(a, ring.zero), ring.zero)
        for b in xs:
            assert ring.eq(ring.add(a, b), ring.add(b, a))
            assert ring.eq(ring.mul(a, b), ring.mul(b, a))
            for c in xs:
                assert ring.eq(ring.add(ring.add(a, b), c),
                               ring.add(a, ring.add(b, c)))
                assert ring.eq(ring.mul(ring.mul(a, b), c),
                               ring.mul(a, ring.mul(b, c)))
                assert ring.eq(ring.mul(a, ring.add(b, c)),
                               ring.add(ring.mul(a, b), ring.mul(a, c)))


@pytest.mark.parametrize("ring", ALL_RINGS, ids=lambda r: r.name)
def test_parse_fmt_round_trip(ring):
    for a in _samples(ring, 12, seed=3):
        assert ring.eq(ring.parse(ring.fmt(a)), a)


def test_qsqrt2i_parse_forms():
    r = QSQRT2I
    assert r.parse("isqrt2") == ISQRT2
    assert r.parse("1/2sqrt2") == ISQRT2
    assert r.parse("1/2*sqrt2") == ISQRT2
    assert r.parse("-isqrt2") == -ISQRT2
    assert r.parse("3/2") == QS2(ar=Fraction(3, 2))
    assert r.parse("2i") == QS2(ai=Fraction(2))
    assert r.parse("1+1i") == QS2(ar=Fraction(1), ai=Fraction(1))
    assert r.parse("1-sqrt2") == QS2(ar=Fraction(1), br=Fraction(-1))
    assert r.parse("1isqrt2") == QS2(bi=Fraction(1))
    full = QS2(Fraction(1), Fraction(-1), Fraction(1, 2), Fraction(3))
    assert r.parse(r.fmt(full)) == full


def test_isqrt2_squares_to_half():
    half = QS2(ar=Fraction(1, 2))
    assert ISQRT2 * ISQRT2 == half
    assert ISQRT2.to_complex().real == pytest.approx(2 ** -0.5)


def test_exact_hadamard_square():
    r = ISQRT2
    h = SemiringMatrix.from_rows(QSQRT2I, [[r, r], [r, -r]])
    assert h.matmul(h).equal(SemiringMatrix.identity(QSQRT2I, 2))


@given(st.integers(-9, 9), st.integers(-9, 9), st.integers(-9, 9),
       st.integers(1, 5), st.integers(1, 5))
def test_qs2_field_ops(a, b, c, p, q):
    x = QS2(Fraction(a), Fraction(b, p), Fraction(c, q))
    y = QS2(Fraction(c), Fraction(a, q), Fraction(b, p))
    z = QS2(Fraction(b), Fraction(c), Fraction(a))
    assert x * (y + z) == x * y + x * z
    assert (x * y) * z == x * (y * z)
    assert x + (-x) == QS2()


def test_matmul_means_second_after_first():
    f = SemiringMatrix.from_rows(RATIONAL, [[Fraction(1), Fraction(2)],
                                            [Fraction(0), Fraction(1)]])
    g = SemiringMatrix.from_rows(RATIONAL, [[Fraction(0), Fraction(1)],
                                            [Fraction(1), Fraction(0)]])
    gf = g.matmul(f)
    v = [Fraction(3), Fraction(5)]
    direct = [sum(gf[i, j] * v[j] for j in range(2)) for i in range(2)]
    fv = [sum(f[i, j] * v[j] for j in range(2)) for i in range(2)]
    staged = [sum(g[i, j] * fv[j] for j in range(2)) for i in range(2)]
    assert direct == staged


def test_kron_leftmost_most_significant():
    a = SemiringMatrix.from_rows(RATIONAL, [[Fraction(1), Fraction(2)],
                                            [Fraction(3), Fraction(4)]])
    b = SemiringMatrix.from_rows(RATIONAL, [[Fraction(5), Fraction(6)],
                                            [Fraction(7), Fraction(8)]])
    k = a.kron(b)
    for i in range(2):
        for j in range(2):
            for p in range(2):
                for q in range(2):
                    assert k[i * 2 + p, j * 2 + q] == a[i, j] * b[p, q]


def test_kron_mixed_shapes_and_matmul_interchange():
    rng = random.Random(11)
    def rand(r, c):
        return SemiringMatrix.from_rows(
            RATIONAL, [[Fraction(rng.randint(-3, 3)) for _ in range(c)]
                       for _ in range(r)])
    a, b = rand(2, 3), rand(3, 2)
    c, d = rand(3, 1), rand(1, 3)
    lhs = (b.matmul(a)).kron(d.matmul(c))
    rhs = (b.kron(d)).matmul(a.kron(c))
    assert lhs.equal(rhs)


def test_boolean_matrices_are_relations():
    a = SemiringMatrix.from_rows(BOOLEAN, [[True, False], [True, True]])
    sq = a.matmul(a)
    # (i,j) related in the square iff some k joins i to j
    for i in range(2):
        for j in range(2):
            expect = any(a[i, k] and a[k, j] for k in range(2))
            assert sq[i, j] == expect


def test_direct_block_write_and_gather():
    m = SemiringMatrix.zeros(RATIONAL, 4, 4)
    block = SemiringMatrix.from_rows(RATIONAL, [[Fraction(1), Fraction(2)],
                                                [Fraction(3), Fraction(4)]])
    m.direct_block_write([0, 2], [1, 3], block)
    m.direct_block_write([0, 2], [1, 3], block)  # accumulate
    got = m.gather([0, 2], [1, 3])
    assert got.equal(block.add(block))
    assert m[1, 1] == Fraction(0)
    assert m[0, 1] == Fraction(2)


def test_scalar_and_identity_helpers():
    s = SemiringMatrix.scalar(RATIONAL, Fraction(7))
    i3 = SemiringMatrix.identity(RATIONAL, 3)
    assert s.kron(i3).equal(i3.scalar_mul(Fraction(7)))
    assert kron_all(RATIONAL, [s, s]).equal(SemiringMatrix.scalar(RATIONAL, Fraction(49)))


def test_transpose_and_equality():
    a = SemiringMatrix.from_rows(RATIONAL, [[Fraction(1), Fraction(2), Fraction(3)]])
    assert a.transpose().rows == 3
    assert a.transpose().transpose().equal(a)
    assert not a.equal(a.scalar_mul(Fraction(2)))


def test_complex_parse():
    c = COMPLEX
    assert abs(c.parse("1+2i") - (1 + 2j)) < 1e-12
    assert abs(c.parse("-i") - (-1j)) < 1e-12
    assert abs(c.parse("isqrt2") - 2 ** -0.5) < 1e-12
    assert abs(c.parse("3/2") - 1.5) < 1e-12


def test_nonneg_rejects_negative():
    with pytest.raises(ValueError):
        NONNEG.parse("-1")
