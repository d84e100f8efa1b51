import random
from fractions import Fraction

import pytest

from manyworlds.diagram import (AgnosticDiagram, Identity, LabeledDiagram,
                                Par, compose_seq_agnostic, dagger, identity_d,
                                plus_d, plusdag_d, scalar_d, validate)
from manyworlds.kernel import (EMPTY_OBJECT, Prod, QUBIT, Sum, UNIT,
                               interp_dim, obj)
from manyworlds.ringmat import RATIONAL, SemiringMatrix
from manyworlds.normform import (NormalForm, build_iso, build_matrix_block,
                                 equivalent, iso_basis_row, normalize,
                                 synthesize)
from manyworlds.semantics import sem_agnostic, sem

W = frozenset
F = Fraction

SMALL_OBJECTS = [
    EMPTY_OBJECT,
    obj(UNIT),
    obj(QUBIT),
    obj(Sum(QUBIT, UNIT)),
    obj(Prod(QUBIT, QUBIT)),
    obj(UNIT, UNIT),
    obj(QUBIT, UNIT),
    obj(UNIT, QUBIT, UNIT),
]


@pytest.mark.parametrize("o", SMALL_OBJECTS, ids=repr)
def test_iso_is_a_basis_bijection(o):
    iso = build_iso(o, RATIONAL)
    assert validate(iso) == []
    n = interp_dim(o)
    assert len(iso.worlds) == n
    assert len(iso.cod) == n - 1
    m = sem_agnostic(iso)
    assert (m.rows, m.cols) == (2 ** (n - 1), n)
    for b in range(n):
        target = iso_basis_row(n - 1, b)
        for r in range(m.rows):
            want = F(1) if r == target else F(0)
            assert m[r, b] == want, (o, b, r)


@pytest.mark.parametrize("o", SMALL_OBJECTS, ids=repr)
def test_iso_inverse_composes_to_identity(o):
    iso = AgnosticDiagram(build_iso(o, RATIONAL))
    back = compose_seq_agnostic(iso, dagger(iso))
    assert sem_agnostic(back).equal(
        SemiringMatrix.identity(RATIONAL, interp_dim(o)))


def test_matrix_block_interprets_to_its_matrix():
    rng = random.Random(2)
    for nb, na in [(1, 1), (2, 1), (1, 3), (3, 2), (4, 4)]:
        mat = SemiringMatrix.from_rows(
            RATIONAL, [[F(rng.randint(-3, 3)) for _ in range(na)]
                       for _ in range(nb)])
        block = build_matrix_block(mat, RATIONAL)
        assert validate(block) == []
        got = sem_agnostic(block)
        # the bundle interpretation embeds the matrix at the basis rows
        for i in range(nb):
            for j in range(na):
                r = iso_basis_row(nb - 1, i)
                c = iso_basis_row(na - 1, j)
                assert got[r, c] == mat[i, j], (nb, na, i, j)


def _random_matrix(rng, rows, cols):
    return SemiringMatrix.from_rows(
        RATIONAL, [[F(rng.randint(-4, 4), rng.choice([1, 1, 2]))
                    for _ in range(cols)] for _ in range(rows)])


def test_synthesize_round_trip():
    rng = random.Random(9)
    cases = [(obj(QUBIT), obj(QUBIT)), (obj(UNIT, UNIT), obj(QUBIT)),
             (EMPTY_OBJECT, obj(Sum(QUBIT, UNIT))), (obj(QUBIT), EMPTY_OBJECT)]
    for dom_o, cod_o in cases:
        mat = _random_matrix(rng, interp_dim(cod_o), interp_dim(dom_o))
        d = synthesize(mat, dom_o, cod_o, RATIONAL)
        assert validate(d.diagram) == []
        assert sem_agnostic(d).equal(mat)


def test_synthesize_shape_check():
    with pytest.raises(ValueError):
        synthesize(SemiringMatrix.identity(RATIONAL, 2), obj(QUBIT), obj(QUBIT),
                   RATIONAL)


def test_normalize_identifies_equal_diagrams():
    # injection then projection agrees with the world-correlated pair of
    # identities, and their synthesised normal forms coincide exactly
    roundabout = compose_seq_agnostic(plus_d(UNIT, UNIT), plusdag_d(UNIT, UNIT))
    direct = AgnosticDiagram(LabeledDiagram(
        Par(Identity(UNIT, W({0})), Identity(UNIT, W({1}))), W({0, 1, 2}),
        RATIONAL))
    assert sem_agnostic(roundabout).equal(sem_agnostic(direct))
    na, nb = normalize(roundabout), normalize(direct)
    assert na == nb
    assert na.diagram == nb.diagram


def test_normalize_separates_distinct_diagrams():
    a = normalize(identity_d(QUBIT))
    b = normalize(scalar_d(QUBIT, F(2)))
    assert a != b
    assert a.diagram != b.diagram


def test_normalize_is_idempotent():
    d = compose_seq_agnostic(plus_d(UNIT, UNIT), plusdag_d(UNIT, UNIT))
    nf = normalize(d)
    again = normalize(nf.diagram)
    assert nf == again
    assert nf.diagram == again.diagram


def test_normal_form_respects_composition():
    f = plus_d(UNIT, UNIT)
    g = plusdag_d(UNIT, UNIT)
    nf_direct = normalize(compose_seq_agnostic(f, g))
    nf_of_nfs = normalize(compose_seq_agnostic(normalize(f).diagram,
                                               normalize(g).diagram))
    assert nf_direct == nf_of_nfs
    assert nf_direct.diagram == nf_of_nfs.diagram


def test_equivalent_checks_boundaries():
    assert equivalent(identity_d(QUBIT), identity_d(QUBIT))
    assert not equivalent(identity_d(QUBIT), scalar_d(QUBIT, F(2)))
    assert not equivalent(identity_d(QUBIT), identity_d(UNIT))
