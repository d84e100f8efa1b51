import random

import pytest

from manyworlds.diagram import (AgnosticDiagram, Cap, Contraction, Cup,
                                EmptyD, Identity, LabeledDiagram, Par, Plus,
                                PlusDag, Scalar, Seq, Swap, Tensor, Unit,
                                canonicalize, cap_d, collect_labels,
                                compose_par_agnostic, compose_par_fixed,
                                compose_seq_agnostic, compose_seq_fixed,
                                contraction_d, contractiondag_d, cup_d,
                                dagger, empty_d, identity_d, identity_obj_d,
                                identity_term, iter_leaves, map_labels,
                                mirror, par_chain, par_of, permutation_rows,
                                permutation_term, plus_d, plusdag_d,
                                relabel_worlds, replace_at, scalar_d,
                                seq_chain, seq_of, subterm_at, swap_d,
                                tensor_d, term_cod, term_dom, unit_d,
                                unitdag_d, validate, with_star)
from manyworlds.kernel import Prod, QUBIT, Sum, UNIT, obj
from manyworlds.ringmat import RATIONAL

W = frozenset


def test_generator_boundaries():
    l = W({0})
    assert term_dom(Identity(QUBIT, l)) == ((QUBIT, l),)
    assert term_cod(Swap(UNIT, QUBIT, l, l)) == ((QUBIT, l), (UNIT, l))
    assert term_dom(Cup(QUBIT, l)) == ((QUBIT, l), (QUBIT, l))
    assert term_cod(Cup(QUBIT, l)) == ()
    assert term_cod(Plus(UNIT, QUBIT, W({0}), W({1}))) == \
        ((Sum(UNIT, QUBIT), W({0, 1})),)
    assert term_cod(Tensor(QUBIT, QUBIT, l)) == ((Prod(QUBIT, QUBIT), l),)
    assert term_dom(Contraction(QUBIT, (W({0}), W({1})))) == \
        ((QUBIT, W({0})), (QUBIT, W({1})))
    assert term_cod(Contraction(QUBIT, (W({0}), W({1})))) == ((QUBIT, W({0, 1})),)
    assert term_dom(EmptyD()) == ()


def test_validate_catches_label_faults():
    overlapping = LabeledDiagram(Plus(UNIT, UNIT, W({0}), W({0})), W({0, 1}), RATIONAL)
    assert any(v.kind == "disjointness" for v in validate(overlapping))

    escaped = LabeledDiagram(Identity(QUBIT, W({5})), W({0}), RATIONAL)
    assert any(v.kind == "ambient" for v in validate(escaped))

    glue = LabeledDiagram(Seq(Identity(QUBIT, W({0})), Identity(QUBIT, W({1}))),
                          W({0, 1}), RATIONAL)
    assert any(v.kind == "gluing-label" for v in validate(glue))

    types = LabeledDiagram(Seq(Identity(QUBIT, W({0})), Identity(UNIT, W({0}))),
                           W({0, 1}), RATIONAL)
    assert any(v.kind == "gluing-type" for v in validate(types))

    bad_contraction = LabeledDiagram(Contraction(UNIT, (W({0}), W({0, 1}))),
                                     W({0, 1}), RATIONAL)
    assert any(v.kind == "disjointness" for v in validate(bad_contraction))


def test_validate_accepts_canonical_generators():
    for d in [identity_d(QUBIT), swap_d(QUBIT, UNIT), cup_d(QUBIT),
              cap_d(QUBIT), plus_d(UNIT, QUBIT), plusdag_d(UNIT, UNIT),
              tensor_d(QUBIT, QUBIT), unit_d(), unitdag_d(),
              contraction_d(QUBIT, 3), contractiondag_d(QUBIT, 0),
              scalar_d(QUBIT, RATIONAL.one), empty_d()]:
        assert validate(d.diagram) == []


def test_canonical_generators_are_fixed_points():
    for d in [identity_d(QUBIT), swap_d(QUBIT, UNIT), plus_d(UNIT, QUBIT),
              contraction_d(QUBIT, 3), empty_d()]:
        again = canonicalize(d.diagram)
        assert again.term == d.term
        assert again.worlds == d.worlds


def test_canonicalize_undoes_renaming():
    d = plus_d(UNIT, QUBIT)
    bij = {0: "zebra", 1: (4, 4), 2: -17}
    shuffled = relabel_worlds(d.diagram, bij)
    assert AgnosticDiagram(shuffled) == d


def test_agnostic_equality_and_hash():
    assert identity_d(QUBIT) == identity_d(QUBIT)
    assert hash(identity_d(QUBIT)) == hash(identity_d(QUBIT))
    assert identity_d(QUBIT) != identity_d(UNIT)


def test_parallel_product_keeps_all_world_pairs():
    two = compose_par_agnostic(identity_d(QUBIT), identity_d(QUBIT))
    assert len(two.worlds) == 4
    labs = collect_labels(two.term)
    assert labs == [W({0, 1}), W({0, 2})]


def test_sequential_gluing_eliminates_disagreements():
    composite = compose_seq_agnostic(identity_d(QUBIT), identity_d(QUBIT))
    assert composite.worlds == W({0, 1})
    assert collect_labels(composite.term) == [W({0}), W({0})]


def test_sequential_gluing_type_mismatch():
    with pytest.raises(ValueError):
        compose_seq_agnostic(identity_d(QUBIT), identity_d(UNIT))


def test_fixed_composition_requires_alignment():
    a = identity_d(QUBIT).diagram
    b = relabel_worlds(a, {0: 7, 1: 8})
    with pytest.raises(ValueError):
        compose_seq_fixed(a, b)
    c = LabeledDiagram(Identity(QUBIT, W({1})), a.worlds, RATIONAL)
    with pytest.raises(ValueError):
        compose_seq_fixed(a, c)
    ok = compose_seq_fixed(a, a)
    assert ok.dom == a.dom and ok.cod == a.cod
    par = compose_par_fixed(a, a)
    assert len(par.dom) == 2


def test_dagger_swaps_boundaries_and_involutes():
    for d in [plus_d(UNIT, QUBIT), swap_d(QUBIT, UNIT), cup_d(QUBIT),
              contraction_d(QUBIT, 2), unit_d()]:
        # exact boundary swap before re-canonicalisation
        dl = dagger(d.diagram)
        assert dl.dom == d.diagram.cod
        assert dl.cod == d.diagram.dom
        # as agnostic classes the dagger is an involution
        dd = dagger(d)
        assert dd.dom_object == d.cod_object
        assert dd.cod_object == d.dom_object
        assert dagger(dd) == d
    composite = compose_seq_agnostic(plus_d(UNIT, UNIT), plusdag_d(UNIT, UNIT))
    assert dagger(dagger(composite)) == composite


def test_with_star_adds_one_dead_world():
    d = plus_d(UNIT, UNIT)
    starred = with_star(d)
    assert len(starred.worlds) == len(d.worlds) + 1
    assert collect_labels(starred.term) == collect_labels(d.term)
    # already canonical: the fresh world is in no label, so it sorts last
    assert with_star(starred).worlds == W({0, 1, 2, 3, 4})


def test_path_addressing():
    t = Seq(Par(Identity(UNIT, W({0})), Unit(W({0}))), Identity(UNIT, W({0})))
    assert subterm_at(t, (0, 1)) == Unit(W({0}))
    swapped = replace_at(t, (0, 1), Identity(UNIT, W({0})))
    assert subterm_at(swapped, (0, 1)) == Identity(UNIT, W({0}))
    leaves = list(iter_leaves(t))
    assert [p for p, _ in leaves] == [(0, 0), (0, 1), (1,)]


def test_chain_flattening():
    a, b, c = (Identity(UNIT, W({0})), Scalar(UNIT, RATIONAL.one, W({0})),
               Identity(UNIT, W({0})))
    assert seq_chain(Seq(Seq(a, b), c)) == [a, b, c]
    assert seq_chain(Seq(a, Seq(b, c))) == [a, b, c]
    assert par_chain(par_of([a, b, c])) == [a, b, c]
    assert seq_chain(seq_of([a, b, c])) == [a, b, c]
    assert par_of([]) == EmptyD()


def test_permutation_rows_realise_target_order():
    rng = random.Random(5)
    ports = [(QUBIT, W({0})), (UNIT, W({1})), (QUBIT, W({0, 1})), (UNIT, W({2}))]
    for _ in range(20):
        perm = list(range(4))
        rng.shuffle(perm)
        rows, out_ports = permutation_rows(ports, perm)
        assert list(out_ports) == [ports[i] for i in perm]
        term = permutation_term(ports, perm)
        assert term_dom(term) == tuple(ports)
        assert term_cod(term) == tuple(ports[i] for i in perm)


def test_identity_term_boundaries():
    ports = ((QUBIT, W({0})), (UNIT, W({1})))
    t = identity_term(ports)
    assert term_dom(t) == ports
    assert term_cod(t) == ports


def test_mirror_boundaries():
    g = Plus(UNIT, QUBIT, W({0}), W({1}))
    m = mirror(g, RATIONAL)
    assert term_dom(m.term) == term_cod(g)
    assert term_cod(m.term) == term_dom(g)
    assert validate(m) == []

    g2 = Cap(QUBIT, W({0}))
    m2 = mirror(g2, RATIONAL)
    assert term_dom(m2.term) == term_cod(g2)
    assert term_cod(m2.term) == ()

    g3 = Unit(W({0}))
    m3 = mirror(g3, RATIONAL)
    assert term_dom(m3.term) == term_cod(g3)
    assert term_cod(m3.term) == ()


def test_identity_obj_d_boundary():
    o = obj(QUBIT, UNIT, QUBIT)
    d = identity_obj_d(o)
    assert d.dom_object == o
    assert d.cod_object == o
    # one world per joint enabling pattern of three independent wires
    assert len(d.worlds) == 8
