import random

from hypothesis import given, strategies as st

from manyworlds.worlds import (canonical_rename, eliminate, product,
                               rename_label, world_sort_key)

labels = st.frozensets(st.integers(0, 5), max_size=4)


def test_product_and_lifts():
    pairs, lift_l, lift_r = product({0, 1}, {"x", "y", "z"})
    assert len(pairs) == 6
    assert lift_l(frozenset({0})) == frozenset({(0, "x"), (0, "y"), (0, "z")})
    assert lift_r(frozenset({"x"})) == frozenset({(0, "x"), (1, "x")})
    assert lift_l(frozenset()) == frozenset()


@given(st.frozensets(st.integers(0, 7), max_size=6),
       st.lists(st.tuples(labels, labels), max_size=4))
def test_eliminate_is_definitional(worlds, constraints):
    kept = eliminate(worlds, constraints)
    for z in worlds:
        agree = all((z in l1) == (z in l2) for l1, l2 in constraints)
        assert (z in kept) == agree


def test_eliminate_examples():
    # full agreement keeps everything, disagreement on one side drops it
    assert eliminate({0, 1}, [(frozenset({0}), frozenset({0}))]) == frozenset({0, 1})
    assert eliminate({0, 1}, [(frozenset({0}), frozenset({1}))]) == frozenset()
    assert eliminate({0, 1, 2}, [(frozenset({0, 1}), frozenset({0}))]) == frozenset({0, 2})


def test_canonical_rename_membership_first():
    # members of a label sort before non-members
    mapping = canonical_rename({"x", "y"}, [frozenset({"y"})])
    assert mapping == {"y": 0, "x": 1}


def test_canonical_rename_tie_break_is_stable():
    mapping = canonical_rename({3, 1, 2}, [])
    assert mapping == {1: 0, 2: 1, 3: 2}


@given(st.lists(labels, min_size=1, max_size=5))
def test_canonical_rename_idempotent(labs):
    worlds = frozenset().union(*labs) | {99}
    m1 = canonical_rename(worlds, labs)
    labs2 = [rename_label(l, m1) for l in labs]
    m2 = canonical_rename(frozenset(m1.values()), labs2)
    assert all(m2[v] == v for v in m1.values())


@given(st.lists(labels, min_size=1, max_size=5), st.integers(0, 10))
def test_canonical_rename_bijection_invariant(labs, seed):
    worlds = sorted(frozenset().union(*labs) | {99})
    rng = random.Random(seed)
    shuffled = list(worlds)
    rng.shuffle(shuffled)
    bij = {w: ("w", s) for w, s in zip(worlds, shuffled)}
    m1 = canonical_rename(worlds, labs)
    m2 = canonical_rename([bij[w] for w in worlds],
                          [rename_label(l, bij) for l in labs])
    for l, l_orig in zip([rename_label(l, bij) for l in labs], labs):
        assert rename_label(l, m2) == rename_label(l_orig, m1)


def test_world_sort_key_orders_mixed_tokens():
    toks = [("a", 2), 3, 1, ("a", 1), "zz"]
    ordered = sorted(toks, key=world_sort_key)
    assert ordered == [1, 3, ("a", 1), ("a", 2), "zz"]
