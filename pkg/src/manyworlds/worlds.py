"""World sets, label renaming, products, and gluing elimination.

A world is any hashable token; canonical diagrams use consecutive
integers.  A label is the set of worlds in which a wire is enabled.
Composing two diagrams with independent world sets forms the product
of the sets; sequential gluing then keeps the largest subset of the
product on which the glued labels agree (a single membership test per
pair suffices, no iteration is needed).
"""

from __future__ import annotations

from typing import Callable, Hashable, Iterable, Sequence

World = Hashable
Label = frozenset


def world_sort_key(w: World):
    """Total order over the world tokens used in this package."""
    if isinstance(w, bool):
        return (1, int(w))
    if isinstance(w, int):
        return (1, w)
    if isinstance(w, tuple):
        return (2, tuple(world_sort_key(x) for x in w))
    return (3, str(w))


def product(left: Iterable[World], right: Iterable[World]):
    """Pairwise product of two world sets with the two label lifts."""
    left = frozenset(left)
    right = frozenset(right)
    pairs = frozenset((a, b) for a in left for b in right)

    def lift_left(label: Label) -> Label:
        return frozenset((a, b) for a in label for b in right)

    def lift_right(label: Label) -> Label:
        return frozenset((a, b) for a in left for b in label)

    return pairs, lift_left, lift_right


def eliminate(candidates: Iterable[World],
              constraints: Sequence[tuple[Label, Label]]) -> frozenset:
    """Largest subset on which every constraint pair agrees pointwise.

    A world survives exactly when, for each pair, it belongs to both
    labels or to neither; agreement is per world, so one pass decides.
    """
    out = []
    for z in candidates:
        if all((z in l1) == (z in l2) for l1, l2 in constraints):
            out.append(z)
    return frozenset(out)


def canonical_rename(worlds: Iterable[World],
                     labels: Sequence[Label]) -> dict:
    """Deterministic renaming of the worlds to 0..n-1.

    Worlds are ordered by their membership bit-vector over the label
    list (members sort first), ties broken by the token order.  Two
    diagrams that differ only by a bijective renaming therefore map to
    the same integers, and renaming an already canonical diagram is the
    identity.

    The bit-vectors are materialised as byte strings built in one pass
    over the label members, so the cost is the total label size rather
    than worlds times labels.
    """
    base = sorted(worlds, key=world_sort_key)
    pos = {w: k for k, w in enumerate(base)}
    nlab = len(labels)
    keys = [bytearray(b"\x01" * nlab) for _ in base]
    for li, lab in enumerate(labels):
        for w in lab:
            keys[pos[w]][li] = 0
    order = sorted(range(len(base)), key=lambda k: bytes(keys[k]))
    return {base[k]: i for i, k in enumerate(order)}


def rename_label(label: Label, mapping: dict) -> Label:
    return frozenset(mapping[w] for w in label)
