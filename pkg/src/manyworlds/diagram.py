"""Diagram terms: world-labeled generators plus sequential and parallel
composition.

A diagram is a binary term tree whose leaves are generator instances.
Every port of a leaf carries a wire type and a label, the set of worlds
in which that wire is enabled.  Boundaries of composite terms are
derived from the leaves, so the boundary labeling is consistent by
construction; ``validate`` checks the per-generator label constraints
and the gluing of sequential compositions.

Two composition disciplines coexist.  Fixed-world composition requires
both halves to share one world set and glues boundaries that match on
the nose.  World-agnostic composition treats each half up to bijective
renaming of its worlds: parallel composition forms the product of the
world sets, sequential composition additionally keeps only the pairs on
which the glued labels agree, then both canonically rename the result.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from .kernel import DiagObject, Prod, Sum, UNIT, WireType
from .ringmat import RATIONAL, Semiring
from .worlds import Label, canonical_rename, eliminate, product, rename_label


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class EmptyD(Term):
    """The identity on the empty boundary."""


@dataclass(frozen=True)
class Identity(Term):
    wtype: WireType
    label: Label


@dataclass(frozen=True)
class Swap(Term):
    left: WireType
    right: WireType
    label_left: Label
    label_right: Label


@dataclass(frozen=True)
class Cup(Term):
    wtype: WireType
    label: Label


@dataclass(frozen=True)
class Cap(Term):
    wtype: WireType
    label: Label


@dataclass(frozen=True)
class Plus(Term):
    left: WireType
    right: WireType
    label_left: Label
    label_right: Label


@dataclass(frozen=True)
class PlusDag(Term):
    left: WireType
    right: WireType
    label_left: Label
    label_right: Label


@dataclass(frozen=True)
class Tensor(Term):
    left: WireType
    right: WireType
    label: Label


@dataclass(frozen=True)
class TensorDag(Term):
    left: WireType
    right: WireType
    label: Label


@dataclass(frozen=True)
class Unit(Term):
    label: Label


@dataclass(frozen=True)
class UnitDag(Term):
    label: Label


@dataclass(frozen=True)
class Contraction(Term):
    wtype: WireType
    branches: tuple[Label, ...]


@dataclass(frozen=True)
class ContractionDag(Term):
    wtype: WireType
    branches: tuple[Label, ...]


@dataclass(frozen=True)
class Scalar(Term):
    wtype: WireType
    value: object
    label: Label


@dataclass(frozen=True)
class Seq(Term):
    first: Term
    second: Term


@dataclass(frozen=True)
class Par(Term):
    left: Term
    right: Term


GENERATOR_TYPES = (EmptyD, Identity, Swap, Cup, Cap, Plus, PlusDag, Tensor,
                   TensorDag, Unit, UnitDag, Contraction, ContractionDag, Scalar)

Port = tuple  # (WireType, Label)


def _union(labels: Iterable[Label]) -> Label:
    out: frozenset = frozenset()
    for l in labels:
        out = out | l
    return out


@lru_cache(maxsize=None)
def term_dom(t: Term) -> tuple[Port, ...]:
    match t:
        case EmptyD():
            return ()
        case Identity(w, l) | Scalar(w, _, l):
            return ((w, l),)
        case Swap(a, b, la, lb):
            return ((a, la), (b, lb))
        case Cup(w, l):
            return ((w, l), (w, l))
        case Cap():
            return ()
        case Plus(a, b, la, lb):
            return ((a, la), (b, lb))
        case PlusDag(a, b, la, lb):
            return ((Sum(a, b), la | lb),)
        case Tensor(a, b, l):
            return ((a, l), (b, l))
        case TensorDag(a, b, l):
            return ((Prod(a, b), l),)
        case Unit():
            return ()
        case UnitDag(l):
            return ((UNIT, l),)
        case Contraction(w, branches):
            return tuple((w, br) for br in branches)
        case ContractionDag(w, branches):
            return ((w, _union(branches)),)
        case Seq(f, _):
            return term_dom(f)
        case Par(f, g):
            return term_dom(f) + term_dom(g)
    raise TypeError(f"unknown term {t!r}")


@lru_cache(maxsize=None)
def term_cod(t: Term) -> tuple[Port, ...]:
    match t:
        case EmptyD():
            return ()
        case Identity(w, l) | Scalar(w, _, l):
            return ((w, l),)
        case Swap(a, b, la, lb):
            return ((b, lb), (a, la))
        case Cup():
            return ()
        case Cap(w, l):
            return ((w, l), (w, l))
        case Plus(a, b, la, lb):
            return ((Sum(a, b), la | lb),)
        case PlusDag(a, b, la, lb):
            return ((a, la), (b, lb))
        case Tensor(a, b, l):
            return ((Prod(a, b), l),)
        case TensorDag(a, b, l):
            return ((a, l), (b, l))
        case Unit(l):
            return ((UNIT, l),)
        case UnitDag():
            return ()
        case Contraction(w, branches):
            return ((w, _union(branches)),)
        case ContractionDag(w, branches):
            return tuple((w, br) for br in branches)
        case Seq(_, g):
            return term_cod(g)
        case Par(f, g):
            return term_cod(f) + term_cod(g)
    raise TypeError(f"unknown term {t!r}")


def port_types(ports: Sequence[Port]) -> tuple[WireType, ...]:
    return tuple(t for t, _ in ports)


def ports_object(ports: Sequence[Port]) -> DiagObject:
    return DiagObject(port_types(ports))


def map_labels(t: Term, f: Callable[[Label], Label]) -> Term:
    match t:
        case EmptyD():
            return t
        case Identity(w, l):
            return Identity(w, f(l))
        case Swap(a, b, la, lb):
            return Swap(a, b, f(la), f(lb))
        case Cup(w, l):
            return Cup(w, f(l))
        case Cap(w, l):
            return Cap(w, f(l))
        case Plus(a, b, la, lb):
            return Plus(a, b, f(la), f(lb))
        case PlusDag(a, b, la, lb):
            return PlusDag(a, b, f(la), f(lb))
        case Tensor(a, b, l):
            return Tensor(a, b, f(l))
        case TensorDag(a, b, l):
            return TensorDag(a, b, f(l))
        case Unit(l):
            return Unit(f(l))
        case UnitDag(l):
            return UnitDag(f(l))
        case Contraction(w, branches):
            return Contraction(w, tuple(f(br) for br in branches))
        case ContractionDag(w, branches):
            return ContractionDag(w, tuple(f(br) for br in branches))
        case Scalar(w, v, l):
            return Scalar(w, v, f(l))
        case Seq(a, b):
            return Seq(map_labels(a, f), map_labels(b, f))
        case Par(a, b):
            return Par(map_labels(a, f), map_labels(b, f))
    raise TypeError(f"unknown term {t!r}")


def collect_labels(t: Term) -> list[Label]:
    """All labels in a fixed preorder traversal; drives canonical renaming."""
    out: list[Label] = []

    def walk(node: Term) -> None:
        match node:
            case Seq(a, b) | Par(a, b):
                walk(a)
                walk(b)
            case EmptyD():
                pass
            case Swap(_, _, la, lb) | Plus(_, _, la, lb) | PlusDag(_, _, la, lb):
                out.extend((la, lb))
            case Contraction(_, branches) | ContractionDag(_, branches):
                out.extend(branches)
            case Identity(_, l) | Cup(_, l) | Cap(_, l) | Tensor(_, _, l) \
                    | TensorDag(_, _, l) | Unit(l) | UnitDag(l) | Scalar(_, _, l):
                out.append(l)
            case _:
                raise TypeError(f"unknown term {node!r}")

    walk(t)
    return out


def iter_leaves(t: Term, path: tuple[int, ...] = ()):
    match t:
        case Seq(a, b):
            yield from iter_leaves(a, path + (0,))
            yield from iter_leaves(b, path + (1,))
        case Par(a, b):
            yield from iter_leaves(a, path + (0,))
            yield from iter_leaves(b, path + (1,))
        case _:
            yield path, t


def subterm_at(t: Term, path: Sequence[int]) -> Term:
    for step in path:
        match t:
            case Seq(a, b) | Par(a, b):
                t = (a, b)[step]
            case _:
                raise ValueError("path descends below a leaf")
    return t


def replace_at(t: Term, path: Sequence[int], new: Term) -> Term:
    if not path:
        return new
    step, rest = path[0], path[1:]
    match t:
        case Seq(a, b):
            return Seq(replace_at(a, rest, new), b) if step == 0 \
                else Seq(a, replace_at(b, rest, new))
        case Par(a, b):
            return Par(replace_at(a, rest, new), b) if step == 0 \
                else Par(a, replace_at(b, rest, new))
    raise ValueError("path descends below a leaf")


def seq_chain(t: Term) -> list[Term]:
    if isinstance(t, Seq):
        return seq_chain(t.first) + seq_chain(t.second)
    return [t]


def par_chain(t: Term) -> list[Term]:
    if isinstance(t, Par):
        return par_chain(t.left) + par_chain(t.right)
    return [t]


def seq_of(parts: Sequence[Term]) -> Term:
    if not parts:
        raise ValueError("empty sequential chain")
    out = parts[0]
    for p in parts[1:]:
        out = Seq(out, p)
    return out


def seq_balanced(parts: Sequence[Term]) -> Term:
    """Balanced sequential chain; keeps term depth logarithmic."""
    if not parts:
        raise ValueError("empty sequential chain")
    if len(parts) == 1:
        return parts[0]
    mid = len(parts) // 2
    return Seq(seq_balanced(parts[:mid]), seq_balanced(parts[mid:]))


def par_of(parts: Sequence[Term]) -> Term:
    """Balanced parallel bundle; the empty bundle is the empty diagram."""
    if not parts:
        return EmptyD()
    if len(parts) == 1:
        return parts[0]
    mid = len(parts) // 2
    return Par(par_of(parts[:mid]), par_of(parts[mid:]))


def identity_term(ports: Sequence[Port]) -> Term:
    return par_of([Identity(t, l) for t, l in ports])


# --- labeled diagrams ------------------------------------------------


@dataclass(frozen=True)
class LabeledDiagram:
    """A term together with its ambient world set."""

    term: Term
    worlds: frozenset
    ring: Semiring
    names: tuple = ()

    @property
    def dom(self) -> tuple[Port, ...]:
        return term_dom(self.term)

    @property
    def cod(self) -> tuple[Port, ...]:
        return term_cod(self.term)

    @property
    def dom_object(self) -> DiagObject:
        return ports_object(self.dom)

    @property
    def cod_object(self) -> DiagObject:
        return ports_object(self.cod)

    def name_of(self, w) -> str:
        for world, name in self.names:
            if world == w:
                return name
        return str(w)


@dataclass(frozen=True)
class Violation:
    path: tuple[int, ...]
    kind: str
    message: str


def validate(d: LabeledDiagram) -> list[Violation]:
    """Empty list when the diagram is well formed."""
    out: list[Violation] = []
    worlds = d.worlds

    def check_ambient(path, labels):
        for l in labels:
            if not l <= worlds:
                out.append(Violation(path, "ambient",
                                     f"label {sorted(l, key=str)} not within the world set"))

    def walk(node: Term, path: tuple[int, ...]) -> None:
        match node:
            case Seq(a, b):
                ca, db = term_cod(a), term_dom(b)
                if port_types(ca) != port_types(db):
                    out.append(Violation(path, "gluing-type",
                                         f"cannot glue {ports_object(ca)!r} to {ports_object(db)!r}"))
                else:
                    for i, ((_, l1), (_, l2)) in enumerate(zip(ca, db)):
                        if l1 != l2:
                            out.append(Violation(path, "gluing-label",
                                                 f"wire {i} glues label {sorted(l1, key=str)} "
                                                 f"to {sorted(l2, key=str)}"))
                walk(a, path + (0,))
                walk(b, path + (1,))
            case Par(a, b):
                walk(a, path + (0,))
                walk(b, path + (1,))
            case Plus(_, _, la, lb) | PlusDag(_, _, la, lb):
                if la & lb:
                    out.append(Violation(path, "disjointness",
                                         "sum branches share worlds"))
                check_ambient(path, (la, lb))
            case Swap(_, _, la, lb):
                check_ambient(path, (la, lb))
            case Contraction(_, branches) | ContractionDag(_, branches):
                seen: frozenset = frozenset()
                for br in branches:
                    if seen & br:
                        out.append(Violation(path, "disjointness",
                                             "contraction branches share worlds"))
                        break
                    seen = seen | br
                check_ambient(path, branches)
            case EmptyD():
                pass
            case Identity(_, l) | Cup(_, l) | Cap(_, l) | Tensor(_, _, l) \
                    | TensorDag(_, _, l) | Unit(l) | UnitDag(l) | Scalar(_, _, l):
                check_ambient(path, (l,))
            case _:
                out.append(Violation(path, "unknown", f"unknown node {node!r}"))

    walk(d.term, ())
    return out


def canonicalize(d: LabeledDiagram) -> LabeledDiagram:
    labels = collect_labels(d.term)
    mapping = canonical_rename(d.worlds, labels)
    term = map_labels(d.term, lambda l: rename_label(l, mapping))
    names = tuple((mapping[w], n) for w, n in d.names if w in mapping)
    return LabeledDiagram(term, frozenset(mapping.values()), d.ring, names)


def relabel_worlds(d: LabeledDiagram, mapping: dict) -> LabeledDiagram:
    """Apply a bijective renaming given as a dict."""
    term = map_labels(d.term, lambda l: rename_label(l, mapping))
    names = tuple((mapping[w], n) for w, n in d.names if w in mapping)
    return LabeledDiagram(term, frozenset(mapping[w] for w in d.worlds),
                          d.ring, names)


def compose_seq_fixed(f: LabeledDiagram, g: LabeledDiagram) -> LabeledDiagram:
    if f.worlds != g.worlds:
        raise ValueError("fixed-world composition needs one common world set")
    if f.cod != g.dom:
        raise ValueError(f"boundary mismatch: {f.cod!r} vs {g.dom!r}")
    return LabeledDiagram(Seq(f.term, g.term), f.worlds, f.ring, f.names)


def compose_par_fixed(f: LabeledDiagram, g: LabeledDiagram) -> LabeledDiagram:
    if f.worlds != g.worlds:
        raise ValueError("fixed-world composition needs one common world set")
    return LabeledDiagram(Par(f.term, g.term), f.worlds, f.ring, f.names)


def dagger_term(t: Term) -> Term:
    match t:
        case EmptyD() | Scalar():
            return t
        case Identity():
            return t
        case Swap(a, b, la, lb):
            return Swap(b, a, lb, la)
        case Cup(w, l):
            return Cap(w, l)
        case Cap(w, l):
            return Cup(w, l)
        case Plus(a, b, la, lb):
            return PlusDag(a, b, la, lb)
        case PlusDag(a, b, la, lb):
            return Plus(a, b, la, lb)
        case Tensor(a, b, l):
            return TensorDag(a, b, l)
        case TensorDag(a, b, l):
            return Tensor(a, b, l)
        case Unit(l):
            return UnitDag(l)
        case UnitDag(l):
            return Unit(l)
        case Contraction(w, branches):
            return ContractionDag(w, branches)
        case ContractionDag(w, branches):
            return Contraction(w, branches)
        case Seq(a, b):
            return Seq(dagger_term(b), dagger_term(a))
        case Par(a, b):
            return Par(dagger_term(a), dagger_term(b))
    raise TypeError(f"unknown term {t!r}")


# --- world-agnostic diagrams ----------------------------------------


class AgnosticDiagram:
    """A labeled diagram considered up to bijective world renaming.

    The representative is kept in canonical form, so structural
    equality of representatives decides equality of the classes.
    """

    __slots__ = ("diagram",)

    def __init__(self, diagram: LabeledDiagram):
        self.diagram = canonicalize(diagram)

    @property
    def term(self) -> Term:
        return self.diagram.term

    @property
    def worlds(self) -> frozenset:
        return self.diagram.worlds

    @property
    def ring(self) -> Semiring:
        return self.diagram.ring

    @property
    def dom(self) -> tuple[Port, ...]:
        return self.diagram.dom

    @property
    def cod(self) -> tuple[Port, ...]:
        return self.diagram.cod

    @property
    def dom_object(self) -> DiagObject:
        return self.diagram.dom_object

    @property
    def cod_object(self) -> DiagObject:
        return self.diagram.cod_object

    def __eq__(self, other) -> bool:
        return (isinstance(other, AgnosticDiagram)
                and self.term == other.term
                and self.worlds == other.worlds)

    def __hash__(self) -> int:
        return hash((self.term, self.worlds))

    def __repr__(self) -> str:
        return (f"<agnostic {self.dom_object!r} -> {self.cod_object!r} "
                f"over {len(self.worlds)} worlds>")


def compose_par_agnostic(f: AgnosticDiagram, g: AgnosticDiagram) -> AgnosticDiagram:
    pairs, lift_l, lift_r = product(f.worlds, g.worlds)
    term = Par(map_labels(f.term, lift_l), map_labels(g.term, lift_r))
    return AgnosticDiagram(LabeledDiagram(term, pairs, f.ring))


def compose_seq_agnostic(f: AgnosticDiagram, g: AgnosticDiagram) -> AgnosticDiagram:
    if port_types(f.cod) != port_types(g.dom):
        raise ValueError(f"boundary type mismatch: {f.cod_object!r} vs {g.dom_object!r}")
    pairs, lift_l, lift_r = product(f.worlds, g.worlds)
    constraints = [(lift_l(lf), lift_r(lg))
                   for (_, lf), (_, lg) in zip(f.cod, g.dom)]
    kept = eliminate(pairs, constraints)
    restrict = lambda l: l & kept
    term = Seq(map_labels(f.term, lambda l: restrict(lift_l(l))),
               map_labels(g.term, lambda l: restrict(lift_r(l))))
    return AgnosticDiagram(LabeledDiagram(term, kept, f.ring))


def seq_agnostic(*parts: AgnosticDiagram) -> AgnosticDiagram:
    out = parts[0]
    for p in parts[1:]:
        out = compose_seq_agnostic(out, p)
    return out


def par_agnostic(*parts: AgnosticDiagram) -> AgnosticDiagram:
    out = parts[0]
    for p in parts[1:]:
        out = compose_par_agnostic(out, p)
    return out


def with_star(f: AgnosticDiagram) -> AgnosticDiagram:
    """Add one world in which nothing is enabled."""
    fresh = len(f.worlds)
    return AgnosticDiagram(LabeledDiagram(f.term, f.worlds | {fresh}, f.ring))


def dead_worlds(d: "LabeledDiagram | AgnosticDiagram") -> frozenset:
    """Worlds that appear in no label of the term."""
    ld = d.diagram if isinstance(d, AgnosticDiagram) else d
    return ld.worlds - _union(collect_labels(ld.term))


def ensure_star(f: AgnosticDiagram) -> AgnosticDiagram:
    """Like ``with_star`` but never stacks a second dead world."""
    return f if dead_worlds(f) else with_star(f)


def drop_dead_worlds(d: "LabeledDiagram | AgnosticDiagram") -> AgnosticDiagram:
    """Forget every world with empty membership.

    Each dead world contributes the unit scalar on the all-disabled
    corner of the interpretation, so dropping them changes that corner
    only.
    """
    ld = d.diagram if isinstance(d, AgnosticDiagram) else d
    kept = ld.worlds - dead_worlds(ld)
    names = tuple((w, n) for w, n in ld.names if w in kept)
    return AgnosticDiagram(LabeledDiagram(ld.term, kept, ld.ring, names))


def dagger(x):
    if isinstance(x, AgnosticDiagram):
        return AgnosticDiagram(LabeledDiagram(dagger_term(x.term), x.worlds, x.ring))
    if isinstance(x, LabeledDiagram):
        return LabeledDiagram(dagger_term(x.term), x.worlds, x.ring, x.names)
    return dagger_term(x)


# --- canonical generators -------------------------------------------
#
# Fresh generators carry one world per realizable joint enabling
# pattern of their label variables, plus the pattern in which nothing
# is enabled.  This labeling makes them absorb composition with
# identities without losing worlds.


def _agn(term: Term, worlds, ring: Semiring) -> AgnosticDiagram:
    return AgnosticDiagram(LabeledDiagram(term, frozenset(worlds), ring))


def empty_d(ring: Semiring = RATIONAL) -> AgnosticDiagram:
    return _agn(EmptyD(), {0}, ring)


def identity_d(t: WireType, ring: Semiring = RATIONAL) -> AgnosticDiagram:
    return _agn(Identity(t, frozenset({0})), {0, 1}, ring)


def identity_obj_d(o: DiagObject, ring: Semiring = RATIONAL) -> AgnosticDiagram:
    """Identity on a whole object, one independent pattern per wire."""
    if not o.wires:
        return empty_d(ring)
    out = identity_d(o.wires[0], ring)
    for t in o.wires[1:]:
        out = compose_par_agnostic(out, identity_d(t, ring))
    return out


def swap_d(a: WireType, b: WireType, ring: Semiring = RATIONAL) -> AgnosticDiagram:
    return _agn(Swap(a, b, frozenset({0, 1}), frozenset({0, 2})), {0, 1, 2, 3}, ring)


def cup_d(t: WireType, ring: Semiring = RATIONAL) -> AgnosticDiagram:
    return _agn(Cup(t, frozenset({0})), {0, 1}, ring)


def cap_d(t: WireType, ring: Semiring = RATIONAL) -> AgnosticDiagram:
    return _agn(Cap(t, frozenset({0})), {0, 1}, ring)


def plus_d(a: WireType, b: WireType, ring: Semiring = RATIONAL) -> AgnosticDiagram:
    return _agn(Plus(a, b, frozenset({0}), frozenset({1})), {0, 1, 2}, ring)


def plusdag_d(a: WireType, b: WireType, ring: Semiring = RATIONAL) -> AgnosticDiagram:
    return _agn(PlusDag(a, b, frozenset({0}), frozenset({1})), {0, 1, 2}, ring)


def tensor_d(a: WireType, b: WireType, ring: Semiring = RATIONAL) -> AgnosticDiagram:
    return _agn(Tensor(a, b, frozenset({0})), {0, 1}, ring)


def tensordag_d(a: WireType, b: WireType, ring: Semiring = RATIONAL) -> AgnosticDiagram:
    return _agn(TensorDag(a, b, frozenset({0})), {0, 1}, ring)


def unit_d(ring: Semiring = RATIONAL) -> AgnosticDiagram:
    return _agn(Unit(frozenset({0})), {0, 1}, ring)


def unitdag_d(ring: Semiring = RATIONAL) -> AgnosticDiagram:
    return _agn(UnitDag(frozenset({0})), {0, 1}, ring)


def contraction_d(t: WireType, n: int, ring: Semiring = RATIONAL) -> AgnosticDiagram:
    branches = tuple(frozenset({i}) for i in range(n))
    return _agn(Contraction(t, branches), set(range(n + 1)), ring)


def contractiondag_d(t: WireType, n: int, ring: Semiring = RATIONAL) -> AgnosticDiagram:
    branches = tuple(frozenset({i}) for i in range(n))
    return _agn(ContractionDag(t, branches), set(range(n + 1)), ring)


def scalar_d(t: WireType, value, ring: Semiring = RATIONAL) -> AgnosticDiagram:
    return _agn(Scalar(t, value, frozenset({0})), {0, 1}, ring)


# --- permutations ----------------------------------------------------


def permutation_rows(ports: Sequence[Port], perm: Sequence[int]) -> tuple[list[Term], tuple[Port, ...]]:
    """Adjacent-swap rows realising ``target[i] = source[perm[i]]``.

    Returns the rows (possibly none) and the resulting port tuple.
    """
    n = len(ports)
    if sorted(perm) != list(range(n)):
        raise ValueError("not a permutation")
    cur = list(range(n))
    rows: list[Term] = []
    for target in range(n):
        pos = cur.index(perm[target])
        while pos > target:
            factors: list[Term] = []
            idx = 0
            while idx < n:
                if idx == pos - 1:
                    ta, la = ports[cur[idx]]
                    tb, lb = ports[cur[idx + 1]]
                    factors.append(Swap(ta, tb, la, lb))
                    idx += 2
                else:
                    tt, ll = ports[cur[idx]]
                    factors.append(Identity(tt, ll))
                    idx += 1
            rows.append(par_of(factors))
            cur[pos - 1], cur[pos] = cur[pos], cur[pos - 1]
            pos -= 1
    return rows, tuple(ports[i] for i in cur)


def permutation_term(ports: Sequence[Port], perm: Sequence[int]) -> Term:
    rows, _ = permutation_rows(ports, perm)
    if not rows:
        return identity_term(ports)
    return seq_of(rows)


# --- mirrored generators via compact closure ------------------------


def mirror(g: Term, ring: Semiring = RATIONAL, worlds: frozenset | None = None) -> LabeledDiagram:
    """Expand the mirror image of a generator with cups and caps.

    The result maps the generator's codomain back to its domain and is
    semantically the transpose; dedicated mirrored generators are
    checked against these expansions in the test suite.
    """
    if not isinstance(g, GENERATOR_TYPES):
        raise TypeError("mirror expects a single generator")
    dom = term_dom(g)
    cod = term_cod(g)
    if worlds is None:
        ambient = _union([l for _, l in dom + cod])
        worlds = frozenset(ambient) if ambient else frozenset({0})

    rows: list[Term] = []
    # caps provide a doubled copy of the domain to the right of the codomain
    cur: list[Port] = list(cod)
    if dom:
        factors: list[Term] = [Identity(t, l) for t, l in cod]
        for t, l in dom:
            factors.append(Cap(t, l))
        rows.append(par_of(factors))
        doubled: list[Port] = []
        for p in dom:
            doubled.extend([p, p])
        cur = list(cod) + doubled
        # group the first copies together, then the second copies
        k = len(dom)
        perm = list(range(len(cod)))
        base = len(cod)
        perm += [base + 2 * i for i in range(k)]
        perm += [base + 2 * i + 1 for i in range(k)]
        prows, cur_t = permutation_rows(cur, perm)
        rows.extend(prows)
        cur = list(cur_t)
    # run the generator on the first copies
    factors = [Identity(t, l) for t, l in cod]
    factors.append(g)
    factors.extend(Identity(t, l) for t, l in dom)
    rows.append(par_of(factors))
    cur = list(cod) + list(cod) + list(dom)
    # interleave the two codomain copies and close them with cups
    if cod:
        m = len(cod)
        perm = []
        for i in range(m):
            perm.extend([i, m + i])
        perm.extend(range(2 * m, 2 * m + len(dom)))
        prows, cur_t = permutation_rows(cur, perm)
        rows.extend(prows)
        factors = []
        for t, l in cod:
            factors.append(Cup(t, l))
        factors.extend(Identity(t, l) for t, l in dom)
        rows.append(par_of(factors))
    term = seq_of(rows) if rows else EmptyD()
    return LabeledDiagram(term, worlds, ring)
