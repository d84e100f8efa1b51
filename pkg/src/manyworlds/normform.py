"""Normal forms: basis extraction, scalar grids, and synthesis.

Every diagram D -> C is equivalent to a three-stage pipeline:

* an object isomorphism taking D to a bundle of unit-typed wires, one
  per basis vector of D's interpretation space except the one with
  every wire disabled, which is represented by the whole bundle being
  disabled;
* a scalar grid with one world per matrix entry, copying each input
  wire to every output and weighting world (i, j) by the entry;
* the mirror image of the same isomorphism for C.

The pipeline's matrix is exactly the grid of scalars, so normalising
means interpreting the diagram and synthesising the pipeline from its
matrix.  Two diagrams with the same boundary are equivalent if and
only if their normal forms coincide; over exact semirings the
synthesised representatives are structurally identical.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagram import (AgnosticDiagram, Contraction, ContractionDag, EmptyD,
                      Identity, LabeledDiagram, Par, PlusDag, Scalar, Seq,
                      TensorDag, Term, Unit, UnitDag, compose_seq_fixed,
                      dagger, identity_term, map_labels, par_of,
                      permutation_rows, seq_agnostic, seq_balanced, validate)
from .kernel import (DiagObject, Prod, Sum, UNIT, UnitType, WireType,
                     dim_type, interp_dim)
from .ringmat import Semiring, SemiringMatrix
from .semantics import sem_agnostic


def _pullback(term: Term, blocks) -> Term:
    """Relabel along a world refinement; ``blocks[w]`` lists the new
    worlds that behave like the old world ``w``."""
    return map_labels(term, lambda lab: frozenset(x for w in lab for x in blocks[w]))


def build_iso_type(t: WireType, ring: Semiring) -> LabeledDiagram:
    """Basis extraction for one wire.

    The result maps (t : {states}) to dim(t) unit wires over the world
    set {0 .. dim(t)}; in world s wire s alone is enabled and the map
    picks the s-th coordinate, while world dim(t) has nothing enabled.
    """
    if isinstance(t, UnitType):
        return LabeledDiagram(Identity(UNIT, frozenset({0})),
                              frozenset({0, 1}), ring)
    if isinstance(t, Sum):
        da, db = dim_type(t.left), dim_type(t.right)
        worlds = frozenset(range(da + db + 1))
        ia = build_iso_type(t.left, ring)
        ib = build_iso_type(t.right, ring)
        first = LabeledDiagram(
            PlusDag(t.left, t.right, frozenset(range(da)),
                    frozenset(range(da, da + db))),
            worlds, ring)
        shifted = map_labels(ib.term, lambda lab: frozenset(da + w for w in lab))
        second = LabeledDiagram(Par(ia.term, shifted), worlds, ring)
        return compose_seq_fixed(first, second)
    if isinstance(t, Prod):
        da, db = dim_type(t.left), dim_type(t.right)
        n = da * db
        worlds = frozenset(range(n + 1))
        ia = build_iso_type(t.left, ring)
        ib = build_iso_type(t.right, ring)
        first = LabeledDiagram(TensorDag(t.left, t.right, frozenset(range(n))),
                               worlds, ring)
        # both component states are determined by the pair state; the
        # dead worlds of the sub-isomorphisms appear in no label
        left = _pullback(ia.term, {s: [s * db + j for j in range(db)]
                                   for s in range(da)})
        right = _pullback(ib.term, {s: [i * db + s for i in range(da)]
                                    for s in range(db)})
        second = LabeledDiagram(Par(left, right), worlds, ring)
        # split each left wire per right state; the right wires are
        # then redundant and are dropped
        splitters = [ContractionDag(UNIT, tuple(frozenset({i * db + j})
                                                for j in range(db)))
                     for i in range(da)]
        droppers = [UnitDag(frozenset(i * db + j for i in range(da)))
                    for j in range(db)]
        third = LabeledDiagram(par_of(splitters + droppers), worlds, ring)
        return compose_seq_fixed(compose_seq_fixed(first, second), third)
    raise TypeError(f"not a wire type: {t!r}")


def build_iso(o: DiagObject, ring: Semiring) -> LabeledDiagram:
    """Basis extraction for a whole object.

    Maps o to interp_dim(o) - 1 unit wires over the worlds
    {0 .. interp_dim(o) - 1}; in world b wire b alone is enabled, with
    the final world (the all-disabled basis vector) enabling nothing.
    """
    if not o.wires:
        return LabeledDiagram(EmptyD(), frozenset({0}), ring)
    if len(o.wires) == 1:
        return build_iso_type(o.wires[0], ring)
    prefix = DiagObject(o.wires[:-1])
    last = o.wires[-1]
    p = interp_dim(prefix)
    length = dim_type(last) + 1
    n = p * length
    worlds = frozenset(range(n))
    ip = build_iso(prefix, ring)
    il = build_iso_type(last, ring)
    left = _pullback(ip.term, {x: [x * length + s for s in range(length)]
                               for x in range(p)})
    right = _pullback(il.term, {s: [x * length + s for x in range(p)]
                                for s in range(length)})
    first = LabeledDiagram(Par(left, right), worlds, ring)
    # prefix wire x splits per last-wire digit; last wire y splits per
    # prefix digit and keeps only the copy where the prefix is disabled
    splitters = [ContractionDag(UNIT, tuple(frozenset({x * length + s})
                                            for s in range(length)))
                 for x in range(p - 1)]
    splitters += [ContractionDag(UNIT, tuple(frozenset({x * length + y})
                                             for x in range(p)))
                  for y in range(length - 1)]
    second = LabeledDiagram(par_of(splitters), worlds, ring)
    keep = [Identity(UNIT, frozenset({b})) for b in range((p - 1) * length)]
    tail = []
    for y in range(length - 1):
        tail.extend(UnitDag(frozenset({x * length + y})) for x in range(p - 1))
        tail.append(Identity(UNIT, frozenset({(p - 1) * length + y})))
    third = LabeledDiagram(par_of(keep + tail), worlds, ring)
    return compose_seq_fixed(compose_seq_fixed(first, second), third)


def iso_basis_row(n_wires: int, b: int) -> int:
    """Ambient index of basis vector b in the extracted wire bundle."""
    full = (1 << n_wires) - 1
    if b == n_wires:
        return full
    return full - (1 << (n_wires - 1 - b))


def build_matrix_block(mat: SemiringMatrix, ring: Semiring) -> LabeledDiagram:
    """The scalar grid over worlds (i, j), one per matrix entry.

    Maps (cols - 1) unit wires to (rows - 1) unit wires; in world
    (i, j) input wire j and output wire i alone are enabled (none when
    the index is the final, all-disabled one) and the map multiplies by
    the entry.  All entries appear, zeros included.
    """
    nb, na = mat.rows, mat.cols
    if nb == 0 or na == 0:
        raise ValueError("interpretation dimensions are at least one")

    def g(i: int, j: int) -> int:
        return i * na + j

    worlds = frozenset(range(nb * na))
    rows: list[Term] = []
    inputs = [frozenset(g(i, j) for i in range(nb)) for j in range(na - 1)]
    # accumulators start from the all-disabled input column, created
    # out of nothing and weighted by that column's entries
    acc = [frozenset({g(i, na - 1)}) for i in range(nb)]
    rows.append(par_of([Unit(l) for l in acc]
                       + [Identity(UNIT, l) for l in inputs]))
    rows.append(par_of([Scalar(UNIT, mat[i, na - 1], acc[i]) for i in range(nb)]
                       + [Identity(UNIT, l) for l in inputs]))
    for j in range(na - 1):
        rest = inputs[j + 1:]
        copies = [frozenset({g(i, j)}) for i in range(nb)]
        rows.append(par_of(
            [Identity(UNIT, l) for l in acc]
            + [ContractionDag(UNIT, tuple(copies))]
            + [Identity(UNIT, l) for l in rest]))
        rows.append(par_of(
            [Identity(UNIT, l) for l in acc]
            + [Scalar(UNIT, mat[i, j], copies[i]) for i in range(nb)]
            + [Identity(UNIT, l) for l in rest]))
        # interleave the copies with the accumulators, then merge
        ports = [(UNIT, l) for l in acc] + [(UNIT, l) for l in copies] \
            + [(UNIT, l) for l in rest]
        perm = []
        for i in range(nb):
            perm.extend([i, nb + i])
        perm.extend(range(2 * nb, 2 * nb + len(rest)))
        prows, _ = permutation_rows(ports, perm)
        rows.extend(prows)
        acc = [acc[i] | copies[i] for i in range(nb)]
        rows.append(par_of(
            [Contraction(UNIT, (acc[i] - copies[i], copies[i]))
             for i in range(nb)]
            + [Identity(UNIT, l) for l in rest]))
    rows.append(par_of([Identity(UNIT, l) for l in acc[:-1]]
                       + [UnitDag(acc[-1])]))
    return LabeledDiagram(seq_balanced(rows), worlds, ring)


@dataclass
class NormalForm:
    """Synthesised representative plus the matrix it encodes."""

    diagram: AgnosticDiagram
    matrix: SemiringMatrix
    dom_object: DiagObject
    cod_object: DiagObject
    ring: Semiring

    def __eq__(self, other) -> bool:
        if not isinstance(other, NormalForm):
            return NotImplemented
        return (self.dom_object == other.dom_object
                and self.cod_object == other.cod_object
                and self.matrix.equal(other.matrix))

    def __repr__(self) -> str:
        return (f"<normal form {self.dom_object!r} -> {self.cod_object!r} over "
                f"{self.ring.name}>")


def synthesize(mat: SemiringMatrix, dom_object: DiagObject,
               cod_object: DiagObject, ring: Semiring) -> AgnosticDiagram:
    """The canonical diagram whose interpretation is the given matrix."""
    if mat.cols != interp_dim(dom_object) or mat.rows != interp_dim(cod_object):
        raise ValueError(
            f"matrix shape {mat.rows}x{mat.cols} does not interpret "
            f"{dom_object!r} -> {cod_object!r}")
    iso_in = AgnosticDiagram(build_iso(dom_object, ring))
    iso_out = AgnosticDiagram(dagger(build_iso(cod_object, ring)))
    block = AgnosticDiagram(build_matrix_block(mat, ring))
    return seq_agnostic(iso_in, block, iso_out)


def normalize(d: AgnosticDiagram | LabeledDiagram) -> NormalForm:
    if isinstance(d, LabeledDiagram):
        d = AgnosticDiagram(d)
    mat = sem_agnostic(d)
    nf = synthesize(mat, d.dom_object, d.cod_object, d.ring)
    return NormalForm(nf, mat, d.dom_object, d.cod_object, d.ring)


def equivalent(a: AgnosticDiagram | LabeledDiagram,
               b: AgnosticDiagram | LabeledDiagram) -> bool:
    """Boundary-preserving semantic equivalence, decided by normal forms."""
    na, nb = normalize(a), normalize(b)
    return na == nb