"""Linear-map semantics of world-labeled diagrams.

Each world induces one linear map: a wire contributes its type's space
in the worlds of its label and nothing elsewhere, and every generator
acts as the obvious map on whatever remains enabled.  The diagram as a
whole acts on interpretation spaces, which extend each wire with one
disabled slot; the full matrix is assembled by scattering each world's
map into the block of basis vectors matching that world's enabling and
summing over worlds.

With the tensor basis layout of :mod:`manyworlds.kernel`, the matrix
of a parallel composition is literally the Kronecker product of the
halves' matrices, and sequential composition is matrix product.
"""

from __future__ import annotations

from typing import Sequence

from .diagram import (AgnosticDiagram, Cap, Contraction, ContractionDag, Cup,
                      EmptyD, Identity, LabeledDiagram, Par, Plus, PlusDag,
                      Port, Scalar, Seq, Swap, Tensor, TensorDag, Term, Unit,
                      UnitDag, term_cod, term_dom)
from .kernel import (DiagObject, Enabling, dim_type, enabling_indices,
                     interp_dim)
from .ringmat import QS2, Semiring, SemiringMatrix


def world_enabling(o: DiagObject, ports: Sequence[Port], z) -> Enabling:
    return Enabling(o, tuple(z in label for _, label in ports))


_ONE_CACHE: dict = {}


def _scalar_one(ring: Semiring) -> SemiringMatrix:
    """Shared 1x1 unit matrix; callers must never mutate it."""
    m = _ONE_CACHE.get(id(ring))
    if m is None:
        m = SemiringMatrix.identity(ring, 1)
        _ONE_CACHE[id(ring)] = m
    return m


def sem_world(term: Term, z, ring: Semiring,
              memo: dict | None = None) -> SemiringMatrix:
    """The linear map of one world, on the enabled spaces only."""
    if memo is None:
        memo = {}
    key = (id(term), z)
    hit = memo.get(key)
    if hit is not None:
        return hit
    out = _sem_world(term, z, ring, memo)
    memo[key] = out
    return out


def _sem_world(term: Term, z, ring: Semiring, memo: dict) -> SemiringMatrix:
    one = ring.one
    match term:
        case EmptyD():
            return _scalar_one(ring)
        case Identity(w, l):
            if z not in l:
                return _scalar_one(ring)
            d = dim_type(w)
            return _scalar_one(ring) if d == 1 else SemiringMatrix.identity(ring, d)
        case Swap(a, b, la, lb):
            da, db = dim_type(a), dim_type(b)
            if z in la and z in lb:
                m = SemiringMatrix.zeros(ring, db * da, da * db)
                for i in range(da):
                    for j in range(db):
                        m[j * da + i, i * db + j] = one
                return m
            if z in la:
                return SemiringMatrix.identity(ring, da)
            if z in lb:
                return SemiringMatrix.identity(ring, db)
            return _scalar_one(ring)
        case Cup(w, l):
            if z not in l:
                return _scalar_one(ring)
            d = dim_type(w)
            m = SemiringMatrix.zeros(ring, 1, d * d)
            for i in range(d):
                m[0, i * d + i] = one
            return m
        case Cap(w, l):
            return _sem_world(Cup(w, l), z, ring, memo).transpose()
        case Plus(a, b, la, lb):
            da, db = dim_type(a), dim_type(b)
            if z in la:
                m = SemiringMatrix.zeros(ring, da + db, da)
                for i in range(da):
                    m[i, i] = one
                return m
            if z in lb:
                m = SemiringMatrix.zeros(ring, da + db, db)
                for j in range(db):
                    m[da + j, j] = one
                return m
            return _scalar_one(ring)
        case PlusDag(a, b, la, lb):
            return _sem_world(Plus(a, b, la, lb), z, ring, memo).transpose()
        case Tensor(a, b, l) | TensorDag(a, b, l):
            return SemiringMatrix.identity(ring, dim_type(a) * dim_type(b)) \
                if z in l else _scalar_one(ring)
        case Unit() | UnitDag():
            return _scalar_one(ring)
        case Contraction(w, branches) | ContractionDag(w, branches):
            if any(z in br for br in branches):
                return SemiringMatrix.identity(ring, dim_type(w))
            return _scalar_one(ring)
        case Scalar(w, v, l):
            if z not in l:
                return _scalar_one(ring)
            d = dim_type(w)
            if d == 1:
                return SemiringMatrix.scalar(ring, v)
            return SemiringMatrix.identity(ring, d).scalar_mul(v)
        case Seq(f, g):
            return sem_world(g, z, ring, memo).matmul(sem_world(f, z, ring, memo))
        case Par(f, g):
            return sem_world(f, z, ring, memo).kron(sem_world(g, z, ring, memo))
    raise TypeError(f"unknown term {term!r}")


def _support_masks(term: Term, world_bit: dict) -> dict:
    """Per-node bitmask of the worlds named anywhere in the subtree."""
    masks: dict = {}

    def label_mask(lab) -> int:
        m = 0
        for w in lab:
            m |= world_bit.get(w, 0)
        return m

    def walk(t: Term) -> int:
        cached = masks.get(id(t))
        if cached is not None:
            return cached
        match t:
            case Seq(a, b) | Par(a, b):
                m = walk(a) | walk(b)
            case EmptyD():
                m = 0
            case Swap(_, _, la, lb) | Plus(_, _, la, lb) | PlusDag(_, _, la, lb):
                m = label_mask(la) | label_mask(lb)
            case Contraction(_, branches) | ContractionDag(_, branches):
                m = 0
                for br in branches:
                    m |= label_mask(br)
            case Identity(_, l) | Cup(_, l) | Cap(_, l) | Tensor(_, _, l) \
                    | TensorDag(_, _, l) | Unit(l) | UnitDag(l) | Scalar(_, _, l):
                m = label_mask(l)
            case _:
                raise TypeError(f"unknown term {t!r}")
        masks[id(t)] = m
        return m

    walk(term)
    return masks


def sem_agnostic(d: LabeledDiagram | AgnosticDiagram) -> SemiringMatrix:
    """The full matrix on interpretation spaces, summed over worlds."""
    if isinstance(d, AgnosticDiagram):
        d = d.diagram
    dom_ports, cod_ports = term_dom(d.term), term_cod(d.term)
    dom_o, cod_o = d.dom_object, d.cod_object
    ring = d.ring
    out = SemiringMatrix.zeros(ring, interp_dim(cod_o), interp_dim(dom_o))
    world_bit = {w: 1 << k for k, w in enumerate(d.worlds)}
    masks = _support_masks(d.term, world_bit)
    one = _scalar_one(ring)
    memo: dict = {}

    def go(t: Term, z, bit: int) -> SemiringMatrix:
        # a subtree naming the world nowhere acts as the unit scalar
        if masks[id(t)] & bit == 0:
            return one
        key = (id(t), z)
        hit = memo.get(key)
        if hit is not None:
            return hit
        match t:
            case Seq(f, g):
                a, b = go(f, z, bit), go(g, z, bit)
                if a is one and b.cols == 1:
                    res = b
                elif b is one and a.rows == 1:
                    res = a
                else:
                    res = b.matmul(a)
            case Par(f, g):
                a, b = go(f, z, bit), go(g, z, bit)
                if a is one:
                    res = b
                elif b is one:
                    res = a
                else:
                    res = a.kron(b)
            case _:
                res = _sem_world(t, z, ring, memo)
        memo[key] = res
        return res

    for z in d.worlds:
        mz = go(d.term, z, world_bit[z])
        rows = enabling_indices(cod_o, world_enabling(cod_o, cod_ports, z))
        cols = enabling_indices(dom_o, world_enabling(dom_o, dom_ports, z))
        out.direct_block_write(rows, cols, mz, accumulate=True)
    return out


class Interpretation:
    """A diagram's matrix with convenient block access."""

    __slots__ = ("matrix", "dom_object", "cod_object", "ring")

    def __init__(self, matrix: SemiringMatrix, dom_object: DiagObject,
                 cod_object: DiagObject, ring: Semiring):
        self.matrix = matrix
        self.dom_object = dom_object
        self.cod_object = cod_object
        self.ring = ring

    def block(self, in_mask: Sequence[bool], out_mask: Sequence[bool]) -> SemiringMatrix:
        rows = enabling_indices(self.cod_object,
                                Enabling(self.cod_object, tuple(out_mask)))
        cols = enabling_indices(self.dom_object,
                                Enabling(self.dom_object, tuple(in_mask)))
        return self.matrix.gather(rows, cols)

    def fully_enabled_block(self) -> SemiringMatrix:
        return self.block((True,) * len(self.dom_object),
                          (True,) * len(self.cod_object))

    def scalar_value(self):
        if self.dom_object.wires or self.cod_object.wires:
            raise ValueError("scalar_value needs empty boundaries")
        return self.matrix[0, 0]

    def __repr__(self) -> str:
        return (f"<interpretation {self.dom_object!r} -> {self.cod_object!r}: "
                f"{self.matrix!r}>")


def sem(d: LabeledDiagram | AgnosticDiagram) -> Interpretation:
    if isinstance(d, AgnosticDiagram):
        d = d.diagram
    return Interpretation(sem_agnostic(d), d.dom_object, d.cod_object, d.ring)


def equal_sem(a: LabeledDiagram | AgnosticDiagram,
              b: LabeledDiagram | AgnosticDiagram) -> bool:
    """Matrix-level agreement of two diagrams with equal boundaries."""
    sa, sb = sem(a), sem(b)
    if sa.dom_object != sb.dom_object or sa.cod_object != sb.cod_object:
        return False
    return sa.matrix.equal(sb.matrix)


def to_complex_value(v) -> complex:
    if isinstance(v, QS2):
        return v.to_complex()
    if isinstance(v, bool):
        return complex(1 if v else 0)
    return complex(v)


def matrix_to_complex(m: SemiringMatrix) -> list[list[complex]]:
    return [[to_complex_value(v) for v in row] for row in m.data]
