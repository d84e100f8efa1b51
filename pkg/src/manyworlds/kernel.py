"""Wire types, boundary objects, and enabling bookkeeping.

A wire carries a type built from the unit type with binary sums and
products.  A boundary object is a finite list of wires; the empty
object is allowed.  An enabling picks, for each wire, whether it is
kept or disabled; the interpretation space of an object is the direct
sum over enablings of the tensor of the kept wires' spaces.

Basis layout.  The interpretation space of an object is realised as
the tensor product over wires of (wire space + one disabled slot), the
kept states first and the disabled slot last, leftmost wire most
significant.  Under that layout the interpretation of a concatenation
is literally the Kronecker product of the interpretations.  The index
set of one enabling is then a stride pattern rather than a contiguous
range; ``enabling_indices`` lists it, while ``block_offset`` reports
the contiguous range the enabling occupies in the enabling-major
ordering (see ``block_order_permutation`` for the change of basis).
The all-disabled enabling is always last in both orderings.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence


class WireType:
    __slots__ = ()


@dataclass(frozen=True)
class UnitType(WireType):
    __slots__ = ()

    def __repr__(self) -> str:
        return "1"


@dataclass(frozen=True)
class Sum(WireType):
    left: WireType
    right: WireType

    def __repr__(self) -> str:
        return f"({self.left!r}+{self.right!r})"


@dataclass(frozen=True)
class Prod(WireType):
    left: WireType
    right: WireType

    def __repr__(self) -> str:
        return f"({self.left!r}*{self.right!r})"


UNIT = UnitType()
QUBIT = Sum(UNIT, UNIT)


@lru_cache(maxsize=None)
def dim_type(t: WireType) -> int:
    if isinstance(t, UnitType):
        return 1
    if isinstance(t, Sum):
        return dim_type(t.left) + dim_type(t.right)
    if isinstance(t, Prod):
        return dim_type(t.left) * dim_type(t.right)
    raise TypeError(f"not a wire type: {t!r}")


@dataclass(frozen=True)
class DiagObject:
    wires: tuple[WireType, ...]

    def __len__(self) -> int:
        return len(self.wires)

    def concat(self, other: "DiagObject") -> "DiagObject":
        return DiagObject(self.wires + other.wires)

    def __repr__(self) -> str:
        if not self.wires:
            return "()"
        return " [] ".join(repr(w) for w in self.wires)


EMPTY_OBJECT = DiagObject(())


def obj(*types: WireType) -> DiagObject:
    return DiagObject(tuple(types))


@dataclass(frozen=True)
class Enabling:
    base: DiagObject
    mask: tuple[bool, ...]

    def __post_init__(self):
        if len(self.mask) != len(self.base.wires):
            raise ValueError("enabling mask length must match the object")

    def space_dim(self) -> int:
        d = 1
        for t, kept in zip(self.base.wires, self.mask):
            if kept:
                d *= dim_type(t)
        return d

    def __repr__(self) -> str:
        if not self.mask:
            return "()"
        parts = [repr(t) if kept else "." for t, kept in zip(self.base.wires, self.mask)]
        return " [] ".join(parts)


def interp_dim(o: DiagObject) -> int:
    d = 1
    for t in o.wires:
        d *= dim_type(t) + 1
    return d


def enumerate_enablings(o: DiagObject) -> list[Enabling]:
    """All enablings, kept-before-disabled per wire, leftmost wire most
    significant; the all-disabled enabling comes last."""
    out = []
    for bits in itertools.product((True, False), repeat=len(o.wires)):
        out.append(Enabling(o, bits))
    return out


def enabling_indices(o: DiagObject, e: Enabling) -> list[int]:
    """Positions of the enabling's basis vectors in the ambient layout.

    Kept wires range over their type's basis; a disabled wire is pinned
    to its final slot.  The returned list is ascending and its order
    agrees with the tensor basis of the enabled space (leftmost wire
    most significant).
    """
    if e.base != o:
        raise ValueError("enabling belongs to a different object")
    ranges = []
    for t, kept in zip(o.wires, e.mask):
        d = dim_type(t)
        ranges.append(range(d) if kept else range(d, d + 1))
    strides = _strides(o)
    out = []
    for combo in itertools.product(*ranges):
        out.append(sum(c * s for c, s in zip(combo, strides)))
    return out


@lru_cache(maxsize=None)
def _strides(o: DiagObject) -> tuple[int, ...]:
    sizes = [dim_type(t) + 1 for t in o.wires]
    strides = []
    acc = 1
    for s in reversed(sizes):
        strides.append(acc)
        acc *= s
    return tuple(reversed(strides))


def block_offset(o: DiagObject, e: Enabling) -> tuple[int, int]:
    """Offset and width of the enabling in the enabling-major ordering.

    Successive enablings occupy contiguous ranges there and the widths
    sum to ``interp_dim``.  Use ``block_order_permutation`` to convert
    those positions to the ambient tensor layout.
    """
    offset = 0
    for cand in enumerate_enablings(o):
        if cand == e:
            return offset, e.space_dim()
        offset += cand.space_dim()
    raise ValueError("enabling belongs to a different object")


def block_order_permutation(o: DiagObject) -> list[int]:
    """perm[k] = ambient index of the k-th basis vector in enabling-major order."""
    out = []
    for e in enumerate_enablings(o):
        out.extend(enabling_indices(o, e))
    return out


def enabling_of_index(o: DiagObject, index: int) -> Enabling:
    """The enabling owning a given ambient basis index."""
    mask = []
    for t, stride in zip(o.wires, _strides(o)):
        d = dim_type(t)
        digit = (index // stride) % (d + 1)
        mask.append(digit < d)
    return Enabling(o, tuple(mask))


def basis_label(o: DiagObject, index: int) -> str:
    """Human-readable description of an ambient basis index."""
    parts = []
    for t, stride in zip(o.wires, _strides(o)):
        d = dim_type(t)
        digit = (index // stride) % (d + 1)
        parts.append("." if digit == d else f"{t!r}:{digit}")
    return "(" + ", ".join(parts) + ")" if parts else "()"


# --- textual grammar -------------------------------------------------
#
# type    ::= '1' | '(' type '+' type ')' | '(' type '*' type ')'
# object  ::= '()' | type ('[]' type)*

_TYPE_TOKEN = {"1", "(", ")", "+", "*", "[]", "()"}


def _tokenize_types(text: str) -> list[str]:
    out = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if text.startswith("[]", i):
            out.append("[]")
            i += 2
            continue
        if text.startswith("()", i):
            out.append("()")
            i += 2
            continue
        if c in "()+*1":
            out.append(c)
            i += 1
            continue
        raise ValueError(f"unexpected character {c!r} in type at position {i}")
    return out


class _TypeParser:
    def __init__(self, tokens: Sequence[str]):
        self.tokens = list(tokens)
        self.pos = 0

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise ValueError("unexpected end of type")
        self.pos += 1
        return tok

    def parse_type(self) -> WireType:
        tok = self.take()
        if tok == "1":
            return UNIT
        if tok == "(":
            left = self.parse_type()
            op = self.take()
            if op not in "+*":
                raise ValueError(f"expected + or * in type, got {op!r}")
            right = self.parse_type()
            close = self.take()
            if close != ")":
                raise ValueError("unbalanced parenthesis in type")
            return Sum(left, right) if op == "+" else Prod(left, right)
        raise ValueError(f"unexpected token {tok!r} in type")


def parse_type(text: str) -> WireType:
    p = _TypeParser(_tokenize_types(text))
    t = p.parse_type()
    if p.peek() is not None:
        raise ValueError(f"trailing tokens after type: {p.tokens[p.pos:]}")
    return t


def parse_type_tokens(tokens: Sequence[str]) -> WireType:
    p = _TypeParser(tokens)
    t = p.parse_type()
    if p.peek() is not None:
        raise ValueError(f"trailing tokens after type: {p.tokens[p.pos:]}")
    return t


def parse_object(text: str) -> DiagObject:
    tokens = _tokenize_types(text)
    if tokens == ["()"]:
        return EMPTY_OBJECT
    wires = []
    p = _TypeParser(tokens)
    wires.append(p.parse_type())
    while p.peek() == "[]":
        p.take()
        wires.append(p.parse_type())
    if p.peek() is not None:
        raise ValueError(f"trailing tokens after object: {p.tokens[p.pos:]}")
    return DiagObject(tuple(wires))


def format_type(t: WireType) -> str:
    return repr(t)


def format_object(o: DiagObject) -> str:
    return repr(o)
