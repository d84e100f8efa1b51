"""Directed rewrite rules on labeled diagrams, with replayable derivations.

A rule rewrites one contiguous segment of a term while everything else
is kept.  Rules declare how they touch the ambient world set through
``world_effect``: most leave it alone ("none"), the remaining ones
rename worlds, delete a world that cannot occur ("annihilate"), or
trade one world for a pair of twins ("split").  The shipped catalog is
checked against the matrix semantics when it is first built: every
rule is applied to randomized instances and must preserve the
interpretation exactly, so an unsound rule cannot be registered.

Matching is syntactic on the term tree; sequential and parallel
composition are read modulo associativity only.  A position therefore
addresses a run of consecutive factors inside a flattened composition
chain rather than a node of one fixed parenthesisation.
"""

from __future__ import annotations

import json
import random
import zlib
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Optional, Sequence

from .diagram import (AgnosticDiagram, Cap, Contraction, ContractionDag, Cup,
                      EmptyD, GENERATOR_TYPES, Identity, LabeledDiagram, Par,
                      Plus, PlusDag, Scalar, Seq, Swap, Tensor, TensorDag,
                      Term, Unit, UnitDag, collect_labels, identity_d,
                      identity_term, map_labels, par_chain, par_of,
                      permutation_rows, relabel_worlds, replace_at,
                      seq_agnostic, seq_chain, seq_of, subterm_at, term_cod,
                      term_dom, validate)
from .kernel import (Prod, QUBIT, Sum, UNIT, WireType, dim_type, format_type,
                     parse_type)
from .ringmat import QSQRT2I, RATIONAL, Semiring
from .semantics import equal_sem, sem_world
from .worlds import world_sort_key


class RewriteError(Exception):
    """A rule could not be applied where it was asked to."""


class UnsoundRuleError(RewriteError):
    """Registration self-test caught a rule that changed the semantics."""


# --- associativity ---------------------------------------------------


def term_congruent(a: Term, b: Term) -> bool:
    """Equality of terms modulo regrouping of Seq and Par chains."""
    if isinstance(a, Seq) or isinstance(b, Seq):
        ca, cb = seq_chain(a), seq_chain(b)
        return len(ca) == len(cb) and all(
            term_congruent(x, y) for x, y in zip(ca, cb))
    if isinstance(a, Par) or isinstance(b, Par):
        ca, cb = par_chain(a), par_chain(b)
        return len(ca) == len(cb) and all(
            term_congruent(x, y) for x, y in zip(ca, cb))
    return a == b


# --- positions -------------------------------------------------------
#
# A position is a tuple of segment selectors ("seq" | "par", i, j),
# each picking the factors i..j-1 of the flattened chain of the
# current focus.  Selectors are stable under re-association.

Position = tuple

Segment = tuple


def _chain_of(term: Term, kind: str) -> list[Term]:
    if kind == "seq":
        return seq_chain(term)
    if kind == "par":
        return par_chain(term)
    raise RewriteError(f"unknown segment kind {kind!r}")


def _rebuild(parts: Sequence[Term], kind: str) -> Term:
    parts = list(parts)
    if kind == "seq":
        return parts[0] if len(parts) == 1 else seq_of(parts)
    return par_of(parts)


def focus_at(term: Term, position: Position) -> Term:
    t = term
    for kind, i, j in position:
        chain = _chain_of(t, kind)
        if not 0 <= i < j <= len(chain):
            raise RewriteError(
                f"segment ({kind}, {i}, {j}) out of range for a chain "
                f"of {len(chain)}")
        t = _rebuild(chain[i:j], kind)
    return t


def replace_segment(term: Term, position: Position, new: Term) -> Term:
    if not position:
        return new
    (kind, i, j), rest = position[0], tuple(position[1:])
    chain = _chain_of(term, kind)
    if not 0 <= i < j <= len(chain):
        raise RewriteError(f"segment ({kind}, {i}, {j}) out of range")
    inner = replace_segment(_rebuild(chain[i:j], kind), rest, new)
    return _rebuild(list(chain[:i]) + [inner] + list(chain[j:]), kind)


def replace_and_map(term: Term, position: Position, new: Term,
                    f: Callable) -> Term:
    """Replace the focus and apply a label map to everything outside it."""
    if not position:
        return new
    (kind, i, j), rest = position[0], tuple(position[1:])
    chain = _chain_of(term, kind)
    if not 0 <= i < j <= len(chain):
        raise RewriteError(f"segment ({kind}, {i}, {j}) out of range")
    inner = replace_and_map(_rebuild(chain[i:j], kind), rest, new, f)
    parts = [map_labels(t, f) for t in chain[:i]] + [inner] + \
            [map_labels(t, f) for t in chain[j:]]
    return _rebuild(parts, kind)


def positions(term: Term) -> Iterator[Position]:
    """Every segment position of a term, outermost first."""
    yield ()
    yield from _positions_seq(term, ())


def _positions_seq(t: Term, prefix: Position) -> Iterator[Position]:
    chain = seq_chain(t)
    n = len(chain)
    if n > 1:
        for i in range(n):
            for j in range(i + 1, n + 1):
                if (i, j) == (0, n):
                    continue
                pos = prefix + (("seq", i, j),)
                yield pos
                if j == i + 1:
                    yield from _positions_par(chain[i], pos)
    else:
        yield from _positions_par(t, prefix)


def _positions_par(t: Term, prefix: Position) -> Iterator[Position]:
    chain = par_chain(t)
    n = len(chain)
    if n > 1:
        for i in range(n):
            for j in range(i + 1, n + 1):
                if (i, j) == (0, n):
                    continue
                pos = prefix + (("par", i, j),)
                yield pos
                if j == i + 1:
                    yield from _positions_seq(chain[i], pos)


# --- metavariables ---------------------------------------------------


@dataclass(frozen=True)
class TVar:
    """Wire type metavariable."""

    name: str


@dataclass(frozen=True)
class TSum:
    """Structural sum-type pattern."""

    left: object
    right: object


@dataclass(frozen=True)
class TProd:
    """Structural product-type pattern."""

    left: object
    right: object


@dataclass(frozen=True)
class LVar:
    """Label metavariable."""

    name: str


@dataclass(frozen=True)
class LUnion:
    """The union of all labels bound to a branch-tuple variable."""

    branches: str


@dataclass(frozen=True)
class SVar:
    """Scalar metavariable."""

    name: str


@dataclass(frozen=True)
class SProd:
    left: object
    right: object


@dataclass(frozen=True)
class SOne:
    pass


@dataclass(frozen=True)
class SZero:
    pass


@dataclass(frozen=True)
class BVar:
    """Branch-tuple metavariable, any arity."""

    name: str


@dataclass(frozen=True)
class BCat:
    """Concatenation of two branch-tuple patterns."""

    left: object
    right: object


@dataclass(frozen=True)
class Hole(Term):
    """Matches any subterm."""

    name: str


@dataclass(frozen=True)
class LeafHole(Term):
    """Matches a single generator leaf."""

    name: str


@dataclass(frozen=True)
class IdRow(Term):
    """Matches a parallel row of identities, possibly the empty one."""

    name: str


_GEN_FIELDS = {
    Identity: (("wtype", "T"), ("label", "L")),
    Swap: (("left", "T"), ("right", "T"),
           ("label_left", "L"), ("label_right", "L")),
    Cup: (("wtype", "T"), ("label", "L")),
    Cap: (("wtype", "T"), ("label", "L")),
    Plus: (("left", "T"), ("right", "T"),
           ("label_left", "L"), ("label_right", "L")),
    PlusDag: (("left", "T"), ("right", "T"),
              ("label_left", "L"), ("label_right", "L")),
    Tensor: (("left", "T"), ("right", "T"), ("label", "L")),
    TensorDag: (("left", "T"), ("right", "T"), ("label", "L")),
    Unit: (("label", "L"),),
    UnitDag: (("label", "L"),),
    Contraction: (("wtype", "T"), ("branches", "B")),
    ContractionDag: (("wtype", "T"), ("branches", "B")),
    Scalar: (("wtype", "T"), ("value", "S"), ("label", "L")),
}


# --- matching --------------------------------------------------------


def _partitions(items: Sequence, k: int) -> Iterator[list]:
    # consecutive split into k nonempty groups
    if k == 1:
        if items:
            yield [list(items)]
        return
    for i in range(1, len(items) - k + 2):
        head = list(items[:i])
        for rest in _partitions(items[i:], k - 1):
            yield [head] + rest


def _resolve_label(p, b: dict):
    if isinstance(p, LVar):
        return (p.name in b), b.get(p.name)
    if isinstance(p, LUnion):
        bs = b.get(p.branches)
        if bs is None:
            return False, None
        out: frozenset = frozenset()
        for l in bs:
            out = out | l
        return True, out
    return True, p


def _resolve_scalar(p, b: dict, ring: Semiring):
    if isinstance(p, SVar):
        return (p.name in b), b.get(p.name)
    if isinstance(p, SProd):
        ok1, v1 = _resolve_scalar(p.left, b, ring)
        ok2, v2 = _resolve_scalar(p.right, b, ring)
        if ok1 and ok2:
            return True, ring.mul(v1, v2)
        return False, None
    if isinstance(p, SOne):
        return True, ring.one
    if isinstance(p, SZero):
        return True, ring.zero
    return True, p


def _match_type(p, v, b: dict) -> Iterator[dict]:
    if isinstance(p, TVar):
        if p.name in b:
            if b[p.name] == v:
                yield b
        else:
            b2 = dict(b)
            b2[p.name] = v
            yield b2
    elif isinstance(p, TSum) and isinstance(v, Sum):
        for b2 in _match_type(p.left, v.left, b):
            yield from _match_type(p.right, v.right, b2)
    elif isinstance(p, TProd) and isinstance(v, Prod):
        for b2 in _match_type(p.left, v.left, b):
            yield from _match_type(p.right, v.right, b2)
    elif p == v:
        yield b


def _match_field(kind: str, p, v, b: dict, ring: Semiring) -> Iterator[dict]:
    if kind == "T":
        yield from _match_type(p, v, b)
    elif kind == "L":
        if isinstance(p, LVar) and p.name not in b:
            b2 = dict(b)
            b2[p.name] = v
            yield b2
        else:
            ok, want = _resolve_label(p, b)
            if ok and want == v:
                yield b
    elif kind == "S":
        if isinstance(p, SVar) and p.name not in b:
            b2 = dict(b)
            b2[p.name] = v
            yield b2
        else:
            ok, want = _resolve_scalar(p, b, ring)
            if ok and ring.eq(want, v):
                yield b
    elif kind == "B":
        yield from _match_branches(p, v, b, ring)
    else:
        raise RewriteError(f"unknown field kind {kind!r}")


def _match_branches(p, bs: tuple, b: dict, ring: Semiring) -> Iterator[dict]:
    if isinstance(p, BVar):
        if p.name in b:
            if tuple(b[p.name]) == tuple(bs):
                yield b
        else:
            b2 = dict(b)
            b2[p.name] = tuple(bs)
            yield b2
    elif isinstance(p, BCat):
        for cut in range(len(bs) + 1):
            for b2 in _match_branches(p.left, bs[:cut], b, ring):
                yield from _match_branches(p.right, bs[cut:], b2, ring)
    elif isinstance(p, tuple):
        if len(p) != len(bs):
            return
        yield from _match_label_list(p, bs, b)
    else:
        raise RewriteError("bad branch pattern")


def _match_label_list(ps, ls, b: dict) -> Iterator[dict]:
    if not ps:
        yield b
        return
    p, l = ps[0], ls[0]
    if isinstance(p, LVar) and p.name not in b:
        b2 = dict(b)
        b2[p.name] = l
        yield from _match_label_list(ps[1:], ls[1:], b2)
    else:
        ok, want = _resolve_label(p, b)
        if ok and want == l:
            yield from _match_label_list(ps[1:], ls[1:], b)


def match_term(pat: Term, term: Term, bindings: dict,
               ring: Semiring) -> Iterator[dict]:
    """All ways to instantiate the pattern so it is congruent to the term.

    Pre-bound names act as constraints.  Matching is left to right, so
    computed forms (unions, products) must only mention names bound by
    an earlier field or an earlier chain element.
    """
    if isinstance(pat, Hole):
        if pat.name in bindings:
            if term_congruent(bindings[pat.name], term):
                yield bindings
        else:
            b2 = dict(bindings)
            b2[pat.name] = term
            yield b2
        return
    if isinstance(pat, LeafHole):
        if isinstance(term, GENERATOR_TYPES) and not isinstance(term, EmptyD):
            if pat.name in bindings:
                if bindings[pat.name] == term:
                    yield bindings
            else:
                b2 = dict(bindings)
                b2[pat.name] = term
                yield b2
        return
    if isinstance(pat, IdRow):
        row_ok = isinstance(term, EmptyD) or all(
            isinstance(x, Identity) for x in par_chain(term))
        if row_ok:
            if pat.name in bindings:
                if term_congruent(bindings[pat.name], term):
                    yield bindings
            else:
                b2 = dict(bindings)
                b2[pat.name] = term
                yield b2
        return
    if isinstance(pat, Seq):
        pch, tch = seq_chain(pat), seq_chain(term)
        if len(tch) >= len(pch):
            for groups in _partitions(tch, len(pch)):
                yield from _match_chain(pch, groups, bindings, ring, "seq")
        return
    if isinstance(pat, Par):
        pch, tch = par_chain(pat), par_chain(term)
        if len(tch) >= len(pch):
            for groups in _partitions(tch, len(pch)):
                yield from _match_chain(pch, groups, bindings, ring, "par")
        return
    if isinstance(pat, EmptyD):
        if isinstance(term, EmptyD):
            yield bindings
        return
    if type(pat) is type(term):
        yield from _match_gen(pat, term, _GEN_FIELDS[type(pat)], 0,
                              bindings, ring)


def _match_chain(pats, groups, b, ring, kind) -> Iterator[dict]:
    if not pats:
        yield b
        return
    sub = _rebuild(groups[0], kind)
    for b2 in match_term(pats[0], sub, b, ring):
        yield from _match_chain(pats[1:], groups[1:], b2, ring, kind)


def _match_gen(pat, term, spec, idx, b, ring) -> Iterator[dict]:
    if idx == len(spec):
        yield b
        return
    fname, kind = spec[idx]
    for b2 in _match_field(kind, getattr(pat, fname), getattr(term, fname),
                           b, ring):
        yield from _match_gen(pat, term, spec, idx + 1, b2, ring)


# --- instantiation ---------------------------------------------------


def _resolve_type(p, b: dict):
    if isinstance(p, TVar):
        if p.name not in b:
            raise RewriteError(f"unbound type variable {p.name}")
        return b[p.name]
    if isinstance(p, TSum):
        return Sum(_resolve_type(p.left, b), _resolve_type(p.right, b))
    if isinstance(p, TProd):
        return Prod(_resolve_type(p.left, b), _resolve_type(p.right, b))
    return p


def _resolve(kind: str, p, b: dict, ring: Semiring):
    if kind == "T":
        return _resolve_type(p, b)
    if kind == "L":
        ok, v = _resolve_label(p, b)
        if not ok:
            raise RewriteError("unbound label variable")
        return v
    if kind == "S":
        ok, v = _resolve_scalar(p, b, ring)
        if not ok:
            raise RewriteError("unbound scalar variable")
        return v
    if kind == "B":
        if isinstance(p, BVar):
            if p.name not in b:
                raise RewriteError(f"unbound branch variable {p.name}")
            return tuple(b[p.name])
        if isinstance(p, BCat):
            return _resolve("B", p.left, b, ring) + \
                _resolve("B", p.right, b, ring)
        return tuple(_resolve("L", x, b, ring) for x in p)
    raise RewriteError(f"unknown field kind {kind!r}")


def instantiate(pat: Term, b: dict, ring: Semiring) -> Term:
    if isinstance(pat, (Hole, LeafHole, IdRow)):
        if pat.name not in b:
            raise RewriteError(f"unbound hole {pat.name}")
        return b[pat.name]
    if isinstance(pat, Seq):
        return Seq(instantiate(pat.first, b, ring),
                   instantiate(pat.second, b, ring))
    if isinstance(pat, Par):
        return Par(instantiate(pat.left, b, ring),
                   instantiate(pat.right, b, ring))
    if isinstance(pat, EmptyD):
        return pat
    spec = _GEN_FIELDS[type(pat)]
    vals = {f: _resolve(k, getattr(pat, f), b, ring) for f, k in spec}
    return type(pat)(**vals)


# --- rules -----------------------------------------------------------


@dataclass
class Ctx:
    """Everything an application sees: the whole diagram and the focus."""

    diagram: LabeledDiagram
    position: Position
    focus: Term
    ring: Semiring
    reverse: bool
    bindings: dict


@dataclass(frozen=True)
class RewriteRule:
    """One directed rewrite with optional reverse reading.

    ``lhs``/``rhs`` are term patterns; ``rhs`` may instead be a builder
    called with the match bindings.  Rules whose effect is not local to
    the focus (the world rules, the contraction slides) supply
    ``apply_fn`` and keep schematic patterns for documentation.
    ``sampler`` produces randomized instances for the soundness check.
    """

    name: str
    lhs: Term
    rhs: object
    side_conditions: tuple = ()
    world_effect: str = "none"
    invertible: bool = False
    doc: str = ""
    sampler: Optional[Callable] = None
    apply_fn: Optional[Callable] = None
    completer: Optional[Callable] = None

    def __post_init__(self):
        if self.world_effect not in ("none", "rename", "annihilate", "split"):
            raise ValueError(f"bad world_effect {self.world_effect!r}")


def _check_sides(rule: RewriteRule, b: dict, ctx: Ctx) -> bool:
    return all(fn(b, ctx) for _, fn in rule.side_conditions)


def _apply_pattern(rule: RewriteRule, ctx: Ctx) -> LabeledDiagram:
    src = rule.rhs if ctx.reverse else rule.lhs
    dst = rule.lhs if ctx.reverse else rule.rhs
    if not isinstance(src, Term):
        raise RewriteError(f"rule {rule.name} has no reverse reading")
    seed = {k: v for k, v in ctx.bindings.items() if k != "pick"}
    if rule.completer is not None:
        seed = rule.completer(seed, ctx)
    pick = ctx.bindings.get("pick", 0)
    chosen = None
    count = 0
    for b in match_term(src, ctx.focus, seed, ctx.ring):
        if not _check_sides(rule, b, ctx):
            continue
        if count == pick:
            chosen = b
            break
        count += 1
    if chosen is None:
        raise RewriteError(
            f"rule {rule.name} does not match at the given position")
    if callable(dst):
        new_sub = dst(chosen, ctx)
    else:
        new_sub = instantiate(dst, chosen, ctx.ring)
    term = replace_segment(ctx.diagram.term, ctx.position, new_sub)
    return LabeledDiagram(term, ctx.diagram.worlds, ctx.ring,
                          ctx.diagram.names)


def apply(rule: RewriteRule, d, position: Position = (),
          bindings: Optional[Mapping] = None, reverse: bool = False):
    """Apply one rule at one position.

    Accepts and returns either a ``LabeledDiagram`` or an
    ``AgnosticDiagram``; the labeled form keeps world identities stable,
    which replay relies on.  Raises ``RewriteError`` when the focus does
    not match, a side condition fails, or the result would not validate.
    """
    agnostic = isinstance(d, AgnosticDiagram)
    ld = d.diagram if agnostic else d
    if reverse and not rule.invertible:
        raise RewriteError(f"rule {rule.name} is not invertible")
    position = tuple((k, int(i), int(j)) for k, i, j in position)
    focus = focus_at(ld.term, position)
    ctx = Ctx(ld, position, focus, ld.ring, reverse, dict(bindings or {}))
    if rule.apply_fn is not None:
        out = rule.apply_fn(ctx)
    else:
        out = _apply_pattern(rule, ctx)
    bad = validate(out)
    if bad:
        raise RewriteError(
            f"rule {rule.name} produced an invalid diagram: "
            f"{bad[0].kind}: {bad[0].message}")
    return AgnosticDiagram(out) if agnostic else out


def matches(rule: RewriteRule, d, reverse: bool = False) -> Iterator[tuple]:
    """Search for redexes: yields (position, bindings) pairs.

    Only pattern-matched rules are searchable; rules applied through
    ``apply_fn`` need explicit bindings and are skipped here.
    """
    if rule.apply_fn is not None:
        return
    src = rule.rhs if reverse else rule.lhs
    if not isinstance(src, Term):
        return
    ld = d.diagram if isinstance(d, AgnosticDiagram) else d
    for pos in positions(ld.term):
        focus = focus_at(ld.term, pos)
        ctx = Ctx(ld, pos, focus, ld.ring, reverse, {})
        seed: dict = {}
        if rule.completer is not None:
            try:
                seed = rule.completer({}, ctx)
            except RewriteError:
                continue
        for b in match_term(src, focus, seed, ld.ring):
            if _check_sides(rule, b, ctx):
                yield pos, b


# --- scripts ---------------------------------------------------------


def encode_position(position: Position) -> list:
    return [[k, i, j] for k, i, j in position]


def decode_position(raw) -> Position:
    return tuple((str(k), int(i), int(j)) for k, i, j in raw)


def _encode_value(v, ring: Semiring):
    if isinstance(v, (bool, int, str, float)):
        return v
    if isinstance(v, frozenset):
        return ["L", sorted(v, key=world_sort_key)]
    if isinstance(v, WireType):
        return ["T", format_type(v)]
    if isinstance(v, tuple):
        if all(isinstance(x, frozenset) for x in v):
            return ["B", [sorted(x, key=world_sort_key) for x in v]]
        if all(isinstance(x, int) for x in v):
            return ["P", list(v)]
        raise RewriteError(f"cannot encode tuple binding {v!r}")
    if isinstance(v, dict):
        return ["M", sorted(v.items(), key=lambda kv: world_sort_key(kv[0]))]
    if isinstance(v, Term):
        raise RewriteError(
            "term bindings are derivable from the diagram; leave them out")
    return ["S", ring.fmt(v)]


def _decode_value(raw, ring: Semiring):
    if isinstance(raw, list) and raw and isinstance(raw[0], str):
        tag, payload = raw[0], raw[1]
        if tag == "L":
            return frozenset(payload)
        if tag == "T":
            return parse_type(payload)
        if tag == "B":
            return tuple(frozenset(x) for x in payload)
        if tag == "P":
            return tuple(int(x) for x in payload)
        if tag == "M":
            return {k: v for k, v in payload}
        if tag == "S":
            return ring.parse(payload)
    return raw


def encode_bindings(b: Mapping, ring: Semiring) -> dict:
    return {k: _encode_value(b[k], ring) for k in sorted(b)}


def decode_bindings(raw: Mapping, ring: Semiring) -> dict:
    return {k: _decode_value(v, ring) for k, v in raw.items()}


# --- derivations -----------------------------------------------------


@dataclass(frozen=True)
class Step:
    """One replayable application: rule name, position, substitution.

    A reverse application is recorded with ``"reverse": True`` inside
    the substitution, keeping steps a plain triple.
    """

    rule: str
    position: Position
    bindings: Mapping


@dataclass(frozen=True)
class Derivation:
    """An initial diagram and an ordered run of rewrite steps."""

    initial: LabeledDiagram
    steps: tuple


def replay_trace(deriv: Derivation, rules=None) -> list[LabeledDiagram]:
    """Replay and return every intermediate diagram, initial included."""
    index = rules if rules is not None else rule_index()
    d = deriv.initial
    out = [d]
    for k, step in enumerate(deriv.steps):
        b = dict(step.bindings)
        rev = bool(b.pop("reverse", False))
        try:
            d = apply(index[step.rule], d, step.position, b, reverse=rev)
        except (RewriteError, KeyError, IndexError) as exc:
            raise RewriteError(
                f"step mismatch at {k} ({step.rule}): {exc}") from exc
        out.append(d)
    return out


def replay(deriv: Derivation, rules=None) -> LabeledDiagram:
    return replay_trace(deriv, rules)[-1]


def concat_derivations(a: Derivation, b: Derivation) -> Derivation:
    """Join two derivations; the second must start where the first ends."""
    end = replay(a)
    if end != b.initial:
        raise RewriteError("derivations do not meet")
    return Derivation(a.initial, a.steps + b.steps)


def steps_to_script(steps: Sequence[Step], ring: Semiring) -> str:
    """JSON lines, one step per line."""
    lines = []
    for s in steps:
        lines.append(json.dumps({
            "rule": s.rule,
            "position": encode_position(s.position),
            "bindings": encode_bindings(s.bindings, ring),
        }))
    return "\n".join(lines) + ("\n" if lines else "")


def script_to_steps(text: str, ring: Semiring) -> tuple:
    steps = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rec = json.loads(line)
        steps.append(Step(rec["rule"], decode_position(rec["position"]),
                          decode_bindings(rec.get("bindings", {}), ring)))
    return tuple(steps)


# --- randomized instances -------------------------------------------
#
# Rule samplers build small valid diagrams around a redex.  They feed
# the registration self-test and the heavier soundness sweeps in the
# test suite.

_SMALL_TYPES = (UNIT, Sum(UNIT, UNIT), Prod(Sum(UNIT, UNIT), UNIT))


def _rand_label(rng, worlds, allow_empty: bool = True) -> frozenset:
    ws = [w for w in sorted(worlds, key=world_sort_key)
          if rng.random() < 0.5]
    if not ws and not allow_empty and worlds:
        ws = [rng.choice(sorted(worlds, key=world_sort_key))]
    return frozenset(ws)


def _rand_type(rng) -> WireType:
    return rng.choice(_SMALL_TYPES)


def _rand_ports(rng, worlds, max_wires: int = 2) -> tuple:
    return tuple((_rand_type(rng), _rand_label(rng, worlds))
                 for _ in range(rng.randint(0, max_wires)))


def _rand_partition(rng, label: frozenset, k: int = 2) -> tuple:
    parts: list[set] = [set() for _ in range(k)]
    for w in sorted(label, key=world_sort_key):
        parts[rng.randrange(k)].add(w)
    return tuple(frozenset(p) for p in parts)


def _random_rows(rng, ring: Semiring, worlds, ports, n_rows: int):
    rows = []
    cur = list(ports)
    for _ in range(n_rows):
        factors: list[Term] = []
        nxt: list = []
        i = 0
        while i < len(cur):
            t, l = cur[i]
            r = rng.random()
            if r < 0.10 and i + 1 < len(cur):
                t2, l2 = cur[i + 1]
                factors.append(Swap(t, t2, l, l2))
                nxt += [(t2, l2), (t, l)]
                i += 2
            elif r < 0.16 and i + 1 < len(cur) and cur[i + 1] == (t, l):
                factors.append(Cup(t, l))
                i += 2
            elif r < 0.24 and i + 1 < len(cur) and not (l & cur[i + 1][1]) \
                    and dim_type(t) + dim_type(cur[i + 1][0]) <= 4:
                t2, l2 = cur[i + 1]
                factors.append(Plus(t, t2, l, l2))
                nxt.append((Sum(t, t2), l | l2))
                i += 2
            elif r < 0.32 and isinstance(t, Sum) \
                    and len(cur) - i + len(nxt) <= 3:
                la, lb = _rand_partition(rng, l)
                factors.append(PlusDag(t.left, t.right, la, lb))
                nxt += [(t.left, la), (t.right, lb)]
                i += 1
            elif r < 0.40:
                factors.append(Scalar(t, ring.sample(rng), l))
                nxt.append((t, l))
                i += 1
            elif r < 0.46 and i + 1 < len(cur) and cur[i + 1][0] == t \
                    and not (l & cur[i + 1][1]):
                factors.append(Contraction(t, (l, cur[i + 1][1])))
                nxt.append((t, l | cur[i + 1][1]))
                i += 2
            elif r < 0.52 and len(cur) - i + len(nxt) <= 3:
                la, lb = _rand_partition(rng, l)
                factors.append(ContractionDag(t, (la, lb)))
                nxt += [(t, la), (t, lb)]
                i += 1
            elif r < 0.56 and t == UNIT:
                factors.append(UnitDag(l))
                i += 1
            else:
                factors.append(Identity(t, l))
                nxt.append((t, l))
                i += 1
        if rng.random() < 0.12 and len(nxt) <= 2:
            tt = _rand_type(rng)
            ll = _rand_label(rng, worlds)
            factors.append(Cap(tt, ll))
            nxt += [(tt, ll), (tt, ll)]
        if rng.random() < 0.12 and len(nxt) <= 3:
            ll = _rand_label(rng, worlds)
            factors.append(Unit(ll))
            nxt.append((UNIT, ll))
        rows.append(par_of(factors))
        cur = nxt
    return rows, tuple(cur)


def random_diagram(rng, ring: Semiring, worlds, n_rows: Optional[int] = None,
                   ports: Optional[tuple] = None) -> LabeledDiagram:
    """A small valid diagram with the given ambient worlds."""
    if ports is None:
        ports = _rand_ports(rng, worlds)
    if n_rows is None:
        n_rows = rng.randint(1, 3)
    rows, _ = _random_rows(rng, ring, worlds, ports, max(1, n_rows))
    return LabeledDiagram(seq_of(rows), frozenset(worlds), ring)


def _embed(rng, ring: Semiring, redex: LabeledDiagram,
           inner: Position = ()) -> tuple:
    """Wrap a redex in a random context; returns (diagram, position)."""
    worlds = redex.worlds
    term = redex.term
    mode = rng.randrange(4)
    if mode == 0:
        return redex, tuple(inner)
    if mode in (1, 2):
        side = random_diagram(rng, ring, worlds, n_rows=1,
                              ports=_rand_ports(rng, worlds, max_wires=1))
        k = len(par_chain(term))
        s = len(par_chain(side.term))
        if mode == 1:
            t = Par(term, side.term)
            pos: Position = (("par", 0, k),)
        else:
            t = Par(side.term, term)
            pos = (("par", s, s + k),)
        return LabeledDiagram(t, worlds, ring), pos + tuple(inner)
    pre = identity_term(term_dom(term))
    post = identity_term(term_cod(term))
    k = len(seq_chain(term))
    t = seq_of([pre] + list(seq_chain(term)) + [post])
    return LabeledDiagram(t, worlds, ring), (("seq", 1, 1 + k),) + tuple(inner)


def _sample_worlds(rng, lo: int = 1, hi: int = 4) -> frozenset:
    return frozenset(range(rng.randint(lo, hi)))


# --- world surgery ---------------------------------------------------


def _without_world(ld: LabeledDiagram, z) -> LabeledDiagram:
    term = map_labels(ld.term, lambda l: l - {z})
    names = tuple((w, n) for w, n in ld.names if w != z)
    return LabeledDiagram(term, ld.worlds - {z}, ld.ring, names)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise RewriteError(msg)


def _need(b: Mapping, key: str):
    if key not in b:
        raise RewriteError(f"binding {key!r} is required")
    return b[key]


def _rename_apply(ctx: Ctx) -> LabeledDiagram:
    _require(not ctx.position, "world renaming applies at the root")
    m = dict(_need(ctx.bindings, "mapping"))
    if ctx.reverse:
        _require(len(set(m.values())) == len(m), "mapping is not invertible")
        m = {v: k for k, v in m.items()}
    ld = ctx.diagram
    _require(set(m) <= set(ld.worlds), "mapping mentions unknown worlds")
    full = {w: m.get(w, w) for w in ld.worlds}
    _require(len(set(full.values())) == len(full),
             "mapping must be a bijection on the worlds")
    return relabel_worlds(ld, full)


def _ann_scalar_apply(ctx: Ctx) -> LabeledDiagram:
    _require(not ctx.reverse, "annihilation runs forward only")
    z = _need(ctx.bindings, "world")
    g = ctx.focus
    _require(isinstance(g, Scalar) and ctx.ring.eq(g.value, ctx.ring.zero)
             and z in g.label,
             "focus must be a zero scalar enabled in the world")
    _require(z in ctx.diagram.worlds, "unknown world")
    return _without_world(ctx.diagram, z)


def _ann_plus_apply(ctx: Ctx) -> LabeledDiagram:
    _require(not ctx.reverse, "annihilation runs forward only")
    z = _need(ctx.bindings, "world")
    ch = seq_chain(ctx.focus)
    _require(len(ch) == 2 and isinstance(ch[0], Plus)
             and isinstance(ch[1], PlusDag),
             "focus must be an injection followed by a projection")
    p, q = ch
    dead = (p.label_left & q.label_right) | (p.label_right & q.label_left)
    _require(z in dead, "the world does not take mismatched branches")
    _require(z in ctx.diagram.worlds, "unknown world")
    return _without_world(ctx.diagram, z)


def _split_plus_apply(ctx: Ctx) -> LabeledDiagram:
    b, ld = ctx.bindings, ctx.diagram
    z, z0, z1 = _need(b, "world"), _need(b, "new0"), _need(b, "new1")
    s0, s1 = frozenset({z0}), frozenset({z1})
    if not ctx.reverse:
        g = ctx.focus
        _require(isinstance(g, Identity) and isinstance(g.wtype, Sum)
                 and g.label == frozenset({z}),
                 "focus must be an identity on a sum wire enabled in "
                 "exactly the split world")
        _require(z in ld.worlds and z0 not in ld.worlds
                 and z1 not in ld.worlds and z0 != z1,
                 "split needs one existing world and two fresh ones")
        a, c = g.wtype.left, g.wtype.right
        new_sub = Seq(PlusDag(a, c, s0, s1), Plus(a, c, s0, s1))
        dup = lambda l: (l - {z}) | {z0, z1} if z in l else l
        term = replace_and_map(ld.term, ctx.position, new_sub, dup)
        names = tuple((w, n) for w, n in ld.names if w != z)
        return LabeledDiagram(term, (ld.worlds - {z}) | {z0, z1},
                              ld.ring, names)
    ch = seq_chain(ctx.focus)
    _require(len(ch) == 2 and isinstance(ch[0], PlusDag)
             and isinstance(ch[1], Plus), "focus is not a split pair")
    pd, pl = ch
    _require(pd.label_left == s0 and pd.label_right == s1
             and pl.label_left == s0 and pl.label_right == s1
             and pd.left == pl.left and pd.right == pl.right,
             "the pair does not route the two merge worlds")
    _require(z not in ld.worlds and z0 in ld.worlds and z1 in ld.worlds,
             "merge needs two existing worlds and a fresh one")
    outside = replace_segment(ld.term, ctx.position, EmptyD())
    _require(all((z0 in l) == (z1 in l) for l in collect_labels(outside)),
             "the two worlds are not twins outside the focus")
    new_sub = Identity(Sum(pd.left, pd.right), frozenset({z}))
    merge = lambda l: (l - {z0, z1}) | (frozenset({z}) if (z0 in l or z1 in l)
                                        else frozenset())
    term = replace_and_map(ld.term, ctx.position, new_sub, merge)
    names = tuple((w, n) for w, n in ld.names if w not in (z0, z1))
    return LabeledDiagram(term, (ld.worlds - {z0, z1}) | {z}, ld.ring, names)


def _split_scalar_apply(ctx: Ctx) -> LabeledDiagram:
    b, ld, ring = ctx.bindings, ctx.diagram, ctx.ring
    z, z0, z1 = _need(b, "world"), _need(b, "new0"), _need(b, "new1")
    path = tuple(_need(b, "scalar_path"))
    s0, s1 = frozenset({z0}), frozenset({z1})
    if not ctx.reverse:
        v1, v2 = _need(b, "value1"), _need(b, "value2")
        g = ctx.focus
        fz = frozenset({z})
        _require(z in ld.worlds and z0 not in ld.worlds
                 and z1 not in ld.worlds and z0 != z1,
                 "split needs one existing world and two fresh ones")
        _require(not term_dom(g), "the split subterm must have no inputs")
        cod = term_cod(g)
        _require(len(cod) <= 1, "at most one output wire is supported")
        _require(all(l <= fz for l in collect_labels(g)),
                 "the subterm must live in the split world alone")
        _require(not cod or cod[0][1] == fz,
                 "the output wire must be enabled in the split world")
        try:
            leaf = subterm_at(g, path)
        except ValueError:
            raise RewriteError("bad scalar path") from None
        _require(isinstance(leaf, Scalar) and leaf.label == fz,
                 "the path must point at a scalar enabled in the world")
        _require(ring.eq(leaf.value, ring.add(v1, v2)),
                 "the two values do not sum to the matched scalar")

        def mk(val, znew):
            t2 = replace_at(g, path, Scalar(leaf.wtype, val, leaf.label))
            return map_labels(
                t2, lambda l: frozenset(znew if w == z else w for w in l))

        g0, g1 = mk(v1, z0), mk(v2, z1)
        if cod:
            new_sub: Term = Seq(Par(g0, g1),
                                Contraction(cod[0][0], (s0, s1)))
        else:
            new_sub = Par(g0, g1)
        dup = lambda l: (l - {z}) | {z0, z1} if z in l else l
        term = replace_and_map(ld.term, ctx.position, new_sub, dup)
        names = tuple((w, n) for w, n in ld.names if w != z)
        return LabeledDiagram(term, (ld.worlds - {z}) | {z0, z1},
                              ld.ring, names)
    _require(z not in ld.worlds and z0 in ld.worlds and z1 in ld.worlds,
             "merge needs two existing worlds and a fresh one")
    ch = seq_chain(ctx.focus)
    top = None
    if len(ch) == 2 and isinstance(ch[1], Contraction):
        row, top = ch
        _require(top.branches == (s0, s1),
                 "the merging contraction must pair the two worlds")
    elif len(ch) == 1:
        row = ch[0]
    else:
        raise RewriteError("focus is not a mergeable pair")
    pch = par_chain(row)
    cut = b.get("cut")
    if cut is None:
        cut = next((i for i, f in enumerate(pch)
                    if any(z1 in l for l in collect_labels(f))), len(pch))
    _require(0 < cut < len(pch), "cannot split the focus into two copies")
    g0 = _rebuild(pch[:cut], "par")
    g1 = _rebuild(pch[cut:], "par")
    _require(all(l <= s0 for l in collect_labels(g0)),
             "the first copy must live in one merge world alone")
    try:
        leaf0 = subterm_at(g0, path)
        leaf1 = subterm_at(g1, path)
    except ValueError:
        raise RewriteError("bad scalar path") from None
    _require(isinstance(leaf0, Scalar) and isinstance(leaf1, Scalar)
             and leaf0.label == s0,
             "the path must point at the distinguished scalars")
    expected = map_labels(
        replace_at(g0, path, Scalar(leaf0.wtype, leaf1.value, leaf0.label)),
        lambda l: frozenset(z1 if w == z0 else w for w in l))
    _require(term_congruent(expected, g1),
             "the two factors are not twin copies")
    outside = replace_segment(ld.term, ctx.position, EmptyD())
    _require(all((z0 in l) == (z1 in l) for l in collect_labels(outside)),
             "the two worlds are not twins outside the focus")
    merged = ring.add(leaf0.value, leaf1.value)
    new_sub = map_labels(
        replace_at(g0, path, Scalar(leaf0.wtype, merged, leaf0.label)),
        lambda l: frozenset(z if w == z0 else w for w in l))
    mergemap = lambda l: (l - {z0, z1}) | (frozenset({z})
                                           if (z0 in l or z1 in l)
                                           else frozenset())
    term = replace_and_map(ld.term, ctx.position, new_sub, mergemap)
    names = tuple((w, n) for w, n in ld.names if w not in (z0, z1))
    return LabeledDiagram(term, (ld.worlds - {z0, z1}) | {z}, ld.ring, names)


# --- sliding generators through contractions -------------------------
#
# Naturality of contraction: a row of n-way contractions feeding a
# subterm can be traded for n relabeled copies of the subterm followed
# by a contraction row on its outputs.  With n = 0 the subterm is
# consumed outright, which is how branches private to no world vanish.


def _restrict(t: Term, u: frozenset) -> Term:
    return map_labels(t, lambda l: l & u)


def _split_focus(focus: Term, at_end: bool) -> tuple:
    ch = seq_chain(focus)
    row_at = -1 if at_end else 0
    guard = (ContractionDag,) if at_end else (Contraction,)
    row = ch[row_at]
    is_row = (isinstance(row, EmptyD)
              or all(isinstance(f, guard) for f in par_chain(row)))
    if len(ch) >= 2 and is_row:
        rest = ch[:-1] if at_end else ch[1:]
        return row, _rebuild(rest, "seq")
    return None, focus


def _interleave_rows(ports_grouped, m: int, n: int, to_copies: bool):
    """Wire shuffles between per-wire grouping and per-copy grouping."""
    perm = [0] * (m * n)
    for k in range(n):
        for i in range(m):
            if to_copies:
                perm[k * m + i] = i * n + k
            else:
                perm[i * n + k] = k * m + i
    return permutation_rows(tuple(ports_grouped), tuple(perm))[0]


def _copies_block(f: Term, us: tuple, dom_ports, cod_ports) -> list:
    n = len(us)
    copies = par_of([_restrict(f, u) for u in us])
    rows: list[Term] = []
    m_in, m_out = len(dom_ports), len(cod_ports)
    if m_in and n > 1:
        src = [(t, l & u) for (t, l) in dom_ports for u in us]
        rows += _interleave_rows(src, m_in, n, to_copies=True)
    rows.append(copies)
    if m_out and n > 1:
        src = [(t, l & u) for u in us for (t, l) in cod_ports]
        rows += _interleave_rows(src, m_out, n, to_copies=False)
    return rows


def _check_feed_row(row, ports, us, dagger: bool) -> None:
    factors = [] if row is None or isinstance(row, EmptyD) else par_chain(row)
    _require(len(factors) == len(ports),
             "the contraction row does not cover the boundary")
    for c, (t, l) in zip(factors, ports):
        want = tuple(l & u for u in us)
        ok = (isinstance(c, ContractionDag) if dagger
              else isinstance(c, Contraction))
        _require(ok and c.wtype == t and c.branches == want,
                 "contraction branches must restrict the wire labels")


def _slide_core(ctx: Ctx, leaf_only: bool, dagger: bool) -> LabeledDiagram:
    _require(not ctx.reverse, "sliding runs forward only")
    us = tuple(frozenset(u) for u in _need(ctx.bindings, "us"))
    seen: set = set()
    for u in us:
        _require(not (u & seen), "the world groups must be disjoint")
        seen |= u
    row, f = _split_focus(ctx.focus, at_end=dagger)
    if leaf_only:
        _require(isinstance(f, GENERATOR_TYPES) and not isinstance(f, EmptyD),
                 "the sliding subterm must be a single generator")
    cover = frozenset(seen)
    _require(all(l <= cover for l in collect_labels(f)),
             "the world groups must cover every label of the subterm")
    dom_ports, cod_ports = term_dom(f), term_cod(f)
    near_ports = cod_ports if dagger else dom_ports
    if near_ports:
        _require(row is not None, "no contraction row to slide through")
        _check_feed_row(row, near_ports, us, dagger)
    else:
        _require(row is None or isinstance(row, EmptyD),
                 "stray row on a boundary with no wires")
    n = len(us)
    if n == 0:
        far_ports = dom_ports if dagger else cod_ports
        if not far_ports:
            new_sub: Term = EmptyD()
        elif dagger:
            new_sub = par_of([ContractionDag(t, ()) for t, _ in far_ports])
        else:
            new_sub = par_of([Contraction(t, ()) for t, _ in far_ports])
    elif dagger:
        rows = [par_of([ContractionDag(t, tuple(l & u for u in us))
                        for t, l in dom_ports])] if dom_ports else []
        rows += _copies_block(f, us, dom_ports, cod_ports)
        new_sub = seq_of(rows)
    else:
        rows = _copies_block(f, us, dom_ports, cod_ports)
        if cod_ports:
            rows.append(par_of([Contraction(t, tuple(l & u for u in us))
                                for t, l in cod_ports]))
        new_sub = seq_of(rows)
    term = replace_segment(ctx.diagram.term, ctx.position, new_sub)
    return LabeledDiagram(term, ctx.diagram.worlds, ctx.diagram.ring,
                          ctx.diagram.names)


def _slide_apply(ctx: Ctx) -> LabeledDiagram:
    return _slide_core(ctx, leaf_only=True, dagger=False)


def _dagger_slide_apply(ctx: Ctx) -> LabeledDiagram:
    return _slide_core(ctx, leaf_only=True, dagger=True)


def _natural_apply(ctx: Ctx) -> LabeledDiagram:
    return _slide_core(ctx, leaf_only=False, dagger=False)


def _dagger_natural_apply(ctx: Ctx) -> LabeledDiagram:
    return _slide_core(ctx, leaf_only=False, dagger=True)


# --- the rule catalog ------------------------------------------------


def _union(parts) -> frozenset:
    out: frozenset = frozenset()
    for p in parts:
        out = out | p
    return out


def _disjoint_split(rng, worlds, n: int) -> tuple:
    # n pairwise disjoint groups; worlds may be left out entirely
    parts: list[set] = [set() for _ in range(n)]
    for w in sorted(worlds, key=world_sort_key):
        k = rng.randrange(n + 1)
        if k < n:
            parts[k].add(w)
    return tuple(frozenset(p) for p in parts)


def _is_closed(t: Term) -> bool:
    return not term_dom(t) and not term_cod(t)


def _one_wire_chain(rng, ring: Semiring, t: WireType, l: frozenset) -> Term:
    rows = [Scalar(t, ring.sample(rng), l) if rng.random() < 0.7
            else Identity(t, l)
            for _ in range(rng.randint(1, 2))]
    return seq_of(rows)


def _rand_leaf(rng, ring: Semiring, pool: frozenset) -> Term:
    def lab() -> frozenset:
        return frozenset(w for w in pool if rng.random() < 0.5)

    t = _rand_type(rng)
    r = rng.randrange(10)
    if r == 0:
        return Scalar(t, ring.sample(rng), lab())
    if r == 1:
        return Identity(t, lab())
    if r == 2:
        return Swap(t, _rand_type(rng), lab(), lab())
    if r == 3:
        return Cup(t, lab())
    if r == 4:
        return Cap(t, lab())
    if r == 5:
        return Unit(lab())
    if r == 6:
        return UnitDag(lab())
    if r == 7:
        l1 = lab()
        return Plus(t, _rand_type(rng), l1, lab() - l1)
    if r == 8:
        l1 = lab()
        return PlusDag(t, _rand_type(rng), l1, lab() - l1)
    l1 = lab()
    return Contraction(t, (l1, lab() - l1))


def _build_rules() -> tuple:
    rules: list[RewriteRule] = []

    def rule(**kw) -> RewriteRule:
        r = RewriteRule(**kw)
        rules.append(r)
        return r

    def flipper(r, rng, d, pos, fwd, back=None):
        """Half the time, pre-apply forward and hand back the reverse."""
        if not (r.invertible and rng.random() < 0.45):
            return d, pos, dict(fwd), False
        out = apply(r, d, pos, fwd)
        b2 = dict(fwd if back is None else back)
        if not pos:
            return out, (), b2, True
        kind, i, j = pos[0]
        delta = len(_chain_of(out.term, kind)) - len(_chain_of(d.term, kind))
        return out, ((kind, i, j + delta),), b2, True

    t_, a_, b_, c_, d_ = (TVar("t"), TVar("a"), TVar("b"),
                          TVar("c"), TVar("d"))
    l_, la_, lb_, lc_, ld_ = (LVar("l"), LVar("la"), LVar("lb"),
                              LVar("lc"), LVar("ld"))
    f_, g_, h_, k_ = Hole("f"), Hole("g"), Hole("h"), Hole("k")

    # identity rows ---------------------------------------------------

    def idrow_completer(side):
        def comp(seed, ctx):
            if ctx.reverse and "row" not in seed:
                ports = (term_dom(ctx.focus) if side == "left"
                         else term_cod(ctx.focus))
                seed = dict(seed)
                seed["row"] = identity_term(ports)
            return seed
        return comp

    def idrow_sampler(side):
        def sampler(r, rng, ring):
            worlds = _sample_worlds(rng)
            body = random_diagram(rng, ring, worlds)
            ports = (term_dom(body.term) if side == "left"
                     else term_cod(body.term))
            row = identity_term(ports)
            ch = seq_chain(body.term)
            parts = [row] + ch if side == "left" else ch + [row]
            redex = LabeledDiagram(seq_of(parts), worlds, ring)
            d, pos = _embed(rng, ring, redex)
            return flipper(r, rng, d, pos, {})
        return sampler

    rule(name="identity-left",
         lhs=Seq(IdRow("row"), f_), rhs=f_,
         invertible=True,
         doc="Drop an identity row before a subterm.",
         completer=idrow_completer("left"),
         sampler=idrow_sampler("left"))

    rule(name="identity-right",
         lhs=Seq(f_, IdRow("row")), rhs=f_,
         invertible=True,
         doc="Drop an identity row after a subterm.",
         completer=idrow_completer("right"),
         sampler=idrow_sampler("right"))

    def emptypar_sampler(side):
        def sampler(r, rng, ring):
            worlds = _sample_worlds(rng)
            body = random_diagram(rng, ring, worlds)
            term = (Par(EmptyD(), body.term) if side == "left"
                    else Par(body.term, EmptyD()))
            redex = LabeledDiagram(term, worlds, ring)
            d, pos = _embed(rng, ring, redex)
            return flipper(r, rng, d, pos, {})
        return sampler

    rule(name="empty-par-left",
         lhs=Par(EmptyD(), f_), rhs=f_,
         invertible=True,
         doc="Drop an empty bundle beside a subterm.",
         sampler=emptypar_sampler("left"))

    rule(name="empty-par-right",
         lhs=Par(f_, EmptyD()), rhs=f_,
         invertible=True,
         doc="Drop an empty bundle beside a subterm.",
         sampler=emptypar_sampler("right"))

    # interchange -----------------------------------------------------

    def interchange_sampler(r, rng, ring):
        worlds = _sample_worlds(rng)
        f = random_diagram(rng, ring, worlds,
                           ports=_rand_ports(rng, worlds, max_wires=1))
        g = random_diagram(rng, ring, worlds,
                           ports=_rand_ports(rng, worlds, max_wires=1))
        h = random_diagram(rng, ring, worlds, ports=term_cod(f.term))
        k = random_diagram(rng, ring, worlds, ports=term_cod(g.term))
        term = Seq(Par(f.term, g.term), Par(h.term, k.term))
        redex = LabeledDiagram(term, worlds, ring)
        d, pos = _embed(rng, ring, redex)
        return flipper(r, rng, d, pos, {})

    rule(name="interchange",
         lhs=Seq(Par(f_, g_), Par(h_, k_)),
         rhs=Par(Seq(f_, h_), Seq(g_, k_)),
         side_conditions=(
             ("seam-left",
              lambda b, ctx: term_cod(b["f"]) == term_dom(b["h"])),
             ("seam-right",
              lambda b, ctx: term_cod(b["g"]) == term_dom(b["k"])),
         ),
         invertible=True,
         doc="Slide two side-by-side pipelines past a row boundary.",
         sampler=interchange_sampler)

    # swaps -----------------------------------------------------------

    def swapinv_sampler(r, rng, ring):
        worlds = _sample_worlds(rng)
        a, b = _rand_type(rng), _rand_type(rng)
        la, lb = _rand_label(rng, worlds), _rand_label(rng, worlds)
        term = Seq(Swap(a, b, la, lb), Swap(b, a, lb, la))
        redex = LabeledDiagram(term, worlds, ring)
        d, pos = _embed(rng, ring, redex)
        return flipper(r, rng, d, pos, {})

    rule(name="swap-involution",
         lhs=Seq(Swap(a_, b_, la_, lb_), Swap(b_, a_, lb_, la_)),
         rhs=Par(Identity(a_, la_), Identity(b_, lb_)),
         invertible=True,
         doc="Two crossings cancel.",
         sampler=swapinv_sampler)

    def one_one(b, key):
        return (len(term_dom(b[key])) == 1 and len(term_cod(b[key])) == 1)

    def swapnat_rhs(b, ctx):
        (ta, la), = term_dom(b["f"])
        (tb, lb), = term_dom(b["g"])
        return Seq(Swap(ta, tb, la, lb), Par(b["g"], b["f"]))

    def swapnat_sampler(r, rng, ring):
        worlds = _sample_worlds(rng)
        ta, tb = _rand_type(rng), _rand_type(rng)
        la, lb = _rand_label(rng, worlds), _rand_label(rng, worlds)
        f = _one_wire_chain(rng, ring, ta, la)
        g = _one_wire_chain(rng, ring, tb, lb)
        term = Seq(Par(f, g), Swap(ta, tb, la, lb))
        redex = LabeledDiagram(term, worlds, ring)
        d, pos = _embed(rng, ring, redex)
        return d, pos, {}, False

    rule(name="swap-naturality",
         lhs=Seq(Par(f_, g_), Swap(c_, d_, lc_, ld_)),
         rhs=swapnat_rhs,
         side_conditions=(
             ("one-to-one",
              lambda b, ctx: one_one(b, "f") and one_one(b, "g")),
             ("boundary",
              lambda b, ctx: term_cod(b["f"]) == ((b["c"], b["lc"]),)
              and term_cod(b["g"]) == ((b["d"], b["ld"]),)),
         ),
         doc="Push a crossing from after a pair of wires to before it.",
         sampler=swapnat_sampler)

    def swapconat_rhs(b, ctx):
        (tc, lc), = term_cod(b["f"])
        (td, ld), = term_cod(b["g"])
        return Seq(Par(b["f"], b["g"]), Swap(tc, td, lc, ld))

    def swapconat_sampler(r, rng, ring):
        worlds = _sample_worlds(rng)
        ta, tb = _rand_type(rng), _rand_type(rng)
        la, lb = _rand_label(rng, worlds), _rand_label(rng, worlds)
        f = _one_wire_chain(rng, ring, ta, la)
        g = _one_wire_chain(rng, ring, tb, lb)
        term = Seq(Swap(ta, tb, la, lb), Par(g, f))
        redex = LabeledDiagram(term, worlds, ring)
        d, pos = _embed(rng, ring, redex)
        return d, pos, {}, False

    rule(name="swap-conaturality",
         lhs=Seq(Swap(a_, b_, la_, lb_), Par(g_, f_)),
         rhs=swapconat_rhs,
         side_conditions=(
             ("one-to-one",
              lambda b, ctx: one_one(b, "f") and one_one(b, "g")),
             ("boundary",
              lambda b, ctx: term_dom(b["g"]) == ((b["b"], b["lb"]),)
              and term_dom(b["f"]) == ((b["a"], b["la"]),)),
         ),
         doc="Push a crossing from before a pair of wires to after it.",
         sampler=swapconat_sampler)

    # compact closure -------------------------------------------------

    def wire_sampler(build):
        def sampler(r, rng, ring):
            worlds = _sample_worlds(rng)
            t, l = _rand_type(rng), _rand_label(rng, worlds)
            redex = LabeledDiagram(build(t, l), worlds, ring)
            d, pos = _embed(rng, ring, redex)
            return flipper(r, rng, d, pos, {})
        return sampler

    rule(name="snake-right",
         lhs=Seq(Par(Cap(t_, l_), Identity(t_, l_)),
                 Par(Identity(t_, l_), Cup(t_, l_))),
         rhs=Identity(t_, l_),
         invertible=True,
         doc="Yank a wire bent through a cap and a cup.",
         sampler=wire_sampler(
             lambda t, l: Seq(Par(Cap(t, l), Identity(t, l)),
                              Par(Identity(t, l), Cup(t, l)))))

    rule(name="snake-left",
         lhs=Seq(Par(Identity(t_, l_), Cap(t_, l_)),
                 Par(Cup(t_, l_), Identity(t_, l_))),
         rhs=Identity(t_, l_),
         invertible=True,
         doc="Yank a wire bent the other way.",
         sampler=wire_sampler(
             lambda t, l: Seq(Par(Identity(t, l), Cap(t, l)),
                              Par(Cup(t, l), Identity(t, l)))))

    rule(name="swap-cup",
         lhs=Seq(Swap(t_, t_, l_, l_), Cup(t_, l_)),
         rhs=Cup(t_, l_),
         invertible=True,
         doc="A cup absorbs the crossing of its two legs.",
         sampler=wire_sampler(
             lambda t, l: Seq(Swap(t, t, l, l), Cup(t, l))))

    rule(name="cap-swap",
         lhs=Seq(Cap(t_, l_), Swap(t_, t_, l_, l_)),
         rhs=Cap(t_, l_),
         invertible=True,
         doc="A cap absorbs the crossing of its two legs.",
         sampler=wire_sampler(
             lambda t, l: Seq(Cap(t, l), Swap(t, t, l, l))))

    rule(name="cap-slide",
         lhs=Seq(Par(Identity(t_, l_), Cap(t_, l_)),
                 Par(Swap(t_, t_, l_, l_), Identity(t_, l_))),
         rhs=Seq(Par(Cap(t_, l_), Identity(t_, l_)),
                 Par(Identity(t_, l_), Swap(t_, t_, l_, l_))),
         invertible=True,
         doc="A wire entering beside a cap may cross either leg.",
         sampler=wire_sampler(
             lambda t, l: Seq(Par(Identity(t, l), Cap(t, l)),
                              Par(Swap(t, t, l, l), Identity(t, l)))))

    rule(name="cup-slide",
         lhs=Seq(Par(Swap(t_, t_, l_, l_), Identity(t_, l_)),
                 Par(Identity(t_, l_), Cup(t_, l_))),
         rhs=Seq(Par(Identity(t_, l_), Swap(t_, t_, l_, l_)),
                 Par(Cup(t_, l_), Identity(t_, l_))),
         invertible=True,
         doc="A wire leaving beside a cup may cross either leg.",
         sampler=wire_sampler(
             lambda t, l: Seq(Par(Swap(t, t, l, l), Identity(t, l)),
                              Par(Identity(t, l), Cup(t, l)))))

    # scalars ---------------------------------------------------------

    def scalarfuse_sampler(r, rng, ring):
        worlds = _sample_worlds(rng)
        t, l = _rand_type(rng), _rand_label(rng, worlds)
        s, s2 = ring.sample(rng), ring.sample(rng)
        term = Seq(Scalar(t, s, l), Scalar(t, s2, l))
        redex = LabeledDiagram(term, worlds, ring)
        d, pos = _embed(rng, ring, redex)
        return flipper(r, rng, d, pos, {"s": s, "s2": s2})

    rule(name="scalar-fuse",
         lhs=Seq(Scalar(t_, SVar("s"), l_), Scalar(t_, SVar("s2"), l_)),
         rhs=Scalar(t_, SProd(SVar("s"), SVar("s2")), l_),
         invertible=True,
         doc="Multiply two stacked scalars; splitting needs both factors.",
         sampler=scalarfuse_sampler)

    def scalarone_sampler(r, rng, ring):
        worlds = _sample_worlds(rng)
        t, l = _rand_type(rng), _rand_label(rng, worlds)
        redex = LabeledDiagram(Scalar(t, ring.one, l), worlds, ring)
        d, pos = _embed(rng, ring, redex)
        return flipper(r, rng, d, pos, {})

    rule(name="scalar-one",
         lhs=Scalar(t_, SOne(), l_),
         rhs=Identity(t_, l_),
         invertible=True,
         doc="The unit scalar is an identity.",
         sampler=scalarone_sampler)

    # contraction structure -------------------------------------------

    def cunary_sampler(dagger):
        def sampler(r, rng, ring):
            worlds = _sample_worlds(rng)
            t, u = _rand_type(rng), _rand_label(rng, worlds)
            leaf = (ContractionDag(t, (u,)) if dagger
                    else Contraction(t, (u,)))
            redex = LabeledDiagram(leaf, worlds, ring)
            d, pos = _embed(rng, ring, redex)
            return flipper(r, rng, d, pos, {})
        return sampler

    rule(name="contraction-unary",
         lhs=Contraction(t_, (LVar("u"),)),
         rhs=Identity(t_, LVar("u")),
         invertible=True,
         doc="A one-branch contraction is an identity.",
         sampler=cunary_sampler(False))

    rule(name="contraction-dagger-unary",
         lhs=ContractionDag(t_, (LVar("u"),)),
         rhs=Identity(t_, LVar("u")),
         invertible=True,
         doc="A one-branch splitter is an identity.",
         sampler=cunary_sampler(True))

    def cfuse_sampler(dagger):
        def sampler(r, rng, ring):
            worlds = _sample_worlds(rng)
            t = _rand_type(rng)
            n1, n2 = rng.randint(0, 2), rng.randint(0, 2)
            parts = _disjoint_split(rng, worlds, n1 + n2)
            us, vs = parts[:n1], parts[n1:]
            top = (_union(us), _union(vs))
            if dagger:
                term = Seq(ContractionDag(t, top),
                           Par(ContractionDag(t, us), ContractionDag(t, vs)))
            else:
                term = Seq(Par(Contraction(t, us), Contraction(t, vs)),
                           Contraction(t, top))
            redex = LabeledDiagram(term, worlds, ring)
            d, pos = _embed(rng, ring, redex)
            return flipper(r, rng, d, pos, {"us": us, "vs": vs})
        return sampler

    rule(name="contraction-fuse",
         lhs=Seq(Par(Contraction(t_, BVar("us")), Contraction(t_, BVar("vs"))),
                 Contraction(t_, (LUnion("us"), LUnion("vs")))),
         rhs=Contraction(t_, BCat(BVar("us"), BVar("vs"))),
         invertible=True,
         doc="Flatten a tree of contractions; unflattening picks a cut.",
         sampler=cfuse_sampler(False))

    rule(name="contraction-dagger-fuse",
         lhs=Seq(ContractionDag(t_, BVar("top")),
                 Par(ContractionDag(t_, BVar("us")),
                     ContractionDag(t_, BVar("vs")))),
         rhs=ContractionDag(t_, BCat(BVar("us"), BVar("vs"))),
         side_conditions=(
             ("regrouping",
              lambda b, ctx: tuple(b["top"]) == (_union(b["us"]),
                                                 _union(b["vs"]))),
         ),
         doc="Flatten a tree of splitters.",
         sampler=cfuse_sampler(True))

    def ccancel_sampler(r, rng, ring):
        worlds = _sample_worlds(rng)
        t = _rand_type(rng)
        us = _disjoint_split(rng, worlds, rng.randint(0, 3))
        term = Seq(ContractionDag(t, us), Contraction(t, us))
        redex = LabeledDiagram(term, worlds, ring)
        d, pos = _embed(rng, ring, redex)
        return flipper(r, rng, d, pos, {"us": us})

    rule(name="contraction-cancel",
         lhs=Seq(ContractionDag(t_, BVar("us")), Contraction(t_, BVar("us"))),
         rhs=Identity(t_, LUnion("us")),
         invertible=True,
         doc="Splitting a wire and re-merging it the same way is trivial; "
             "the reverse reading cuts a wire along chosen groups.",
         sampler=ccancel_sampler)

    def ccocancel_rhs(b, ctx):
        return par_of([Identity(b["t"], u) for u in b["us"]])

    def ccocancel_sampler(r, rng, ring):
        worlds = _sample_worlds(rng)
        t = _rand_type(rng)
        us = _disjoint_split(rng, worlds, rng.randint(0, 3))
        term = Seq(Contraction(t, us), ContractionDag(t, us))
        redex = LabeledDiagram(term, worlds, ring)
        d, pos = _embed(rng, ring, redex)
        return d, pos, {}, False

    rule(name="contraction-cocancel",
         lhs=Seq(Contraction(t_, BVar("us")), ContractionDag(t_, BVar("us"))),
         rhs=ccocancel_rhs,
         doc="Merging then splitting along the same groups is an "
             "identity row on the branches.",
         sampler=ccocancel_sampler)

    # connectives against their daggers -------------------------------

    def pair_sampler(build, seeds=None):
        def sampler(r, rng, ring):
            worlds = _sample_worlds(rng)
            term, binds = build(rng, ring, worlds)
            redex = LabeledDiagram(term, worlds, ring)
            d, pos = _embed(rng, ring, redex)
            return flipper(r, rng, d, pos, binds)
        return sampler

    def pluscancel_build(rng, ring, worlds):
        a, b = _rand_type(rng), _rand_type(rng)
        la, lb = _disjoint_split(rng, worlds, 2)
        return Seq(Plus(a, b, la, lb), PlusDag(a, b, la, lb)), {}

    rule(name="plus-cancel",
         lhs=Seq(Plus(a_, b_, la_, lb_), PlusDag(a_, b_, la_, lb_)),
         rhs=Par(Identity(a_, la_), Identity(b_, lb_)),
         side_conditions=(
             ("disjoint",
              lambda b, ctx: not (b["la"] & b["lb"])),
         ),
         invertible=True,
         doc="Injecting into a sum and projecting back out is trivial.",
         sampler=pair_sampler(pluscancel_build))

    def tensorcancel_build(rng, ring, worlds):
        a, b = _rand_type(rng), _rand_type(rng)
        l = _rand_label(rng, worlds)
        return Seq(Tensor(a, b, l), TensorDag(a, b, l)), {}

    rule(name="tensor-cancel",
         lhs=Seq(Tensor(a_, b_, l_), TensorDag(a_, b_, l_)),
         rhs=Par(Identity(a_, l_), Identity(b_, l_)),
         invertible=True,
         doc="Pairing two wires and unpairing them is trivial.",
         sampler=pair_sampler(tensorcancel_build))

    def tensorcocancel_build(rng, ring, worlds):
        a, b = _rand_type(rng), _rand_type(rng)
        l = _rand_label(rng, worlds)
        return Seq(TensorDag(a, b, l), Tensor(a, b, l)), {}

    rule(name="tensor-cocancel",
         lhs=Seq(TensorDag(a_, b_, l_), Tensor(a_, b_, l_)),
         rhs=Identity(TProd(a_, b_), l_),
         invertible=True,
         doc="Unpairing a product wire and repairing it is trivial.",
         sampler=pair_sampler(tensorcocancel_build))

    def unitcancel_build(rng, ring, worlds):
        l = _rand_label(rng, worlds)
        return Seq(Unit(l), UnitDag(l)), {"l": l}

    rule(name="unit-cancel",
         lhs=Seq(Unit(l_), UnitDag(l_)),
         rhs=EmptyD(),
         invertible=True,
         doc="A unit wire born and immediately discarded vanishes; the "
             "reverse reading needs the label.",
         sampler=pair_sampler(unitcancel_build))

    def unitcocancel_build(rng, ring, worlds):
        l = _rand_label(rng, worlds)
        return Seq(UnitDag(l), Unit(l)), {}

    rule(name="unit-cocancel",
         lhs=Seq(UnitDag(l_), Unit(l_)),
         rhs=Identity(UNIT, l_),
         invertible=True,
         doc="Discarding a unit wire and recreating it is trivial.",
         sampler=pair_sampler(unitcocancel_build))

    # closed factors --------------------------------------------------

    def closedswap_sampler(r, rng, ring):
        worlds = _sample_worlds(rng)
        l = _rand_label(rng, worlds)
        bubble = seq_of([Unit(l), Scalar(UNIT, ring.sample(rng), l),
                         UnitDag(l)])
        other = random_diagram(rng, ring, worlds)
        term = (Par(bubble, other.term) if rng.random() < 0.5
                else Par(other.term, bubble))
        redex = LabeledDiagram(term, worlds, ring)
        d, pos = _embed(rng, ring, redex)
        return flipper(r, rng, d, pos, {})

    rule(name="scalar-factor-swap",
         lhs=Par(f_, g_), rhs=Par(g_, f_),
         side_conditions=(
             ("one-closed",
              lambda b, ctx: _is_closed(b["f"]) or _is_closed(b["g"])),
         ),
         invertible=True,
         doc="A factor with no wires commutes with its neighbour.",
         sampler=closedswap_sampler)

    def bubble_sampler(r, rng, ring):
        worlds = _sample_worlds(rng)
        l = _rand_label(rng, worlds)
        s = ring.sample(rng)
        term = Par(seq_of([Unit(l), Scalar(UNIT, s, l), UnitDag(l)]),
                   Unit(l))
        redex = LabeledDiagram(term, worlds, ring)
        d, pos = _embed(rng, ring, redex)
        return flipper(r, rng, d, pos, {})

    rule(name="bubble-absorb",
         lhs=Par(seq_of([Unit(l_), Scalar(UNIT, SVar("s"), l_),
                         UnitDag(l_)]), Unit(l_)),
         rhs=Seq(Unit(l_), Scalar(UNIT, SVar("s"), l_)),
         invertible=True,
         doc="A closed scalar loop merges onto a unit wire with the "
             "same label, and can be blown back off it.",
         sampler=bubble_sampler)

    # contraction naturality ------------------------------------------

    def slide_sampler(dagger, macro):
        def sampler(r, rng, ring):
            worlds = _sample_worlds(rng, 1, 4)
            us = _disjoint_split(rng, worlds, rng.randint(0, 3))
            cover = _union(us)
            if macro:
                f = random_diagram(rng, ring, cover).term
            else:
                f = _rand_leaf(rng, ring, cover)
            near = term_cod(f) if dagger else term_dom(f)
            if dagger:
                row = par_of([ContractionDag(t, tuple(l & u for u in us))
                              for t, l in near])
                parts = seq_chain(f) + [row]
            else:
                row = par_of([Contraction(t, tuple(l & u for u in us))
                              for t, l in near])
                parts = [row] + seq_chain(f)
            redex = LabeledDiagram(seq_of(parts), worlds, ring)
            d, pos = _embed(rng, ring, redex)
            return d, pos, {"us": us}, False
        return sampler

    slide_doc = ("A row of contractions feeding a generator becomes "
                 "restricted copies of the generator, one per world "
                 "group, followed by contractions on its outputs.  "
                 "With no groups the generator is consumed.  When the "
                 "boundary being slid through has no wires, an empty "
                 "row stands in for the contraction row.")

    rule(name="contraction-slide",
         lhs=Hole("redex"), rhs=Hole("image"),
         apply_fn=_slide_apply,
         doc=slide_doc,
         sampler=slide_sampler(False, False))

    rule(name="contraction-dagger-slide",
         lhs=Hole("redex"), rhs=Hole("image"),
         apply_fn=_dagger_slide_apply,
         doc="Mirror image: a generator feeding a row of splitters "
             "becomes splitters on its inputs followed by restricted "
             "copies.",
         sampler=slide_sampler(True, False))

    rule(name="contraction-natural",
         lhs=Hole("redex"), rhs=Hole("image"),
         apply_fn=_natural_apply,
         doc="The slide for a whole subterm at once.",
         sampler=slide_sampler(False, True))

    rule(name="contraction-dagger-natural",
         lhs=Hole("redex"), rhs=Hole("image"),
         apply_fn=_dagger_natural_apply,
         doc="The dagger slide for a whole subterm at once.",
         sampler=slide_sampler(True, True))

    # pair creation split ---------------------------------------------

    def capsplit_rhs(b, ctx):
        t, u, v = b["t"], b["u"], b["v"]
        ports = ((t, u), (t, u), (t, v), (t, v))
        rows = permutation_rows(ports, (0, 2, 1, 3))[0]
        return seq_of([Par(Cap(t, u), Cap(t, v))] + rows +
                      [Par(Contraction(t, (u, v)), Contraction(t, (u, v)))])

    def cupsplit_rhs(b, ctx):
        t, u, v = b["t"], b["u"], b["v"]
        ports = ((t, u), (t, v), (t, u), (t, v))
        rows = permutation_rows(ports, (0, 2, 1, 3))[0]
        return seq_of([Par(ContractionDag(t, (u, v)),
                           ContractionDag(t, (u, v)))] + rows +
                      [Par(Cup(t, u), Cup(t, v))])

    def pairsplit_sampler(cap):
        def sampler(r, rng, ring):
            worlds = _sample_worlds(rng)
            t, w = _rand_type(rng), _rand_label(rng, worlds)
            u, v = _rand_partition(rng, w, 2)
            leaf = Cap(t, w) if cap else Cup(t, w)
            redex = LabeledDiagram(leaf, worlds, ring)
            d, pos = _embed(rng, ring, redex)
            return d, pos, {"u": u, "v": v}, False
        return sampler

    split_sides = (
        ("partition",
         lambda b, ctx: (b["u"] | b["v"]) == b["w"]
         and not (b["u"] & b["v"])),
    )

    rule(name="cap-split",
         lhs=Cap(t_, LVar("w")),
         rhs=capsplit_rhs,
         side_conditions=split_sides,
         doc="Split a cap along a partition of its label into two caps "
             "whose legs are merged pairwise.",
         sampler=pairsplit_sampler(True))

    rule(name="cup-split",
         lhs=Cup(t_, LVar("w")),
         rhs=cupsplit_rhs,
         side_conditions=split_sides,
         doc="Split a cup along a partition of its label.",
         sampler=pairsplit_sampler(False))

    # world rules -----------------------------------------------------

    def rename_sampler(r, rng, ring):
        worlds = _sample_worlds(rng)
        d = random_diagram(rng, ring, worlds)
        sub = {w: w + 10 for w in sorted(worlds) if rng.random() < 0.5}
        if rng.random() < 0.4 and sub:
            d2 = apply(r, d, (), {"mapping": sub})
            return d2, (), {"mapping": sub}, True
        return d, (), {"mapping": sub}, False

    rule(name="world-rename",
         lhs=Hole("diagram"), rhs=Hole("diagram"),
         apply_fn=_rename_apply,
         world_effect="rename",
         invertible=True,
         doc="Rename worlds by a bijection; composition never depends "
             "on the names.",
         sampler=rename_sampler)

    def annscalar_sampler(r, rng, ring):
        worlds = _sample_worlds(rng)
        z = rng.choice(sorted(worlds))
        t = _rand_type(rng)
        l = _rand_label(rng, worlds) | {z}
        redex = LabeledDiagram(Scalar(t, ring.zero, l), worlds, ring)
        d, pos = _embed(rng, ring, redex)
        return d, pos, {"world": z}, False

    rule(name="world-annihilate-scalar",
         lhs=Scalar(t_, SZero(), l_), rhs=Scalar(t_, SZero(), l_),
         apply_fn=_ann_scalar_apply,
         world_effect="annihilate",
         doc="A world whose story passes through a zero scalar "
             "contributes nothing and is removed outright.",
         sampler=annscalar_sampler)

    def annplus_sampler(r, rng, ring):
        worlds = _sample_worlds(rng)
        z = rng.choice(sorted(worlds))
        others = worlds - {z}
        wire = frozenset({z}) | frozenset(
            w for w in others if rng.random() < 0.6)
        a, b = _rand_type(rng), _rand_type(rng)
        la = frozenset({z}) | frozenset(
            w for w in wire - {z} if rng.random() < 0.5)
        lb = wire - la
        lb2 = frozenset({z}) | frozenset(
            w for w in wire - {z} if rng.random() < 0.5)
        la2 = wire - lb2
        term = Seq(Plus(a, b, la, lb), PlusDag(a, b, la2, lb2))
        redex = LabeledDiagram(term, worlds, ring)
        d, pos = _embed(rng, ring, redex)
        return d, pos, {"world": z}, False

    rule(name="world-annihilate-plus",
         lhs=Seq(Plus(a_, b_, la_, lb_), PlusDag(a_, b_, lc_, ld_)),
         rhs=Seq(Plus(a_, b_, la_, lb_), PlusDag(a_, b_, lc_, ld_)),
         apply_fn=_ann_plus_apply,
         world_effect="annihilate",
         doc="A world that injects into one branch of a sum but "
             "projects from the other is impossible and is removed.",
         sampler=annplus_sampler)

    def fresh_pair(worlds):
        base = max([w for w in worlds if isinstance(w, int)] + [-1]) + 1
        return base, base + 1

    def splitscalar_sampler(r, rng, ring):
        worlds = _sample_worlds(rng)
        z = rng.choice(sorted(worlds))
        z0, z1 = fresh_pair(worlds)
        fz = frozenset({z})
        v1, v2 = ring.sample(rng), ring.sample(rng)
        g = Seq(Unit(fz), Scalar(UNIT, ring.add(v1, v2), fz))
        path = (1,)
        redex = LabeledDiagram(g, worlds, ring)
        d, pos = _embed(rng, ring, redex)
        fwd = {"world": z, "new0": z0, "new1": z1, "scalar_path": path,
               "value1": v1, "value2": v2}
        if rng.random() < 0.45:
            d2 = apply(r, d, pos, fwd)
            back = {"world": z, "new0": z0, "new1": z1,
                    "scalar_path": path}
            if pos:
                kind, i, j = pos[0]
                delta = (len(_chain_of(d2.term, kind))
                         - len(_chain_of(d.term, kind)))
                pos = ((kind, i, j + delta),)
            return d2, pos, back, True
        return d, pos, fwd, False

    rule(name="world-split-scalar",
         lhs=Hole("redex"), rhs=Hole("image"),
         apply_fn=_split_scalar_apply,
         world_effect="split",
         invertible=True,
         doc="Split a world at a scalar written as a sum of two "
             "values; the reverse merges twin worlds and adds their "
             "scalars.",
         sampler=splitscalar_sampler)

    def splitplus_sampler(r, rng, ring):
        worlds = _sample_worlds(rng)
        z = rng.choice(sorted(worlds))
        z0, z1 = fresh_pair(worlds)
        a, c = _rand_type(rng), _rand_type(rng)
        g = Identity(Sum(a, c), frozenset({z}))
        redex = LabeledDiagram(g, worlds, ring)
        d, pos = _embed(rng, ring, redex)
        binds = {"world": z, "new0": z0, "new1": z1}
        if rng.random() < 0.45:
            d2 = apply(r, d, pos, binds)
            if pos:
                kind, i, j = pos[0]
                delta = (len(_chain_of(d2.term, kind))
                         - len(_chain_of(d.term, kind)))
                pos = ((kind, i, j + delta),)
            return d2, pos, dict(binds), True
        return d, pos, binds, False

    rule(name="world-split-plus",
         lhs=Hole("redex"), rhs=Hole("image"),
         apply_fn=_split_plus_apply,
         world_effect="split",
         invertible=True,
         doc="Split a world at a sum-typed wire it fully enables into "
             "one world per branch; the reverse merges twin worlds.",
         sampler=splitplus_sampler)

    return tuple(rules)


# --- registration ----------------------------------------------------

_RULES_CACHE: Optional[tuple] = None


def self_test_rule(rule: RewriteRule, trials: int = 4,
                   rng: Optional[random.Random] = None,
                   ring: Semiring = RATIONAL) -> None:
    """Randomized semantic-preservation check; raises on failure.

    Every sampled instance must keep the summed interpretation, and
    rules that leave the world set alone must also keep every single
    world's map.
    """
    if rule.sampler is None:
        raise UnsoundRuleError(f"rule {rule.name} ships without a sampler")
    if rng is None:
        rng = random.Random(zlib.crc32(rule.name.encode()))
    for _ in range(trials):
        d, pos, binds, rev = rule.sampler(rule, rng, ring)
        bad = validate(d)
        if bad:
            raise RewriteError(
                f"sampler for {rule.name} produced an invalid instance: "
                f"{bad[0].kind}: {bad[0].message}")
        out = apply(rule, d, pos, binds, reverse=rev)
        if not equal_sem(d, out):
            raise UnsoundRuleError(
                f"rule {rule.name} changed the interpretation")
        if rule.world_effect == "none":
            if out.worlds != d.worlds:
                raise UnsoundRuleError(
                    f"rule {rule.name} changed the world set")
            ma: dict = {}
            mb: dict = {}
            for z in d.worlds:
                if not sem_world(d.term, z, ring, ma).equal(
                        sem_world(out.term, z, ring, mb)):
                    raise UnsoundRuleError(
                        f"rule {rule.name} changed world {z!r}")


def builtin_rules() -> tuple:
    """The rule library; every rule has passed its registration check."""
    global _RULES_CACHE
    if _RULES_CACHE is None:
        rules = _build_rules()
        for r in rules:
            self_test_rule(r, trials=3)
        _RULES_CACHE = rules
    return _RULES_CACHE


def rule_index() -> dict:
    return {r.name: r for r in builtin_rules()}


def rule_named(name: str) -> RewriteRule:
    idx = rule_index()
    if name not in idx:
        raise RewriteError(f"unknown rule {name!r}")
    return idx[name]


# --- tactics ---------------------------------------------------------
#
# Derived lemmas are built as derivations: a tactic object applies each
# step immediately, so construction fails loudly, and records the step
# list for replay.


class _Tactic:
    def __init__(self, initial: LabeledDiagram):
        self.initial = initial
        self.cur = initial
        self.steps: list[Step] = []
        self._rules = rule_index()

    def do(self, name: str, position: Position, bindings=None,
           reverse: bool = False) -> None:
        b = dict(bindings or {})
        self.cur = apply(self._rules[name], self.cur, position, b,
                         reverse=reverse)
        if reverse:
            b["reverse"] = True
        self.steps.append(Step(name, tuple(position), b))

    def focus(self, position: Position) -> Term:
        return focus_at(self.cur.term, position)

    def chain(self, pfx: Position, kind: str = "seq") -> list:
        t = self.cur.term if not pfx else self.focus(pfx)
        return _chain_of(t, kind)

    def done(self) -> Derivation:
        return Derivation(self.initial, tuple(self.steps))


def _pick_for(rule: RewriteRule, focus: Term, ring: Semiring, pred,
              reverse: bool = False, seed: Optional[dict] = None) -> int:
    """Ordinal of the first side-condition-passing match satisfying pred."""
    src = rule.rhs if reverse else rule.lhs
    if not isinstance(src, Term):
        raise RewriteError(f"rule {rule.name} is not searchable")
    count = 0
    for b in match_term(src, focus, dict(seed or {}), ring):
        if not all(fn(b, None) for _, fn in rule.side_conditions):
            continue
        if pred(b):
            return count
        count += 1
    raise RewriteError(f"no {rule.name} match satisfies the tactic")


def _is_id_row(t: Term) -> bool:
    return isinstance(t, EmptyD) or all(
        isinstance(x, Identity) for x in par_chain(t))


def _strip_empty_factors(tac: _Tactic, pos: Position) -> None:
    # remove stray empty bundles from the row at pos
    while True:
        row = tac.focus(pos)
        ch = _chain_of(row, "par")
        if len(ch) < 2:
            return
        idx = next((i for i, x in enumerate(ch)
                    if isinstance(x, EmptyD)), None)
        if idx is None:
            return
        if idx < len(ch) - 1:
            tac.do("empty-par-left", pos + (("par", idx, idx + 2),))
        else:
            tac.do("empty-par-right", pos + (("par", idx - 1, idx + 1),))


def _nat_row(tac: _Tactic, pfx: Position, j: int, us: tuple) -> int:
    """Slide the feed row at index j through the single row after it.

    Returns the length of the replacing region, whose last element is
    again a row (possibly empty) on the processed row's outputs.
    """
    _strip_empty_factors(tac, pfx + (("seq", j, j + 1),))
    before = len(tac.chain(pfx))
    r = tac.chain(pfx)[j + 1]
    if _is_id_row(r):
        tac.do("identity-right", pfx + (("seq", j, j + 2),))
        return 1
    if not isinstance(r, Par):
        had_out = bool(term_cod(r))
        tac.do("contraction-slide", pfx + (("seq", j, j + 2),), {"us": us})
        rlen = len(tac.chain(pfx)) - before + 2
        if not had_out:
            tac.do("identity-right", pfx + (("seq", j, j + rlen),),
                   reverse=True)
            rlen += 1
        return rlen

    factors = par_chain(r)
    g1 = factors[0]
    rest = _rebuild(factors[1:], "par")
    d1, drest = len(term_dom(g1)), len(term_dom(rest))
    feed_pos = pfx + (("seq", j, j + 1),)
    n1 = d1
    if d1 == 0:
        tac.do("empty-par-left", feed_pos, reverse=True)
        n1 = 1
    if drest == 0:
        tac.do("empty-par-right", feed_pos, reverse=True)

    seg = pfx + (("seq", j, j + 2),)
    ring = tac.cur.ring
    inter = tac._rules["interchange"]
    pred = (lambda b: len(par_chain(b["f"])) == n1
            and term_congruent(b["h"], g1))
    pick = _pick_for(inter, tac.focus(seg), ring, pred)
    tac.do("interchange", seg, {"pick": pick})

    # Each factor is padded with an identity row before recursing, so its
    # root stays a Seq: a bare Par root would flatten into the enclosing
    # parallel chain and shift every ("par", ...) selector under pfx.
    for which, sub in ((0, g1), (1, rest)):
        sub_pfx = pfx + (("seq", j, j + 1), ("par", which, which + 1))
        tac.do("identity-left", sub_pfx, reverse=True)
        _nat_chain(tac, sub_pfx, 1, len(seq_chain(sub)), us)
        if len(tac.chain(sub_pfx)) >= 3:
            tac.do("identity-left", sub_pfx + (("seq", 0, 2),))

    here = pfx + (("seq", j, j + 1),)
    pred2 = (lambda b: len(seq_chain(b["h"])) == 1
             and len(seq_chain(b["k"])) == 1)
    pick2 = _pick_for(inter, tac.focus(here), ring, pred2, reverse=True)
    tac.do("interchange", here, {"pick": pick2}, reverse=True)
    _strip_empty_factors(tac, pfx + (("seq", j, j + 1),))
    _strip_empty_factors(tac, pfx + (("seq", j + 1, j + 2),))
    return len(tac.chain(pfx)) - before + 2


def _nat_chain(tac: _Tactic, pfx: Position, i: int, rows: int,
               us: tuple) -> None:
    cursor = i
    for _ in range(rows):
        rlen = _nat_row(tac, pfx, cursor, us)
        cursor += rlen - 1


def lemma_contraction_natural(f, u) -> Derivation:
    """Contractions slide past a subterm, splitting it into two copies.

    Starts from a row of two-branch contractions (worlds outside ``u``,
    worlds inside ``u``) feeding the diagram and pushes it through row
    by row, by structural recursion on the term: identity rows vanish,
    single generators use the one-leaf slide, parallel rows are split
    with the interchange, recursed into, and reassembled.  The final
    diagram applies a copy of ``f`` restricted away from ``u`` beside a
    copy restricted to ``u``, followed by contractions on the outputs.
    """
    ld = f.diagram if isinstance(f, AgnosticDiagram) else f
    u = frozenset(u)
    us = (ld.worlds - u, ld.worlds & u)
    row = par_of([Contraction(t, tuple(l & g for g in us))
                  for t, l in term_dom(ld.term)])
    fch = seq_chain(ld.term)
    init = LabeledDiagram(seq_of([row] + fch), ld.worlds, ld.ring, ld.names)
    tac = _Tactic(init)
    _nat_chain(tac, (), 0, len(fch), us)
    return tac.done()


def lemma_empty_world(f) -> Derivation:
    """Rewrite a diagram enabled in no world down to cut wires.

    Every label must be empty.  Each input wire ends in a zero-branch
    splitter, each output wire starts from a zero-branch contraction,
    and the interior disappears.
    """
    ld = f.diagram if isinstance(f, AgnosticDiagram) else f
    if any(l for l in collect_labels(ld.term)):
        raise RewriteError("the diagram must be enabled in no world")
    tac = _Tactic(ld)
    if isinstance(ld.term, EmptyD):
        return tac.done()
    m = len(term_dom(ld.term))
    k = len(seq_chain(ld.term))
    tac.do("identity-left", (), reverse=True)
    for i in range(m):
        tac.do("contraction-cancel", (("seq", 0, 1), ("par", i, i + 1)),
               {"us": ()}, reverse=True)
    for _ in range(m - 1):
        tac.do("interchange", (("seq", 0, 1), ("par", 0, 2)), reverse=True)
    start = 0 if m == 0 else 1
    tac.do("contraction-natural", (("seq", start, start + 1 + k),),
           {"us": ()})
    ch = tac.chain(())
    if isinstance(ch[-1], EmptyD) and len(ch) > 1:
        tac.do("identity-right", ())
    ch = tac.chain(())
    if isinstance(ch[0], EmptyD) and len(ch) > 1:
        tac.do("identity-left", ())
    return tac.done()


def qubit_through_hadamard_derivation(alpha, beta,
                                      ring: Semiring = QSQRT2I,
                                      amplitude=None) -> Derivation:
    """The worked simplification of a qubit state fed into a Hadamard.

    Starts from the world-agnostic composite of ``qubit_state(alpha,
    beta)`` with ``hadamard`` (eight product worlds) and rewrites it
    into a two-world preparation of ``(alpha + beta) a`` and
    ``(alpha - beta) a``, where ``a`` is the Hadamard amplitude.  The
    run annihilates the four contradictory worlds, cancels the inner
    injection pair, copies each input amplitude through the branch fan,
    fuses it with the entry amplitudes, folds the closed loops into the
    output preparations, and finally merges the surviving worlds in
    twin pairs.  Both amplitudes must be nonzero so that the state
    keeps one world per basis branch.
    """
    from .gallery import hadamard, qubit_state

    if ring.eq(alpha, ring.zero) or ring.eq(beta, ring.zero):
        raise RewriteError("both amplitudes must be nonzero")
    start = seq_agnostic(qubit_state(alpha, beta, ring),
                         hadamard(ring, amplitude))
    tac = _Tactic(start.diagram)
    ring = tac.cur.ring
    inter = tac._rules["interchange"]
    one = lambda b: len(par_chain(b["f"])) == 1

    # worlds that route the state's |x> branch into the box's <y| entry
    # with x != y cannot occur
    ch = tac.chain(())
    dead = ((ch[3].label_left & ch[4].label_right)
            | (ch[3].label_right & ch[4].label_left))
    for z in sorted(dead, key=world_sort_key):
        tac.do("world-annihilate-plus", (("seq", 3, 5),), {"world": z})
    tac.do("plus-cancel", (("seq", 3, 5),))
    tac.do("identity-right", (("seq", 2, 4),))
    tac.do("contraction-unary", (("seq", 2, 3), ("par", 0, 1)))
    tac.do("contraction-unary", (("seq", 2, 3), ("par", 1, 2)))
    tac.do("identity-right", (("seq", 1, 3),))

    # copy the input amplitudes through the entry fans
    tac.do("interchange", (("seq", 1, 3),))
    for which in (0, 1):
        pos = (("seq", 1, 2), ("par", which, which + 1))
        fan = seq_chain(tac.focus(pos))[1]
        tac.do("contraction-dagger-slide", pos, {"us": fan.branches})
    tac.do("interchange", (("seq", 1, 2),), reverse=True)

    # fuse each copy with the matching entry amplitude
    seg = (("seq", 2, 4),)
    tac.do("interchange", seg,
           {"pick": _pick_for(inter, tac.focus(seg), ring, one)})
    tac.do("scalar-fuse", (("seq", 2, 3), ("par", 0, 1)))
    pos = (("seq", 2, 3), ("par", 1, 2))
    tac.do("interchange", pos,
           {"pick": _pick_for(inter, tac.focus(pos), ring, one)})
    tac.do("scalar-fuse", (("seq", 2, 3), ("par", 1, 2)))
    tac.do("interchange", (("seq", 2, 3), ("par", 2, 3)))
    tac.do("scalar-fuse", (("seq", 2, 3), ("par", 2, 3)))
    tac.do("scalar-fuse", (("seq", 2, 3), ("par", 3, 4)))

    # copy the state preparations through the fans as well
    tac.do("interchange", (("seq", 0, 2),))
    for which in (0, 2):
        pos = (("seq", 0, 1), ("par", which, which + 1))
        fan = seq_chain(tac.focus(pos))[1]
        tac.do("contraction-dagger-slide", pos, {"us": fan.branches})

    # close each world's column into a scalar loop
    seg = (("seq", 0, 2),)
    tac.do("interchange", seg,
           {"pick": _pick_for(inter, tac.focus(seg), ring, one)})
    tac.do("interchange", (("seq", 0, 2),))
    pos = (("seq", 0, 1), ("par", 1, 2), ("seq", 0, 2))
    tac.do("interchange", pos,
           {"pick": _pick_for(inter, tac.focus(pos), ring, one)})
    tac.do("interchange", (("seq", 0, 1), ("par", 1, 2)))
    tac.do("interchange", (("seq", 0, 1), ("par", 2, 3), ("seq", 0, 2)))
    tac.do("interchange", (("seq", 0, 1), ("par", 2, 3)))

    # lay the loops beside the output preparations in one row
    tac.do("empty-par-right", (("seq", 0, 1),), reverse=True)
    tac.do("empty-par-left", (("seq", 1, 2),), reverse=True)
    seg = (("seq", 0, 2),)
    joined = (lambda b: len(par_chain(b["f"])) == 4
              and isinstance(b["h"], EmptyD))
    tac.do("interchange", seg,
           {"pick": _pick_for(inter, tac.focus(seg), ring, joined)})
    tac.do("identity-right", (("seq", 0, 1), ("par", 0, 1)))
    tac.do("identity-left", (("seq", 0, 1), ("par", 4, 5)))

    # pair every loop with its world's preparation, then absorb it
    def factor_world(x: Term):
        (w,) = tuple(collect_labels(x)[0])
        return w

    row = tac.chain((("seq", 0, 1),), "par")
    order = [factor_world(x) for x in row[4:]]
    keys = [(order.index(factor_world(x)), 1 if isinstance(x, Unit) else 0)
            for x in row]
    changed = True
    while changed:
        changed = False
        for i in range(len(keys) - 1):
            if keys[i] > keys[i + 1]:
                tac.do("scalar-factor-swap",
                       (("seq", 0, 1), ("par", i, i + 2)))
                keys[i], keys[i + 1] = keys[i + 1], keys[i]
                changed = True
    for k in range(4):
        tac.do("bubble-absorb", (("seq", 0, 1), ("par", k, k + 2)))

    # the two worlds feeding each output contraction are twins now
    tac.do("interchange", (("seq", 0, 2),))
    base = 1 + max((w for w in tac.cur.worlds if isinstance(w, int)),
                   default=-1)
    for which in (0, 1):
        pos = (("seq", 0, 1), ("par", which, which + 1))
        top = seq_chain(tac.focus(pos))[1]
        (za,), (zb,) = (tuple(top.branches[0]), tuple(top.branches[1]))
        tac.do("world-split-scalar", pos,
               {"world": base + which, "new0": za, "new1": zb,
                "scalar_path": (1,)}, reverse=True)
    if tac.cur.worlds != frozenset({0, 1}):
        tac.do("world-rename", (),
               {"mapping": {base: 0, base + 1: 1}})
    return tac.done()


def _carve(tac: _Tactic, pos: Position, left: int) -> None:
    """Interchange the two stacked rows at pos, cutting both after the
    first ``left`` par factors of the upper row."""
    inter = tac._rules["interchange"]
    pred = lambda b: len(par_chain(b["f"])) == left
    tac.do("interchange", pos,
           {"pick": _pick_for(inter, tac.focus(pos), tac.cur.ring, pred)})


def _reseat(tac: _Tactic, pos: Position, pad: Sequence[int] = ()) -> None:
    """Restack the parallel columns at pos into two plain rows.

    Factors listed in ``pad`` are whole boxes rather than two stacked
    pieces; they get an identity row on top so the box lands below.
    """
    n = len(tac.chain(pos, "par"))
    for i in range(n):
        fpos = pos + (("par", i, i + 1),)
        if i in pad or len(seq_chain(tac.focus(fpos))) == 1:
            tac.do("identity-left", fpos, reverse=True)
    inter = tac._rules["interchange"]
    one_row = lambda b: (len(seq_chain(b["f"])) == 1
                         and len(seq_chain(b["g"])) == 1)
    for _ in range(n - 1):
        ppos = pos + (("par", 0, 2),)
        tac.do("interchange", ppos,
               {"pick": _pick_for(inter, tac.focus(ppos), tac.cur.ring,
                                  one_row, reverse=True)},
               reverse=True)


def _merge_rows(tac: _Tactic, j: int, left: int, ids: str) -> None:
    """Collapse rows j and j+1 into one row.

    ``ids`` names the diagonal pair of identity blocks exposed by the
    cut, "lower-left" or "upper-left"; the other diagonal survives.
    """
    _carve(tac, (("seq", j, j + 2),), left)
    el = (("seq", j, j + 1),)
    first, second = (("identity-left", "identity-right")
                     if ids == "lower-left"
                     else ("identity-right", "identity-left"))
    tac.do(first, el + (("par", 1, 2),))
    tac.do(second, el + (("par", 0, 1),))


def _hop(tac: _Tactic, j: int, left: int) -> None:
    """Drop the box after the first ``left`` wires of row j one row
    down, leaving identities behind."""
    _carve(tac, (("seq", j, j + 2),), left)
    el = (("seq", j, j + 1),)
    tac.do("identity-right", el + (("par", 1, 2),))
    _reseat(tac, el, pad=(1,))


def quantum_switch_derivation(u: Optional[AgnosticDiagram] = None,
                              v: Optional[AgnosticDiagram] = None,
                              ring: Semiring = RATIONAL) -> Derivation:
    """Rewrites the one-copy quantum switch into two-copy shape.

    The run has two passes.  The first pass handles each shared gate
    box with the contraction lemmas: naturality copies the box onto its
    two coordination branches, and the merge-then-split pair left over
    cancels.  The second pass straightens the feedback wire with the
    compact structure: the crossings walk off the loop, the last one
    leaves through the cup and dies in the cap, the bent wire is yanked
    straight, and the boxes settle into the row layout of the two-copy
    implementation.  Both gates default to the identity.
    """
    from .gallery import quantum_switch_one_copy

    if u is not None or v is not None:
        ring = (u if u is not None else v).ring
    if u is None:
        u = identity_d(QUBIT, ring)
    if v is None:
        v = identity_d(QUBIT, ring)
    start = quantum_switch_one_copy(u, v)
    tac = _Tactic(start.diagram)
    pd = par_chain(tac.chain(())[0])[0]
    w0, w1 = pd.label_left, pd.label_right

    # pass one: copy each gate onto its branches, cancel its splitter
    for r in (3, 5):
        _carve(tac, (("seq", r, r + 2),), 2)
        _carve(tac, (("seq", r, r + 1), ("par", 1, 2)), 1)
        tac.do("contraction-natural", (("seq", r, r + 1), ("par", 1, 2)),
               {"us": (w0, w1)})
        _reseat(tac, (("seq", r, r + 1),))
        _carve(tac, (("seq", r + 1, r + 3),), 2)
        _carve(tac, (("seq", r + 1, r + 2), ("par", 1, 2)), 1)
        tac.do("contraction-cocancel",
               (("seq", r + 1, r + 2), ("par", 1, 2)))
        tac.do("identity-left", (("seq", r + 1, r + 2), ("par", 0, 1)))
        tac.do("identity-left", (("seq", r + 1, r + 2), ("par", 4, 5)))
        tac.do("identity-right", (("seq", r, r + 2),))

    # pass two: the second gate's loop copy climbs above both crossings
    _carve(tac, (("seq", 4, 6),), 3)
    _carve(tac, (("seq", 4, 5), ("par", 1, 2)), 1)
    tac.do("swap-conaturality", (("seq", 4, 5), ("par", 1, 2)))
    _reseat(tac, (("seq", 4, 5),))
    _merge_rows(tac, 3, 4, "lower-left")
    _carve(tac, (("seq", 2, 4),), 3)
    _carve(tac, (("seq", 2, 3), ("par", 1, 2)), 1)
    tac.do("swap-conaturality", (("seq", 2, 3), ("par", 1, 2)))
    _reseat(tac, (("seq", 2, 3),))

    # two of the three crossings meet and cancel
    _carve(tac, (("seq", 3, 5),), 3)
    _carve(tac, (("seq", 3, 4), ("par", 1, 2)), 1)
    tac.do("swap-involution", (("seq", 3, 4), ("par", 1, 2)))
    _reseat(tac, (("seq", 3, 4),))

    # the last crossing leaves through the cup and dies in the cap
    _carve(tac, (("seq", 5, 7),), 3)
    tac.do("cup-slide", (("seq", 5, 6), ("par", 1, 2)))
    _reseat(tac, (("seq", 5, 6),))
    for j in (4, 3, 2):
        _carve(tac, (("seq", j, j + 2),), 4)
        tac.do("swap-naturality", (("seq", j, j + 1), ("par", 1, 2)))
        _reseat(tac, (("seq", j, j + 1),))
        if j == 4:
            tac.do("identity-right", (("seq", 4, 6),))
    _carve(tac, (("seq", 1, 3),), 4)
    tac.do("cap-swap", (("seq", 1, 2), ("par", 1, 2)))
    _reseat(tac, (("seq", 1, 2),))
    tac.do("empty-par-right", (("seq", 1, 2), ("par", 3, 5)))
    tac.do("identity-right", (("seq", 0, 2),))

    # walk the first-order box below the cup and the cap above it
    _hop(tac, 2, 5)
    _hop(tac, 3, 5)
    tac.do("identity-right", (("seq", 4, 5),), reverse=True)
    _hop(tac, 4, 4)
    _hop(tac, 1, 4)
    tac.do("empty-par-right", (("seq", 1, 2), ("par", 3, 5)))
    _hop(tac, 2, 4)
    tac.do("empty-par-right", (("seq", 2, 3), ("par", 3, 5)))

    # yank the bent wire and settle into the two-copy layout
    _carve(tac, (("seq", 3, 5),), 3)
    tac.do("snake-left", (("seq", 3, 4), ("par", 1, 2)))
    _reseat(tac, (("seq", 3, 4),))
    tac.do("identity-right", (("seq", 3, 5),))
    _merge_rows(tac, 1, 3, "upper-left")
    _merge_rows(tac, 2, 3, "lower-left")
    return tac.done()
