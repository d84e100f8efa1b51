"""Worked encodings: qubit states and gates, entangled pairs without
connecting wires, a controlled gate, spiders, linear-optics components,
and a quantum switch that superposes the order of two gates.

Every builder returns a world-agnostic diagram whose worlds all carry
nonempty membership, so interpretations are clean on the all-disabled
corner.  ``basis_routed_box`` is the workhorse: it realises an
arbitrary matrix over computational bases with one world per nonzero
entry, each world routing one input basis state to one output basis
state through a scalar.
"""

from __future__ import annotations

from typing import Sequence

from .diagram import (AgnosticDiagram, Cap, Contraction, ContractionDag, Cup,
                      EmptyD, Identity, LabeledDiagram, Par, Plus, PlusDag,
                      Scalar, Swap, Unit, UnitDag, contraction_d,
                      contractiondag_d, ensure_star, identity_d, par_agnostic,
                      par_of, plus_d, plusdag_d, port_types, scalar_d,
                      seq_agnostic, seq_of, swap_d, Term)
from .kernel import QUBIT, UNIT, WireType
from .ringmat import ISQRT2, QS2, QSQRT2I, RATIONAL, Semiring


def bare_identity(*wtypes: WireType, ring: Semiring = RATIONAL) -> AgnosticDiagram:
    """Identity over a single world, with no dead world attached."""
    if not wtypes:
        return AgnosticDiagram(LabeledDiagram(EmptyD(), frozenset({0}), ring))
    term = par_of([Identity(t, frozenset({0})) for t in wtypes])
    return AgnosticDiagram(LabeledDiagram(term, frozenset({0}), ring))


# --- basis-routed boxes ----------------------------------------------


def basis_routed_box(entries: Sequence[Sequence], n_in: int, n_out: int,
                     ring: Semiring) -> AgnosticDiagram:
    """A diagram on qubit wires interpreting to the given logical matrix.

    ``entries`` is a ``2**n_out`` by ``2**n_in`` matrix of ring values
    indexed by computational basis states, leftmost wire most
    significant.  One world is allocated per nonzero entry ``(i, j)``;
    in that world every input wire is projected onto the bits of ``j``,
    the value multiplies, and every output wire is injected at the bits
    of ``i``.  All boundary wires are enabled in every world, so the
    worlds sum to ``entries`` on the fully enabled block and the rest
    of the interpretation is zero.
    """
    rows = [list(r) for r in entries]
    if len(rows) != 2 ** n_out or any(len(r) != 2 ** n_in for r in rows):
        raise ValueError(f"need a {2 ** n_out} by {2 ** n_in} entry table")
    live = [(i, j) for i in range(2 ** n_out) for j in range(2 ** n_in)
            if not ring.eq(rows[i][j], ring.zero)]
    worlds = frozenset(range(len(live)))
    value = {w: rows[i][j] for w, (i, j) in enumerate(live)}
    names = tuple((w, f"e{i}x{j}") for w, (i, j) in enumerate(live))

    if n_in == 0 and n_out == 0:
        loops = [seq_of([Unit(frozenset({w})),
                         Scalar(UNIT, value[w], frozenset({w})),
                         UnitDag(frozenset({w}))]) for w in sorted(worlds)]
        term = par_of(loops) if loops else EmptyD()
        return AgnosticDiagram(LabeledDiagram(term, worlds, ring, names))

    def bit(basis: int, wire: int, width: int) -> int:
        return (basis >> (width - 1 - wire)) & 1

    # per wire: world ids split by the branch their basis state selects
    in_groups = [([w for w, (_, j) in enumerate(live) if bit(j, k, n_in) == 0],
                  [w for w, (_, j) in enumerate(live) if bit(j, k, n_in) == 1])
                 for k in range(n_in)]
    out_groups = [([w for w, (i, _) in enumerate(live) if bit(i, k, n_out) == 0],
                   [w for w, (i, _) in enumerate(live) if bit(i, k, n_out) == 1])
                  for k in range(n_out)]
    in_slots = [w for zeros, ones in in_groups for w in zeros + ones]
    out_slots = [w for zeros, ones in out_groups for w in zeros + ones]

    def scalar_row(slots: list[int], group0: int) -> Term:
        factors = []
        for pos, w in enumerate(slots):
            if pos < group0:
                factors.append(Scalar(UNIT, value[w], frozenset({w})))
            else:
                factors.append(Identity(UNIT, frozenset({w})))
        return par_of(factors)

    rows_out: list = []
    if n_in:
        rows_out.append(par_of(
            [PlusDag(UNIT, UNIT, frozenset(z), frozenset(o))
             for z, o in in_groups]))
        rows_out.append(par_of(
            [ContractionDag(UNIT, tuple(frozenset({w}) for w in part))
             for z, o in in_groups for part in (z, o)]))
        # scalars ride the first input wire's fan-out
        rows_out.append(scalar_row(in_slots, len(live)))
        rows_out.append(par_of([UnitDag(frozenset({w})) for w in in_slots]))
    if n_out:
        rows_out.append(par_of([Unit(frozenset({w})) for w in out_slots]))
        if not n_in:
            rows_out.append(scalar_row(out_slots, len(live)))
        rows_out.append(par_of(
            [Contraction(UNIT, tuple(frozenset({w}) for w in part))
             for z, o in out_groups for part in (z, o)]))
        rows_out.append(par_of(
            [Plus(UNIT, UNIT, frozenset(z), frozenset(o))
             for z, o in out_groups]))
    return AgnosticDiagram(LabeledDiagram(seq_of(rows_out), worlds, ring, names))


# --- states ----------------------------------------------------------


def qubit_state(alpha, beta, ring: Semiring = RATIONAL) -> AgnosticDiagram:
    """Preparation of alpha |0> + beta |1> from the empty boundary."""
    return basis_routed_box([[alpha], [beta]], 0, 1, ring)


def vacuum(ring: Semiring = RATIONAL) -> AgnosticDiagram:
    return qubit_state(ring.one, ring.zero, ring)


def single_photon(ring: Semiring = RATIONAL) -> AgnosticDiagram:
    return qubit_state(ring.zero, ring.one, ring)


def dual_rail(alpha, beta, ring: Semiring = RATIONAL) -> AgnosticDiagram:
    """Path encoding alpha |01> + beta |10> on two mode wires."""
    z = ring.zero
    return basis_routed_box([[z], [alpha], [beta], [z]], 0, 2, ring)


def bell_state(amplitude=ISQRT2, ring: Semiring = QSQRT2I) -> AgnosticDiagram:
    """(|00> + |11>) scaled, as two wire-disjoint legs sharing worlds.

    The two output wires come from separate subterms with no connecting
    wire; the correlation lives entirely in the shared labels.
    """
    both = frozenset({0, 1})
    w0, w1 = frozenset({0}), frozenset({1})

    def leg(with_scalar: bool) -> Term:
        steps = [Unit(both)]
        if with_scalar:
            steps.append(Scalar(UNIT, amplitude, both))
        steps.append(ContractionDag(UNIT, (w0, w1)))
        steps.append(Plus(UNIT, UNIT, w0, w1))
        return seq_of(steps)

    term = Par(leg(True), leg(False))
    return AgnosticDiagram(LabeledDiagram(term, both, ring,
                                          names=((0, "both0"), (1, "both1"))))


# --- single-wire gates -----------------------------------------------


def pauli_x(ring: Semiring = RATIONAL) -> AgnosticDiagram:
    z, o = ring.zero, ring.one
    return basis_routed_box([[z, o], [o, z]], 1, 1, ring)


def pauli_z(ring: Semiring = RATIONAL) -> AgnosticDiagram:
    z, o = ring.zero, ring.one
    return basis_routed_box([[o, z], [z, ring.mul(ring.neg_one(), o)]], 1, 1, ring)


def phase_gate(phase, ring: Semiring = RATIONAL) -> AgnosticDiagram:
    """diag(1, phase) on one qubit wire."""
    z, o = ring.zero, ring.one
    return basis_routed_box([[o, z], [z, phase]], 1, 1, ring)


def hadamard(ring: Semiring = QSQRT2I, amplitude=None) -> AgnosticDiagram:
    """Four worlds, one per matrix entry, each carrying +-1/sqrt2."""
    if amplitude is None:
        amplitude = ISQRT2
    neg = ring.mul(ring.neg_one(), amplitude)
    return basis_routed_box([[amplitude, amplitude], [amplitude, neg]],
                            1, 1, ring)


def x_via_generators(ring: Semiring = RATIONAL) -> AgnosticDiagram:
    """The bit flip assembled agnostically from stock generators.

    Keeps the dead world the composition produces; drop it to compare
    with ``pauli_x``.
    """
    return seq_agnostic(plusdag_d(UNIT, UNIT, ring),
                        swap_d(UNIT, UNIT, ring),
                        plus_d(UNIT, UNIT, ring))


def hadamard_via_generators(ring: Semiring = QSQRT2I,
                            amplitude=None) -> AgnosticDiagram:
    """Entry-per-world Hadamard assembled agnostically from stock parts."""
    if amplitude is None:
        amplitude = ISQRT2
    neg = ring.mul(ring.neg_one(), amplitude)
    split = plusdag_d(UNIT, UNIT, ring)
    fan = par_agnostic(contractiondag_d(UNIT, 2, ring),
                       contractiondag_d(UNIT, 2, ring))
    scalars = par_agnostic(scalar_d(UNIT, amplitude, ring),
                           scalar_d(UNIT, amplitude, ring),
                           scalar_d(UNIT, amplitude, ring),
                           scalar_d(UNIT, neg, ring))
    shuffle = par_agnostic(identity_d(UNIT, ring), swap_d(UNIT, UNIT, ring),
                           identity_d(UNIT, ring))
    merge = par_agnostic(contraction_d(UNIT, 2, ring),
                         contraction_d(UNIT, 2, ring))
    return seq_agnostic(split, fan, scalars, shuffle, merge,
                        plus_d(UNIT, UNIT, ring))


# --- a controlled gate -----------------------------------------------


def cnot(ring: Semiring = RATIONAL) -> AgnosticDiagram:
    """Controlled flip over three worlds.

    One world passes the target wire through whole; the other two carry
    the crossed branches of the flipped target.  Control and target
    sides touch no common wire, so the conditioning is pure labeling.
    """
    a, bc = frozenset({0}), frozenset({1, 2})
    b, c = frozenset({1}), frozenset({2})
    ctrl0, ctrl1 = Identity(UNIT, a), Identity(UNIT, bc)
    keep = Identity(QUBIT, a)
    rows = [
        Par(PlusDag(UNIT, UNIT, a, bc), ContractionDag(QUBIT, (a, bc))),
        par_of([ctrl0, ctrl1, keep, PlusDag(UNIT, UNIT, b, c)]),
        par_of([ctrl0, ctrl1, keep, Swap(UNIT, UNIT, b, c)]),
        par_of([ctrl0, ctrl1, keep, Plus(UNIT, UNIT, c, b)]),
        Par(Plus(UNIT, UNIT, a, bc), Contraction(QUBIT, (a, bc))),
    ]
    names = ((0, "ctl0"), (1, "flip01"), (2, "flip10"))
    return AgnosticDiagram(
        LabeledDiagram(seq_of(rows), frozenset({0, 1, 2}), ring, names))


# --- spiders ---------------------------------------------------------


def green_spider(n_in: int, n_out: int, phase,
                 ring: Semiring = RATIONAL) -> AgnosticDiagram:
    """|0..0><0..0| + phase |1..1><1..1| over computational bases."""
    z, o = ring.zero, ring.one
    table = [[z] * 2 ** n_in for _ in range(2 ** n_out)]
    table[0][0] = o
    table[-1][-1] = ring.add(table[-1][-1], phase)
    return basis_routed_box(table, n_in, n_out, ring)


def red_spider(n_in: int, n_out: int, phase, ring: Semiring = QSQRT2I,
               amplitude=None) -> AgnosticDiagram:
    """The green spider conjugated by Hadamard boxes on every leg."""
    h = hadamard(ring, amplitude)
    out = green_spider(n_in, n_out, phase, ring)
    if n_in:
        out = seq_agnostic(par_agnostic(*[h] * n_in), out)
    if n_out:
        out = seq_agnostic(out, par_agnostic(*[h] * n_out))
    return out


# --- linear optics ---------------------------------------------------


I_SINTHETA_BALANCED = QS2(bi=ISQRT2.br)  # i/sqrt2, the balanced coupling


def phase_shifter(phase, ring: Semiring = RATIONAL) -> AgnosticDiagram:
    """Phase on the occupied branch of one mode wire."""
    return phase_gate(phase, ring)


def beam_splitter(cos_value, i_sin_value,
                  ring: Semiring = QSQRT2I) -> AgnosticDiagram:
    """Two mode wires; the one-photon sector mixes, the rest passes.

    Basis |m1 m2> with the left wire most significant: |01> and |10>
    rotate by [[cos, i sin], [i sin, cos]]; |00> and |11> are fixed.
    """
    z, o = ring.zero, ring.one
    c, s = cos_value, i_sin_value
    table = [[o, z, z, z],
             [z, c, s, z],
             [z, s, c, z],
             [z, z, z, o]]
    return basis_routed_box(table, 2, 2, ring)


def wave_plate(cos_value, sin_value,
               ring: Semiring = QSQRT2I) -> AgnosticDiagram:
    """Half-wave rotation [[c, s], [s, -c]] on one polarisation wire."""
    return basis_routed_box(
        [[cos_value, sin_value],
         [sin_value, ring.mul(ring.neg_one(), cos_value)]], 1, 1, ring)


def mach_zehnder(cos_value, i_sin_value, phase,
                 ring: Semiring = QSQRT2I) -> AgnosticDiagram:
    """Interferometer: splitter, phase on the upper arm, splitter."""
    bs = beam_splitter(cos_value, i_sin_value, ring)
    arm = par_agnostic(phase_shifter(phase, ring), identity_d(QUBIT, ring))
    return seq_agnostic(bs, arm, bs)


# --- quantum switch --------------------------------------------------


def _frame(factors: Sequence[Term], ring: Semiring) -> AgnosticDiagram:
    """A fixed chunk over the two coordination worlds of the switch."""
    return AgnosticDiagram(
        LabeledDiagram(par_of(list(factors)), frozenset({0, 1}), ring))


def _check_switch_args(u: AgnosticDiagram, v: AgnosticDiagram) -> Semiring:
    for g in (u, v):
        if port_types(g.dom) != (QUBIT,) or port_types(g.cod) != (QUBIT,):
            raise ValueError("switch arguments must map one qubit wire to one")
    if u.ring is not v.ring:
        raise ValueError("switch arguments must share a ring")
    return u.ring


def quantum_switch_two_copy(u: AgnosticDiagram,
                            v: AgnosticDiagram) -> AgnosticDiagram:
    """Control |0> applies v then u, control |1> applies u then v.

    On the enabled block this maps (alpha, beta) (x) y to
    (alpha UV y, beta VU y), with one copy of each gate per order.
    """
    ring = _check_switch_args(u, v)
    s0, s1 = frozenset({0}), frozenset({1})
    split = _frame([PlusDag(UNIT, UNIT, s0, s1),
                    ContractionDag(QUBIT, (s0, s1))], ring)
    ids = (identity_d(UNIT, ring), identity_d(UNIT, ring))
    first = par_agnostic(*ids, ensure_star(v), ensure_star(u))
    second = par_agnostic(*ids, ensure_star(u), ensure_star(v))
    merge = _frame([Plus(UNIT, UNIT, s0, s1),
                    Contraction(QUBIT, (s0, s1))], ring)
    return seq_agnostic(split, first, second, merge)


def quantum_switch_one_copy(u: AgnosticDiagram,
                            v: AgnosticDiagram) -> AgnosticDiagram:
    """Superposed gate order with a single occurrence of each gate.

    The data wire is split per coordination world; the second order
    threads through a bent feedback wire, so each gate box appears once
    and is traversed in both worlds.
    """
    ring = _check_switch_args(u, v)
    s0, s1 = frozenset({0}), frozenset({1})
    c0, c1 = Identity(UNIT, s0), Identity(UNIT, s1)
    keep0, keep1 = Identity(QUBIT, s0), Identity(QUBIT, s1)
    cross = Swap(QUBIT, QUBIT, s1, s1)

    def boxed(g: AgnosticDiagram) -> AgnosticDiagram:
        return par_agnostic(identity_d(UNIT, ring), identity_d(UNIT, ring),
                            ensure_star(g), identity_d(QUBIT, ring),
                            identity_d(QUBIT, ring))

    chunks = [
        # [c, d] -> [c0, c1, d0, d1]
        _frame([PlusDag(UNIT, UNIT, s0, s1),
                ContractionDag(QUBIT, (s0, s1))], ring),
        # open the feedback pair: ... -> [c0, c1, d0, d1, f1, f2]
        _frame([c0, c1, keep0, keep1, Cap(QUBIT, s1)], ring),
        # -> [c0, c1, d0, f1, d1, f2]
        _frame([c0, c1, keep0, cross, keep1], ring),
        # merge the first gate's input: -> [c0, c1, vin, d1, f2]
        _frame([c0, c1, Contraction(QUBIT, (s0, s1)), keep1, keep1], ring),
        boxed(v),
        # -> [c0, c1, v0, v1, d1, f2]
        _frame([c0, c1, ContractionDag(QUBIT, (s0, s1)), keep1, keep1], ring),
        # -> [c0, c1, v0, d1, v1, f2]
        _frame([c0, c1, keep0, cross, keep1], ring),
        # -> [c0, c1, uin, v1, f2]
        _frame([c0, c1, Contraction(QUBIT, (s0, s1)), keep1, keep1], ring),
        boxed(u),
        # -> [c0, c1, u0, u1, v1, f2]
        _frame([c0, c1, ContractionDag(QUBIT, (s0, s1)), keep1, keep1], ring),
        # -> [c0, c1, u0, v1, u1, f2]
        _frame([c0, c1, keep0, cross, keep1], ring),
        # close the feedback: -> [c0, c1, u0, v1]
        _frame([c0, c1, keep0, keep1, Cup(QUBIT, s1)], ring),
        # -> [c, d]
        _frame([Plus(UNIT, UNIT, s0, s1),
                Contraction(QUBIT, (s0, s1))], ring),
    ]
    return seq_agnostic(*chunks)
