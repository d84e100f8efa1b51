"""Gallery encodings against hand-written matrix oracles.

Expected matrices are spelled out literally (or derived by a tiny
local matrix product) rather than built with the package's own kron
helpers, so the checks are independent of the interpretation code.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from manyworlds.diagram import (AgnosticDiagram, LabeledDiagram, Par, Scalar,
                                dead_worlds, drop_dead_worlds, identity_d,
                                iter_leaves, par_agnostic, seq_agnostic,
                                validate)
from manyworlds.gallery import (I_SINTHETA_BALANCED, bare_identity,
                                basis_routed_box, beam_splitter, bell_state,
                                cnot, dual_rail, green_spider, hadamard,
                                hadamard_via_generators, mach_zehnder,
                                pauli_x, pauli_z, phase_gate, phase_shifter,
                                quantum_switch_one_copy,
                                quantum_switch_two_copy, qubit_state,
                                red_spider, single_photon, vacuum,
                                wave_plate, x_via_generators)
from manyworlds.kernel import QUBIT
from manyworlds.normform import equivalent, normalize
from manyworlds.ringmat import ISQRT2, QS2, QSQRT2I, RATIONAL

W = frozenset
F = Fraction

# ambient indices with every wire enabled, by wire count
FULL_ROWS = {0: [0], 1: [0, 1], 2: [0, 1, 3, 4]}


def block_equals(diagram, table, ring):
    """Fully enabled block matches, and everything outside it is zero."""
    from manyworlds.semantics import sem
    interp = sem(diagram)
    mat = interp.matrix
    rows = FULL_ROWS[len(interp.cod_object)]
    cols = FULL_ROWS[len(interp.dom_object)]
    for r in range(mat.rows):
        for c in range(mat.cols):
            if r in rows and c in cols:
                want = table[rows.index(r)][cols.index(c)]
            else:
                want = ring.zero
            if not ring.eq(mat[r, c], want):
                return False
    return True


def matmul_oracle(ring, a, b):
    # deliberately naive row-by-column product over value tables
    n, k, m = len(a), len(b), len(b[0])
    assert len(a[0]) == k
    return [[ring.sum(ring.mul(a[i][t], b[t][j]) for t in range(k))
             for j in range(m)] for i in range(n)]


def switch_oracle(ring, u, v):
    """Block for control-0 v-then-u, control-1 u-then-v, over value tables."""
    uv = matmul_oracle(ring, u, v)
    vu = matmul_oracle(ring, v, u)
    z = ring.zero
    return [[uv[0][0], uv[0][1], z, z],
            [uv[1][0], uv[1][1], z, z],
            [z, z, vu[0][0], vu[0][1]],
            [z, z, vu[1][0], vu[1][1]]]


def test_qubit_state_amplitudes_with_clean_corner():
    d = qubit_state(F(2), F(3), RATIONAL)
    assert validate(d.diagram) == []
    assert len(d.worlds) == 2
    assert block_equals(d, [[F(2)], [F(3)]], RATIONAL)


def test_state_helpers():
    assert block_equals(vacuum(RATIONAL), [[F(1)], [F(0)]], RATIONAL)
    assert block_equals(single_photon(RATIONAL), [[F(0)], [F(1)]], RATIONAL)
    rail = dual_rail(F(2), F(5), RATIONAL)
    assert block_equals(rail, [[F(0)], [F(2)], [F(5)], [F(0)]], RATIONAL)
    assert len(rail.worlds) == 2


def test_bell_state_correlates_wire_disjoint_legs():
    d = bell_state()
    assert validate(d.diagram) == []
    # the two output wires come from separate parallel legs
    assert isinstance(d.term, Par)
    r = ISQRT2
    zero = QSQRT2I.zero
    assert block_equals(d, [[r], [zero], [zero], [r]], QSQRT2I)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2), st.integers(0, 2), st.data())
def test_basis_routed_box_roundtrip(n_in, n_out, data):
    table = [[F(data.draw(st.integers(-3, 3))) for _ in range(2 ** n_in)]
             for _ in range(2 ** n_out)]
    box = basis_routed_box(table, n_in, n_out, RATIONAL)
    assert validate(box.diagram) == []
    assert dead_worlds(box) == frozenset()
    nonzero = sum(1 for row in table for v in row if v != 0)
    assert len(box.worlds) == nonzero
    assert block_equals(box, table, RATIONAL)


def test_basis_routed_box_rejects_bad_shape():
    with pytest.raises(ValueError):
        basis_routed_box([[F(1)]], 1, 1, RATIONAL)


def test_pauli_and_phase_gates():
    assert block_equals(pauli_x(RATIONAL), [[F(0), F(1)], [F(1), F(0)]],
                        RATIONAL)
    assert block_equals(pauli_z(RATIONAL), [[F(1), F(0)], [F(0), F(-1)]],
                        RATIONAL)
    assert block_equals(phase_gate(F(7), RATIONAL),
                        [[F(1), F(0)], [F(0), F(7)]], RATIONAL)
    assert len(pauli_z(RATIONAL).worlds) == 2


def test_hadamard_entries_and_involution():
    h = hadamard()
    assert len(h.worlds) == 4
    r = ISQRT2
    assert block_equals(h, [[r, r], [r, -r]], QSQRT2I)
    hh = seq_agnostic(h, h)
    wire = bare_identity(QUBIT, ring=QSQRT2I)
    assert equivalent(hh, wire)
    # exact ring: canonical representatives coincide syntactically too
    assert normalize(hh).diagram == normalize(wire).diagram


def test_cnot_per_world_decomposition():
    d = cnot(RATIONAL)
    assert validate(d.diagram) == []
    assert len(d.worlds) == 3
    o, z = F(1), F(0)
    per_world = {
        0: [[o, z, z, z], [z, o, z, z], [z, z, z, z], [z, z, z, z]],
        1: [[z, z, z, z], [z, z, z, z], [z, z, z, z], [z, z, o, z]],
        2: [[z, z, z, z], [z, z, z, z], [z, z, z, o], [z, z, z, z]],
    }
    from manyworlds.semantics import sem
    for w, table in per_world.items():
        # restricting the world set isolates one world's contribution
        solo = LabeledDiagram(d.term, W({w}), RATIONAL)
        mat = sem(solo).matrix
        rows = FULL_ROWS[2]
        for r in range(4):
            for c in range(4):
                assert mat[rows[r], rows[c]] == table[r][c]
    assert block_equals(d, [[o, z, z, z], [z, o, z, z],
                            [z, z, z, o], [z, z, o, z]], RATIONAL)


def test_cnot_agrees_with_entry_per_world_box():
    o, z = F(1), F(0)
    table = [[o, z, z, z], [z, o, z, z], [z, z, z, o], [z, z, o, z]]
    box = basis_routed_box(table, 2, 2, RATIONAL)
    assert len(box.worlds) == 4  # versus three in the routed build
    assert equivalent(cnot(RATIONAL), box)
    twice = seq_agnostic(cnot(RATIONAL), cnot(RATIONAL))
    assert equivalent(twice, bare_identity(QUBIT, QUBIT, ring=RATIONAL))


def test_compositional_gates_match_their_boxes():
    from manyworlds.semantics import sem

    def enabled_block(d, table, ring):
        # the dead world taints only the all-disabled corner
        block = sem(d).fully_enabled_block()
        return all(ring.eq(block[r, c], table[r][c])
                   for r in range(block.rows) for c in range(block.cols))

    xg = x_via_generators(RATIONAL)
    assert len(xg.worlds) == 3
    assert len(dead_worlds(xg)) == 1
    assert enabled_block(xg, [[F(0), F(1)], [F(1), F(0)]], RATIONAL)
    assert equivalent(drop_dead_worlds(xg), pauli_x(RATIONAL))

    hg = hadamard_via_generators()
    assert len(hg.worlds) == 5
    r = ISQRT2
    assert enabled_block(hg, [[r, r], [r, -r]], QSQRT2I)
    assert equivalent(drop_dead_worlds(hg), hadamard())


def test_green_spider_copies_and_fuses():
    o, z = F(1), F(0)
    copy = green_spider(1, 2, o, RATIONAL)
    assert block_equals(copy, [[o, z], [z, z], [z, z], [z, o]], RATIONAL)

    chain = seq_agnostic(green_spider(1, 1, F(2), RATIONAL),
                         green_spider(1, 1, F(3), RATIONAL))
    assert equivalent(chain, green_spider(1, 1, F(6), RATIONAL))

    legs = seq_agnostic(
        green_spider(1, 2, F(2), RATIONAL),
        par_agnostic(green_spider(1, 1, F(3), RATIONAL),
                     identity_d(QUBIT, RATIONAL)))
    assert equivalent(legs, green_spider(1, 2, F(6), RATIONAL))


def test_red_spider_is_the_flip_in_the_other_basis():
    flip = red_spider(1, 1, QS2.from_rational(-1))
    one, zero = QSQRT2I.one, QSQRT2I.zero
    assert block_equals(flip, [[zero, one], [one, zero]], QSQRT2I)
    assert equivalent(seq_agnostic(flip, flip),
                      bare_identity(QUBIT, ring=QSQRT2I))


def test_beam_splitter_block():
    bs = beam_splitter(ISQRT2, I_SINTHETA_BALANCED)
    one, z = QSQRT2I.one, QSQRT2I.zero
    c, s = ISQRT2, I_SINTHETA_BALANCED
    assert validate(bs.diagram) == []
    assert block_equals(bs, [[one, z, z, z],
                             [z, c, s, z],
                             [z, s, c, z],
                             [z, z, z, one]], QSQRT2I)


def test_wave_plate_block():
    c, s = QS2.from_rational(F(3, 5)), QS2.from_rational(F(4, 5))
    assert block_equals(wave_plate(c, s), [[c, s], [s, -c]], QSQRT2I)


def test_mach_zehnder_routes_by_relative_phase():
    one, z, neg = QSQRT2I.one, QSQRT2I.zero, QS2.from_rational(-1)
    mz = mach_zehnder(ISQRT2, I_SINTHETA_BALANCED, neg)
    flipped = basis_routed_box([[one, z, z, z],
                                [z, one, z, z],
                                [z, z, neg, z],
                                [z, z, z, neg]], 2, 2, QSQRT2I)
    assert equivalent(mz, flipped)
    # with no relative phase the photon swaps arms up to i
    i = QS2(ai=F(1))
    even = mach_zehnder(ISQRT2, I_SINTHETA_BALANCED, one)
    assert block_equals(even, [[one, z, z, z],
                               [z, z, i, z],
                               [z, i, z, z],
                               [z, z, z, one]], QSQRT2I)


def xz_tables():
    o, z = F(1), F(0)
    x = [[z, o], [o, z]]
    zg = [[o, z], [z, -o]]
    return x, zg


def test_quantum_switch_two_copy_against_oracle():
    xt, zt = xz_tables()
    d = quantum_switch_two_copy(pauli_x(RATIONAL), pauli_z(RATIONAL))
    assert validate(d.diagram) == []
    assert dead_worlds(d) == frozenset()
    assert block_equals(d, switch_oracle(RATIONAL, xt, zt), RATIONAL)


def test_quantum_switch_one_copy_against_oracle():
    xt, zt = xz_tables()
    d = quantum_switch_one_copy(pauli_x(RATIONAL), pauli_z(RATIONAL))
    assert validate(d.diagram) == []
    assert dead_worlds(d) == frozenset()
    assert block_equals(d, switch_oracle(RATIONAL, xt, zt), RATIONAL)


def count_scalar_leaves(term, value):
    return sum(1 for _, leaf in iter_leaves(term)
               if isinstance(leaf, Scalar) and leaf.value == value)


def test_switch_orders_agree_and_one_copy_is_single():
    u = phase_gate(F(5), RATIONAL)
    v = pauli_x(RATIONAL)
    two = quantum_switch_two_copy(u, v)
    one = quantum_switch_one_copy(u, v)
    assert count_scalar_leaves(two.term, F(5)) == 2
    assert count_scalar_leaves(one.term, F(5)) == 1
    assert equivalent(two, one)
    assert normalize(two) == normalize(one)


def test_switch_with_hadamard():
    h = hadamard()
    s = phase_gate(QS2(ai=F(1)), QSQRT2I)
    two = quantum_switch_two_copy(h, s)
    one = quantum_switch_one_copy(h, s)
    r = ISQRT2
    i = QS2(ai=F(1))
    ht = [[r, r], [r, -r]]
    st_ = [[QSQRT2I.one, QSQRT2I.zero], [QSQRT2I.zero, i]]
    want = switch_oracle(QSQRT2I, ht, st_)
    assert block_equals(two, want, QSQRT2I)
    assert block_equals(one, want, QSQRT2I)
    assert equivalent(two, one)


def test_gallery_diagrams_validate():
    built = [
        qubit_state(F(1), F(1), RATIONAL),
        bell_state(),
        hadamard(),
        cnot(RATIONAL),
        green_spider(2, 1, F(4), RATIONAL),
        red_spider(1, 2, QS2.from_rational(2)),
        beam_splitter(ISQRT2, I_SINTHETA_BALANCED),
        mach_zehnder(ISQRT2, I_SINTHETA_BALANCED, QSQRT2I.one),
        quantum_switch_two_copy(pauli_x(RATIONAL), pauli_z(RATIONAL)),
        quantum_switch_one_copy(pauli_x(RATIONAL), pauli_z(RATIONAL)),
    ]
    for d in built:
        assert validate(d.diagram) == []
        assert dead_worlds(d) == frozenset()
