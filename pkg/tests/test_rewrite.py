import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from manyworlds.diagram import (EmptyD, Identity, LabeledDiagram, Scalar, Seq,
                                identity_d, par_chain, scalar_d, seq_chain,
                                validate)
from manyworlds.gallery import (basis_routed_box, hadamard,
                                quantum_switch_one_copy,
                                quantum_switch_two_copy)
from manyworlds.kernel import QUBIT, UNIT
from manyworlds.ringmat import ISQRT2, QS2, QSQRT2I, RATIONAL
from manyworlds.rewrite import (Derivation, RewriteError, Step, apply,
                                builtin_rules, concat_derivations,
                                lemma_contraction_natural, lemma_empty_world,
                                qubit_through_hadamard_derivation,
                                quantum_switch_derivation, replay,
                                replay_trace, rule_index, rule_named,
                                script_to_steps, self_test_rule,
                                steps_to_script)
from manyworlds.semantics import equal_sem, sem, sem_agnostic

W = frozenset
F = Fraction

RULE_NAMES = sorted(r.name for r in builtin_rules())


# --- the rule library ------------------------------------------------


def test_catalog_covers_the_world_effect_family():
    rules = builtin_rules()
    assert len(rules) >= 5
    effects = {r.world_effect for r in rules}
    assert effects == {"none", "rename", "annihilate", "split"}


@pytest.mark.parametrize("name", RULE_NAMES)
def test_rule_is_sound(name):
    # semantic preservation on fresh random instances, and world-by-world
    # preservation for the rules that leave the world set alone
    self_test_rule(rule_named(name), trials=8,
                   rng=random.Random("sound:" + name))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(RULE_NAMES))
def test_any_sampled_application_is_sound_and_valid(seed, name):
    rule = rule_named(name)
    d, pos, binds, rev = rule.sampler(rule, random.Random(seed), RATIONAL)
    out = apply(rule, d, pos, binds, reverse=rev)
    assert validate(out) == []
    assert equal_sem(out, d)


def test_unknown_rule_name_is_reported():
    with pytest.raises(RewriteError):
        rule_named("no-such-rule")


# --- apply -----------------------------------------------------------


def test_identity_rule_application_gives_back_the_subject():
    body = Scalar(QUBIT, F(7), W({0}))
    d = LabeledDiagram(Seq(Identity(QUBIT, W({0})), body), W({0, 1}), RATIONAL)
    out = apply(rule_named("identity-left"), d)
    assert out.term == body
    assert equal_sem(out, d)


def test_apply_refuses_a_bad_position():
    d = scalar_d(QUBIT, F(2))
    with pytest.raises(RewriteError):
        apply(rule_named("identity-left"), d.diagram)


def test_scalar_split_then_merge_round_trip():
    # forward splits a world in two at a scalar written as s + t; the
    # right-to-left reading merges the twin worlds and adds the scalars
    from manyworlds.diagram import Unit
    d = LabeledDiagram(Seq(Unit(W({0})), Scalar(UNIT, F(5), W({0}))),
                       W({0, 1}), RATIONAL)
    rule = rule_named("world-split-scalar")
    binds = {"world": 0, "new0": 7, "new1": 8, "scalar_path": (1,),
             "value1": F(2), "value2": F(3)}
    split = apply(rule, d, (), binds)
    assert split.worlds == W({7, 8, 1})
    assert equal_sem(split, d)
    merged = apply(rule, split, (),
                   {"world": 0, "new0": 7, "new1": 8, "scalar_path": (1,)},
                   reverse=True)
    assert equal_sem(merged, d)
    assert merged.term == d.term


def test_rename_rule_relabels_by_bijection():
    d = scalar_d(QUBIT, F(3)).diagram
    out = apply(rule_named("world-rename"), d, (), {"mapping": {0: 5, 1: 0}})
    assert out.worlds == W({5, 0})
    assert equal_sem(out, d)


# --- derived lemmas --------------------------------------------------


def test_contraction_natural_scalar_copies_the_value():
    der = lemma_contraction_natural(scalar_d(QUBIT, F(5)), {0})
    trace = replay_trace(der)
    assert all(equal_sem(x, trace[0]) for x in trace)
    rows = seq_chain(trace[-1].term)
    copies = par_chain(rows[0])
    assert [type(x) for x in copies] == [Scalar, Scalar]
    assert all(isinstance(x.wtype, type(QUBIT)) or x.value == F(5)
               for x in copies)


def test_contraction_natural_identity_leaves_the_contraction():
    der = lemma_contraction_natural(identity_d(QUBIT), {0})
    final = replay(der)
    assert [type(x).__name__ for x in seq_chain(final.term)] == ["Contraction"]
    assert equal_sem(final, der.initial)


def test_contraction_natural_on_a_composite_encoding():
    h = hadamard()
    u = set(sorted(h.diagram.worlds)[:2])
    der = lemma_contraction_natural(h, u)
    trace = replay_trace(der)
    assert all(equal_sem(x, trace[0]) for x in trace)


def test_empty_world_identity_becomes_two_zero_branch_contractions():
    d = LabeledDiagram(Identity(QUBIT, W()), W({0}), RATIONAL)
    final = replay(lemma_empty_world(d))
    names = [type(x).__name__ for x in seq_chain(final.term)]
    assert names == ["ContractionDag", "Contraction"]
    assert all(x.branches == () for x in seq_chain(final.term))
    assert equal_sem(final, d)


def test_empty_world_empty_diagram_is_untouched():
    d = LabeledDiagram(EmptyD(), W({0}), RATIONAL)
    der = lemma_empty_world(d)
    assert der.steps == ()
    assert replay(der) == d


def test_empty_world_rejects_live_labels():
    with pytest.raises(RewriteError):
        lemma_empty_world(identity_d(QUBIT))


def test_empty_world_random_terms_keep_their_meaning():
    rng = random.Random(11)
    for _ in range(5):
        rows = []
        for _ in range(rng.randint(1, 3)):
            rows.append(Scalar(QUBIT, RATIONAL.sample(rng), W()))
        d = LabeledDiagram(Seq(Identity(QUBIT, W()), rows[0])
                           if len(rows) == 1 else
                           Seq(rows[0], rows[1] if len(rows) == 2
                               else Seq(rows[1], rows[2])),
                           W({0, 1}), RATIONAL)
        trace = replay_trace(lemma_empty_world(d))
        assert all(equal_sem(x, trace[0]) for x in trace)


# --- derivations and replay ------------------------------------------


def _qubit_derivation():
    return qubit_through_hadamard_derivation(QS2(ar=F(1, 3), br=F(2)),
                                             QS2(ar=F(-1, 2), ai=F(1, 5)))


def test_replay_reports_step_mismatch():
    der = _qubit_derivation()
    bad = Derivation(der.initial,
                     (Step("snake-right", (("seq", 0, 1),), {}),))
    with pytest.raises(RewriteError, match="step mismatch"):
        replay(bad)


def test_derivations_concatenate():
    der = _qubit_derivation()
    cut = len(der.steps) // 2
    head = Derivation(der.initial, der.steps[:cut])
    tail = Derivation(replay(head), der.steps[cut:])
    joined = concat_derivations(head, tail)
    assert joined.steps == der.steps
    assert replay(joined) == replay(der)


def test_concat_requires_meeting_endpoints():
    der = _qubit_derivation()
    with pytest.raises(RewriteError, match="meet"):
        concat_derivations(der, der)


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 48))
def test_split_replay_agrees_with_full_replay(cut):
    der = _qubit_derivation()
    head = Derivation(der.initial, der.steps[:cut])
    mid = replay(head)
    assert replay(Derivation(mid, der.steps[cut:])) == replay(der)


def test_script_lines_round_trip():
    der = _qubit_derivation()
    ring = der.initial.ring
    text = steps_to_script(der.steps, ring)
    assert script_to_steps(text, ring) == der.steps
    assert len(text.splitlines()) == len(der.steps)


# --- the worked qubit-into-hadamard run ------------------------------


def test_qubit_through_hadamard_every_step_is_exact():
    alpha = QS2(ar=F(1, 3), br=F(2))
    beta = QS2(ar=F(-1, 2), ai=F(1, 5))
    trace = replay_trace(qubit_through_hadamard_derivation(alpha, beta))
    for x in trace:
        assert validate(x) == []
        assert equal_sem(x, trace[0])
    block = sem(trace[-1]).block((), (True,))
    r = QSQRT2I
    assert r.eq(block[0, 0], r.mul(ISQRT2, alpha + beta))
    assert r.eq(block[1, 0], r.mul(ISQRT2, alpha - beta))


def test_qubit_run_starts_by_copying_through_the_fan():
    # the first move of the worked figure: amplitudes ride through the
    # branch fan by naturality of the contraction, dagger oriented
    der = _qubit_derivation()
    assert any(s.rule == "contraction-dagger-slide" for s in der.steps)


# --- the quantum switch run ------------------------------------------


def test_switch_derivation_defaults_to_identity_gates():
    der = quantum_switch_derivation()
    trace = replay_trace(der)
    for x in trace:
        assert validate(x) == []
        assert equal_sem(x, trace[0])
    ring = der.initial.ring
    ident = identity_d(QUBIT, ring)
    two = quantum_switch_two_copy(ident, ident)
    assert equal_sem(trace[-1], two.diagram)
    # with both gates trivial either implementation acts as the identity
    # on its enabled block
    for d in (trace[0], two.diagram):
        block = sem(d).block((True, True), (True, True))
        assert block.rows == block.cols == 4
        for i in range(4):
            for j in range(4):
                want = ring.one if i == j else ring.zero
                assert ring.eq(block[i, j], want)


def test_switch_derivation_random_gates():
    rng = random.Random(20)

    def gate():
        while True:
            m = [[F(rng.randint(-2, 2), rng.randint(1, 2)) for _ in range(2)]
                 for _ in range(2)]
            if any(x for row in m for x in row):
                return basis_routed_box(m, 1, 1, RATIONAL)

    u, v = gate(), gate()
    der = quantum_switch_derivation(u, v)
    trace = replay_trace(der)
    for x in trace:
        assert validate(x) == []
        assert equal_sem(x, trace[0])
    assert equal_sem(trace[-1], quantum_switch_two_copy(u, v).diagram)
    assert equal_sem(trace[0], quantum_switch_one_copy(u, v).diagram)


def test_switch_derivation_uses_the_two_boxed_lemmas():
    der = quantum_switch_derivation()
    names = {s.rule for s in der.steps}
    assert "contraction-natural" in names
    assert "contraction-cocancel" in names


def test_switch_derivation_script_replays():
    der = quantum_switch_derivation()
    ring = der.initial.ring
    steps = script_to_steps(steps_to_script(der.steps, ring), ring)
    assert steps == der.steps
    assert equal_sem(replay(Derivation(der.initial, steps)), der.initial)
