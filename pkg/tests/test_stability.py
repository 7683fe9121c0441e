from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plottmatch import (
    Aggregate,
    BlairRelation,
    ContractSet,
    EmptyList,
    ExplicitTable,
    InternalError,
    LinearOrderMax,
    NotCertified,
    NotDominated,
    NotSemiStable,
    NotStable,
    QuotaByOrder,
    S1Violated,
    SemiStablePair,
    StablePair,
    UniverseMismatch,
    UtilityThreshold,
    blair_compare_stable,
    blair_leq,
    comparative_statics,
    format_trace,
    is_stable_set,
    is_stable_set_via_closure,
    lattice_join,
    lattice_meet,
    pair_to_set,
    phi_step,
    run_to_fixpoint,
    semi_stable_pair,
    set_to_pair,
    side_optimal,
    side_pair,
    union,
)
from plottmatch.oracle import enumerate_stable_sets, generate_instance, semi_stable_masks

POLAR2 = side_pair(LinearOrderMax(2, (0, 1)), LinearOrderMax(2, (1, 0)))
ORD3 = side_pair(LinearOrderMax(3, (0, 1, 2)), LinearOrderMax(3, (2, 1, 0)))
QUOTA = side_pair(LinearOrderMax(3, (0, 1, 2)), QuotaByOrder(3, (0, 1, 2), 2))
EX1 = side_pair(UtilityThreshold(6, (0, 10, 20, -10, 30, 5)),
                UtilityThreshold(6, (20, 10, 0, 30, -10, 5)))
EX2 = side_pair(ExplicitTable(2, (0, 1, 0, 3)), ExplicitTable(2, (0, 1, 2, 2)))
# two independent polarized blocks: four stable sets forming a diamond
DIAMOND = side_pair(
    Aggregate(4, ((0, 1), (2, 3)),
              (LinearOrderMax(2, (0, 1)), LinearOrderMax(2, (0, 1)))),
    Aggregate(4, ((0, 1), (2, 3)),
              (LinearOrderMax(2, (1, 0)), LinearOrderMax(2, (1, 0)))))
SMALL = (POLAR2, ORD3, QUOTA, EX1, DIAMOND)


def cs(n, *indices):
    return ContractSet.from_indices(n, indices)


def _stable_sets(sides):
    return enumerate_stable_sets(sides).stable_sets


@st.composite
def plott_sides(draw):
    seed = draw(st.integers(0, 10**6))
    n = draw(st.integers(1, 6))
    k = draw(st.integers(1, 3))
    return generate_instance(seed, n, k)


# ---------------------------------------------------------------------------
# sides
# ---------------------------------------------------------------------------


def test_side_pair_certification():
    assert POLAR2.certified
    assert POLAR2.f_report.is_plott and POLAR2.g_report.is_plott
    assert not EX2.certified and not EX2.f_report.is_plott
    blind = side_pair(POLAR2.F, POLAR2.G, certify=False)
    assert not blind.certified and blind.f_report is None
    with pytest.raises(UniverseMismatch):
        side_pair(POLAR2.F, ORD3.G)


def test_swap_exchanges_roles():
    swapped = POLAR2.swap()
    assert swapped.F is POLAR2.G and swapped.G is POLAR2.F
    assert swapped.f_report is POLAR2.g_report
    assert swapped.swap() == POLAR2


# ---------------------------------------------------------------------------
# stability of sets
# ---------------------------------------------------------------------------


def test_stability_verdicts_on_ex2():
    check = is_stable_set(EX2, cs(2, 0))
    assert not check and check.condition == "S2" and check.contract == 1
    check = is_stable_set(EX2, cs(2, 0, 1))
    assert check.condition == "S1" and check.side == "G"
    check = is_stable_set(EX2, cs(2, 1))
    assert check.condition == "S1" and check.side == "F"
    check = is_stable_set(EX2, cs(2))
    assert check.condition == "S2" and check.contract == 0


def test_stability_verdicts_on_polar2():
    assert is_stable_set(POLAR2, cs(2, 0)).stable
    assert is_stable_set(POLAR2, cs(2, 1)).stable
    assert not is_stable_set(POLAR2, cs(2))
    with pytest.raises(UniverseMismatch):
        is_stable_set(POLAR2, cs(3, 0))


def test_closure_test_agrees_where_it_applies():
    for sides in SMALL:
        n = sides.universe_size
        for m in range(1 << n):
            s = ContractSet(n, m)
            if sides.F.choose(s) == s and sides.G.choose(s) == s:
                assert is_stable_set_via_closure(sides, s) == bool(
                    is_stable_set(sides, s))


def test_closure_test_preconditions():
    with pytest.raises(S1Violated):
        is_stable_set_via_closure(POLAR2, cs(2, 0, 1))
    with pytest.raises(NotCertified):
        is_stable_set_via_closure(EX2, cs(2, 0))


# ---------------------------------------------------------------------------
# pairs and the update
# ---------------------------------------------------------------------------


def test_semi_stable_validation():
    p = semi_stable_pair(POLAR2, cs(2), cs(2, 0, 1))
    assert p == SemiStablePair(cs(2), cs(2, 0, 1))
    with pytest.raises(NotSemiStable):
        semi_stable_pair(POLAR2, cs(2, 0), cs(2, 0))  # SSP1
    with pytest.raises(NotSemiStable):
        semi_stable_pair(POLAR2, cs(2, 0, 1), cs(2))  # SSP2
    with pytest.raises(UniverseMismatch):
        semi_stable_pair(POLAR2, cs(3, 0), cs(3, 0, 1, 2))


def test_phi_step_on_polar2():
    p = semi_stable_pair(POLAR2, cs(2), cs(2, 0, 1))
    nxt = phi_step(POLAR2, p)
    assert nxt == SemiStablePair(cs(2, 0), cs(2, 0, 1))
    assert phi_step(POLAR2, nxt) == nxt
    with pytest.raises(NotCertified):
        phi_step(EX2, p)


def test_run_to_fixpoint_on_polar2():
    start = semi_stable_pair(POLAR2, cs(2), cs(2, 0, 1))
    trace = run_to_fixpoint(POLAR2, start)
    assert len(trace.steps) == 2 and trace.terminated_at == 1
    assert trace.result == StablePair(cs(2, 0), cs(2, 0, 1), cs(2, 0))
    assert is_stable_set(POLAR2, trace.result.S).stable


def test_run_to_fixpoint_on_ex1():
    n = 6
    start = semi_stable_pair(EX1, ContractSet.empty(n), ContractSet.full(n))
    trace = run_to_fixpoint(EX1, start)
    assert trace.result.S == cs(6, 2)
    assert [p.Y.mask for p in trace.steps] == [0, 0b010000, 0b010100]
    assert [p.Z.mask for p in trace.steps] == [0b111111, 0b101111, 0b101111]


def test_format_trace_lines():
    start = semi_stable_pair(POLAR2, cs(2), cs(2, 0, 1))
    trace = run_to_fixpoint(POLAR2, start)
    assert format_trace(POLAR2, trace, ("a", "b")) == (
        "step 0: Y={} Z={a,b} F(Z)={a} G(F(Z))={a}\n"
        "step 1: Y={a} Z={a,b} F(Z)={a} G(F(Z))={a}\n")


def test_every_semi_stable_start_reaches_a_stable_set():
    for sides in SMALL:
        n = sides.universe_size
        for ymask, zmask in semi_stable_masks(sides):
            start = SemiStablePair(ContractSet(n, ymask), ContractSet(n, zmask))
            trace = run_to_fixpoint(sides, start)
            assert len(trace.steps) <= n + 2
            assert is_stable_set(sides, trace.result.S).stable


def test_stable_pairs_are_fixpoints():
    for sides in SMALL:
        for s in _stable_sets(sides):
            pair = set_to_pair(sides, s)
            trace = run_to_fixpoint(sides, SemiStablePair(pair.Y, pair.Z))
            assert trace.terminated_at == 0
            assert trace.result.S == s


def test_pair_set_round_trip_and_validation():
    for sides in SMALL:
        for s in _stable_sets(sides):
            assert pair_to_set(sides, set_to_pair(sides, s)) == s
    with pytest.raises(NotStable):
        set_to_pair(POLAR2, cs(2, 0, 1))
    with pytest.raises(NotStable):
        pair_to_set(POLAR2, StablePair(cs(2), cs(2, 0, 1), cs(2, 0)))
    with pytest.raises(NotStable):
        pair_to_set(POLAR2, StablePair(cs(2, 0), cs(2, 0), cs(2, 0)))
    with pytest.raises(NotCertified):
        set_to_pair(EX2, cs(2, 0))


@given(plott_sides())
@settings(max_examples=60)
def test_initial_run_lands_on_the_catalog_bottom(sides):
    n = sides.universe_size
    start = semi_stable_pair(sides, ContractSet.empty(n), ContractSet.full(n))
    got = run_to_fixpoint(sides, start).result.S
    assert got == enumerate_stable_sets(sides).bottom()


# ---------------------------------------------------------------------------
# side-optimal solutions and the lattice
# ---------------------------------------------------------------------------


def test_side_optimal_on_fixtures():
    assert side_optimal(POLAR2, "F") == cs(2, 0)
    assert side_optimal(POLAR2, "G") == cs(2, 1)
    assert side_optimal(ORD3, "F") == cs(3, 0)
    assert side_optimal(ORD3, "G") == cs(3, 2)
    assert side_optimal(EX1, "F") == cs(6, 2)
    assert side_optimal(EX1, "G") == cs(6, 0)
    assert side_optimal(QUOTA, "F") == side_optimal(QUOTA, "G") == cs(3, 0)
    with pytest.raises(ValueError):
        side_optimal(POLAR2, "H")


def test_lattice_operations_on_polar2():
    a, b = cs(2, 0), cs(2, 1)
    assert lattice_join(POLAR2, [a, b]) == b
    assert lattice_meet(POLAR2, [a, b]) == a
    assert lattice_join(POLAR2, [a]) == a
    assert lattice_join(POLAR2, [b, b]) == b
    with pytest.raises(EmptyList):
        lattice_join(POLAR2, [])
    with pytest.raises(NotStable):
        lattice_join(POLAR2, [cs(2, 0, 1)])
    with pytest.raises(NotCertified):
        lattice_join(EX2, [cs(2, 0)])


def test_lattice_operations_on_the_diamond():
    lo = cs(4, 0, 2)
    hi = cs(4, 1, 3)
    left = cs(4, 0, 3)
    right = cs(4, 1, 2)
    assert lattice_join(DIAMOND, [left, right]) == hi
    assert lattice_meet(DIAMOND, [left, right]) == lo
    assert lattice_join(DIAMOND, [lo, left, right]) == hi
    assert lattice_meet(DIAMOND, [left, hi]) == left


def test_join_is_an_upper_bound_on_fixtures():
    for sides in SMALL:
        rel = BlairRelation(sides.G)
        sets = _stable_sets(sides)
        for s in sets:
            for t in sets:
                j = lattice_join(sides, [s, t])
                assert blair_leq(rel, s, j) and blair_leq(rel, t, j)
                m = lattice_meet(sides, [s, t])
                assert blair_leq(rel, m, s) and blair_leq(rel, m, t)


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------


def test_blair_compare_stable_verdicts():
    assert blair_compare_stable(POLAR2, cs(2, 0), cs(2, 1)) == "less"
    assert blair_compare_stable(POLAR2, cs(2, 1), cs(2, 0)) == "greater"
    assert blair_compare_stable(POLAR2, cs(2, 0), cs(2, 0)) == "equal"
    assert blair_compare_stable(DIAMOND, cs(4, 0, 3), cs(4, 1, 2)) == "incomparable"
    with pytest.raises(NotStable):
        blair_compare_stable(POLAR2, cs(2, 0, 1), cs(2, 0))
    with pytest.raises(NotCertified):
        blair_compare_stable(EX2, cs(2, 0), cs(2, 0))


def test_polarization_flips_the_verdict():
    flipped = {"less": "greater", "greater": "less",
               "equal": "equal", "incomparable": "incomparable"}
    for sides in SMALL:
        sets = _stable_sets(sides)
        for s in sets:
            for t in sets:
                verdict = blair_compare_stable(sides, s, t)
                assert blair_compare_stable(sides.swap(), s, t) == flipped[verdict]


def test_better_for_firms_is_worse_for_workers():
    # on stable sets, S ⪯ T under G forces T ⪯ S under F
    for sides in SMALL:
        rel_g = BlairRelation(sides.G)
        rel_f = BlairRelation(sides.F)
        sets = _stable_sets(sides)
        for s in sets:
            for t in sets:
                if blair_leq(rel_g, s, t):
                    assert blair_leq(rel_f, t, s)


def test_rejected_improvements_stay_below():
    # stable S, any T above it on the firm side: firms reject T down below S
    for sides in SMALL:
        n = sides.universe_size
        rel_g = BlairRelation(sides.G)
        rel_f = BlairRelation(sides.F)
        for s in _stable_sets(sides):
            for m in range(1 << n):
                t = ContractSet(n, m)
                if blair_leq(rel_g, s, t):
                    assert blair_leq(rel_f, sides.G.choose(t), s)


def test_semi_stable_family_is_closed_under_the_lattice_move():
    for sides in (POLAR2, ORD3, QUOTA, DIAMOND):
        n = sides.universe_size
        pairs = semi_stable_masks(sides)
        for y1, z1 in pairs:
            for y2, z2 in pairs:
                semi_stable_pair(sides, ContractSet(n, y1 | y2),
                                 ContractSet(n, z1 & z2))


# ---------------------------------------------------------------------------
# comparative statics
# ---------------------------------------------------------------------------


def test_statics_with_no_actual_weakening():
    assert comparative_statics(POLAR2, POLAR2.F, cs(2, 0)) == cs(2, 0)


def test_statics_on_the_polarized_pair():
    # worker side weakened to keep everything: the firm-best set takes over
    weakened = ExplicitTable(2, (0, 1, 2, 3))
    s_prime = comparative_statics(POLAR2, weakened, cs(2, 0))
    assert s_prime == cs(2, 1)
    new_sides = side_pair(weakened, POLAR2.G)
    assert is_stable_set(new_sides, s_prime).stable
    # the old stable set does not survive the weakening
    assert not is_stable_set(new_sides, cs(2, 0))


def test_statics_rejects_non_dominating_input():
    shrunk = LinearOrderMax(2, (0, 1), 0b01)
    with pytest.raises(NotDominated):
        comparative_statics(POLAR2, shrunk, cs(2, 0))


def test_statics_rejects_non_plott_weakening():
    f = LinearOrderMax(3, (0, 1, 2), 0b001)
    sides = side_pair(f, LinearOrderMax(3, (2, 1, 0)))
    # keeps x whenever offered, keeps lone singletons, drops {y,z}: not outcast
    f_prime = ExplicitTable(3, (0, 1, 2, 1, 4, 1, 0, 1))
    with pytest.raises(NotCertified):
        comparative_statics(sides, f_prime, cs(3, 0))


def test_statics_rejects_an_unstable_start():
    with pytest.raises(NotStable):
        comparative_statics(POLAR2, ExplicitTable(2, (0, 1, 2, 3)), cs(2, 0, 1))


def test_statics_on_generated_markets():
    for seed in range(25):
        sides = generate_instance(seed, 5, (1, 2))
        rng = random.Random(seed + 1)
        order = list(range(5))
        rng.shuffle(order)
        extra = LinearOrderMax(5, tuple(order), rng.getrandbits(5))
        f_prime = union(sides.F.parts + (extra,))
        new_sides = side_pair(f_prime, sides.G)
        for s in _stable_sets(sides):
            s_prime = comparative_statics(sides, f_prime, s)
            assert is_stable_set(new_sides, s_prime).stable
