"""Stability of contract sets and the improvement dynamics on semi-stable pairs.

A two-sided market is a pair of choice functions F (the worker side) and G
(the firm side) over one contract universe. A set S is stable when both
sides keep it (S1) and no outside contract is wanted by both (S2). Stable
sets correspond to stable pairs (Y, Z) of closures; the Φ update

    Y' = Y ∪ F(Z),   Z' = (Z ∖ F(Z)) ∪ G(F(Z))

maps semi-stable pairs to semi-stable pairs, grows Y, shrinks Z, and
reaches a fixpoint whose set F(Z) = G(Y) is stable. On top of σ (the
fixpoint map) sit side-optimal solutions, the lattice operations on stable
sets, and comparative statics under a weakened worker side.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .choice import (
    EXHAUSTIVE_CAP,
    ChoiceFunction,
    ContractSet,
    PlottReport,
    choice_table,
    closure_star,
    format_set,
    is_plott,
)
from .errors import (
    EmptyList,
    InternalError,
    NotCertified,
    NotDominated,
    NotSemiStable,
    NotStable,
    S1Violated,
    UniverseMismatch,
)
from .hyperorders import BlairRelation, blair_leq

SAMPLED_DOMINANCE_TRIALS = 10_000


@dataclass(frozen=True)
class SidePair:
    """The two sides of a market: F (workers) and G (firms) on one universe.

    ``certified`` records that both sides passed a path-independence check;
    the dynamics and everything built on it refuse to run uncertified.
    """

    F: ChoiceFunction
    G: ChoiceFunction
    certified: bool
    f_report: PlottReport | None = None
    g_report: PlottReport | None = None

    @property
    def universe_size(self) -> int:
        return self.F.universe_size

    def swap(self) -> "SidePair":
        """The same market with the roles of the two sides exchanged."""
        return SidePair(self.G, self.F, self.certified, self.g_report, self.f_report)


def side_pair(F: ChoiceFunction, G: ChoiceFunction, *, certify: bool = True,
              mode: str = "exhaustive") -> SidePair:
    """Pair two sides, checking path independence of both unless told not to."""
    if F.universe_size != G.universe_size:
        raise UniverseMismatch("both sides must share one universe")
    if not certify:
        return SidePair(F, G, False)
    f_report = is_plott(F, mode)
    g_report = is_plott(G, mode)
    return SidePair(F, G, f_report.is_plott and g_report.is_plott, f_report, g_report)


@dataclass(frozen=True)
class SemiStablePair:
    """A pair (Y, Z) with Y ∪ Z = C and choose(G, Y) ⊆ choose(F, Z)."""

    Y: ContractSet
    Z: ContractSet


@dataclass(frozen=True)
class StablePair:
    """A pair with Y ∪ Z = C and choose(G, Y) = choose(F, Z) = S."""

    Y: ContractSet
    Z: ContractSet
    S: ContractSet


@dataclass(frozen=True)
class ProcessTrace:
    """A full Φ run: every visited pair, the fixpoint index, and its stable pair."""

    steps: tuple[SemiStablePair, ...]
    terminated_at: int
    result: StablePair


@dataclass(frozen=True)
class StabilityCheck:
    """Stability verdict with the failure kind and offender when unstable.

    ``condition`` is "S1" (a side rejects part of S; ``side`` says which)
    or "S2" (some outside contract blocks; ``contract`` names it).
    """

    stable: bool
    condition: str | None = None
    side: str | None = None
    contract: int | None = None

    def __bool__(self) -> bool:
        return self.stable


def _require_certified(sides: SidePair):
    if not sides.certified:
        raise NotCertified("operation requires both sides certified path-independent")


def is_stable_set(sides: SidePair, S: ContractSet) -> StabilityCheck:
    """Check S1 (both sides keep S) and S2 (no outside contract blocks).

    S1 is checked for F before G; S2 scans outside contracts in index
    order, so the reported witness is deterministic.
    """
    if S.universe_size != sides.universe_size:
        raise UniverseMismatch("set outside the market universe")
    if sides.F.choose(S) != S:
        return StabilityCheck(False, "S1", side="F")
    if sides.G.choose(S) != S:
        return StabilityCheck(False, "S1", side="G")
    for c in S.complement():
        added = S.add(c)
        if c in sides.F.choose(added) and c in sides.G.choose(added):
            return StabilityCheck(False, "S2", contract=c)
    return StabilityCheck(True)


def is_stable_set_via_closure(sides: SidePair, S: ContractSet) -> bool:
    """Stability via closures: S1 plus closure_star(F,S) ∪ closure_star(G,S) = C.

    Preconditions: certified sides and S1 already holding; agrees with
    is_stable_set on every such S.
    """
    _require_certified(sides)
    if sides.F.choose(S) != S or sides.G.choose(S) != S:
        raise S1Violated("closure-based test requires choose(F,S) = choose(G,S) = S")
    covered = closure_star(sides.F, S) | closure_star(sides.G, S)
    return covered == ContractSet.full(sides.universe_size)


def semi_stable_pair(sides: SidePair, Y: ContractSet, Z: ContractSet) -> SemiStablePair:
    """Validate SSP1 (Y ∪ Z = C) and SSP2 (choose(G,Y) ⊆ choose(F,Z))."""
    if Y.universe_size != sides.universe_size or Z.universe_size != sides.universe_size:
        raise UniverseMismatch("pair outside the market universe")
    if (Y | Z) != ContractSet.full(sides.universe_size):
        raise NotSemiStable("SSP1 fails: Y and Z do not cover the universe")
    if not sides.G.choose(Y) <= sides.F.choose(Z):
        raise NotSemiStable("SSP2 fails: choose(G,Y) is not within choose(F,Z)")
    return SemiStablePair(Y, Z)


def phi_step(sides: SidePair, p: SemiStablePair) -> SemiStablePair:
    """One update Y' = Y ∪ F(Z), Z' = (Z ∖ F(Z)) ∪ G(F(Z)).

    The input is revalidated; the output is again semi-stable and moves up
    in the (Y grows, Z shrinks) order, both enforced.
    """
    _require_certified(sides)
    p = semi_stable_pair(sides, p.Y, p.Z)
    fz = sides.F.choose(p.Z)
    try:
        new = semi_stable_pair(sides, p.Y | fz, (p.Z - fz) | sides.G.choose(fz))
    except NotSemiStable as exc:
        raise InternalError("update left the semi-stable family") from exc
    if not (p.Y <= new.Y and new.Z <= p.Z):
        raise InternalError("update left the componentwise order")
    return new


def run_to_fixpoint(sides: SidePair, p0: SemiStablePair) -> ProcessTrace:
    """Iterate Φ from p0 until it stops moving; the fixpoint yields a stable set.

    The second component can strictly shrink at most |C| times and the
    first component absorbs choose(F,Z) in one further step, so a fixpoint
    is reached within |C|+2 applications; running past that bound raises
    InternalError. At the fixpoint, choose(F,Z) = choose(G,choose(F,Z))
    and choose(G,Y) = choose(F,Z) are both asserted, making
    S = choose(G,Y) stable with stable pair (Y, Z).
    """
    _require_certified(sides)
    p = semi_stable_pair(sides, p0.Y, p0.Z)
    steps = [p]
    limit = sides.universe_size + 2
    while True:
        nxt = phi_step(sides, p)
        if nxt == p:
            break
        steps.append(nxt)
        p = nxt
        if len(steps) > limit:
            raise InternalError("dynamics exceeded the |C|+2 step bound")
    fz = sides.F.choose(p.Z)
    if sides.G.choose(fz) != fz:
        raise InternalError("fixpoint reached with choose(G,choose(F,Z)) != choose(F,Z)")
    if sides.G.choose(p.Y) != fz:
        raise InternalError("fixpoint reached with choose(G,Y) != choose(F,Z)")
    result = StablePair(p.Y, p.Z, fz)
    return ProcessTrace(tuple(steps), len(steps) - 1, result)


def format_trace(sides: SidePair, trace: ProcessTrace, labels=None) -> str:
    """Render a run as one line per step, showing the quantities Φ reads."""
    lines = []
    for k, p in enumerate(trace.steps):
        fz = sides.F.choose(p.Z)
        lines.append(
            f"step {k}: Y={format_set(p.Y, labels)} Z={format_set(p.Z, labels)}"
            f" F(Z)={format_set(fz, labels)} G(F(Z))={format_set(sides.G.choose(fz), labels)}"
        )
    return "\n".join(lines) + "\n"


def pair_to_set(sides: SidePair, p: StablePair) -> ContractSet:
    """Extract S = choose(G,Y) after revalidating SP1/SP2."""
    if (p.Y | p.Z) != ContractSet.full(sides.universe_size):
        raise NotStable("SP1 fails: Y and Z do not cover the universe")
    gy = sides.G.choose(p.Y)
    if gy != sides.F.choose(p.Z) or gy != p.S:
        raise NotStable("SP2 fails: choose(G,Y) and choose(F,Z) disagree with S")
    return gy


def set_to_pair(sides: SidePair, S: ContractSet) -> StablePair:
    """The stable pair (closure_star(G,S), closure_star(F,S)) of a stable set."""
    _require_certified(sides)
    check = is_stable_set(sides, S)
    if not check:
        raise NotStable(f"set fails {check.condition}")
    return StablePair(closure_star(sides.G, S), closure_star(sides.F, S), S)


def _initial_pair(sides: SidePair) -> SemiStablePair:
    n = sides.universe_size
    return semi_stable_pair(sides, ContractSet.empty(n), ContractSet.full(n))


def side_optimal(sides: SidePair, favored: str) -> ContractSet:
    """The stable set best for one side: σ(∅, C), run with that side as F."""
    if favored not in ("F", "G"):
        raise ValueError("favored must be 'F' or 'G'")
    frame = sides if favored == "F" else sides.swap()
    return run_to_fixpoint(frame, _initial_pair(frame)).result.S


def lattice_join(sides: SidePair, stable_sets) -> ContractSet:
    """Least upper bound of stable sets in the firm-side Blair order.

    Forms Y = ∪ closure_star(G,S_i), Z = ∩ closure_star(F,S_i), which is
    semi-stable, and runs σ; minimality of σ among stable sets above the
    start makes the result the join.
    """
    _require_certified(sides)
    pairs = [set_to_pair(sides, S) for S in stable_sets]
    if not pairs:
        raise EmptyList("join of zero stable sets")
    y = pairs[0].Y
    z = pairs[0].Z
    for p in pairs[1:]:
        y = y | p.Y
        z = z & p.Z
    try:
        start = semi_stable_pair(sides, y, z)
    except NotSemiStable as exc:
        raise InternalError("union/intersection of stable pairs not semi-stable") from exc
    return run_to_fixpoint(sides, start).result.S


def lattice_meet(sides: SidePair, stable_sets) -> ContractSet:
    """Greatest lower bound in the firm-side order: the join under swapped roles."""
    return lattice_join(sides.swap(), stable_sets)


def blair_compare_stable(sides: SidePair, S: ContractSet, T: ContractSet) -> str:
    """Compare stable sets in the firm-side Blair order.

    Returns "less", "greater", "equal", or "incomparable"; both directions
    holding forces S = T (antisymmetry on stable sets), which is asserted.
    """
    _require_certified(sides)
    for X in (S, T):
        check = is_stable_set(sides, X)
        if not check:
            raise NotStable(f"set fails {check.condition}")
    rel = BlairRelation(sides.G)
    st = blair_leq(rel, S, T)
    ts = blair_leq(rel, T, S)
    if st and ts:
        if S != T:
            raise InternalError("Blair order not antisymmetric on stable sets")
        return "equal"
    if st:
        return "less"
    if ts:
        return "greater"
    return "incomparable"


def _dominates(F: ChoiceFunction, F2: ChoiceFunction, *, seed: int = 0):
    """Check choose(F,X) ⊆ choose(F2,X) everywhere; returns a witness mask or None.

    Exhaustive under the table cap, sampled above it (seed recorded in the
    default; the universe sizes this package targets stay under the cap).
    """
    n = F.universe_size
    if n <= EXHAUSTIVE_CAP:
        bad = (choice_table(F) & ~choice_table(F2)).nonzero()[0]
        return int(bad[0]) if bad.size else None
    rng = random.Random(seed)
    for _ in range(SAMPLED_DOMINANCE_TRIALS):
        x = rng.getrandbits(n)
        if F._choose_mask(x) & ~F2._choose_mask(x):
            return x
    return None


def comparative_statics(sides: SidePair, f_prime: ChoiceFunction,
                        S: ContractSet) -> ContractSet:
    """Re-solve after weakening the worker side from F to F′ ≥ F.

    Starting from the stable pair of S, the pair (closure_star(G,S),
    closure_star(F′, closure_star(F,S))) is semi-stable under (F′, G);
    σ from there yields S′ with S ⪯_G S′ and S′ ⪯_F S (original F), both
    asserted. Dominance of F′ over F is verified, not assumed.
    """
    _require_certified(sides)
    if f_prime.universe_size != sides.universe_size:
        raise UniverseMismatch("weakened side outside the market universe")
    witness = _dominates(sides.F, f_prime)
    if witness is not None:
        raise NotDominated(
            f"choose(F,X) not within choose(F',X) at X mask {witness}")
    f2_report = is_plott(f_prime)
    if not f2_report.is_plott:
        raise NotCertified("weakened side is not path-independent")
    old_pair = set_to_pair(sides, S)
    new_sides = SidePair(f_prime, sides.G, True, f2_report, sides.g_report)
    y = old_pair.Y
    z = closure_star(f_prime, old_pair.Z)
    try:
        start = semi_stable_pair(new_sides, y, z)
    except NotSemiStable as exc:
        raise InternalError("statics start pair not semi-stable") from exc
    s_prime = run_to_fixpoint(new_sides, start).result.S
    if not blair_leq(BlairRelation(sides.G), S, s_prime):
        raise InternalError("statics result not above S in the firm-side order")
    if not blair_leq(BlairRelation(sides.F), s_prime, S):
        raise InternalError("statics result not below S in the original worker order")
    return s_prime
