"""Blair and Lehmann hyper-relations on subsets of a contract universe.

The Blair relation compares subsets by A ⪯ B ⟺ choose(A∪B) ⊆ B; the Lehmann
relation is the strict A ≺ B ⟺ choose(B) ≠ ∅ ∧ choose(A∪B) ∩ A = ∅. Both can
be derived from a path-independent choice function; Lehmann relations can
also be given extensionally as tables, which is what the axiom auditor is
for. The L-operator and :func:`reconstruct_choice` implement the bijection
between path-independent functions and relations satisfying L0 to L5.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .choice import (
    ChoiceFunction,
    ContractSet,
    ExplicitTable,
    choice_table,
    format_set,
    is_plott,
    parse_set,
)
from .errors import (
    AxiomsFail,
    CapExceeded,
    InternalError,
    TableIncomplete,
    UniverseMismatch,
)

AUDIT_CAP = 8


@dataclass(frozen=True)
class BlairRelation:
    """The weak hyper-order A ⪯ B ⟺ choose(A∪B) ⊆ B of a generating function."""

    cf: ChoiceFunction

    @property
    def universe_size(self) -> int:
        return self.cf.universe_size


@dataclass(frozen=True)
class DerivedLehmann:
    """The strict hyper-order of a choice function.

    A ≺ B ⟺ choose(B) ≠ ∅ and choose(A∪B) ∩ A = ∅. The generating function
    is expected to be path-independent for any of the theory to apply.
    """

    cf: ChoiceFunction

    @property
    def universe_size(self) -> int:
        return self.cf.universe_size

    def _prec_mask(self, amask: int, bmask: int) -> bool:
        gb = self.cf._choose_mask(bmask)
        if gb == 0:
            return False
        gu = self.cf._choose_mask(amask | bmask)
        if gu & amask:
            return False
        # G(A∪B) ⊆ B and misses A forces G(A∪B) = G(B) by outcast (Plott input).
        if gu != gb:
            raise InternalError("lehmann-true pair with choose(A∪B) != choose(B)")
        return True


@dataclass(frozen=True)
class ExtensionalLehmann:
    """A Lehmann relation stored as an explicit table of ordered pairs.

    ``true_pairs`` holds the (A, B) masks related by ≺. A total table leaves
    ``known_pairs`` as None (every unlisted pair is false); a partial table
    lists the decided pairs and raises TableIncomplete on any other query.
    """

    universe_size: int
    true_pairs: frozenset
    known_pairs: frozenset | None = None

    @classmethod
    def from_true_pairs(cls, universe_size: int, pairs) -> "ExtensionalLehmann":
        """Build a total table from the pairs that hold; everything else is false."""
        true_pairs = set()
        for a, b in pairs:
            amask = a.mask if isinstance(a, ContractSet) else a
            bmask = b.mask if isinstance(b, ContractSet) else b
            true_pairs.add((amask, bmask))
        return cls(universe_size, frozenset(true_pairs))

    def _prec_mask(self, amask: int, bmask: int) -> bool:
        pair = (amask, bmask)
        if self.known_pairs is not None and pair not in self.known_pairs:
            raise TableIncomplete(f"extensional table has no entry for pair {pair}")
        return pair in self.true_pairs


def lehmann_prec(rel, A: ContractSet, B: ContractSet) -> bool:
    """Evaluate A ≺ B under a derived or extensional Lehmann relation."""
    if A.universe_size != rel.universe_size or B.universe_size != rel.universe_size:
        raise UniverseMismatch("relation and sets must share one universe")
    return rel._prec_mask(A.mask, B.mask)


def blair_leq(rel: BlairRelation, A: ContractSet, B: ContractSet) -> bool:
    """Evaluate A ⪯ B, i.e. choose(A∪B) ⊆ B, under the Blair relation."""
    if A.universe_size != rel.universe_size or B.universe_size != rel.universe_size:
        raise UniverseMismatch("relation and sets must share one universe")
    chosen = rel.cf._choose_mask(A.mask | B.mask)
    if chosen & ~B.mask:
        return False
    # When it holds, outcast forces choose(A∪B) = choose(B) for Plott input.
    if chosen != rel.cf._choose_mask(B.mask):
        raise InternalError("blair-true pair with choose(A∪B) != choose(B)")
    return True


# ---------------------------------------------------------------------------
# Axiom auditing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AxiomCheck:
    """One audited axiom: its name, verdict, and a violating witness if any."""

    name: str
    passed: bool
    witness: tuple[ContractSet, ...] | None = None


@dataclass(frozen=True)
class AxiomReport:
    """Verdicts for L0..L5 plus the derived transitivity check.

    ``overall`` covers L0..L5 only; transitivity follows from them for any
    relation, so it is reported as a redundant self-test.
    """

    checks: tuple[AxiomCheck, ...]
    overall: bool

    def check(self, name: str) -> AxiomCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _relation_matrix(rel, n: int) -> np.ndarray:
    """The full ≺ table as a bool matrix indexed [amask, bmask]."""
    size = 1 << n
    if isinstance(rel, DerivedLehmann):
        t = choice_table(rel.cf)
        masks = np.arange(size, dtype=np.int64)
        unions = masks[:, None] | masks[None, :]
        return (t != 0)[None, :] & ((t[unions] & masks[:, None]) == 0)
    p = np.zeros((size, size), dtype=bool)
    if rel.known_pairs is not None:
        known = np.zeros((size, size), dtype=bool)
        for a, b in rel.known_pairs:
            known[a, b] = True
        if not known.all():
            raise TableIncomplete("audit requires a total extensional table")
    for a, b in rel.true_pairs:
        p[a, b] = True
    return p


def _first_true(condition: np.ndarray):
    hits = np.argwhere(condition)
    return None if hits.size == 0 else tuple(int(v) for v in hits[0])


def audit_lehmann_axioms(rel, *, cap: int = AUDIT_CAP) -> AxiomReport:
    """Exhaustively audit L0..L5 and (separately) transitivity.

    L1 and L3 are checked in their one-element-step forms, which are
    equivalent to the subset-monotone originals by chain induction; L2 is
    checked on two-set families, which implies every finite family. Any
    failure carries a witness tuple of the subsets involved. For a relation
    satisfying L0..L5, transitivity is a theorem; observing it fail while
    the axioms pass raises InternalError.
    """
    n = rel.universe_size
    if n > cap:
        raise CapExceeded(f"axiom audit needs universe_size <= {cap}, got {n}")
    size = 1 << n
    p = _relation_matrix(rel, n)
    masks = np.arange(size, dtype=np.int64)
    cs = lambda m: ContractSet(n, int(m))
    checks = []

    hit = _first_true(np.diagonal(p))
    checks.append(AxiomCheck("L0", hit is None,
                             None if hit is None else (cs(hit[0]),)))

    witness = None
    for c in range(n):
        bit = 1 << c
        rows = (masks & bit) != 0
        bad = p[rows] & ~p[masks[rows] ^ bit]
        hit = _first_true(bad)
        if hit is not None:
            a = int(masks[rows][hit[0]])
            cand = (cs(a ^ bit), cs(a), cs(hit[1]))
            if witness is None or (a, hit[1]) < (witness[1].mask, witness[2].mask):
                witness = cand
    checks.append(AxiomCheck("L1", witness is None, witness))

    witness = None
    for b in range(size):
        col = p[:, b]
        trues = masks[col]
        if trues.size == 0:
            continue
        bad = ~col[trues[:, None] | trues[None, :]]
        hit = _first_true(bad)
        if hit is not None:
            witness = (cs(trues[hit[0]]), cs(trues[hit[1]]), cs(b))
            break
    checks.append(AxiomCheck("L2", witness is None, witness))

    witness = None
    for c in range(n):
        bit = 1 << c
        cols = (masks & bit) == 0
        bad = p[:, cols] & ~p[:, masks[cols] ^ bit]
        hit = _first_true(bad)
        if hit is not None:
            b = int(masks[cols][hit[1]])
            cand = (cs(hit[0]), cs(b), cs(b | bit))
            if witness is None or (hit[0], b) < (witness[0].mask, witness[1].mask):
                witness = cand
    checks.append(AxiomCheck("L3", witness is None, witness))

    unions = masks[:, None] | masks[None, :]
    bad = np.take_along_axis(p, unions, axis=1) & ~p
    hit = _first_true(bad)
    checks.append(AxiomCheck("L4", hit is None,
                             None if hit is None else (cs(hit[0]), cs(hit[1]))))

    essential = p[0]
    bad = ~essential[:, None] & essential[None, :] & ~p
    hit = _first_true(bad)
    checks.append(AxiomCheck("L5", hit is None,
                             None if hit is None else (cs(hit[0]), cs(hit[1]))))

    composed = (p.astype(np.uint8) @ p.astype(np.uint8)) > 0
    hit = _first_true(composed & ~p)
    checks.append(AxiomCheck("transitivity", hit is None,
                             None if hit is None else (cs(hit[0]), cs(hit[1]))))

    overall = all(c.passed for c in checks[:-1])
    if overall and not checks[-1].passed:
        raise InternalError("L0-L5 hold but transitivity fails; auditor bug")
    return AxiomReport(tuple(checks), overall)


# ---------------------------------------------------------------------------
# L-operator and reconstruction
# ---------------------------------------------------------------------------


def l_operator(rel, A: ContractSet) -> ContractSet:
    """L(A) = negligible contracts ∪ {c : {c} ≺ A}.

    A contract is negligible when its singleton is not essential, i.e.
    ∅ ≺ {c} fails. For essential A this is the largest set preceding A.
    """
    if A.universe_size != rel.universe_size:
        raise UniverseMismatch("relation and set must share one universe")
    n = rel.universe_size
    out = 0
    for c in range(n):
        bit = 1 << c
        if not rel._prec_mask(0, bit) or rel._prec_mask(bit, A.mask):
            out |= bit
    return ContractSet(n, out)


def reconstruct_choice(rel, *, cap: int = AUDIT_CAP) -> ExplicitTable:
    """Rebuild the choice function T(A) = A ∖ L(A) from a Lehmann relation.

    Requires the audit to pass (AxiomsFail otherwise); the result is
    certified path-independent, which the bijection guarantees, so a
    failed certification raises InternalError.
    """
    report = audit_lehmann_axioms(rel, cap=cap)
    if not report.overall:
        raise AxiomsFail("relation fails the Lehmann axioms", report)
    n = rel.universe_size
    table = []
    for amask in range(1 << n):
        l_mask = l_operator(rel, ContractSet(n, amask)).mask
        table.append(amask & ~l_mask)
    cf = ExplicitTable(n, tuple(table))
    if not is_plott(cf).is_plott:
        raise InternalError("reconstructed table is not path-independent")
    return cf


# ---------------------------------------------------------------------------
# Extensional relation files
# ---------------------------------------------------------------------------


def format_relation(rel, labels=None) -> str:
    """Serialize a relation as `{A} < {B}` lines, one true pair per line.

    Pairs are listed in (A, B) mask order; unlisted pairs are false, so the
    output round-trips through parse_relation for any total relation.
    """
    n = rel.universe_size
    lines = []
    for amask in range(1 << n):
        for bmask in range(1 << n):
            if rel._prec_mask(amask, bmask):
                lines.append(f"{format_set(ContractSet(n, amask), labels)} < "
                             f"{format_set(ContractSet(n, bmask), labels)}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_relation(text: str, labels, universe_size: int) -> ExtensionalLehmann:
    """Parse `{A} < {B}` lines into a total extensional relation."""
    pairs = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        left, sep, right = line.partition("<")
        if not sep:
            raise ValueError(f"expected '{{A}} < {{B}}', got {raw!r}")
        pairs.append((parse_set(left, labels, universe_size),
                      parse_set(right, labels, universe_size)))
    return ExtensionalLehmann.from_true_pairs(universe_size, pairs)
