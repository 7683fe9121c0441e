"""Choice functions over a finite contract universe.

A contract universe is the index range 0..n-1; subsets are bitmasks wrapped
in :class:`ContractSet`. A :class:`ChoiceFunction` maps every subset X to a
selection G(X) ⊆ X. Path independence (G(X∪Y) = G(G(X)∪Y), the Plott
condition) is equivalent to the pair Heredity + Outcast, which is what
:func:`is_plott` verifies. On top of that sit the closure operator G*, the
Nil-set of never-chosen contracts, unions of choice functions, and the
decomposition of a path-independent function into a union of linear-order
maximizers.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapExceeded, EmptyList, InternalError, NotPlott, UniverseMismatch

EXHAUSTIVE_CAP = 16
DECOMPOSE_CAP = 8
SAMPLED_TRIALS = 10_000


def _bits(mask: int):
    """Yield set-bit indices of mask in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True, slots=True)
class ContractSet:
    """An immutable subset of a contract universe of known size.

    The members are stored as a bitmask; all set algebra is exact. Mixing
    sets from different universes raises :class:`UniverseMismatch`.
    """

    universe_size: int
    mask: int = 0

    def __post_init__(self):
        if self.universe_size < 0:
            raise ValueError("universe_size must be non-negative")
        if not 0 <= self.mask < (1 << self.universe_size):
            raise ValueError("mask references indices outside the universe")

    @classmethod
    def from_indices(cls, universe_size: int, indices) -> "ContractSet":
        mask = 0
        for i in indices:
            if not 0 <= i < universe_size:
                raise ValueError(f"index {i} outside universe of size {universe_size}")
            mask |= 1 << i
        return cls(universe_size, mask)

    @classmethod
    def empty(cls, universe_size: int) -> "ContractSet":
        return cls(universe_size, 0)

    @classmethod
    def full(cls, universe_size: int) -> "ContractSet":
        return cls(universe_size, (1 << universe_size) - 1)

    def _same_universe(self, other: "ContractSet"):
        if self.universe_size != other.universe_size:
            raise UniverseMismatch(
                f"universe sizes differ: {self.universe_size} vs {other.universe_size}"
            )

    def indices(self) -> tuple[int, ...]:
        return tuple(_bits(self.mask))

    def add(self, index: int) -> "ContractSet":
        return ContractSet(self.universe_size, self.mask | (1 << index))

    def remove(self, index: int) -> "ContractSet":
        return ContractSet(self.universe_size, self.mask & ~(1 << index))

    def complement(self) -> "ContractSet":
        full = (1 << self.universe_size) - 1
        return ContractSet(self.universe_size, full ^ self.mask)

    def __or__(self, other: "ContractSet") -> "ContractSet":
        self._same_universe(other)
        return ContractSet(self.universe_size, self.mask | other.mask)

    def __and__(self, other: "ContractSet") -> "ContractSet":
        self._same_universe(other)
        return ContractSet(self.universe_size, self.mask & other.mask)

    def __sub__(self, other: "ContractSet") -> "ContractSet":
        self._same_universe(other)
        return ContractSet(self.universe_size, self.mask & ~other.mask)

    def __le__(self, other: "ContractSet") -> bool:
        self._same_universe(other)
        return self.mask & ~other.mask == 0

    def __lt__(self, other: "ContractSet") -> bool:
        return self <= other and self.mask != other.mask

    def __contains__(self, index: int) -> bool:
        return 0 <= index < self.universe_size and self.mask >> index & 1 == 1

    def __iter__(self):
        return _bits(self.mask)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __bool__(self) -> bool:
        return self.mask != 0

    def __repr__(self) -> str:
        inner = ",".join(str(i) for i in self)
        return f"ContractSet(n={self.universe_size}, {{{inner}}})"


def format_set(X: ContractSet, labels=None) -> str:
    """Render a set as ``{a,b}`` using labels, in declaration (index) order."""
    if labels is None:
        return "{" + ",".join(str(i) for i in X) + "}"
    return "{" + ",".join(labels[i] for i in X) + "}"


def parse_set(text: str, labels, universe_size: int) -> ContractSet:
    """Parse a ``{a,b}`` literal against a label list."""
    text = text.strip()
    if not (text.startswith("{") and text.endswith("}")):
        raise ValueError(f"expected a brace-delimited set, got {text!r}")
    body = text[1:-1].strip()
    if not body:
        return ContractSet.empty(universe_size)
    index_of = {lab: i for i, lab in enumerate(labels)}
    indices = []
    for part in body.split(","):
        part = part.strip()
        if part not in index_of:
            raise ValueError(f"unknown contract label {part!r}")
        indices.append(index_of[part])
    return ContractSet.from_indices(universe_size, indices)


# ---------------------------------------------------------------------------
# Choice function representations
# ---------------------------------------------------------------------------


class ChoiceFunction:
    """Base class: a total selection map over subsets of one universe.

    Subclasses implement ``_choose_mask``; they are immutable and hashable,
    which lets the full choice table be memoized per function.
    """

    universe_size: int

    def _choose_mask(self, xmask: int) -> int:
        raise NotImplementedError

    def choose(self, X: ContractSet) -> ContractSet:
        """Evaluate the function on X. The result is always a subset of X."""
        if X.universe_size != self.universe_size:
            raise UniverseMismatch(
                f"set over universe {X.universe_size}, function over {self.universe_size}"
            )
        return ContractSet(self.universe_size, self._choose_mask(X.mask))


@dataclass(frozen=True)
class ExplicitTable(ChoiceFunction):
    """A choice function given by its full table, one entry per subset.

    ``table[xmask]`` is the chosen submask of ``xmask``. Tables are only
    allowed up to ``EXHAUSTIVE_CAP`` contracts, must select subsets, and
    must choose nothing from the empty set.
    """

    universe_size: int
    table: tuple[int, ...]

    def __post_init__(self):
        n = self.universe_size
        if n > EXHAUSTIVE_CAP:
            raise CapExceeded(f"explicit tables are capped at {EXHAUSTIVE_CAP} contracts")
        if len(self.table) != 1 << n:
            raise ValueError(f"table must have {1 << n} entries, got {len(self.table)}")
        if self.table[0] != 0:
            raise ValueError("choice on the empty set must be empty")
        for xmask, chosen in enumerate(self.table):
            if chosen & ~xmask:
                raise ValueError(f"entry for mask {xmask} selects outside the subset")

    def _choose_mask(self, xmask: int) -> int:
        return self.table[xmask]


@dataclass(frozen=True)
class LinearOrderMax(ChoiceFunction):
    """Pick the best acceptable element of X under a strict total order.

    ``order`` lists all contract indices best-first; ``acceptable_mask``
    restricts which contracts can ever be chosen (default: all). The choice
    is the order-maximum of X ∩ acceptable, or ∅ when that is empty.
    """

    universe_size: int
    order: tuple[int, ...]
    acceptable_mask: int = -1

    def __post_init__(self):
        n = self.universe_size
        if sorted(self.order) != list(range(n)):
            raise ValueError("order must be a permutation of all contract indices")
        if self.acceptable_mask == -1:
            object.__setattr__(self, "acceptable_mask", (1 << n) - 1)
        if not 0 <= self.acceptable_mask < (1 << n):
            raise ValueError("acceptable_mask outside the universe")

    def _choose_mask(self, xmask: int) -> int:
        live = xmask & self.acceptable_mask
        for c in self.order:
            bit = 1 << c
            if live & bit:
                return bit
        return 0


@dataclass(frozen=True)
class QuotaByOrder(ChoiceFunction):
    """Pick the top-q acceptable elements of X under a strict total order."""

    universe_size: int
    order: tuple[int, ...]
    quota: int
    acceptable_mask: int = -1

    def __post_init__(self):
        n = self.universe_size
        if sorted(self.order) != list(range(n)):
            raise ValueError("order must be a permutation of all contract indices")
        if self.quota < 0:
            raise ValueError("quota must be non-negative")
        if self.acceptable_mask == -1:
            object.__setattr__(self, "acceptable_mask", (1 << n) - 1)
        if not 0 <= self.acceptable_mask < (1 << n):
            raise ValueError("acceptable_mask outside the universe")

    def _choose_mask(self, xmask: int) -> int:
        live = xmask & self.acceptable_mask
        chosen = 0
        taken = 0
        for c in self.order:
            if taken == self.quota:
                break
            bit = 1 << c
            if live & bit:
                chosen |= bit
                taken += 1
        return chosen


@dataclass(frozen=True)
class UtilityThreshold(ChoiceFunction):
    """Pick the utility-maximal element of X among non-negative utilities.

    Contracts with negative utility are never chosen; ties are broken by
    the lowest contract index, so the function is single-valued and equals
    the maximizer of a derived linear order.
    """

    universe_size: int
    utilities: tuple

    def __post_init__(self):
        if len(self.utilities) != self.universe_size:
            raise ValueError("one utility per contract required")

    def _choose_mask(self, xmask: int) -> int:
        best = -1
        for c in _bits(xmask):
            u = self.utilities[c]
            if u < 0:
                continue
            if best < 0 or u > self.utilities[best]:
                best = c
        return 0 if best < 0 else 1 << best

    def as_order(self) -> LinearOrderMax:
        """The equivalent single linear-order maximizer."""
        order = tuple(sorted(range(self.universe_size), key=lambda i: (-self.utilities[i], i)))
        acceptable = 0
        for i, u in enumerate(self.utilities):
            if u >= 0:
                acceptable |= 1 << i
        return LinearOrderMax(self.universe_size, order, acceptable)


@dataclass(frozen=True)
class UnionChoice(ChoiceFunction):
    """The pointwise union of several choice functions on one universe.

    Unions of path-independent functions are path-independent, which makes
    this the carrier for order decompositions and random instance
    generation.
    """

    universe_size: int
    parts: tuple[ChoiceFunction, ...]

    def __post_init__(self):
        if not self.parts:
            raise EmptyList("a union needs at least one choice function")
        for part in self.parts:
            if part.universe_size != self.universe_size:
                raise UniverseMismatch("union members must share one universe")

    def _choose_mask(self, xmask: int) -> int:
        chosen = 0
        for part in self.parts:
            chosen |= part._choose_mask(xmask)
        return chosen


@dataclass(frozen=True)
class Aggregate(ChoiceFunction):
    """Blockwise choice: a partition of the universe with one function per block.

    ``blocks[i]`` lists the global indices owned by part i, in the order that
    maps them onto that part's local universe 0..len(block)-1. The choice on X
    is the disjoint union of each part's choice on its slice of X.
    """

    universe_size: int
    blocks: tuple[tuple[int, ...], ...]
    parts: tuple[ChoiceFunction, ...]

    def __post_init__(self):
        if len(self.blocks) != len(self.parts):
            raise ValueError("one choice function per block required")
        seen = 0
        for block, part in zip(self.blocks, self.parts):
            if part.universe_size != len(block):
                raise ValueError("part universe must match its block size")
            for g in block:
                bit = 1 << g
                if not 0 <= g < self.universe_size or seen & bit:
                    raise ValueError("blocks must partition the universe")
                seen |= bit
        if seen != (1 << self.universe_size) - 1:
            raise ValueError("blocks must cover the whole universe")

    def _choose_mask(self, xmask: int) -> int:
        chosen = 0
        for block, part in zip(self.blocks, self.parts):
            local = 0
            for j, g in enumerate(block):
                local |= (xmask >> g & 1) << j
            picked = part._choose_mask(local)
            for j, g in enumerate(block):
                chosen |= (picked >> j & 1) << g
        return chosen


def union(cfs) -> UnionChoice:
    """Union a nonempty list of choice functions over one shared universe."""
    cfs = tuple(cfs)
    if not cfs:
        raise EmptyList("union of zero choice functions")
    return UnionChoice(cfs[0].universe_size, cfs)


# ---------------------------------------------------------------------------
# Full choice tables
# ---------------------------------------------------------------------------


def _order_fill(masks: np.ndarray, order, acceptable: int, chosen: np.ndarray,
                remaining: np.ndarray):
    for c in order:
        if not acceptable >> c & 1:
            continue
        hit = remaining & ((masks >> c & 1) == 1)
        chosen[hit] = 1 << c
        remaining &= ~hit


@lru_cache(maxsize=4096)
def choice_table(cf: ChoiceFunction) -> np.ndarray:
    """The function's full table as a read-only array indexed by subset mask.

    Only available up to EXHAUSTIVE_CAP contracts; every exhaustive check in
    the package runs off this table.
    """
    n = cf.universe_size
    if n > EXHAUSTIVE_CAP:
        raise CapExceeded(f"full tables are capped at {EXHAUSTIVE_CAP} contracts")
    size = 1 << n
    masks = np.arange(size, dtype=np.int64)
    if isinstance(cf, ExplicitTable):
        table = np.array(cf.table, dtype=np.int64)
    elif isinstance(cf, LinearOrderMax):
        table = np.zeros(size, dtype=np.int64)
        _order_fill(masks, cf.order, cf.acceptable_mask, table, np.ones(size, dtype=bool))
    elif isinstance(cf, UtilityThreshold):
        table = choice_table(cf.as_order()).copy()
    elif isinstance(cf, QuotaByOrder):
        table = np.zeros(size, dtype=np.int64)
        taken = np.zeros(size, dtype=np.int64)
        for c in cf.order:
            if not cf.acceptable_mask >> c & 1:
                continue
            take = ((masks >> c & 1) == 1) & (taken < cf.quota)
            table[take] |= 1 << c
            taken += take
    elif isinstance(cf, UnionChoice):
        table = np.zeros(size, dtype=np.int64)
        for part in cf.parts:
            table |= choice_table(part)
    elif isinstance(cf, Aggregate):
        table = np.zeros(size, dtype=np.int64)
        for block, part in zip(cf.blocks, cf.parts):
            local = np.zeros(size, dtype=np.int64)
            for j, g in enumerate(block):
                local |= (masks >> g & 1) << j
            picked = choice_table(part)[local]
            for j, g in enumerate(block):
                table |= (picked >> j & 1) << g
    else:
        table = np.fromiter((cf._choose_mask(m) for m in range(size)),
                            dtype=np.int64, count=size)
    table.setflags(write=False)
    return table


# ---------------------------------------------------------------------------
# Path-independence verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlottReport:
    """Outcome of a path-independence check.

    When ``is_plott`` is false exactly one witness is present:
    ``heredity_witness`` is (B, A, element) with A = B minus one contract and
    element chosen from B but not from A; ``outcast_witness`` is (X, Y) with
    Y obtained from X by dropping one rejected contract yet choosing
    differently. Re-evaluating a witness reproduces the violation.
    """

    is_plott: bool
    mode: str
    heredity_witness: tuple[ContractSet, ContractSet, int] | None = None
    outcast_witness: tuple[ContractSet, ContractSet] | None = None
    seed: int | None = None
    trials: int | None = None


def _heredity_scan(table: np.ndarray, n: int):
    """First (B, A=B∖{c}, element) violating Heredity, in (B, c) order."""
    masks = np.arange(1 << n, dtype=np.int64)
    best = None
    for c in range(n):
        bit = 1 << c
        rows = masks[(masks & bit) != 0]
        subs = rows ^ bit
        bad = table[rows] & subs & ~table[subs]
        hits = np.nonzero(bad)[0]
        if hits.size:
            b = int(rows[hits[0]])
            if best is None or (b, c) < (best[0], best[1]):
                best = (b, c, int(bad[hits[0]]))
    if best is None:
        return None
    b, c, offending = best
    element = (offending & -offending).bit_length() - 1
    return b, b ^ (1 << c), element


def _outcast_scan(table: np.ndarray, n: int):
    """First (X, Y=X∖{c}) violating Outcast, in (X, c) order."""
    masks = np.arange(1 << n, dtype=np.int64)
    best = None
    for c in range(n):
        bit = 1 << c
        rows = masks[((masks & bit) != 0) & ((table & bit) == 0)]
        subs = rows ^ bit
        bad = table[subs] != table[rows]
        hits = np.nonzero(bad)[0]
        if hits.size:
            x = int(rows[hits[0]])
            if best is None or (x, c) < (best[0], best[1]):
                best = (x, c)
    if best is None:
        return None
    x, c = best
    return x, x ^ (1 << c)


def is_plott(cf: ChoiceFunction, mode: str = "exhaustive", *, cap: int = EXHAUSTIVE_CAP,
             seed: int = 0, trials: int = SAMPLED_TRIALS) -> PlottReport:
    """Check Heredity and Outcast, whose conjunction is path independence.

    Exhaustive mode scans every one-element removal, which by induction
    decides both axioms over all subset pairs; it requires the universe to
    fit under ``cap``. Sampled mode draws ``trials`` random subset pairs
    (each element kept by an independent fair coin) under a recorded seed.
    The first violation found is returned as a witness, heredity first.
    """
    n = cf.universe_size
    if mode == "exhaustive":
        if n > cap:
            raise CapExceeded(f"exhaustive check needs universe_size <= {cap}, got {n}")
        table = choice_table(cf)
        hit = _heredity_scan(table, n)
        if hit is not None:
            b, a, element = hit
            witness = (ContractSet(n, b), ContractSet(n, a), element)
            return PlottReport(False, "exhaustive", heredity_witness=witness)
        hit = _outcast_scan(table, n)
        if hit is not None:
            x, y = hit
            return PlottReport(False, "exhaustive",
                               outcast_witness=(ContractSet(n, x), ContractSet(n, y)))
        return PlottReport(True, "exhaustive")
    if mode != "sampled":
        raise ValueError(f"mode must be 'exhaustive' or 'sampled', got {mode!r}")
    rng = random.Random(seed)
    for _ in range(trials):
        bmask = rng.getrandbits(n) if n else 0
        amask = bmask & (rng.getrandbits(n) if n else 0)
        offending = cf._choose_mask(bmask) & amask & ~cf._choose_mask(amask)
        if offending:
            element = (offending & -offending).bit_length() - 1
            witness = (ContractSet(n, bmask), ContractSet(n, amask), element)
            return PlottReport(False, "sampled", heredity_witness=witness,
                               seed=seed, trials=trials)
        xmask = rng.getrandbits(n) if n else 0
        gx = cf._choose_mask(xmask)
        ymask = gx | (xmask & ~gx & (rng.getrandbits(n) if n else 0))
        if ymask != xmask and cf._choose_mask(ymask) != gx:
            witness = (ContractSet(n, xmask), ContractSet(n, ymask))
            return PlottReport(False, "sampled", outcast_witness=witness,
                               seed=seed, trials=trials)
    return PlottReport(True, "sampled", seed=seed, trials=trials)


# ---------------------------------------------------------------------------
# Closure operator, Nil-set, inversion
# ---------------------------------------------------------------------------


def _closure_mask(cf: ChoiceFunction, xmask: int) -> int:
    chosen = cf._choose_mask(xmask)
    out = xmask
    for c in range(cf.universe_size):
        bit = 1 << c
        if xmask & bit:
            continue
        if cf._choose_mask(xmask | bit) == chosen:
            out |= bit
    return out


def closure_star(cf: ChoiceFunction, X: ContractSet) -> ContractSet:
    """The largest superset of X with the same choice as X.

    For a path-independent function this equals X plus every single contract
    whose addition leaves the choice unchanged; callers must certify path
    independence themselves, the behavior is undefined otherwise.
    """
    if X.universe_size != cf.universe_size:
        raise UniverseMismatch("closure over a foreign universe")
    return ContractSet(cf.universe_size, _closure_mask(cf, X.mask))


def nil_set(cf: ChoiceFunction) -> ContractSet:
    """Contracts that never matter: the closure of the empty set.

    Equals the set of contracts whose singleton chooses nothing; adding or
    removing Nil contracts never changes any choice.
    """
    return closure_star(cf, ContractSet.empty(cf.universe_size))


def invert_closure(cf: ChoiceFunction, X: ContractSet) -> ContractSet:
    """Recover the choice on X from the closure operator.

    Returns {x ∈ X : x ∉ closure_star(X∖{x})}; for path-independent
    functions this equals choose(X) and serves as a cross-check.
    """
    if X.universe_size != cf.universe_size:
        raise UniverseMismatch("inversion over a foreign universe")
    out = 0
    for x in _bits(X.mask):
        bit = 1 << x
        if not _closure_mask(cf, X.mask ^ bit) & bit:
            out |= bit
    return ContractSet(cf.universe_size, out)


# ---------------------------------------------------------------------------
# Decomposition into linear-order maximizers
# ---------------------------------------------------------------------------


def _submasks(mask: int):
    """All submasks of mask, descending, including mask and 0."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def _candidate_orders(table, active: int) -> list[tuple[int, ...]]:
    """All total orders on the active contracts that stay pointwise inferior.

    An order is pointwise inferior exactly when each element is chosen from
    the set of elements remaining below it, so the orders are enumerated by
    repeatedly picking any currently chosen element.
    """
    out = []

    def extend(prefix, remaining):
        if not remaining:
            out.append(tuple(prefix))
            return
        for c in _bits(int(table[remaining])):
            prefix.append(c)
            extend(prefix, remaining ^ (1 << c))
            prefix.pop()

    extend([], active)
    return out


def _order_table_on(order: tuple[int, ...], active: int) -> dict[int, int]:
    """Map each nonempty submask of active to its order-maximum element."""
    position = {c: k for k, c in enumerate(order)}
    best: dict[int, int] = {}
    # ascending so the subproblem without the lowest bit is already solved
    for sub in sorted(_submasks(active)):
        if sub == 0:
            continue
        low = sub & -sub
        rest = sub ^ low
        c = low.bit_length() - 1
        if rest and position[best[rest]] < position[c]:
            c = best[rest]
        best[sub] = c
    return best


def decompose_into_orders(cf: ChoiceFunction, *, cap: int = DECOMPOSE_CAP) -> list[LinearOrderMax]:
    """Write a path-independent function as a union of order maximizers.

    Every returned order ranks all contracts, accepts exactly the non-Nil
    ones, and is pointwise inferior to cf; their union reproduces cf on
    every subset (asserted before returning). The cover is built greedily
    over the demands {(X, x) : x chosen from X} and then greedily pruned,
    which makes the result deterministic but not canonical or minimum-size.
    """
    n = cf.universe_size
    if n > cap:
        raise CapExceeded(f"decomposition needs universe_size <= {cap}, got {n}")
    report = is_plott(cf, cap=cap)
    if not report.is_plott:
        raise NotPlott("cannot decompose: function is not path-independent")
    table = choice_table(cf)
    nil = _closure_mask(cf, 0)
    active = ((1 << n) - 1) & ~nil
    nil_tail = tuple(_bits(nil))
    if active == 0:
        return []

    demands = []
    for sub in _submasks(active):
        if sub:
            for x in _bits(int(table[sub])):
                demands.append((sub, x))
    covered_by = []
    candidates = _candidate_orders(table, active)
    for order in candidates:
        best = _order_table_on(order, active)
        covered_by.append(frozenset(i for i, (sub, x) in enumerate(demands) if best[sub] == x))

    uncovered = set(range(len(demands)))
    picked: list[int] = []
    while uncovered:
        gains = [len(cov & uncovered) for cov in covered_by]
        k = max(range(len(candidates)), key=lambda i: gains[i])
        if gains[k] == 0:
            raise InternalError("pointwise-inferior orders fail to cover a demand")
        picked.append(k)
        uncovered -= covered_by[k]
    for k in list(picked):
        rest = [j for j in picked if j != k]
        rest_cover = set().union(*(covered_by[j] for j in rest)) if rest else set()
        if len(rest_cover) == len(demands):
            picked = rest

    orders = [LinearOrderMax(n, candidates[k] + nil_tail, active) for k in picked]
    recombined = np.zeros(1 << n, dtype=np.int64)
    for o in orders:
        recombined |= choice_table(o)
    if not np.array_equal(recombined, table):
        raise InternalError("decomposition union does not reproduce the function")
    return orders
