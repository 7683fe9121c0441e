"""Brute-force ground truth: enumeration, lattice verification, generators.

Everything here is deliberately independent of the dynamics: stable sets
are found by scanning every subset against the S1/S2 definitions, the
Blair matrix is evaluated entry by entry, and lattice structure is read
off the matrix. The engine is then tested against these answers.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

import numpy as np

from .choice import (
    EXHAUSTIVE_CAP,
    ContractSet,
    LinearOrderMax,
    UnionChoice,
    choice_table,
    format_set,
)
from .errors import CapExceeded, InternalError
from .stability import SidePair, lattice_join, lattice_meet, side_pair

ENUMERATE_CAP = 16
SEMI_STABLE_CAP = 10


@dataclass(frozen=True)
class StableSetCatalog:
    """Every stable set of one instance, with the firm-side Blair matrix.

    ``blair_matrix[i][j]`` says stable_sets[i] ⪯ stable_sets[j] under the
    firm side; its transpose is the worker-side matrix (polarization).
    ``fingerprint`` hashes the full choice tables of both sides, so equal
    fingerprints mean literally the same market behavior.
    """

    fingerprint: str
    universe_size: int
    stable_sets: tuple[ContractSet, ...]
    blair_matrix: tuple[tuple[bool, ...], ...]

    def bottom(self) -> ContractSet:
        """The ⪯-minimum (worker-best) stable set."""
        return self.stable_sets[self._extreme(lambda i, j: self.blair_matrix[i][j])]

    def top(self) -> ContractSet:
        """The ⪯-maximum (firm-best) stable set."""
        return self.stable_sets[self._extreme(lambda i, j: self.blair_matrix[j][i])]

    def _extreme(self, below) -> int:
        k = len(self.stable_sets)
        for i in range(k):
            if all(below(i, j) for j in range(k)):
                return i
        raise InternalError("catalog has no extreme element")


def _fingerprint(tf: np.ndarray, tg: np.ndarray, n: int) -> str:
    digest = hashlib.sha256()
    digest.update(n.to_bytes(4, "little"))
    digest.update(tf.astype(np.int64).tobytes())
    digest.update(tg.astype(np.int64).tobytes())
    return digest.hexdigest()[:16]


def enumerate_stable_sets(sides: SidePair, *, cap: int = ENUMERATE_CAP) -> StableSetCatalog:
    """Scan every subset against S1/S2 and assemble the catalog.

    For certified sides the catalog is nonempty (finite form of the
    existence theorem), the matrix is antisymmetric, and its transpose
    equals the worker-side matrix; all three are enforced.
    """
    n = sides.universe_size
    if n > cap:
        raise CapExceeded(f"enumeration needs universe_size <= {cap}, got {n}")
    tf = choice_table(sides.F)
    tg = choice_table(sides.G)
    masks = np.arange(1 << n, dtype=np.int64)
    candidates = masks[(tf[masks] == masks) & (tg[masks] == masks)]
    blocked = np.zeros(candidates.shape, dtype=bool)
    for c in range(n):
        bit = 1 << c
        outside = (candidates & bit) == 0
        added = candidates | bit
        blocked |= outside & ((tf[added] & bit) != 0) & ((tg[added] & bit) != 0)
    stable = [int(m) for m in candidates[~blocked]]

    if sides.certified and not stable:
        raise InternalError("certified sides with no stable set")
    k = len(stable)
    g_matrix = [[(int(tg[stable[i] | stable[j]]) & ~stable[j]) == 0 for j in range(k)]
                for i in range(k)]
    if sides.certified:
        f_matrix = [[(int(tf[stable[i] | stable[j]]) & ~stable[j]) == 0 for j in range(k)]
                    for i in range(k)]
        for i in range(k):
            for j in range(k):
                if g_matrix[i][j] and g_matrix[j][i] and i != j:
                    raise InternalError("Blair matrix not antisymmetric")
                if g_matrix[i][j] != f_matrix[j][i]:
                    raise InternalError("Blair matrix transpose is not the worker matrix")
    return StableSetCatalog(
        _fingerprint(tf, tg, n),
        n,
        tuple(ContractSet(n, m) for m in stable),
        tuple(tuple(row) for row in g_matrix),
    )


def format_catalog(catalog: StableSetCatalog, labels=None) -> str:
    """Golden-file export: fingerprint, universe, stable sets, matrix rows."""
    lines = [f"catalog {catalog.fingerprint}", f"universe {catalog.universe_size}"]
    for s in catalog.stable_sets:
        lines.append(f"stable {format_set(s, labels)}")
    for row in catalog.blair_matrix:
        lines.append("blair " + "".join("1" if v else "0" for v in row))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LatticeReport:
    """Join/meet verification outcome over every pair of stable sets."""

    passed: bool
    sets: int
    pairs_checked: int
    failures: tuple[str, ...]


def _bound_from_matrix(matrix, i: int, j: int, upper: bool) -> int | None:
    """Index of the least upper / greatest lower bound of i, j, if unique."""
    k = len(matrix)
    if upper:
        bounds = [b for b in range(k) if matrix[i][b] and matrix[j][b]]
        extreme = [b for b in bounds if all(matrix[b][o] for o in bounds)]
    else:
        bounds = [b for b in range(k) if matrix[b][i] and matrix[b][j]]
        extreme = [b for b in bounds if all(matrix[o][b] for o in bounds)]
    return extreme[0] if len(extreme) == 1 else None


def verify_lattice(catalog: StableSetCatalog, sides: SidePair,
                   labels=None) -> LatticeReport:
    """Check that every pair has a lub and glb and the engine returns them.

    Mismatches and missing bounds are reported as failures with witnesses
    rather than raised, so a report is always produced.
    """
    sets = catalog.stable_sets
    failures = []
    pairs = 0
    for i in range(len(sets)):
        for j in range(len(sets)):
            pairs += 1
            si, sj = sets[i], sets[j]
            for upper, name, op in ((True, "join", lattice_join),
                                    (False, "meet", lattice_meet)):
                b = _bound_from_matrix(catalog.blair_matrix, i, j, upper)
                if b is None:
                    failures.append(
                        f"no unique {name} bound for {format_set(si, labels)}, "
                        f"{format_set(sj, labels)}")
                    continue
                got = op(sides, [si, sj])
                if got != sets[b]:
                    failures.append(
                        f"{name}({format_set(si, labels)}, {format_set(sj, labels)}) "
                        f"= {format_set(got, labels)}, matrix says "
                        f"{format_set(sets[b], labels)}")
    return LatticeReport(not failures, len(sets), pairs, tuple(failures))


def generate_instance(seed: int, universe_size: int, side_spec) -> SidePair:
    """Deterministically generate a certified two-sided market.

    Each side is a union of k random total orders (Fisher-Yates under one
    seeded generator) with independent random acceptable sets; k comes
    from side_spec as (k_workers, k_firms), or one int for both. Unions of
    order maximizers are path-independent by construction, and both sides
    are re-verified before returning.
    """
    if isinstance(side_spec, int):
        side_spec = (side_spec, side_spec)
    k_f, k_g = side_spec
    n = universe_size
    rng = random.Random(seed)

    def one_side(k: int) -> UnionChoice:
        parts = []
        for _ in range(max(1, k)):
            order = list(range(n))
            for i in range(n - 1, 0, -1):
                j = rng.randrange(i + 1)
                order[i], order[j] = order[j], order[i]
            acceptable = rng.getrandbits(n) if n else 0
            parts.append(LinearOrderMax(n, tuple(order), acceptable))
        return UnionChoice(n, tuple(parts))

    F = one_side(k_f)
    G = one_side(k_g)
    mode = "exhaustive" if n <= EXHAUSTIVE_CAP else "sampled"
    sides = side_pair(F, G, mode=mode)
    if not sides.certified:
        raise InternalError("union of order maximizers failed the Plott check")
    return sides


def semi_stable_masks(sides: SidePair, *, cap: int = SEMI_STABLE_CAP) -> list[tuple[int, int]]:
    """All (Y, Z) mask pairs satisfying SSP1 and SSP2, by full grid scan."""
    n = sides.universe_size
    if n > cap:
        raise CapExceeded(f"semi-stable scan needs universe_size <= {cap}, got {n}")
    tf = choice_table(sides.F)
    tg = choice_table(sides.G)
    masks = np.arange(1 << n, dtype=np.int64)
    full = (1 << n) - 1
    cover = (masks[:, None] | masks[None, :]) == full
    ssp2 = (tg[masks][:, None] & ~tf[masks][None, :]) == 0
    ys, zs = np.nonzero(cover & ssp2)
    return [(int(y), int(z)) for y, z in zip(ys, zs)]
