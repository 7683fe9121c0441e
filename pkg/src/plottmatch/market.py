"""Market instances: agents, contract blocks, per-agent choice, aggregation.

An instance is a set of firms, a set of workers, a list of contracts (each
naming one firm and one worker, optionally carrying a pair of utilities),
and one choice spec per agent over that agent's own contracts. Aggregating
the per-firm functions blockwise yields the firm side G, the per-worker
functions the worker side F.

The file format is line oriented, `#` starts a comment:

    [firms] f1 f2
    [workers] w1
    [contracts]
    a f1 w1 10 0        # id firm worker [u_worker u_firm]
    [choice f1] kind=order acceptable={a}
    a
    [choice w1] kind=utility

Kinds: ``explicit`` (body: one `{...} -> {...}` line per subset of the
block), ``order`` (body: all block ids best-first; optional `acceptable=`),
``quota`` (like order plus `q=<int>`), ``utility`` (no body; uses the
contract utilities, the firm coordinate for firms, the worker one for
workers).
"""

from __future__ import annotations

from dataclasses import dataclass

from .choice import (
    EXHAUSTIVE_CAP,
    Aggregate,
    ChoiceFunction,
    ContractSet,
    ExplicitTable,
    LinearOrderMax,
    QuotaByOrder,
    UtilityThreshold,
    format_set,
)
from .errors import ContractOutsideBlock, ParseError, PartialTable, UnknownAgent
from .stability import SidePair, side_pair


@dataclass(frozen=True)
class Contract:
    """One contract: its id, the two agents it binds, optional utilities."""

    id: str
    firm: str
    worker: str
    u_worker: int | float | None = None
    u_firm: int | float | None = None


@dataclass(frozen=True)
class ChoiceSpec:
    """One agent's choice function over its local block.

    ``block`` lists the global contract indices owned by the agent in
    declaration order; ``cf`` lives on the local universe 0..len(block)-1.
    """

    agent: str
    kind: str
    block: tuple[int, ...]
    cf: ChoiceFunction


@dataclass(frozen=True, eq=True)
class MarketInstance:
    """A parsed market: agents, contracts, and one choice spec per agent."""

    firms: tuple[str, ...]
    workers: tuple[str, ...]
    contracts: tuple[Contract, ...]
    specs: tuple[ChoiceSpec, ...]

    @property
    def universe_size(self) -> int:
        return len(self.contracts)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.contracts)

    def block_of(self, agent: str) -> tuple[int, ...]:
        if agent in self.firms:
            return tuple(i for i, c in enumerate(self.contracts) if c.firm == agent)
        if agent in self.workers:
            return tuple(i for i, c in enumerate(self.contracts) if c.worker == agent)
        raise UnknownAgent(f"no agent named {agent!r}")

    def spec_of(self, agent: str) -> ChoiceSpec:
        for s in self.specs:
            if s.agent == agent:
                return s
        raise UnknownAgent(f"no choice spec for agent {agent!r}")


def _parse_number(token: str, lineno: int):
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"expected a number, got {token!r}", lineno) from None


def _parse_keyvals(rest: str, lineno: int) -> dict[str, str]:
    out = {}
    for token in rest.split():
        key, sep, value = token.partition("=")
        if not sep or not key:
            raise ParseError(f"expected key=value, got {token!r}", lineno)
        if key in out:
            raise ParseError(f"duplicate key {key!r}", lineno)
        out[key] = value
    return out


def _local_set_mask(text: str, local_labels, lineno: int, all_labels) -> int:
    text = text.strip()
    if not (text.startswith("{") and text.endswith("}")):
        raise ParseError(f"expected a brace-delimited set, got {text!r}", lineno)
    body = text[1:-1].strip()
    if not body:
        return 0
    index_of = {lab: i for i, lab in enumerate(local_labels)}
    mask = 0
    for part in body.split(","):
        part = part.strip()
        if part not in index_of:
            if part in all_labels:
                raise ContractOutsideBlock(
                    f"contract {part!r} belongs to another agent", lineno)
            raise ParseError(f"unknown contract id {part!r}", lineno)
        mask |= 1 << index_of[part]
    return mask


def _build_explicit(agent, block, local_labels, body, header_line, all_labels):
    k = len(block)
    rows: dict[int, int] = {}
    for lineno, line in body:
        left, sep, right = line.partition("->")
        if not sep:
            raise ParseError("expected '{...} -> {...}'", lineno)
        xmask = _local_set_mask(left.strip(), local_labels, lineno, all_labels)
        chosen = _local_set_mask(right.strip(), local_labels, lineno, all_labels)
        if xmask in rows:
            raise ParseError("duplicate table row", lineno)
        if xmask == 0 and chosen != 0:
            raise ParseError("choice on the empty set must be empty", lineno)
        if chosen & ~xmask:
            raise ParseError("choice selects outside its argument", lineno)
        rows[xmask] = chosen
    if len(rows) != 1 << k:
        raise PartialTable(
            f"agent {agent!r}: table covers {len(rows)} of {1 << k} subsets",
            header_line)
    return ExplicitTable(k, tuple(rows[m] for m in range(1 << k)))


def _parse_order_ids(body, local_labels, agent, header_line, all_labels):
    if len(body) != 1:
        raise ParseError(
            f"agent {agent!r}: expected one line of contract ids, got {len(body)}",
            header_line)
    lineno, line = body[0]
    index_of = {lab: i for i, lab in enumerate(local_labels)}
    order = []
    for token in line.split():
        if token not in index_of:
            if token in all_labels:
                raise ContractOutsideBlock(
                    f"contract {token!r} belongs to another agent", lineno)
            raise ParseError(f"unknown contract id {token!r}", lineno)
        order.append(index_of[token])
    if sorted(order) != list(range(len(local_labels))):
        raise ParseError(
            f"order must list every contract of agent {agent!r} exactly once", lineno)
    return tuple(order)


def parse_instance(text: str) -> MarketInstance:
    """Parse an instance document, enforcing every structural invariant.

    Errors carry the offending line number: ParseError for malformed
    directives, UnknownAgent for references to undeclared agents,
    ContractOutsideBlock when a choice spec mentions a foreign contract,
    PartialTable for explicit tables that do not cover their block.
    """
    firms: list[str] = []
    workers: list[str] = []
    contracts: list[Contract] = []
    contract_lines_seen = False
    # (agent, keyvals, header lineno, body [(lineno, line), ...])
    raw_specs: list[tuple[str, dict[str, str], int, list]] = []
    section = None

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            end = line.find("]")
            if end < 0:
                raise ParseError("unterminated section header", lineno)
            head = line[1:end].split()
            rest = line[end + 1:].strip()
            if not head:
                raise ParseError("empty section header", lineno)
            name = head[0]
            if name in ("firms", "workers"):
                if len(head) != 1:
                    raise ParseError(f"[{name}] takes its ids after the bracket", lineno)
                target = firms if name == "firms" else workers
                if target:
                    raise ParseError(f"duplicate [{name}] section", lineno)
                ids = rest.split()
                if len(set(ids)) != len(ids):
                    raise ParseError(f"duplicate id in [{name}]", lineno)
                target.extend(ids)
                section = None
            elif name == "contracts":
                if len(head) != 1 or rest:
                    raise ParseError("[contracts] header takes no arguments", lineno)
                if contract_lines_seen:
                    raise ParseError("duplicate [contracts] section", lineno)
                contract_lines_seen = True
                section = "contracts"
            elif name == "choice":
                if len(head) != 2:
                    raise ParseError("[choice] needs exactly one agent id", lineno)
                agent = head[1]
                if agent not in firms and agent not in workers:
                    raise UnknownAgent(f"no agent named {agent!r}", lineno)
                if any(s[0] == agent for s in raw_specs):
                    raise ParseError(f"duplicate [choice] for agent {agent!r}", lineno)
                keyvals = _parse_keyvals(rest, lineno)
                if "kind" not in keyvals:
                    raise ParseError("[choice] requires kind=", lineno)
                raw_specs.append((agent, keyvals, lineno, []))
                section = "choice"
            else:
                raise ParseError(f"unknown section [{name}]", lineno)
            continue
        if section == "contracts":
            tokens = line.split()
            if len(tokens) not in (3, 5):
                raise ParseError(
                    "contract line must be 'id firm worker' plus optional utilities",
                    lineno)
            cid, firm, worker = tokens[:3]
            if any(c.id == cid for c in contracts):
                raise ParseError(f"duplicate contract id {cid!r}", lineno)
            if firm not in firms:
                raise UnknownAgent(f"no firm named {firm!r}", lineno)
            if worker not in workers:
                raise UnknownAgent(f"no worker named {worker!r}", lineno)
            u_worker = u_firm = None
            if len(tokens) == 5:
                u_worker = _parse_number(tokens[3], lineno)
                u_firm = _parse_number(tokens[4], lineno)
            contracts.append(Contract(cid, firm, worker, u_worker, u_firm))
        elif section == "choice":
            raw_specs[-1][3].append((lineno, line))
        else:
            raise ParseError("directive outside any section", lineno)

    overlap = set(firms) & set(workers)
    if overlap:
        raise ParseError(f"agent id on both sides: {sorted(overlap)[0]!r}")

    contracts_t = tuple(contracts)
    all_labels = tuple(c.id for c in contracts_t)
    instance_stub = MarketInstance(tuple(firms), tuple(workers), contracts_t, ())

    specs = []
    for agent, keyvals, header_line, body in raw_specs:
        block = instance_stub.block_of(agent)
        local_labels = tuple(all_labels[g] for g in block)
        kind = keyvals.pop("kind")
        acceptable_text = keyvals.pop("acceptable", None)
        quota_text = keyvals.pop("q", None)
        if keyvals:
            raise ParseError(f"unknown key {sorted(keyvals)[0]!r}", header_line)
        if acceptable_text is not None and kind not in ("order", "quota"):
            raise ParseError("acceptable= only applies to kind=order|quota", header_line)
        if quota_text is not None and kind != "quota":
            raise ParseError("q= only applies to kind=quota", header_line)
        if kind == "explicit":
            cf = _build_explicit(agent, block, local_labels, body, header_line,
                                 all_labels)
        elif kind in ("order", "quota"):
            order = _parse_order_ids(body, local_labels, agent, header_line, all_labels)
            acceptable = (1 << len(block)) - 1
            if acceptable_text is not None:
                acceptable = _local_set_mask(acceptable_text, local_labels,
                                             header_line, all_labels)
            if kind == "order":
                cf = LinearOrderMax(len(block), order, acceptable)
            else:
                if quota_text is None:
                    raise ParseError("kind=quota requires q=", header_line)
                q = _parse_number(quota_text, header_line)
                if not isinstance(q, int) or q < 0:
                    raise ParseError("q= must be a non-negative integer", header_line)
                cf = QuotaByOrder(len(block), order, q, acceptable)
        elif kind == "utility":
            if body:
                raise ParseError("kind=utility takes no body", body[0][0])
            side_is_firm = agent in firms
            utilities = []
            for g in block:
                u = contracts_t[g].u_firm if side_is_firm else contracts_t[g].u_worker
                if u is None:
                    raise ParseError(
                        f"contract {all_labels[g]!r} has no utilities but agent "
                        f"{agent!r} uses kind=utility", header_line)
                utilities.append(u)
            cf = UtilityThreshold(len(block), tuple(utilities))
        else:
            raise ParseError(f"unknown kind {kind!r}", header_line)
        specs.append(ChoiceSpec(agent, kind, block, cf))

    have = {s.agent for s in specs}
    for agent in (*firms, *workers):
        if agent not in have and instance_stub.block_of(agent):
            raise ParseError(f"agent {agent!r} has contracts but no [choice] section")

    return MarketInstance(tuple(firms), tuple(workers), contracts_t, tuple(specs))


def format_instance(m: MarketInstance) -> str:
    """Serialize an instance; the output reparses to an equal instance."""
    out = []
    out.append("[firms] " + " ".join(m.firms))
    out.append("[workers] " + " ".join(m.workers))
    out.append("[contracts]")
    for c in m.contracts:
        line = f"{c.id} {c.firm} {c.worker}"
        if c.u_worker is not None:
            line += f" {c.u_worker} {c.u_firm}"
        out.append(line)
    for s in m.specs:
        local_labels = tuple(m.labels[g] for g in s.block)
        header = f"[choice {s.agent}] kind={s.kind}"
        body = []
        if s.kind == "explicit":
            cf = s.cf
            k = cf.universe_size
            for xmask, chosen in enumerate(cf.table):
                left = format_set(ContractSet(k, xmask), local_labels)
                right = format_set(ContractSet(k, chosen), local_labels)
                body.append(f"{left} -> {right}")
        elif s.kind in ("order", "quota"):
            cf = s.cf
            k = cf.universe_size
            if s.kind == "quota":
                header += f" q={cf.quota}"
            if cf.acceptable_mask != (1 << k) - 1:
                header += " acceptable=" + format_set(
                    ContractSet(k, cf.acceptable_mask), local_labels)
            body.append(" ".join(local_labels[i] for i in cf.order))
        out.append(header)
        out.extend(body)
    return "\n".join(out) + "\n"


def aggregate_sides(m: MarketInstance, *, certify: bool = True) -> SidePair:
    """Build the two aggregate sides: G from the firms, F from the workers.

    Blocks follow agent declaration order; agents without contracts get the
    empty choice function. Certification is exhaustive when the universe
    fits the table cap and sampled above it.
    """
    n = m.universe_size

    def one_side(agents):
        blocks = []
        parts = []
        for a in agents:
            block = m.block_of(a)
            blocks.append(block)
            parts.append(m.spec_of(a).cf if block else ExplicitTable(0, (0,)))
        return Aggregate(n, tuple(blocks), tuple(parts))

    G = one_side(m.firms)
    F = one_side(m.workers)
    mode = "exhaustive" if n <= EXHAUSTIVE_CAP else "sampled"
    return side_pair(F, G, certify=certify, mode=mode)
