"""Protocol automata: coalition bookkeeping, the pairwise-agreement consensus
protocol built from shared-object group rounds, and the model simulations
that translate between the write/scan/invoke orderings.

An automaton is a bundle of deterministic component functions.  The executor
owns the round structure; automata only say which object to pick, what to
write, how to fold a finished round into their locals and when to decide.
Component conventions:

* ``locals`` is passed to components as a plain dict whose nested values are
  frozen (see values.freeze); components return plain dicts.
* object indices are fresh per round: the executor keys instances by
  (round, index), matching the one-shot discipline of the iterated models.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Any, Callable, Optional

from .errors import (
    DomainError,
    InvalidConfigurationError,
    ModelMismatchError,
    ProtocolInvariantError,
)
from .model import MODELS, OWR, WOR, WRO
from .values import thaw_map

# ---------------------------------------------------------------------------
# coalition arithmetic


def tup(i: int, j: int) -> int:
    """Pairing index used to address coalition agreements: C(i+j+1, 2) + j."""
    if i < 0 or j < 0:
        raise DomainError(f"tup needs non-negative arguments, got ({i}, {j})")
    return comb(i + j + 1, 2) + j


def gamma(n: int, m: int) -> int:
    """Rounds consumed once all groups of span m have run: sum of n-i for i<=m."""
    if not 0 <= m < n:
        raise DomainError(f"gamma defined for 0 <= m < n, got ({n}, {m})")
    return m * n - m * (m + 1) // 2


def coalition_group(n: int, r: int) -> tuple[int, int, int]:
    """(firstid, lastid, step) of the group that shares an object in round r.

    Round r = gamma(n, m-1) + c runs the group {c, ..., c+m}.
    """
    if not 1 <= r <= comb(n, 2):
        raise DomainError(f"round {r} outside 1..C({n},2)")
    for m in range(1, n):
        if r <= gamma(n, m):
            c = r - gamma(n, m - 1)
            return c, c + m, m
    raise DomainError(f"no group for round {r}")  # pragma: no cover


# ---------------------------------------------------------------------------
# coalitions tuples


@dataclass(frozen=True, slots=True)
class CoalitionsTuple:
    """Ordered tuple of (left, right) pairs forming a 2-coalitions input."""

    entries: tuple

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def field_values(self) -> set:
        vals = set()
        for left, right in self.entries:
            if left is not None:
                vals.add(left)
            if right is not None:
                vals.add(right)
        return vals


def validate_coalitions_tuple(entries) -> bool:
    """True iff the entries form a valid g-coalitions tuple.

    (a) no entry is (bottom, bottom); (b) all non-bottom lefts agree, all
    non-bottom rights agree; (c) exactly one entry has right = bottom and
    the last entry is the unique one with left = bottom.
    """
    if isinstance(entries, CoalitionsTuple):
        entries = entries.entries
    try:
        pairs = [(e[0], e[1]) for e in entries]
    except (TypeError, IndexError):
        return False
    g = len(pairs)
    if g == 0:
        return False
    if any(left is None and right is None for left, right in pairs):
        return False
    lefts = {left for left, _ in pairs if left is not None}
    rights = {right for _, right in pairs if right is not None}
    if len(lefts) > 1 or len(rights) > 1:
        return False
    lset = {i for i, (left, _) in enumerate(pairs, start=1) if left is not None}
    rset = {i for i, (_, right) in enumerate(pairs, start=1) if right is not None}
    return len(lset - rset) == 1 and rset - lset == {g}


# ---------------------------------------------------------------------------
# coalition ledger (the per-process agreement store of the consensus protocol)


@dataclass(frozen=True, slots=True)
class CoalitionLedger:
    """Per-process record of coalition agreements plus the round bookkeeping."""

    agreements: tuple  # sorted ((tup-index, value), ...)
    step: int = 1
    firstid: int = 1
    lastid: int = 1

    def get(self, key: int):
        for k, v in self.agreements:
            if k == key:
                return v
        return None

    def with_agreement(self, key: int, value) -> "CoalitionLedger":
        items = dict(self.agreements)
        items[key] = value
        return CoalitionLedger(
            agreements=tuple(sorted(items.items())),
            step=self.step,
            firstid=self.firstid,
            lastid=self.lastid,
        )

    def advance(self, n: int) -> "CoalitionLedger":
        """End-of-round bookkeeping: slide the window or widen the span."""
        fid, stp = self.firstid, self.step
        lid = fid + stp
        if lid < n:
            fid += 1
        elif fid > 1:
            fid = 1
            stp += 1
        return CoalitionLedger(agreements=self.agreements, step=stp, firstid=fid, lastid=lid)

    def _freeze_(self):
        return self

    def to_jsonable(self) -> dict:
        return {
            "step": self.step,
            "firstid": self.firstid,
            "lastid": self.lastid,
            "agreements": {str(k): v for k, v in self.agreements},
        }


def ledger_of(locals_: dict) -> CoalitionLedger:
    return locals_["ledger"]


# ---------------------------------------------------------------------------
# the automaton bundle


@dataclass(frozen=True)
class ProtocolAutomaton:
    """Deterministic per-process machine for one iterated model.

    ``select_object(rnd, pid, sm, val, locals)`` picks this round's object;
    ``write_payload(pid, inp, sm, val, locals)`` produces the written value;
    ``decide(sm, val, locals)`` may output; ``step(locals, sm, val)`` folds the
    finished round into the locals.  ``sm_filter``/``val_filter`` run right
    after the scan/invoke events; they exist for the model simulations,
    which discard one round-1 result.
    """

    model: str
    name: str
    init: Callable[[int, Any], dict]
    select_object: Callable[[int, int, Any, Any, dict], Any]
    decide: Callable[[Any, Any, dict], Any]
    step: Callable[[dict, Any, Any], dict]
    write_payload: Optional[Callable[[int, Any, Any, Any, dict], Any]] = None
    sc_input: Optional[Callable[[int, dict], Any]] = None
    sm_filter: Optional[Callable[[int, int, Any, dict], Any]] = None
    val_filter: Optional[Callable[[int, int, Any, dict], Any]] = None
    round_budget: Optional[int] = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise InvalidConfigurationError(f"unknown model {self.model!r}")

    def payload(self, pid, inp, sm, val, locals_):
        if self.write_payload is not None:
            return self.write_payload(pid, inp, sm, val, locals_)
        return (sm, val)

    def object_input(self, pid, locals_):
        if self.sc_input is not None:
            return self.sc_input(pid, locals_)
        return pid


def _choose_side(sm, lo: int, hi: int, side: int):
    """Lowest-index non-bottom left (side 0) or right (side 1) among slots lo..hi."""
    for j in range(lo, hi + 1):
        cell = sm[j - 1]
        if not isinstance(cell, tuple) or len(cell) != 2:
            continue
        if cell[side] is not None:
            return cell[side]
    return None


# ---------------------------------------------------------------------------
# g-2coalitions-consensus from one safe-consensus object


def protocol_2cc(g: int) -> ProtocolAutomaton:
    """One-round WOR automaton solving g-2coalitions-consensus.

    Each process writes its (left, right) pair, feeds its id to the single
    shared object and scans.  Output g selects the right fields, anything
    else the left fields; ties break to the lowest slot index.
    """
    if g < 2:
        raise InvalidConfigurationError(f"need at least 2 processes, got g={g}")

    def init(pid, inp):
        return {"id": pid, "pair": inp}

    def select_object(rnd, pid, sm, val, loc):
        return 0

    def write_payload(pid, inp, sm, val, loc):
        return loc["pair"]

    def decide(sm, val, loc):
        if not isinstance(sm, tuple) or len(sm) != g:
            return None
        side = 1 if val == g else 0
        return _choose_side(sm, 1, g, side)

    def step(loc, sm, val):
        return loc

    return ProtocolAutomaton(
        model=WOR,
        name=f"2cc-{g}",
        init=init,
        select_object=select_object,
        decide=decide,
        step=step,
        write_payload=write_payload,
        round_budget=1,
    )


# ---------------------------------------------------------------------------
# consensus from C(n,2) shared objects (WOR)

GROUP_OBJECT = 0  # per-round index of the group's shared object


def protocol_consensus_wor(n: int) -> ProtocolAutomaton:
    """WOR consensus for n processes in C(n,2) rounds.

    Round r's group runs the 2coalitions step over one fresh shared object:
    members write the pair of agreements addressed by tup(firstid, lastid-1)
    and tup(firstid+1, lastid), invoke with their id, and adopt the right
    field when the object returns lastid, the left field otherwise.
    Non-members invoke throwaway solo objects.  The decision is the
    agreement of the full coalition, read after round C(n,2).
    """
    if n < 2:
        raise InvalidConfigurationError(f"need at least 2 processes, got n={n}")
    budget = comb(n, 2)

    def init(pid, inp):
        return {
            "id": pid,
            "r": 0,
            "ledger": CoalitionLedger(agreements=((tup(pid, pid), inp),)),
        }

    def window(loc):
        led = ledger_of(loc)
        return led.firstid, led.firstid + led.step

    def select_object(rnd, pid, sm, val, loc):
        fid, lid = window(loc)
        return GROUP_OBJECT if fid <= pid <= lid else pid

    def write_payload(pid, inp, sm, val, loc):
        fid, lid = window(loc)
        if fid <= pid <= lid:
            led = ledger_of(loc)
            return (led.get(tup(fid, lid - 1)), led.get(tup(fid + 1, lid)))
        return (None, None)

    def group_choice(sm, val, fid, lid):
        side = 1 if val == lid else 0
        chosen = _choose_side(sm, fid, lid, side)
        if chosen is None:
            raise ProtocolInvariantError(
                f"no candidate field on side {side} for group {fid}..{lid}")
        return chosen

    def decide(sm, val, loc):
        if loc["r"] + 1 < budget:
            return None
        fid, lid = window(loc)  # final round: fid=1, lid=n
        led = ledger_of(loc)
        if fid <= loc["id"] <= lid:
            return group_choice(sm, val, fid, lid)
        return led.get(tup(1, n))  # pragma: no cover - final group is everyone

    def step(loc, sm, val):
        out = dict(loc)
        led = ledger_of(loc)
        fid, lid = led.firstid, led.firstid + led.step
        pid = loc["id"]
        if fid <= pid <= lid:
            led = led.with_agreement(tup(fid, lid), group_choice(sm, val, fid, lid))
        out["ledger"] = led.advance(n)
        out["r"] = loc["r"] + 1
        return out

    return ProtocolAutomaton(
        model=WOR,
        name=f"consensus-wor-{n}",
        init=init,
        select_object=select_object,
        decide=decide,
        step=step,
        write_payload=write_payload,
        round_budget=budget,
    )


# ---------------------------------------------------------------------------
# model simulations


def transform_wro_to_owr(proto: ProtocolAutomaton) -> ProtocolAutomaton:
    """Simulate a write-scan-invoke protocol in the invoke-write-scan model.

    Round 1 performs the source's round-1 object selection but discards the
    returned value; from round 2 on, round r replays the source's round r-1,
    so every decision of the source appears exactly one round later.  The
    source's selector must accept round 0 (its value is irrelevant: the
    round-1 output is dropped).  Object inputs are the invoker ids, as in
    the lower-bound analyses.
    """
    if proto.model != WRO:
        raise ModelMismatchError(f"source must be a WRO protocol, got {proto.model}")

    def init(pid, inp):
        return {"id": pid, "r": 0, "decp": None, "prev_sm": inp,
                "inner": proto.init(pid, inp)}

    def select_object(rnd, pid, sm, val, loc):
        return proto.select_object(rnd - 1, pid, sm, val, thaw_map(loc["inner"]))

    def val_filter(rnd, pid, val, loc):
        return None if rnd == 1 else val

    def write_payload(pid, inp, sm, val, loc):
        # round r writes what the source writes in its round r: the fold of
        # the source's round r-1 happens on the fly (the stored locals lag).
        rnd = loc["r"] + 1
        inner = thaw_map(loc["inner"])
        if rnd >= 2:
            inner = proto.step(inner, sm, val)
        return proto.payload(pid, inp, sm, val, inner)

    def decide(sm, val, loc):
        rnd = loc["r"] + 1
        if rnd == 1:
            return None
        if loc["decp"] is not None:
            return loc["decp"]
        return proto.decide(loc["prev_sm"], val, thaw_map(loc["inner"]))

    def step(loc, sm, val):
        out = dict(loc)
        rnd = loc["r"] + 1
        if rnd >= 2:
            inner = thaw_map(loc["inner"])
            if out["decp"] is None:
                out["decp"] = proto.decide(loc["prev_sm"], val, inner)
            out["inner"] = proto.step(inner, loc["prev_sm"], val)
        out["prev_sm"] = sm
        out["r"] = rnd
        return out

    return ProtocolAutomaton(
        model=OWR,
        name=f"owr-sim[{proto.name}]",
        init=init,
        select_object=select_object,
        decide=decide,
        step=step,
        write_payload=write_payload,
        val_filter=val_filter,
        round_budget=proto.round_budget + 1 if proto.round_budget else None,
    )


def transform_owr_to_wro(proto: ProtocolAutomaton) -> ProtocolAutomaton:
    """Simulate an invoke-write-scan protocol in the write-scan-invoke model.

    The simulation's round-1 write/scan is discarded (sm is reset to the
    input after the scan); round r's invoke replays the source's round-r
    invoke, and its round r+1 write/scan replays the source's round r.
    Decisions shift one round later.
    """
    if proto.model != OWR:
        raise ModelMismatchError(f"source must be an OWR protocol, got {proto.model}")

    def init(pid, inp):
        return {"id": pid, "inp": inp, "r": 0, "decp": None, "prev_val": None,
                "inner": proto.init(pid, inp)}

    def sm_filter(rnd, pid, sm, loc):
        return loc["inp"] if rnd == 1 else sm

    def select_object(rnd, pid, sm, val, loc):
        # the source folds its round rnd-1 before selecting in round rnd;
        # replay that fold on the fly (the stored inner lags one round).
        inner = thaw_map(loc["inner"])
        if rnd >= 2:
            inner = proto.step(inner, sm, val)
        return proto.select_object(rnd, pid, sm, val, inner)

    def write_payload(pid, inp, sm, val, loc):
        rnd = loc["r"] + 1
        if rnd == 1:
            return (sm, val)  # scans of round 1 are reset, content irrelevant
        return proto.payload(pid, inp, sm, val, thaw_map(loc["inner"]))

    def decide(sm, val, loc):
        rnd = loc["r"] + 1
        if rnd == 1:
            return None
        if loc["decp"] is not None:
            return loc["decp"]
        return proto.decide(sm, loc["prev_val"], thaw_map(loc["inner"]))

    def step(loc, sm, val):
        out = dict(loc)
        rnd = loc["r"] + 1
        if rnd >= 2:
            inner = thaw_map(loc["inner"])
            if out["decp"] is None:
                out["decp"] = proto.decide(sm, loc["prev_val"], inner)
            out["inner"] = proto.step(inner, sm, loc["prev_val"])
        out["prev_val"] = val
        out["r"] = rnd
        return out

    return ProtocolAutomaton(
        model=WRO,
        name=f"wro-sim[{proto.name}]",
        init=init,
        select_object=select_object,
        decide=decide,
        step=step,
        write_payload=write_payload,
        sm_filter=sm_filter,
        round_budget=proto.round_budget + 1 if proto.round_budget else None,
    )
