"""Execution correspondence between a protocol and its model simulation.

A write-scan-invoke (WRO) execution with round schedules pi_1..pi_k maps to
an invoke-write-scan (OWR) execution of the simulation with schedules

    pi'_1   = S(all), pi_1[W,R]
    pi'_l   = pi_{l-1}[S], pi_l[W,R]      (2 <= l <= k)
    pi'_k+1 = pi_k[S], W(all), R(all)

and symmetrically for the other direction.  With the adversary choices
replayed instance-for-instance, the simulation decides exactly what the
source decides, one round later.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .errors import ModelMismatchError
from .executor import (
    R,
    RoundSchedule,
    S,
    ScriptedAdversary,
    SeededRandomAdversary,
    W,
    Execution,
    make_schedule,
    make_initial_state,
    probe_round,
    run_execution,
)
from .model import OWR, WRO
from .protocols import ProtocolAutomaton, transform_owr_to_wro, transform_wro_to_owr


def wro_to_owr_schedules(scheds: list[RoundSchedule], n: int) -> list[RoundSchedule]:
    """Schedules of the simulating OWR run for a WRO run's schedules."""
    full = frozenset(range(1, n + 1))
    out = []
    prev_s: tuple = ((S, full),)
    for sched in scheds:
        if sched.model != WRO:
            raise ModelMismatchError("source schedules must be WRO")
        out.append(make_schedule(OWR, n, prev_s + sched.part((W, R))))
        prev_s = sched.part((S,))
    out.append(make_schedule(OWR, n, prev_s + ((W, full), (R, full))))
    return out


def owr_to_wro_schedules(scheds: list[RoundSchedule], n: int) -> list[RoundSchedule]:
    """Schedules of the simulating WRO run for an OWR run's schedules."""
    full = frozenset(range(1, n + 1))
    out = []
    prev_wr: tuple = ((W, full), (R, full))
    for sched in scheds:
        if sched.model != OWR:
            raise ModelMismatchError("source schedules must be OWR")
        out.append(make_schedule(WRO, n, prev_wr + sched.part((S,))))
        prev_wr = sched.part((W, R))
    out.append(make_schedule(WRO, n, prev_wr + ((S, full),)))
    return out


@dataclass(frozen=True)
class CorrespondenceReport:
    source: str
    simulation: str
    executions: int
    mismatches: int
    first_mismatch: Optional[dict]

    @property
    def ok(self) -> bool:
        return self.mismatches == 0

    def to_jsonable(self) -> dict:
        return {
            "source": self.source,
            "simulation": self.simulation,
            "executions": self.executions,
            "mismatches": self.mismatches,
            "ok": self.ok,
            "first_mismatch": self.first_mismatch,
        }


def simulate_paired(proto: ProtocolAutomaton, inputs, scheds,
                    adversary) -> tuple[Execution, Execution]:
    """Run the source and its simulation on corresponding schedules.

    The simulation replays the source's recorded adversary choices; the
    extra instances of its padding round get a fixed choice of 1 (their
    outputs are discarded by the simulation).
    """
    n = len(inputs)
    src = run_execution(proto, inputs, scheds, adversary)
    choices = src.all_choices()
    if proto.model == WRO:
        sim_proto = transform_wro_to_owr(proto)
        sim_scheds = wro_to_owr_schedules(list(scheds), n)
        # the simulation's first round invokes fresh (discarded) objects
        init = make_initial_state(n, inputs, sim_proto.model, sim_proto)
        extra = sum(1 for (_o, _b, contended, _f) in
                    probe_round(init, sim_scheds[0], sim_proto) if contended)
        script = [1] * extra + choices
    elif proto.model == OWR:
        sim_proto = transform_owr_to_wro(proto)
        sim_scheds = owr_to_wro_schedules(list(scheds), n)
        # the trailing padding round may invoke fresh contended objects
        script = choices + [1] * n
    else:
        raise ModelMismatchError(f"no simulation for model {proto.model}")
    sim = run_execution(sim_proto, inputs, sim_scheds, ScriptedAdversary(script))
    return src, sim


def decisions_shifted_by_one(src: Execution, sim: Execution) -> Optional[dict]:
    """None if every source decision appears in the simulation one round
    later with the same value (and nothing else is decided early)."""
    src_dec = src.decision_rounds()
    sim_dec = sim.decision_rounds()
    for pid in range(1, src.final.n + 1):
        a = src_dec.get(pid)
        b = sim_dec.get(pid)
        if a is None:
            if b is not None and b[0] <= src.rounds:
                return {"pid": pid, "source": None, "simulation": list(b)}
            continue
        if b is None or b[0] != a[0] + 1 or b[1] != a[1]:
            return {"pid": pid, "source": list(a),
                    "simulation": list(b) if b else None}
    return None


def check_transform_correspondence(proto: ProtocolAutomaton, n: int,
                                   executions: int = 1000, seed: int = 0,
                                   rounds: Optional[int] = None) -> CorrespondenceReport:
    """Randomized schedules/adversaries; count decision-shift mismatches."""
    rng = random.Random(seed)
    rounds = rounds or (proto.round_budget or 3) + 1
    mismatches = 0
    first = None
    sim_name = None
    for k in range(executions):
        inputs = [rng.randint(0, 1) for _ in range(n)]
        scheds = [_random_general_schedule(n, proto.model, rng) for _ in range(rounds)]
        adv = SeededRandomAdversary(rng.randrange(2**31), n)
        src, sim = simulate_paired(proto, inputs, scheds, adv)
        sim_name = sim.final.model
        bad = decisions_shifted_by_one(src, sim)
        if bad is not None:
            mismatches += 1
            if first is None:
                first = {"index": k, "inputs": inputs, "detail": bad}
    return CorrespondenceReport(
        source=proto.name,
        simulation=f"{sim_name or '?'} simulation",
        executions=executions,
        mismatches=mismatches,
        first_mismatch=first,
    )


def _random_general_schedule(n: int, model: str, rng: random.Random) -> RoundSchedule:
    """Random member of the ordered-partition family (general interleavings)."""
    order = {"WOR": (W, S, R), "WRO": (W, R, S), "OWR": (S, W, R)}[model]
    progress = {pid: 0 for pid in range(1, n + 1)}
    events = []
    while any(v < 3 for v in progress.values()):
        ready: dict[str, list[int]] = {}
        for pid, lvl in progress.items():
            if lvl < 3:
                ready.setdefault(order[lvl], []).append(pid)
        kind = rng.choice(sorted(ready))
        pool = ready[kind]
        k = rng.randint(1, len(pool))
        group = frozenset(rng.sample(pool, k))
        for pid in group:
            progress[pid] += 1
        events.append((kind, group))
    return make_schedule(model, n, events)
