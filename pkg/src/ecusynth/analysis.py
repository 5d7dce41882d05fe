"""Fixed-priority schedulability, hyperperiod simulation, data age, and
requirement validation of a synthesized system.

Timing runs on integer microseconds.  A task's execution budget is its
cost (extended WCET for application tasks) rounded up to the next whole
microsecond, so analysis and simulation see the same integers.
"""

from __future__ import annotations

import bisect
import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .checks import check_model
from .model import Finding, hyperperiod, memory_usage

RTA_MAX_ITERATIONS = 10 ** 6


class AnalysisError(ValueError):
    pass


def budget_us(task) -> int:
    # round() first so that 1240.0000000001 does not become 1241.
    return math.ceil(round(task.cost_us, 6))


@dataclass
class RtaResult:
    response_us: dict
    schedulable: bool
    diagnostics: list = field(default_factory=list)

    def response(self, task_id):
        return self.response_us.get(task_id)


def _check_priorities(tasks):
    prios = [t.priority for t in tasks]
    if any(p is None for p in prios):
        raise AnalysisError("every task needs a priority")
    if len(set(prios)) != len(prios):
        raise AnalysisError("priorities must be unique per core")


def response_time_analysis(tasks) -> RtaResult:
    """Exact response times for preemptive fixed priorities, implicit deadlines.

    ``response_us[id]`` is ``None`` for an unschedulable task.
    """
    tasks = list(tasks)
    _check_priorities(tasks)
    if not tasks:
        return RtaResult({}, True)
    util = sum(Fraction(budget_us(t), t.period_us) for t in tasks)
    if util >= 1:
        return RtaResult({t.id: None for t in tasks}, False,
                         [f"utilization {float(util):.4f} >= 1"])
    out, notes = {}, []
    for t in tasks:
        c = budget_us(t)
        hp = [(budget_us(j), j.period_us) for j in tasks if j.priority > t.priority]
        w = c
        for _ in range(RTA_MAX_ITERATIONS):
            nxt = c + sum(-(-w // tj) * cj for cj, tj in hp)
            if nxt == w or nxt > t.period_us:
                break
            w = nxt
        else:
            notes.append(f"{t.id}: no convergence after {RTA_MAX_ITERATIONS} iterations")
            nxt = t.period_us + 1
        out[t.id] = w if nxt == w and w <= t.period_us else None
    return RtaResult(out, all(r is not None for r in out.values()), notes)


@dataclass
class Job:
    task_id: str
    index: int
    release: int
    deadline: int
    start: int | None = None
    finish: int | None = None

    @property
    def response(self):
        return None if self.finish is None else self.finish - self.release

    @property
    def missed(self):
        return self.finish is None or self.finish > self.deadline


@dataclass
class Simulation:
    horizon_us: int
    jobs: list
    worst_response_us: dict
    deadline_misses: list

    def jobs_of(self, task_id):
        return [j for j in self.jobs if j.task_id == task_id]


def simulate_hyperperiod(tasks, horizon_us=None) -> Simulation:
    """Discrete-event simulation, synchronous release at t = 0.

    The default horizon is one hyperperiod of the task periods.  A job that
    misses its deadline keeps running; the miss is recorded.
    """
    tasks = sorted(tasks, key=lambda t: t.id)
    _check_priorities(tasks)
    if not tasks:
        return Simulation(horizon_us or 0, [], {}, [])
    if horizon_us is None:
        horizon_us = hyperperiod(t.period_us for t in tasks)
    cost = {t.id: budget_us(t) for t in tasks}
    next_release = [(0, t.id, t) for t in tasks]
    heapq.heapify(next_release)
    count = {t.id: 0 for t in tasks}
    ready = []  # (-priority, task id, job index, job)
    remaining = {}
    jobs = []
    now = 0
    while now < horizon_us:
        while next_release and next_release[0][0] == now:
            _, tid, t = heapq.heappop(next_release)
            job = Job(tid, count[tid], now, now + t.period_us)
            count[tid] += 1
            jobs.append(job)
            remaining[id(job)] = cost[tid]
            heapq.heappush(ready, (-t.priority, tid, job.index, job))
            if now + t.period_us < horizon_us:
                heapq.heappush(next_release, (now + t.period_us, tid, t))
        upcoming = next_release[0][0] if next_release else horizon_us
        if not ready:
            now = upcoming
            continue
        _, _, _, job = ready[0]
        if job.start is None:
            job.start = now
        run = min(remaining[id(job)], upcoming - now)
        now += run
        remaining[id(job)] -= run
        if remaining[id(job)] == 0:
            heapq.heappop(ready)
            job.finish = now

    worst = {t.id: None for t in tasks}
    for j in jobs:
        r = j.response
        if r is not None and (worst[j.task_id] is None or r > worst[j.task_id]):
            worst[j.task_id] = r
    misses = [j for j in jobs if j.missed and j.deadline <= horizon_us]
    return Simulation(horizon_us, jobs, worst, misses)


def _chain_visits(chain, system):
    """Task visits along a chain: consecutive members share a visit when they
    sit in one task with the writer ordered before the reader."""
    owner = system.task_of_runnable
    visits = []
    prev = None
    for m in chain.members:
        tid = owner.get(m)
        if tid is None:
            raise AnalysisError(f"{chain.id}: member {m} belongs to no task")
        if visits and visits[-1] == tid:
            order = system.task_by_id[tid].runnable_ids
            if order.index(prev) < order.index(m):
                prev = m
                continue
        visits.append(tid)
        prev = m
    return visits


def data_age_bound(chain, rta_by_task, system) -> float:
    """Sum of (period + response time) over the chain's task visits, in us."""
    total = 0
    for tid in _chain_visits(chain, system):
        r = rta_by_task.get(tid)
        if r is None:
            raise AnalysisError(f"{chain.id}: age undefined for unschedulable chain")
        total += system.task_by_id[tid].period_us + r
    return float(total)


def measure_data_age(chain, jobs_by_task, system, horizon_us=None):
    """Largest observed input-to-output age along ``chain`` in a trace.

    Register semantics: a job reads its inputs when it starts and publishes
    its outputs when it finishes.  Each finished tail job is traced back
    through the latest predecessor job published no later than the
    reader's start; paths reaching before t = 0 are skipped.
    """
    if horizon_us is not None and horizon_us < 2 * chain.hyperperiod_ms * 1000:
        raise AnalysisError(f"{chain.id}: trace shorter than two chain hyperperiods")
    visits = _chain_visits(chain, system)
    finished = {}
    for tid in set(visits):
        if tid not in jobs_by_task:
            raise AnalysisError(f"{chain.id}: task {tid} missing from trace")
        js = sorted((j for j in jobs_by_task[tid] if j.finish is not None),
                    key=lambda j: j.finish)
        finished[tid] = (js, [j.finish for j in js])
    worst = None
    for tail in finished[visits[-1]][0]:
        job = tail
        for tid in reversed(visits[:-1]):
            js, fin = finished[tid]
            k = bisect.bisect_right(fin, job.start) - 1
            if k < 0:
                job = None
                break
            job = js[k]
        if job is None:
            continue
        age = tail.finish - job.start
        worst = age if worst is None else max(worst, age)
    if worst is None:
        raise AnalysisError(f"{chain.id}: no complete propagation path in the trace")
    return float(worst)


@dataclass
class AgeResult:
    chain_id: str
    bound_us: float | None
    constraint_us: float
    measured_max_us: float | None = None

    @property
    def satisfied(self):
        return self.bound_us is not None and self.bound_us <= self.constraint_us


@dataclass
class CoreReport:
    core_id: str
    utilization: float
    rom_used_kb: float
    ram_used_kb: float
    rom_free_kb: float
    ram_free_kb: float
    rta: RtaResult
    simulated_worst_us: dict | None = None


@dataclass
class AnalysisReport:
    cores: list
    ages: list
    findings: list
    notes: list = field(default_factory=lambda: [
        "label communication is modelled as free of timing cost",
        "chain context: consecutive chain members sharing a task run in chain order",
        "job-level dependencies are not encoded; age is checked by bound and simulation",
    ])

    @property
    def accepted(self):
        return not self.findings


def _core_rta(system):
    out = {}
    for core in system.cores:
        tasks = system.core_tasks(core.id)
        try:
            out[core.id] = response_time_analysis(tasks)
        except AnalysisError as exc:
            out[core.id] = RtaResult({t.id: None for t in tasks}, False, [str(exc)])
    return out


def _response_by_task(rtas):
    merged = {}
    for r in rtas.values():
        merged.update(r.response_us)
    return merged


def _requirement_findings(system, rtas):
    runnables = system.runnable_by_id
    out = []
    # R1: runnable -> task is a partition, every task on a core.
    seen = {}
    for t in system.tasks:
        for rid in t.runnable_ids:
            seen[rid] = seen.get(rid, 0) + 1
    for r in system.runnables:
        n = seen.get(r.id, 0)
        if n != 1:
            out.append(Finding("R1-partition", r.id, f"runnable is in {n} tasks"))
    for t in list(system.tasks) + list(system.bsw_tasks):
        if t.core_id not in system.core_by_id:
            out.append(Finding("R1-unmapped", t.id, f"task is not on a known core "
                               f"({t.core_id})"))
    # R2: chain order inside tasks.
    for ch in system.chains:
        for a, b in zip(ch.members, ch.members[1:]):
            ta, tb = system.task_of_runnable.get(a), system.task_of_runnable.get(b)
            if ta is not None and ta == tb:
                order = system.task_by_id[ta].runnable_ids
                if order.index(a) > order.index(b):
                    out.append(Finding("R2-chain-order", ch.id, f"{a} runs after {b} "
                                       f"inside {ta}"))
    # R3: SW-C colocation and memory.
    spread = {}
    for t in system.tasks:
        for rid in t.runnable_ids:
            r = runnables.get(rid)
            if r is not None:
                spread.setdefault(r.swc_id, set()).add(t.core_id)
    for s in system.swcs:
        cores = spread.get(s.id, set())
        if cores and cores != {s.core_id}:
            out.append(Finding("R3-colocation", s.id, f"SW-C on {s.core_id}, its "
                               f"runnables on {sorted(map(str, cores))}"))
    for core in system.cores:
        mem = memory_usage(core, [s for s in system.swcs if s.core_id == core.id])
        short = [k for k, v in (("ROM", mem.rom_free_kb), ("RAM", mem.ram_free_kb)) if v < 0]
        if short:
            out.append(Finding("R3-memory", core.id, f"{'/'.join(short)} capacity "
                               f"exceeded (free ROM {mem.rom_free_kb:.1f} kB, "
                               f"RAM {mem.ram_free_kb:.1f} kB)"))
    # Schedulability.
    for core_id, rta in rtas.items():
        for tid, r in rta.response_us.items():
            if r is None:
                out.append(Finding("rta-unschedulable", tid, f"misses its deadline "
                                   f"on {core_id}"))
    return out


def _age_results(system, rtas):
    responses = _response_by_task(rtas)
    results = []
    for ch in system.chains:
        try:
            bound = data_age_bound(ch, responses, system)
        except AnalysisError:
            bound = None
        results.append(AgeResult(ch.id, bound, ch.age_constraint_us))
    return results


def validate_requirements(system):
    """All findings: field invariants, R1-R4, schedulability and age bounds."""
    rtas = _core_rta(system)
    findings = check_model(system) + _requirement_findings(system, rtas)
    for age in _age_results(system, rtas):
        if age.bound_us is not None and not age.satisfied:
            findings.append(Finding("age-bound", age.chain_id,
                                    f"age bound {age.bound_us:.0f} us exceeds "
                                    f"constraint {age.constraint_us:.0f} us"))
    return findings


def simulate_system(system, n_hyperperiods=2):
    """Per-core simulations over a common horizon; returns jobs grouped by task."""
    periods = [t.period_us for t in list(system.tasks) + list(system.bsw_tasks)]
    horizon = n_hyperperiods * hyperperiod(periods) if periods else 0
    jobs, sims = {}, {}
    for core in system.cores:
        tasks = system.core_tasks(core.id)
        sim = simulate_hyperperiod(tasks, horizon)
        sims[core.id] = sim
        for j in sim.jobs:
            jobs.setdefault(j.task_id, []).append(j)
    return sims, jobs, horizon


def _trace_hyperperiods(system, ages):
    # Every tail job finishing after (bound + longest period) has a complete
    # propagation path, so the trace must reach past that point.
    periods = [t.period_us for t in list(system.tasks) + list(system.bsw_tasks)]
    if not periods:
        return 2
    needed = max([a.bound_us for a in ages if a.bound_us is not None], default=0)
    return max(2, math.ceil((needed + max(periods)) / hyperperiod(periods)) + 1)


def analyze_system(system, simulate=True) -> AnalysisReport:
    rtas = _core_rta(system)
    ages = _age_results(system, rtas)
    sims, jobs, horizon = ({}, {}, 0)
    if simulate:
        sims, jobs, horizon = simulate_system(system, _trace_hyperperiods(system, ages))
    cores = []
    for core in system.cores:
        tasks = system.core_tasks(core.id)
        mem = memory_usage(core, [s for s in system.swcs if s.core_id == core.id])
        util = sum(t.cost_us / t.period_us for t in tasks)
        sim = sims.get(core.id)
        cores.append(CoreReport(core.id, util, *mem, rtas[core.id],
                                sim.worst_response_us if sim else None))
    if simulate:
        for age, ch in zip(ages, system.chains):
            if age.bound_us is not None:
                age.measured_max_us = measure_data_age(ch, jobs, system, horizon)
    return AnalysisReport(cores, ages, validate_requirements(system))
