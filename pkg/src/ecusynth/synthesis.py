"""Task synthesis: clustering runnables into tasks, BSW extension, priorities,
and partitioned allocation of tasks and software components onto cores."""

from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass, field, replace

from . import tables
from .config import SynthesisConfig
from .model import SystemModel, Task, core_utilization, memory_usage


@dataclass(frozen=True)
class BswExtensionModel:
    """Task-local BSW overhead ratio, by number of runnables in the task."""

    ratio_table: dict = field(default_factory=lambda: dict(tables.BSW_RATIO))

    def __post_init__(self):
        keys = sorted(self.ratio_table)
        for k in keys:
            lo, hi = self.ratio_table[k]
            if not 0 <= lo <= hi:
                raise ValueError(f"bucket {k}: need 0 <= min <= max, got {lo}, {hi}")
        for a, b in zip(keys, keys[1:]):
            (lo_a, hi_a), (lo_b, hi_b) = self.ratio_table[a], self.ratio_table[b]
            if lo_b > lo_a or hi_b > hi_a:
                raise ValueError(f"ratios must not grow with runnable count ({a} -> {b})")

    def bounds(self, n_runnables):
        top = max(self.ratio_table)
        return self.ratio_table[min(max(n_runnables, 1), top)]


@dataclass
class AllocationResult:
    task_core: dict = field(default_factory=dict)
    swc_core: dict = field(default_factory=dict)
    rejections: list = field(default_factory=list)

    @property
    def feasible(self):
        return not self.rejections


class _DisjointSet:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _topo_order(members, edges):
    """Members ordered along ``edges``; ties and unconstrained ones by id."""
    indeg = {m: 0 for m in members}
    out = defaultdict(list)
    for a, b in edges:
        if a in indeg and b in indeg:
            out[a].append(b)
            indeg[b] += 1
    heap = [m for m, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        m = heapq.heappop(heap)
        order.append(m)
        for b in out[m]:
            indeg[b] -= 1
            if indeg[b] == 0:
                heapq.heappush(heap, b)
    return order


def _reaches(edges_from, src, dst):
    stack, seen = [src], {src}
    while stack:
        x = stack.pop()
        if x == dst:
            return True
        for y in edges_from[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return False


def cluster_into_tasks(runnables, chains=(), max_runnables_per_task=6, partition=None):
    """Group runnables into tasks of one period and one ASIL.

    Consecutive chain members of the same group are kept in one task where
    the size limit allows, in chain order.  ``partition`` optionally maps
    SW-C id to a bin; runnables of different bins never share a task.
    """
    if max_runnables_per_task < 1:
        raise ValueError("max_runnables_per_task must be >= 1")

    def key(r):
        bin_ = partition.get(r.swc_id, "") if partition else ""
        return (str(bin_), r.period_ms, r.asil.rank)

    groups = defaultdict(list)
    group_of = {}
    by_id = {r.id: r for r in runnables}
    for r in runnables:
        groups[key(r)].append(r.id)
        group_of[r.id] = key(r)

    # Precedence edges inside a group; an edge closing a cycle is dropped and
    # its endpoints are kept apart.
    accepted = defaultdict(list)
    edges_from = defaultdict(list)
    conflicts = set()
    for ch in chains:
        for a, b in zip(ch.members, ch.members[1:]):
            if a not in group_of or group_of.get(a) != group_of.get(b) or a == b:
                continue
            if b in edges_from[a]:
                continue
            if _reaches(edges_from, b, a):
                conflicts.add(frozenset((a, b)))
                continue
            edges_from[a].append(b)
            accepted[group_of[a]].append((a, b))

    tasks = []
    for gkey in sorted(groups):
        ids = sorted(groups[gkey])
        dsu = _DisjointSet()
        for rid in ids:
            dsu.find(rid)
        for a, b in accepted[gkey]:
            dsu.union(a, b)
        comps = defaultdict(list)
        for rid in ids:
            comps[dsu.find(rid)].append(rid)
        pieces = []
        for root in sorted(comps):
            piece = []
            for rid in _topo_order(comps[root], accepted[gkey]):
                if (len(piece) == max_runnables_per_task
                        or any(frozenset((rid, x)) in conflicts for x in piece)):
                    pieces.append(piece)
                    piece = []
                piece.append(rid)
            pieces.append(piece)
        bins = []
        for piece in pieces:
            for b in bins:
                if (len(b) + len(piece) <= max_runnables_per_task
                        and not any(frozenset((x, y)) in conflicts
                                    for x in piece for y in b)):
                    b.extend(piece)
                    break
            else:
                bins.append(list(piece))
        for b in bins:
            members = tuple(_topo_order(b, accepted[gkey]))
            first = by_id[members[0]]
            base = sum(by_id[m].wcet_us for m in members)
            tasks.append(Task(f"t{len(tasks):04d}", first.period_ms, first.asil,
                              members, base, 0.0, base))
    return tasks


def apply_bsw_extension(task, model: BswExtensionModel, rng):
    lo, hi = model.bounds(len(task.runnable_ids))
    ratio = float(rng.uniform(lo, hi))
    return replace(task, bsw_ratio=ratio,
                   extended_wcet_us=task.base_wcet_us * (1.0 + ratio))


def assign_priorities(tasks):
    """Rate-monotonic priorities, unique; larger number = higher priority.

    Equal periods: application tasks before BSW tasks, then ascending id.
    """
    ranked = sorted(tasks, key=lambda t: (t.period_ms, t.is_bsw, t.id))
    n = len(ranked)
    return [replace(t, priority=n - i) for i, t in enumerate(ranked)]


def _swc_of_tasks(tasks, runnables):
    swc_of = {r.id: r.swc_id for r in runnables}
    out = {}
    for t in tasks:
        try:
            out[t.id] = sorted({swc_of[rid] for rid in t.runnable_ids})
        except KeyError as exc:
            raise ValueError(f"task {t.id} references unknown runnable {exc}") from None
    return out


def allocate(tasks, bsw_tasks, swcs, cores, runnables, utilization_cap=0.69):
    """First-fit-decreasing placement of tasks and SW-Cs onto cores.

    A SW-C pins every task holding one of its runnables to its core, so the
    unit of placement is a colocation group (tasks linked through SW-Cs),
    taken in decreasing utilization order.  BSW tasks keep their cores.
    """
    core_ids = [c.id for c in cores]
    swc_by_id = {s.id: s for s in swcs}
    task_swcs = _swc_of_tasks(tasks, runnables)
    for sids in task_swcs.values():
        for sid in sids:
            if sid not in swc_by_id:
                raise ValueError(f"unknown SW-C {sid}")
    for b in bsw_tasks:
        if b.core_id not in core_ids:
            raise ValueError(f"BSW task {b.id} is on unknown core {b.core_id}")

    dsu = _DisjointSet()
    for t in tasks:
        dsu.find(("t", t.id))
        for sid in task_swcs[t.id]:
            dsu.union(("t", t.id), ("s", sid))
    for s in swcs:
        dsu.find(("s", s.id))
    groups = defaultdict(lambda: {"tasks": [], "swcs": []})
    for t in tasks:
        groups[dsu.find(("t", t.id))]["tasks"].append(t)
    for s in swcs:
        groups[dsu.find(("s", s.id))]["swcs"].append(s)

    def gutil(g):
        return core_utilization(g["tasks"])

    order = sorted(groups.values(),
                   key=lambda g: (-gutil(g), min([x.id for x in g["tasks"] + g["swcs"]])))

    load = {c.id: core_utilization([b for b in bsw_tasks if b.core_id == c.id])
            for c in cores}
    placed_swcs = {c.id: [] for c in cores}
    result = AllocationResult()
    for g in order:
        u = gutil(g)
        reasons = []
        for core in cores:
            mem = memory_usage(core, placed_swcs[core.id] + g["swcs"])
            why = []
            if load[core.id] + u > utilization_cap:
                why.append("utilization cap")
            if mem.rom_free_kb < 0:
                why.append("ROM capacity")
            if mem.ram_free_kb < 0:
                why.append("RAM capacity")
            if not why:
                load[core.id] += u
                placed_swcs[core.id].extend(g["swcs"])
                for t in g["tasks"]:
                    result.task_core[t.id] = core.id
                for s in g["swcs"]:
                    result.swc_core[s.id] = core.id
                break
            reasons.append(f"{core.id}: {', '.join(why)}")
        else:
            reason = "; ".join(reasons) or "no cores"
            for x in g["tasks"] + g["swcs"]:
                result.rejections.append((x.id, reason))
    return result


def estimate_swc_utilization(swc, runnable_by_id, inflation=1.3):
    return inflation * sum(runnable_by_id[r].wcet_us / (runnable_by_id[r].period_ms * 1000)
                           for r in swc.runnable_ids)


def partition_swcs(system: SystemModel, utilization_cap=0.69, inflation=1.3):
    """Pre-assign SW-Cs to cores before clustering.

    SW-Cs whose runnables follow each other in a chain with equal period
    and ASIL are kept together while the combined estimate fits
    a core next to its BSW load; groups are first-fit-decreasing onto cores.
    Returns ``{swc_id: core_id}``.
    """
    rmap = system.runnable_by_id
    est = {s.id: estimate_swc_utilization(s, rmap, inflation) for s in system.swcs}
    dsu = _DisjointSet()
    for s in system.swcs:
        dsu.find(s.id)
    weight = dict(est)
    bsw_load = [core_utilization([b for b in system.bsw_tasks if b.core_id == c.id])
                for c in system.cores]
    merge_limit = utilization_cap - max(bsw_load, default=0.0)
    for ch in system.chains:
        for a, b in zip(ch.members, ch.members[1:]):
            ra_, rb_ = rmap[a], rmap[b]
            # Only pairs that could later share a task gain from colocation.
            if (ra_.period_ms, ra_.asil) != (rb_.period_ms, rb_.asil):
                continue
            ra, rb = dsu.find(ra_.swc_id), dsu.find(rb_.swc_id)
            if ra != rb and weight[ra] + weight[rb] <= merge_limit:
                dsu.union(ra, rb)
                weight[dsu.find(ra)] = weight[ra] + weight[rb]
    groups = defaultdict(list)
    for s in system.swcs:
        groups[dsu.find(s.id)].append(s)
    order = sorted(groups.values(),
                   key=lambda g: (-sum(est[s.id] for s in g), g[0].id))
    load = {c.id: core_utilization([b for b in system.bsw_tasks if b.core_id == c.id])
            for c in system.cores}
    mem = {c.id: [] for c in system.cores}
    out = {}

    def fits(core, g, u):
        m = memory_usage(core, mem[core.id] + g)
        return load[core.id] + u <= utilization_cap and m.rom_free_kb >= 0 and m.ram_free_kb >= 0

    for g in order:
        u = sum(est[s.id] for s in g)
        pieces = [g]
        target = next((c for c in system.cores if fits(c, g, u)), None)
        if target is None and len(g) > 1:
            pieces = [[s] for s in g]
        for piece in pieces:
            pu = sum(est[s.id] for s in piece)
            core = next((c for c in system.cores if fits(c, piece, pu)), None)
            if core is None:
                core = min(system.cores, key=lambda c: (load[c.id], c.id))
            load[core.id] += pu
            mem[core.id].extend(piece)
            for s in piece:
                out[s.id] = core.id
    return out


def synthesize(system: SystemModel, config: SynthesisConfig, rng,
               extension: BswExtensionModel | None = None):
    """Build, extend, place and prioritize tasks for a generated system.

    Returns ``(system_with_tasks, allocation)``; unplaced entities keep
    ``core_id=None`` and are listed in ``allocation.rejections``.
    """
    extension = extension or BswExtensionModel()
    partition = partition_swcs(system, config.utilization_cap)
    tasks = cluster_into_tasks(system.runnables, system.chains,
                               config.max_runnables_per_task, partition)
    tasks = [apply_bsw_extension(t, extension, rng) for t in tasks]
    alloc = allocate(tasks, system.bsw_tasks, system.swcs, system.cores,
                     system.runnables, config.utilization_cap)
    tasks = [replace(t, core_id=alloc.task_core.get(t.id)) for t in tasks]
    swcs = tuple(replace(s, core_id=alloc.swc_core.get(s.id)) for s in system.swcs)
    prioritized = {}
    for core in system.cores:
        on_core = [t for t in tasks if t.core_id == core.id]
        on_core += [b for b in system.bsw_tasks if b.core_id == core.id]
        for t in assign_priorities(on_core):
            prioritized[t.id] = t
    tasks = tuple(prioritized.get(t.id, t) for t in tasks)
    bsw = tuple(prioritized.get(b.id, b) for b in system.bsw_tasks)
    return replace(system, swcs=swcs, tasks=tasks, bsw_tasks=bsw), alloc
