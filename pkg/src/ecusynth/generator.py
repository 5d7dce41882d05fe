"""Seeded sampling of application software, communication, chains and BSW load."""

from __future__ import annotations

import bisect
import math
from collections import defaultdict
from dataclasses import replace
from itertools import accumulate

import numpy as np

from . import tables
from .config import GeneratorConfig
from .model import (Asil, BswTask, CauseEffectChain, Core, Label, Runnable,
                    SwComponent, SystemModel)


class GenerationError(RuntimeError):
    pass


def pick(u, keys, weights):
    """Inverse-CDF categorical draw: ``keys[i]`` for the bin containing ``u``."""
    cdf = list(accumulate(weights))
    idx = bisect.bisect_right(cdf, u * cdf[-1])
    return keys[min(idx, len(keys) - 1)]


def draw(rng, keys, weights):
    return pick(rng.random(), keys, weights)


def truncated_weibull(rng, lo, hi, shape, mean_fraction):
    """Sample in ``[lo, hi]``: ``lo`` plus a Weibull tail, rejected above ``hi``.

    The scale puts the untruncated mean at ``mean_fraction`` of the span.
    """
    span = hi - lo
    if span <= 0:
        return lo
    scale = mean_fraction * span / math.gamma(1.0 + 1.0 / shape)
    while True:
        x = scale * rng.weibull(shape)
        if x <= span:
            return lo + x


def period_weights(asil):
    weights = tables.PERIOD_GIVEN_ASIL[asil]
    if not np.any(weights > 0):
        raise GenerationError(f"no runnable period is compatible with ASIL {asil.value}")
    return weights


def sample_swcs(config: GeneratorConfig, rng, n_swcs=None):
    """Draw software components and their runnables.

    Stops once ``config.n_runnables`` runnables exist, the last component
    trimmed to hit the count exactly, or after exactly ``n_swcs`` components
    when given.  Returns ``(swcs, runnables)``.
    """
    asils = tables.ALL_ASILS
    asil_w = [tables.SWC_ASIL_SHARE[a] for a in asils]
    sizes = list(range(1, len(config.swc_size_distribution) + 1))
    periods = tables.RUNNABLE_PERIODS
    swcs, runnables = [], []
    while (len(swcs) < n_swcs) if n_swcs is not None else (len(runnables) < config.n_runnables):
        sid = f"swc{len(swcs):04d}"
        asil = draw(rng, asils, asil_w)
        rom = rng.uniform(*tables.SWC_ROM_KB[asil])
        ram = rng.uniform(*tables.SWC_RAM_KB[asil])
        count = draw(rng, sizes, config.swc_size_distribution)
        if n_swcs is None:
            count = min(count, config.n_runnables - len(runnables))
        pw = period_weights(asil)
        ids = []
        for _ in range(count):
            period = draw(rng, periods, pw)
            lo, hi = tables.RUNNABLE_ROWS[period][:2]
            wcet = truncated_weibull(rng, lo, hi, config.wcet_shape,
                                     config.wcet_mean_fraction)
            rid = f"r{len(runnables):05d}"
            runnables.append(Runnable(rid, sid, period, wcet, asil))
            ids.append(rid)
        swcs.append(SwComponent(sid, asil, rom, ram, tuple(ids)))
    return swcs, runnables


def build_communication_graph(runnables, config: GeneratorConfig, rng):
    """Sender-receiver labels along communicating period pairs.

    Every runnable writes at least one label when some partner period is
    populated; each label's readers share one period.
    """
    if not runnables:
        raise GenerationError("no runnables to connect")
    by_period = defaultdict(list)
    for r in runnables:
        by_period[r.period_ms].append(r.id)
    period_of = {r.id: r.period_ms for r in runnables}
    ids = [r.id for r in runnables]
    n_labels = max(len(ids), round(config.labels_per_runnable * len(ids)))
    order = [ids[i] for i in rng.permutation(len(ids))]
    order += [ids[i] for i in rng.integers(0, len(ids), n_labels - len(ids))]

    labels = []
    for writer in order:
        p = period_of[writer]
        same = [x for x in by_period[p] if x != writer]
        other = [q for q in tables.COMMUNICATION[p] if q != p and by_period[q]]
        if same and (not other or rng.random() < config.comm_same_period_weight):
            pool = same
        elif other:
            q = draw(rng, other, [len(by_period[q]) for q in other])
            pool = by_period[q]
        else:
            continue
        k = min(int(rng.integers(1, config.max_readers + 1)), len(pool))
        readers = frozenset(pool[i] for i in rng.choice(len(pool), k, replace=False))
        labels.append(Label(f"l{len(labels):05d}", writer, readers,
                            config.label_size_bytes))
    return labels


def attach_labels(runnables, labels):
    reads, writes = defaultdict(set), defaultdict(set)
    for lbl in labels:
        writes[lbl.writer].add(lbl.id)
        for rd in lbl.readers:
            reads[rd].add(lbl.id)
    return [replace(r, reads=frozenset(reads[r.id]), writes=frozenset(writes[r.id]))
            for r in runnables]


def _choose_periods(rng, counts, by_period):
    """Ordered distinct periods, each step a communicating pair, each populated."""
    share = tables.RUNNABLE_PERIOD_SHARE
    chosen = []
    for need in counts:
        if chosen:
            cands = [q for q in tables.COMMUNICATION[chosen[-1]] if q not in chosen]
        else:
            cands = list(tables.RUNNABLE_PERIODS)
        cands = [q for q in cands if len(by_period.get(q, ())) >= need]
        if not cands:
            return None
        chosen.append(draw(rng, cands, [share[q] for q in cands]))
    return chosen


def _find_path(rng, profile, by_period, succ, affinity, budget=256):
    """Randomized bounded DFS for distinct runnables following ``profile``.

    Successors that could share a task with the current runnable (same SW-C,
    then same ASIL) are tried first, in random order within each class.
    """
    starts = by_period[profile[0]]
    start = starts[int(rng.integers(len(starts)))]
    path, seen = [start], {start}
    stack = [None]
    expansions = 0
    while path:
        if len(path) == len(profile):
            return path
        want = profile[len(path)]
        if stack[-1] is None:
            cur = path[-1]
            nxt = [x for x in succ[cur].get(want, ()) if x not in seen]
            nxt = [nxt[i] for i in rng.permutation(len(nxt))]
            # Popped from the end: best class last.
            stack[-1] = sorted(nxt, key=lambda x: -affinity(cur, x))
        if stack[-1] and expansions < budget:
            x = stack[-1].pop()
            expansions += 1
            path.append(x)
            seen.add(x)
            stack.append(None)
        else:
            if expansions >= budget:
                return None
            stack.pop()
            seen.discard(path.pop())
    return None


def build_chains(runnables, labels, config: GeneratorConfig, rng):
    n_patterns_keys = list(tables.CHAIN_PATTERN_SHARE)
    n_patterns_w = list(tables.CHAIN_PATTERN_SHARE.values())
    members_keys = list(tables.CHAIN_MEMBER_SHARE)
    members_w = list(tables.CHAIN_MEMBER_SHARE.values())
    by_period = defaultdict(list)
    period_of = {}
    for r in runnables:
        by_period[r.period_ms].append(r.id)
        period_of[r.id] = r.period_ms
    owner = {r.id: (r.swc_id, r.asil) for r in runnables}

    def affinity(a, b):
        (sa, aa), (sb, ab) = owner[a], owner[b]
        return 0 if sa == sb else 1 if aa == ab else 2

    succ = defaultdict(lambda: defaultdict(list))
    for lbl in labels:
        for rd in sorted(lbl.readers):
            if rd not in succ[lbl.writer][period_of[rd]]:
                succ[lbl.writer][period_of[rd]].append(rd)

    chains = []
    for c in range(config.n_chains):
        k = draw(rng, n_patterns_keys, n_patterns_w)
        counts = [draw(rng, members_keys, members_w) for _ in range(k)]
        factor = rng.uniform(*tables.AGE_FACTOR_RANGE)
        members = periods = None
        for _ in range(config.chain_period_retries):
            periods = _choose_periods(rng, counts, by_period)
            if periods is None:
                continue
            profile = [p for p, n in zip(periods, counts) for _ in range(n)]
            for _ in range(config.chain_retries):
                members = _find_path(rng, profile, by_period, succ, affinity)
                if members:
                    break
            if members:
                break
        if not members:
            where = (f"period set {periods}" if periods else
                     "any communicating period set with enough runnables")
            raise GenerationError(f"chain c{c:04d}: no runnable sequence for "
                                  f"{counts} members over {where}")
        chains.append(CauseEffectChain.build(f"c{c:04d}", members, periods, factor))
    return chains


def make_cores(config: GeneratorConfig, rng):
    flags = config.lockstep_flags or (False,) * config.n_cores
    return [Core(f"core{i}", config.core_rom_kb, config.core_ram_kb,
                 rng.uniform(*tables.BSW_ROM_KB), bool(flags[i]))
            for i in range(config.n_cores)]


def generate_bsw_taskset(config: GeneratorConfig, cores, rng, max_draws=10_000):
    periods = list(tables.BSW_TASK_ROWS)
    shares = [row[2] for row in tables.BSW_TASK_ROWS.values()]
    target = config.bsw_target_utilization_per_core
    tasks = []
    for core in cores:
        util = 0.0
        draws = 0
        while util < target:
            if draws >= max_draws:
                raise GenerationError(f"{core.id}: BSW utilization target {target} "
                                      f"not reached after {max_draws} tasks")
            period = draw(rng, periods, shares)
            lo, hi, _, asils = tables.BSW_TASK_ROWS[period]
            wcet = rng.uniform(lo, hi)
            asil = asils[int(rng.integers(len(asils)))]
            count = int(rng.integers(1, tables.BSW_MAX_RUNNABLES + 1))
            tasks.append(BswTask(f"bsw{len(tasks):04d}", period, wcet, asil,
                                 count, core.id))
            util += wcet / (period * 1000)
            draws += 1
    return tasks


def stage_rngs(seed, n=4):
    """Independent generators per stage so that stages do not perturb each other."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def generate_system(config: GeneratorConfig) -> SystemModel:
    """Sample a complete application and BSW workload; a pure function of ``config``."""
    config.validate()
    rng_swc, rng_comm, rng_chain, rng_bsw = stage_rngs(config.seed)
    stage = "sample_swcs"
    try:
        swcs, runnables = sample_swcs(config, rng_swc)
        stage = "build_communication_graph"
        labels = build_communication_graph(runnables, config, rng_comm)
        runnables = attach_labels(runnables, labels)
        stage = "build_chains"
        chains = build_chains(runnables, labels, config, rng_chain)
        stage = "generate_bsw_taskset"
        cores = make_cores(config, rng_bsw)
        bsw_tasks = generate_bsw_taskset(config, cores, rng_bsw)
    except GenerationError as exc:
        raise GenerationError(f"{stage}: {exc}") from exc
    return SystemModel(swcs=tuple(swcs), runnables=tuple(runnables),
                       labels=tuple(labels), chains=tuple(chains),
                       bsw_tasks=tuple(bsw_tasks), cores=tuple(cores),
                       seed=config.seed, config_digest=config.digest)


