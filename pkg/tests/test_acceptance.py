"""Acceptance criteria 1-8.

Each test records one PASS/FAIL line; the lines are repeated in the pytest
terminal summary, and ``python tests/test_acceptance.py`` prints them directly.
"""

import json
import math
import time
from collections import Counter

import numpy as np
import pytest

from ecusynth import tables
from ecusynth.analysis import (analyze_system, response_time_analysis,
                               simulate_hyperperiod, validate_requirements)
from ecusynth.cli import main as cli_main
from ecusynth.config import GeneratorConfig
from ecusynth.generator import GenerationError, generate_system, sample_swcs, stage_rngs
from ecusynth.model import Asil, Task, hyperperiod
from ecusynth.pipeline import build_system
from ecusynth.serialize import SchemaError, deserialize_system, load_report
from ecusynth.synthesis import assign_priorities

from helpers import PLANTED, base_system, planted_system

SEED = 1
RESULTS = {}


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def worst_share_gap(counts, targets):
    total = sum(counts.values())
    return max(abs(counts.get(k, 0) / total - v) * 100 for k, v in targets.items())


def test_criterion_1_swc_distribution():
    t0 = time.perf_counter()
    rng = stage_rngs(SEED)[0]
    swcs, _ = sample_swcs(GeneratorConfig(seed=SEED), rng, n_swcs=10_000)
    elapsed = time.perf_counter() - t0
    gap = worst_share_gap(Counter(s.asil for s in swcs), tables.SWC_ASIL_SHARE)
    bad = sum(not (tables.SWC_ROM_KB[s.asil][0] <= s.rom_kb <= tables.SWC_ROM_KB[s.asil][1])
              or not (tables.SWC_RAM_KB[s.asil][0] <= s.ram_kb <= tables.SWC_RAM_KB[s.asil][1])
              for s in swcs)
    ok = len(swcs) == 10_000 and gap <= 2.0 and bad == 0 and elapsed < 10
    record(1, ok, f"{len(swcs)} SW-Cs, worst ASIL share gap {gap:.2f} pts (<= 2), "
                  f"{bad} ROM/RAM out of range, {elapsed:.2f} s (< 10)")


def test_criterion_2_runnable_distribution():
    t0 = time.perf_counter()
    cfg = GeneratorConfig(seed=SEED, n_runnables=10_000)
    _, runnables = sample_swcs(cfg, stage_rngs(SEED)[0])
    elapsed = time.perf_counter() - t0
    gap = worst_share_gap(Counter(r.period_ms for r in runnables),
                          tables.RUNNABLE_PERIOD_SHARE)
    out = sum(not (tables.RUNNABLE_ROWS[r.period_ms][0] <= r.wcet_us
                   <= tables.RUNNABLE_ROWS[r.period_ms][1]) for r in runnables)
    incompatible = sum(r.asil not in tables.RUNNABLE_ROWS[r.period_ms][3]
                       for r in runnables)
    ok = (len(runnables) == 10_000 and gap <= 2.0 and out == 0 and incompatible == 0
          and elapsed < 10)
    record(2, ok, f"{len(runnables)} runnables, worst period share gap {gap:.2f} pts "
                  f"(<= 2), {out} WCETs out of bucket, {incompatible} ASIL/period "
                  f"incompatible, {elapsed:.2f} s (< 10)")


def test_criterion_3_chain_conformance():
    cfg = GeneratorConfig(seed=SEED, n_runnables=10_000, n_chains=1000,
                          bsw_target_utilization_per_core=0.0)
    system = generate_system(cfg)
    chains = system.chains
    by_id = system.runnable_by_id
    pattern_gap = worst_share_gap(Counter(len(c.patterns) for c in chains),
                                  tables.CHAIN_PATTERN_SHARE)
    per_pattern = Counter()
    for c in chains:
        per_pattern.update(Counter(by_id[m].period_ms for m in c.members).values())
    member_gap = worst_share_gap(per_pattern, tables.CHAIN_MEMBER_SHARE)
    sizes_ok = all(2 <= len(c.members) <= 18 for c in chains)
    factors_ok = all(1.8 <= c.age_factor <= 4.9 for c in chains)
    ok = (len(chains) == 1000 and pattern_gap <= 3.0 and member_gap <= 3.0
          and sizes_ok and factors_ok)
    record(3, ok, f"{len(chains)} chains, pattern share gap {pattern_gap:.2f} pts, "
                  f"members-per-pattern gap {member_gap:.2f} pts (<= 3), sizes in "
                  f"[2, 18]: {sizes_ok}, age factors in [1.8, 4.9]: {factors_ok}")


def test_criterion_4_bsw_conformance():
    n_tasks = n_bsw = n_cores = 0
    bad = []
    for seed in range(SEED, SEED + 10):
        cfg = GeneratorConfig(seed=seed, n_runnables=200, n_chains=0,
                              bsw_target_utilization_per_core=0.1)
        system, _ = build_system(cfg)
        for t in system.tasks:
            lo, hi = tables.BSW_RATIO[tables.bsw_ratio_bucket(len(t.runnable_ids))]
            if not lo <= t.bsw_ratio <= hi:
                bad.append(t.id)
        for b in system.bsw_tasks:
            lo, hi, _, asils = tables.BSW_TASK_ROWS[b.period_ms]
            if not lo <= b.wcet_us <= hi or b.asil not in asils:
                bad.append(b.id)
        for c in system.cores:
            if not 634 <= c.bsw_rom_kb <= 1258:
                bad.append(c.id)
        n_tasks += len(system.tasks)
        n_bsw += len(system.bsw_tasks)
        n_cores += len(system.cores)
    ok = not bad and n_tasks and n_bsw
    record(4, ok, f"{n_tasks} tasks, {n_bsw} BSW tasks, {n_cores} cores over 10 "
                  f"systems, {len(bad)} nonconforming")


PERIODS_MS = (1, 2, 5, 10, 20, 50, 100, 200, 500, 1000)


def random_task_set(rng):
    n = int(rng.integers(1, 7))
    periods = rng.choice(PERIODS_MS, size=n)
    target = rng.uniform(0.05, 0.95)
    # UUniFast split of the target utilization.
    utils, rest = [], target
    for i in range(1, n):
        nxt = rest * rng.random() ** (1.0 / (n - i))
        utils.append(rest - nxt)
        rest = nxt
    utils.append(rest)
    tasks = []
    for i, (p, u) in enumerate(zip(periods, utils)):
        c = max(1, math.floor(u * p * 1000))
        tasks.append(Task(f"t{i}", int(p), Asil.QM, (f"r{i}",), float(c), 0.0, float(c)))
    if rng.random() < 0.5:
        return assign_priorities(tasks)
    order = rng.permutation(n)
    return [Task(**{**t.__dict__, "priority": int(order[i]) + 1})
            for i, t in enumerate(tasks)]


def test_criterion_5_rta_exactness():
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    sets = tasks_compared = 0
    mismatches = []
    while sets < 1000:
        tasks = random_task_set(rng)
        util = sum(t.cost_us / t.period_us for t in tasks)
        if util >= 0.95 or hyperperiod(t.period_ms for t in tasks) > 1000:
            continue
        rta = response_time_analysis(tasks)
        sim = simulate_hyperperiod(tasks)
        for t in tasks:
            r = rta.response_us[t.id]
            observed = sim.worst_response_us[t.id]
            if r is None:
                # Unschedulable by RTA: the critical-instant job must miss.
                if not any(j.task_id == t.id for j in sim.deadline_misses):
                    mismatches.append((sets, t.id, None, observed))
            elif r != observed:
                mismatches.append((sets, t.id, r, observed))
            tasks_compared += 1
        sets += 1
    elapsed = time.perf_counter() - t0
    ok = not mismatches and elapsed < 60
    record(5, ok, f"{sets} task sets, {tasks_compared} tasks, {len(mismatches)} "
                  f"RTA/simulation mismatches, {elapsed:.1f} s (< 60)")


@pytest.mark.slow
def test_criterion_6_age_bound_dominance():
    systems = chains = 0
    counterexamples = []
    seed = 0
    while systems < 200:
        seed += 1
        cfg = GeneratorConfig(seed=seed, n_runnables=20, n_chains=2, n_cores=3)
        try:
            system, alloc = build_system(cfg)
        except GenerationError:
            continue
        if not alloc.feasible:
            continue
        report = analyze_system(system)
        measured = [a for a in report.ages if a.bound_us is not None]
        if not measured:
            continue
        for a in measured:
            if a.measured_max_us > a.bound_us:
                counterexamples.append((seed, a.chain_id, a.measured_max_us, a.bound_us))
        systems += 1
        chains += len(measured)
    ok = not counterexamples
    record(6, ok, f"{systems} systems, {chains} chains measured, "
                  f"{len(counterexamples)} with measured age above the bound")


def test_criterion_7_requirement_validator():
    base = validate_requirements(base_system())
    wrong = [] if not base else [("clean base", base)]
    for name, (_, code, entity) in PLANTED.items():
        found = [(f.code, f.entity) for f in validate_requirements(planted_system(name))]
        if found != [(code, entity)]:
            wrong.append((name, found))
    ok = not wrong
    record(7, ok, f"{len(PLANTED)} planted fixtures, clean base "
                  f"{'clean' if not base else 'NOT clean'}, {len(wrong)} unexpected "
                  f"finding sets {wrong if wrong else ''}".rstrip())


def test_criterion_8_determinism(tmp_path, monkeypatch):
    monkeypatch.delenv("ECUSYNTH_OUT_DIR", raising=False)
    cfg = tmp_path / "cfg.toml"
    cfg.write_text("seed = 1\nn_runnables = 60\n")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    codes = [cli_main(["generate", "--config", str(cfg), "--out", str(p)]) for p in (a, b)]
    same = a.read_bytes() == b.read_bytes()
    system = deserialize_system(a.read_text())
    raw = json.loads(a.read_text())
    load_report(a.read_text(), "ecusynth/system")  # verifies the content digest
    tampered = a.read_text().replace('"period_ms": 5', '"period_ms": 10', 1)
    try:
        deserialize_system(tampered)
        caught = False
    except SchemaError:
        caught = True
    caught = caught and tampered != a.read_text()
    ok = (codes == [0, 0] and same and system.seed == 1 and len(raw["content_digest"]) == 64
          and raw["config_digest"] == GeneratorConfig(seed=1).digest and caught)
    record(8, ok, f"exit codes {codes}, byte-identical: {same}, digests embedded and "
                  f"verified, tampering detected: {caught}")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
