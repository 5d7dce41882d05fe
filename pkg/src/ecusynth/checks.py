"""Field-level invariant checks over a whole :class:`SystemModel`.

``check_model`` never raises on bad data; each violated invariant becomes a
:class:`Finding`.  A generator output must come back with an empty list.
"""

import math

from . import tables
from .model import Finding, US_PER_MS, hyperperiod

# Relative slack for comparisons of derived floating-point quantities.
REL_TOL = 1e-9


def _in(value, bounds):
    lo, hi = bounds
    return lo <= value <= hi


def _check_swcs(system):
    runnables = system.runnable_by_id
    for s in system.swcs:
        if not _in(s.rom_kb, tables.SWC_ROM_KB[s.asil]):
            yield Finding("range-swc-rom", s.id, f"ROM {s.rom_kb} kB outside "
                          f"{tables.SWC_ROM_KB[s.asil]} for ASIL {s.asil.value}")
        if not _in(s.ram_kb, tables.SWC_RAM_KB[s.asil]):
            yield Finding("range-swc-ram", s.id, f"RAM {s.ram_kb} kB outside "
                          f"{tables.SWC_RAM_KB[s.asil]} for ASIL {s.asil.value}")
        if not s.runnable_ids:
            yield Finding("swc-empty", s.id, "software component has no runnables")
        for rid in s.runnable_ids:
            r = runnables.get(rid)
            if r is None:
                yield Finding("dangling-ref", s.id, f"unknown runnable {rid}")
            elif r.asil != s.asil or r.swc_id != s.id:
                yield Finding("swc-asil", rid, f"runnable does not carry the "
                              f"ASIL/owner of {s.id}")


def _check_runnables(system):
    for r in system.runnables:
        row = tables.RUNNABLE_ROWS.get(r.period_ms)
        if row is None:
            yield Finding("range-runnable-period", r.id,
                          f"period {r.period_ms} ms not in the runnable table")
            continue
        lo, hi, _, asils = row
        if not lo <= r.wcet_us <= hi:
            yield Finding("range-runnable-wcet", r.id, f"WCET {r.wcet_us} us "
                          f"outside [{lo}, {hi}] for {r.period_ms} ms")
        if r.wcet_us >= r.period_ms * US_PER_MS:
            yield Finding("range-runnable-wcet", r.id, "WCET exceeds period")
        if r.asil not in asils:
            yield Finding("runnable-asil-period", r.id, f"ASIL {r.asil.value} "
                          f"not allowed at {r.period_ms} ms")
        if r.swc_id not in system.swc_by_id:
            yield Finding("dangling-ref", r.id, f"unknown SW-C {r.swc_id}")


def _check_labels(system):
    runnables = system.runnable_by_id
    for lbl in system.labels:
        if not lbl.readers:
            yield Finding("label-readers", lbl.id, "label has no reader")
        if lbl.writer in lbl.readers:
            yield Finding("label-self-loop", lbl.id, "writer also reads the label")
        w = runnables.get(lbl.writer)
        if w is None:
            yield Finding("dangling-ref", lbl.id, f"unknown writer {lbl.writer}")
            continue
        for rid in sorted(lbl.readers):
            rd = runnables.get(rid)
            if rd is None:
                yield Finding("dangling-ref", lbl.id, f"unknown reader {rid}")
            elif not tables.communicates(w.period_ms, rd.period_ms):
                yield Finding("label-period-pair", lbl.id, f"{w.period_ms} ms -> "
                              f"{rd.period_ms} ms is not a communicating pair")


def _check_chains(system):
    runnables = system.runnable_by_id
    edges = {(lbl.writer, rd) for lbl in system.labels for rd in lbl.readers}
    for ch in system.chains:
        if not 1 <= len(ch.patterns) <= 3:
            yield Finding("chain-patterns", ch.id,
                          f"{len(ch.patterns)} activation patterns")
        if not tables.CHAIN_MIN_MEMBERS <= len(ch.members) <= tables.CHAIN_MAX_MEMBERS:
            yield Finding("chain-members", ch.id, f"{len(ch.members)} members")
        missing = [m for m in ch.members if m not in runnables]
        if missing:
            yield Finding("dangling-ref", ch.id, f"unknown members {missing}")
            continue
        periods = {runnables[m].period_ms for m in ch.members}
        if periods != set(ch.patterns):
            yield Finding("chain-patterns", ch.id, f"member periods "
                          f"{sorted(periods)} != patterns {sorted(ch.patterns)}")
        for a, b in zip(ch.members, ch.members[1:]):
            if (a, b) not in edges:
                yield Finding("chain-link", ch.id, f"no label {a} -> {b}")
        if ch.patterns and ch.hyperperiod_ms != hyperperiod(ch.patterns):
            yield Finding("chain-hyperperiod", ch.id, "hyperperiod is not the LCM")
        if not _in(ch.age_factor, tables.AGE_FACTOR_RANGE):
            yield Finding("age-factor-range", ch.id, f"age factor {ch.age_factor}"
                          f" outside {tables.AGE_FACTOR_RANGE}")
        expected = ch.age_factor * ch.hyperperiod_ms * US_PER_MS
        if not math.isclose(ch.age_constraint_us, expected, rel_tol=REL_TOL):
            yield Finding("chain-age-constraint", ch.id,
                          "age constraint != factor x hyperperiod")


def _check_tasks(system):
    runnables = system.runnable_by_id
    for t in system.tasks:
        members = [runnables[r] for r in t.runnable_ids if r in runnables]
        if len(members) != len(t.runnable_ids):
            yield Finding("dangling-ref", t.id, "task references unknown runnables")
        if not t.runnable_ids:
            yield Finding("task-empty", t.id, "task has no runnables")
            continue
        if any(r.asil != t.asil for r in members):
            found = sorted({r.asil.value for r in members})
            yield Finding("R2-sil-mix", t.id, f"task mixes ASILs {found}")
        if any(r.period_ms != t.period_ms for r in members):
            yield Finding("task-period", t.id, "member periods differ from task")
        base = sum(r.wcet_us for r in members)
        if not math.isclose(base, t.base_wcet_us, rel_tol=REL_TOL):
            yield Finding("task-wcet", t.id, "base WCET != sum of member WCETs")
        if not math.isclose(t.extended_wcet_us, t.base_wcet_us * (1 + t.bsw_ratio),
                            rel_tol=REL_TOL):
            yield Finding("task-wcet", t.id, "extended WCET != base x (1 + ratio)")
        bucket = tables.bsw_ratio_bucket(len(t.runnable_ids))
        if not _in(t.bsw_ratio, tables.BSW_RATIO[bucket]):
            yield Finding("R4-bsw-ratio", t.id, f"BSW ratio {t.bsw_ratio} outside "
                          f"{tables.BSW_RATIO[bucket]} for {len(t.runnable_ids)} "
                          "runnables")


def _check_bsw_tasks(system):
    for t in system.bsw_tasks:
        row = tables.BSW_TASK_ROWS.get(t.period_ms)
        if row is None:
            yield Finding("range-bsw-period", t.id,
                          f"period {t.period_ms} ms not in the BSW task table")
            continue
        lo, hi, _, asils = row
        if not lo <= t.wcet_us <= hi:
            yield Finding("range-bsw-wcet", t.id, f"WCET {t.wcet_us} us outside "
                          f"[{lo}, {hi}]")
        if t.asil not in asils:
            yield Finding("bsw-asil-period", t.id, f"ASIL {t.asil.value} not "
                          f"allowed at {t.period_ms} ms")
        if not 1 <= t.bsw_runnable_count <= tables.BSW_MAX_RUNNABLES:
            yield Finding("range-bsw-runnables", t.id,
                          f"{t.bsw_runnable_count} BSW runnables")
        if t.core_id is not None and t.core_id not in system.core_by_id:
            yield Finding("dangling-ref", t.id, f"unknown core {t.core_id}")


def _check_cores(system):
    for c in system.cores:
        if not _in(c.bsw_rom_kb, tables.BSW_ROM_KB):
            yield Finding("R4-bsw-rom", c.id, f"BSW ROM reserve {c.bsw_rom_kb} kB "
                          f"outside {tables.BSW_ROM_KB}")
        if c.bsw_rom_kb >= c.rom_capacity_kb:
            yield Finding("core-rom-reserve", c.id,
                          "BSW ROM reserve does not fit the core ROM")


def check_model(system):
    """Return every field-level invariant violation found in ``system``."""
    findings = []
    for check in (_check_swcs, _check_runnables, _check_labels, _check_chains,
                  _check_tasks, _check_bsw_tasks, _check_cores):
        findings.extend(check(system))
    return findings
