"""Empirical shares and range conformance of a system against the built-in
workload tables.  Share deviations are in percentage points."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from . import tables


@dataclass(frozen=True)
class FidelityRow:
    table: str
    category: str
    kind: str  # "share" or "range"
    target: object
    empirical: object
    deviation: float | None = None
    out_of_range: int = 0


@dataclass
class FidelityReport:
    rows: list = field(default_factory=list)

    @property
    def worst_deviation(self):
        devs = [r.deviation for r in self.rows if r.deviation is not None]
        return max(devs, default=0.0)

    def worst_in(self, table):
        devs = [r.deviation for r in self.rows
                if r.table == table and r.deviation is not None]
        return max(devs, default=0.0)

    @property
    def out_of_range(self):
        return sum(r.out_of_range for r in self.rows)

    def table(self, name):
        return [r for r in self.rows if r.table == name]


def _shares(table, label, counts, targets):
    total = sum(counts.values())
    for key, target in targets.items():
        if total:
            emp = counts.get(key, 0) / total
            yield FidelityRow(table, f"{label}={key}", "share", target, emp,
                              abs(emp - target) * 100.0)
        else:
            yield FidelityRow(table, f"{label}={key}", "share", target, None)


def _ranges(table, category, values, bounds):
    lo, hi = bounds
    values = list(values)
    bad = sum(1 for v in values if not lo <= v <= hi)
    observed = (min(values), max(values)) if values else None
    return FidelityRow(table, category, "range", bounds, observed, None, bad)


def fidelity_report(system) -> FidelityReport:
    rows = []
    swcs = system.swcs
    rows += _shares("swc", "asil", Counter(s.asil.value for s in swcs),
                    {a.value: p for a, p in tables.SWC_ASIL_SHARE.items()})
    for a in tables.ALL_ASILS:
        mine = [s for s in swcs if s.asil == a]
        rows.append(_ranges("swc", f"rom_kb[{a.value}]", (s.rom_kb for s in mine),
                            tables.SWC_ROM_KB[a]))
        rows.append(_ranges("swc", f"ram_kb[{a.value}]", (s.ram_kb for s in mine),
                            tables.SWC_RAM_KB[a]))

    runnables = system.runnables
    rows += _shares("runnable", "period_ms", Counter(r.period_ms for r in runnables),
                    tables.RUNNABLE_PERIOD_SHARE)
    for p, (lo, hi, _, asils) in tables.RUNNABLE_ROWS.items():
        mine = [r for r in runnables if r.period_ms == p]
        rows.append(_ranges("runnable", f"wcet_us[{p}]", (r.wcet_us for r in mine),
                            (lo, hi)))
    incompatible = sum(1 for r in runnables
                       if r.period_ms not in tables.RUNNABLE_ROWS
                       or r.asil not in tables.RUNNABLE_ROWS[r.period_ms][3])
    rows.append(FidelityRow("runnable", "asil_period_compatibility", "range",
                            "allowed ASIL set per period", None, None, incompatible))

    by_id = system.runnable_by_id
    pattern_counts = Counter(len(c.patterns) for c in system.chains)
    per_pattern = Counter()
    for c in system.chains:
        per_pattern.update(Counter(by_id[m].period_ms for m in c.members
                                   if m in by_id).values())
    rows += _shares("chain", "patterns", pattern_counts, tables.CHAIN_PATTERN_SHARE)
    rows += _shares("chain", "members_per_pattern", per_pattern,
                    tables.CHAIN_MEMBER_SHARE)
    rows.append(_ranges("chain", "members", (len(c.members) for c in system.chains),
                        (tables.CHAIN_MIN_MEMBERS, tables.CHAIN_MAX_MEMBERS)))
    rows.append(_ranges("chain", "age_factor", (c.age_factor for c in system.chains),
                        tables.AGE_FACTOR_RANGE))

    for bucket, bounds in tables.BSW_RATIO.items():
        mine = [t.bsw_ratio for t in system.tasks
                if tables.bsw_ratio_bucket(len(t.runnable_ids)) == bucket]
        name = f"bsw_ratio[{'>=6' if bucket == 6 else bucket}]"
        rows.append(_ranges("bsw_ratio", name, mine, bounds))

    bsw = system.bsw_tasks
    rows += _shares("bsw_task", "period_ms", Counter(t.period_ms for t in bsw),
                    {p: row[2] for p, row in tables.BSW_TASK_ROWS.items()})
    for p, (lo, hi, _, asils) in tables.BSW_TASK_ROWS.items():
        mine = [t for t in bsw if t.period_ms == p]
        rows.append(_ranges("bsw_task", f"wcet_us[{p}]", (t.wcet_us for t in mine),
                            (lo, hi)))
    bad_asil = sum(1 for t in bsw if t.period_ms not in tables.BSW_TASK_ROWS
                   or t.asil not in tables.BSW_TASK_ROWS[t.period_ms][3])
    rows.append(FidelityRow("bsw_task", "asil_period_compatibility", "range",
                            "allowed ASIL set per period", None, None, bad_asil))
    rows.append(_ranges("bsw_task", "bsw_rom_kb", (c.bsw_rom_kb for c in system.cores),
                        tables.BSW_ROM_KB))
    return FidelityReport(rows)


def fidelity_to_dict(report: FidelityReport) -> dict:
    def plain(v):
        return list(v) if isinstance(v, tuple) else v

    return {
        "worst_deviation": report.worst_deviation,
        "out_of_range": report.out_of_range,
        "rows": [{"table": r.table, "category": r.category, "kind": r.kind,
                  "target": plain(r.target), "empirical": plain(r.empirical),
                  "deviation": r.deviation, "out_of_range": r.out_of_range}
                 for r in report.rows],
    }
