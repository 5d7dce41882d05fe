"""Domain types of a synthetic ECU system and elementary derived quantities.

Periods are integer milliseconds; WCETs, response times and ages are
microseconds; memory is kB.  Every type is immutable, updates go through
:func:`dataclasses.replace`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, NamedTuple, Optional

US_PER_MS = 1000


class Asil(str, Enum):
    QM = "QM"
    A = "A"
    B = "B"
    C = "C"
    D = "D"

    @property
    def rank(self) -> int:
        # Reporting order only; colocation never compares levels.
        return ("QM", "A", "B", "C", "D").index(self.value)


@dataclass(frozen=True)
class Runnable:
    id: str
    swc_id: str
    period_ms: int
    wcet_us: float
    asil: Asil
    reads: frozenset = frozenset()
    writes: frozenset = frozenset()


@dataclass(frozen=True)
class SwComponent:
    id: str
    asil: Asil
    rom_kb: float
    ram_kb: float
    runnable_ids: tuple
    core_id: Optional[str] = None


@dataclass(frozen=True)
class Label:
    id: str
    writer: str
    readers: frozenset
    size_bytes: int = 4


@dataclass(frozen=True)
class CauseEffectChain:
    id: str
    members: tuple
    patterns: frozenset
    hyperperiod_ms: int
    age_constraint_us: float
    age_factor: float

    @classmethod
    def build(cls, id, members, patterns, age_factor):
        patterns = frozenset(patterns)
        hp = hyperperiod(patterns)
        return cls(id=id, members=tuple(members), patterns=patterns,
                   hyperperiod_ms=hp,
                   age_constraint_us=age_factor * hp * US_PER_MS,
                   age_factor=age_factor)


@dataclass(frozen=True)
class Task:
    id: str
    period_ms: int
    asil: Asil
    runnable_ids: tuple
    base_wcet_us: float
    bsw_ratio: float = 0.0
    extended_wcet_us: float = 0.0
    priority: Optional[int] = None
    core_id: Optional[str] = None

    is_bsw = False

    @property
    def cost_us(self) -> float:
        return self.extended_wcet_us

    @property
    def period_us(self) -> int:
        return self.period_ms * US_PER_MS


@dataclass(frozen=True)
class BswTask:
    id: str
    period_ms: int
    wcet_us: float
    asil: Asil
    bsw_runnable_count: int
    core_id: Optional[str] = None
    priority: Optional[int] = None

    is_bsw = True

    @property
    def cost_us(self) -> float:
        return self.wcet_us

    @property
    def period_us(self) -> int:
        return self.period_ms * US_PER_MS


@dataclass(frozen=True)
class Core:
    id: str
    rom_capacity_kb: float
    ram_capacity_kb: float
    bsw_rom_kb: float
    lockstep: bool = False


@dataclass(frozen=True)
class Finding:
    """One violated requirement or invariant; ``code`` is machine-readable."""

    code: str
    entity: str
    message: str


@dataclass(frozen=True)
class SystemModel:
    swcs: tuple = ()
    runnables: tuple = ()
    labels: tuple = ()
    chains: tuple = ()
    tasks: tuple = ()
    bsw_tasks: tuple = ()
    cores: tuple = ()
    seed: int = 0
    config_digest: str = ""

    @cached_property
    def runnable_by_id(self) -> dict:
        return {r.id: r for r in self.runnables}

    @cached_property
    def swc_by_id(self) -> dict:
        return {s.id: s for s in self.swcs}

    @cached_property
    def task_by_id(self) -> dict:
        return {t.id: t for t in self.tasks}

    @cached_property
    def core_by_id(self) -> dict:
        return {c.id: c for c in self.cores}

    @cached_property
    def task_of_runnable(self) -> dict:
        """Runnable id -> id of the first task containing it."""
        owner = {}
        for t in self.tasks:
            for rid in t.runnable_ids:
                owner.setdefault(rid, t.id)
        return owner

    def core_tasks(self, core_id) -> list:
        """Application and BSW tasks mapped to ``core_id``."""
        return ([t for t in self.tasks if t.core_id == core_id]
                + [t for t in self.bsw_tasks if t.core_id == core_id])


def hyperperiod(periods: Iterable[int]) -> int:
    periods = list(periods)
    if not periods:
        raise ValueError("empty period set")
    if any(int(p) != p or p <= 0 for p in periods):
        raise ValueError(f"periods must be positive integers, got {periods}")
    return math.lcm(*(int(p) for p in periods))


def core_utilization(tasks) -> float:
    """Sum of cost/period; application tasks count with their extended WCET."""
    return sum(t.cost_us / t.period_us for t in tasks)


class MemoryUsage(NamedTuple):
    rom_used_kb: float
    ram_used_kb: float
    rom_free_kb: float
    ram_free_kb: float


def memory_usage(core: Core, swcs) -> MemoryUsage:
    # Negative free values flag overload; the caller decides what to do.
    rom = core.bsw_rom_kb + sum(s.rom_kb for s in swcs)
    ram = sum(s.ram_kb for s in swcs)
    return MemoryUsage(rom, ram, core.rom_capacity_kb - rom,
                       core.ram_capacity_kb - ram)
