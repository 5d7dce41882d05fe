"""
From runnables to tasks on cores
================================

Cluster runnables into periodic tasks (one period and one ASIL per task),
extend each task with its BSW overhead, place everything on cores and
assign rate-monotonic priorities.
"""

from collections import Counter

from ecusynth import GeneratorConfig, build_system

system, allocation = build_system(GeneratorConfig())
print("feasible allocation:", allocation.feasible)

sizes = Counter(len(t.runnable_ids) for t in system.tasks)
print("runnables per task:", dict(sorted(sizes.items())))

t = max(system.tasks, key=lambda t: t.extended_wcet_us)
print(f"{t.id}: {len(t.runnable_ids)} runnables, {t.period_ms} ms, ASIL {t.asil.value}, "
      f"base {t.base_wcet_us:.0f} us + {t.bsw_ratio:.0%} BSW = {t.extended_wcet_us:.0f} us")

for core in system.cores:
    tasks = system.core_tasks(core.id)
    util = sum(x.cost_us / x.period_us for x in tasks)
    swcs = sum(s.core_id == core.id for s in system.swcs)
    print(f"{core.id}: {len(tasks):2d} tasks, {swcs:2d} SW-Cs, utilization {util:.2f}")
