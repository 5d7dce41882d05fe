"""Hand-built systems for validator and analysis tests."""

from dataclasses import replace

from ecusynth.model import (Asil, BswTask, CauseEffectChain, Core, Label, Runnable,
                            SwComponent, SystemModel, Task)

B, D, QM = Asil.B, Asil.D, Asil.QM


def task(id, period_ms, asil, runnables, ratio, priority, core="core0"):
    base = sum(r.wcet_us for r in runnables)
    return Task(id, period_ms, asil, tuple(r.id for r in runnables), base, ratio,
                base * (1 + ratio), priority, core)


def base_parts():
    r1 = Runnable("r1", "s1", 10, 200.0, B, frozenset(), frozenset({"l1"}))
    r2 = Runnable("r2", "s1", 10, 300.0, B, frozenset({"l1"}), frozenset({"l2"}))
    r3 = Runnable("r3", "s2", 20, 400.0, D, frozenset({"l2"}))
    return dict(
        runnables=[r1, r2, r3],
        swcs=[SwComponent("s1", B, 100.0, 10.0, ("r1", "r2"), "core0"),
              SwComponent("s2", D, 50.0, 5.0, ("r3",), "core0")],
        labels=[Label("l1", "r1", frozenset({"r2"})),
                Label("l2", "r2", frozenset({"r3"}))],
        chains=[CauseEffectChain.build("c1", ("r1", "r2", "r3"), {10, 20}, 2.2)],
        tasks=[task("t1", 10, B, [r1, r2], 0.2, 3),
               task("t2", 20, D, [r3], 0.3, 1)],
        bsw_tasks=[BswTask("bsw0", 10, 100.0, QM, 10, "core0", 2)],
        cores=[Core("core0", 4096.0, 512.0, 800.0)],
    )


def assemble(parts):
    return SystemModel(**{k: tuple(v) for k, v in parts.items()})


def base_system():
    """Clean system: one core, two tasks, one BSW task, a three-member chain.

    t1 (10 ms) R = 600, bsw0 R = 700, t2 (20 ms) R = 1220 us; the chain visits
    t1 then t2 so its bound is 10600 + 21220 = 31820 us against 44000 us.
    """
    return assemble(base_parts())


def _unassigned_runnable(p):
    r4 = Runnable("r4", "s2", 10, 100.0, D)
    p["runnables"].append(r4)
    p["swcs"][1] = replace(p["swcs"][1], runnable_ids=("r3", "r4"))


def _sil_mix(p):
    r5 = Runnable("r5", "s3", 10, 150.0, D)
    p["runnables"].append(r5)
    p["swcs"].append(SwComponent("s3", D, 30.0, 2.0, ("r5",), "core0"))
    r1, r2 = p["runnables"][:2]
    p["tasks"][0] = task("t1", 10, B, [r1, r2, r5], 0.2, 3)


def _chain_order(p):
    r1, r2 = p["runnables"][:2]
    p["tasks"][0] = task("t1", 10, B, [r2, r1], 0.2, 3)


def _colocation(p):
    p["cores"].append(Core("core1", 4096.0, 512.0, 700.0))
    p["tasks"][1] = replace(p["tasks"][1], core_id="core1")


def _memory(p):
    p["cores"][0] = replace(p["cores"][0], rom_capacity_kb=900.0)


def _ratio_bucket(p):
    r3 = p["runnables"][2]
    p["tasks"][1] = task("t2", 20, D, [r3], 0.6, 1)


def _age_factor(p):
    p["chains"][0] = CauseEffectChain.build("c1", ("r1", "r2", "r3"), {10, 20}, 5.0)


def _age_bound(p):
    # Splitting t1 adds a visit; at factor 1.8 the bound no longer fits.
    r1, r2, r3 = p["runnables"]
    p["tasks"] = [task("t1a", 10, B, [r1], 0.3, 4), task("t1b", 10, B, [r2], 0.3, 3),
                  task("t2", 20, D, [r3], 0.3, 1)]
    p["chains"][0] = CauseEffectChain.build("c1", ("r1", "r2", "r3"), {10, 20}, 1.8)


# name -> (mutation, expected finding code, expected entity)
PLANTED = {
    "R1 partition": (_unassigned_runnable, "R1-partition", "r4"),
    "R2 SIL mix": (_sil_mix, "R2-sil-mix", "t1"),
    "R2 chain order": (_chain_order, "R2-chain-order", "c1"),
    "R3 colocation": (_colocation, "R3-colocation", "s2"),
    "R3 memory": (_memory, "R3-memory", "core0"),
    "R4 ratio bucket": (_ratio_bucket, "R4-bsw-ratio", "t2"),
    "age-factor range": (_age_factor, "age-factor-range", "c1"),
    "age bound exceeded": (_age_bound, "age-bound", "c1"),
}


def planted_system(name):
    p = base_parts()
    PLANTED[name][0](p)
    return assemble(p)
