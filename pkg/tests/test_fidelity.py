import pytest

from ecusynth.config import GeneratorConfig
from ecusynth.fidelity import fidelity_report, fidelity_to_dict
from ecusynth.generator import generate_system
from ecusynth.model import Asil, Core, Runnable, SwComponent, SystemModel


def test_large_default_system_swc_and_runnable_shares():
    report = fidelity_report(generate_system(GeneratorConfig(n_runnables=10_000)))
    assert report.worst_in("swc") <= 2.0
    assert report.worst_in("runnable") <= 2.0
    assert report.out_of_range == 0


def test_chain_and_bsw_tables_with_large_populations():
    cfg = GeneratorConfig(seed=3, n_runnables=10_000, n_chains=5000, n_cores=1000,
                          bsw_target_utilization_per_core=0.3)
    report = fidelity_report(generate_system(cfg))
    assert report.worst_in("chain") <= 2.0
    assert report.worst_in("bsw_task") <= 2.0
    assert report.out_of_range == 0


@pytest.mark.parametrize("seed", range(5))
def test_generator_output_in_range(seed):
    report = fidelity_report(generate_system(GeneratorConfig(seed=seed, n_runnables=300,
                                                             n_chains=4)))
    assert report.out_of_range == 0
    assert all(r.out_of_range == 0 for r in report.table("runnable"))


def test_hand_built_singleton_is_informational():
    r = Runnable("r", "s", 5, 100.0, Asil.D)
    system = SystemModel(swcs=(SwComponent("s", Asil.D, 50.0, 5.0, ("r",)),),
                         runnables=(r,), labels=(), chains=(), tasks=(), bsw_tasks=(),
                         cores=(Core("c", 4096, 512, 700),))
    report = fidelity_report(system)
    row = next(x for x in report.table("runnable") if x.category == "period_ms=5")
    assert row.empirical == 1.0
    assert row.deviation == pytest.approx(69.0)
    assert report.out_of_range == 0
    doc = fidelity_to_dict(report)
    assert doc["worst_deviation"] >= 69.0
