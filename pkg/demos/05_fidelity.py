"""
How close is a sample to the tables?
====================================

Compare empirical shares and value ranges of a generated system with the
workload tables it was drawn from.  Shares converge with population size;
ranges must hold for every single value.
"""

from ecusynth import GeneratorConfig, fidelity_report, generate_system

for n in (200, 2000, 20000):
    report = fidelity_report(generate_system(GeneratorConfig(n_runnables=n)))
    print(f"{n:6d} runnables: SW-C ASIL gap {report.worst_in('swc'):5.2f} pts, "
          f"period gap {report.worst_in('runnable'):5.2f} pts, "
          f"{report.out_of_range} values out of range")

for row in report.table("runnable")[:9]:
    print(f"{row.category:14s} target {row.target:5.1%}  got {row.empirical:5.1%}")
