"""
Data age along cause-effect chains
==================================

Each chain gets a compositional bound, sum of (period + response time)
over the tasks it passes through, and a measured worst case from the
simulated trace.  Both are compared with the chain's age budget.
"""

from ecusynth import GeneratorConfig, analyze_system, build_system

system, _ = build_system(GeneratorConfig())
report = analyze_system(system)

for age in report.ages:
    chain = next(c for c in system.chains if c.id == age.chain_id)
    print(f"{age.chain_id}: {len(chain.members)} members, patterns {sorted(chain.patterns)} ms")
    print(f"  measured {age.measured_max_us / 1000:7.2f} ms <= bound "
          f"{age.bound_us / 1000:7.2f} ms, budget {age.constraint_us / 1000:7.2f} ms")

print("accepted:", report.accepted)
for note in report.notes:
    print("note:", note)
