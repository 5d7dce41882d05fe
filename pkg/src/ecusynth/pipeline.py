"""One-call generation of a synthesized, allocated and prioritized system."""

from .config import GeneratorConfig
from .generator import generate_system, stage_rngs
from .synthesis import synthesize


def build_system(config: GeneratorConfig):
    """Generate, cluster, extend, allocate and prioritize; deterministic in ``config``.

    Returns ``(system, allocation)``.
    """
    system = generate_system(config)
    rng = stage_rngs(config.seed, 5)[4]
    return synthesize(system, config.synthesis, rng)
