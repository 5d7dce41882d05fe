"""Generator configuration: defaults, validation, text parsing and digest.

The text format is TOML restricted to scalar and list values.  Top-level keys
are the :class:`GeneratorConfig` fields; task-synthesis knobs live in a
``[synthesis]`` section (or as dotted ``synthesis.<key>`` keys).
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


class ConfigError(ValueError):
    """Invalid configuration text or value; ``field`` names the culprit."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


@dataclass(frozen=True)
class SynthesisConfig:
    max_runnables_per_task: int = 6
    utilization_cap: float = 0.69

    def validate(self):
        if self.max_runnables_per_task < 1:
            raise ConfigError("synthesis.max_runnables_per_task must be >= 1",
                              "synthesis.max_runnables_per_task")
        if not 0 < self.utilization_cap <= 1:
            raise ConfigError("synthesis.utilization_cap must lie in (0, 1]",
                              "synthesis.utilization_cap")


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 1
    n_runnables: int = 60
    # Weights for 1..10 runnables per software component.
    swc_size_distribution: tuple = (0.1,) * 10
    wcet_shape: float = 2.0
    # Untruncated Weibull mean, as a fraction of the WCET bucket span above Min.
    wcet_mean_fraction: float = 0.3
    comm_same_period_weight: float = 0.6
    labels_per_runnable: float = 2.0
    max_readers: int = 3
    label_size_bytes: int = 4
    n_chains: int = 3
    chain_retries: int = 1000
    chain_period_retries: int = 20
    bsw_target_utilization_per_core: float = 0.05
    n_cores: int = 10
    core_rom_kb: float = 4096.0
    core_ram_kb: float = 512.0
    lockstep_flags: tuple = ()
    synthesis: SynthesisConfig = field(default_factory=SynthesisConfig)

    def validate(self):
        def fail(name, why):
            raise ConfigError(f"{name} {why} (got {getattr(self, name)!r})", name)

        if not 0 <= self.seed < 2 ** 64:
            fail("seed", "must be a 64-bit unsigned integer")
        if self.n_runnables < 1:
            fail("n_runnables", "must be >= 1")
        dist = self.swc_size_distribution
        if not dist or any(w < 0 for w in dist) or sum(dist) <= 0:
            fail("swc_size_distribution", "must be non-negative weights, not all zero")
        if len(dist) > 10:
            fail("swc_size_distribution", "covers at most 10 runnables per SW-C")
        if self.wcet_shape <= 0:
            fail("wcet_shape", "must be > 0")
        if not 0 < self.wcet_mean_fraction <= 1:
            fail("wcet_mean_fraction", "must lie in (0, 1]")
        if not 0 <= self.comm_same_period_weight <= 1:
            fail("comm_same_period_weight", "must lie in [0, 1]")
        if self.labels_per_runnable < 0:
            fail("labels_per_runnable", "must be >= 0")
        if self.max_readers < 1:
            fail("max_readers", "must be >= 1")
        if self.label_size_bytes < 1:
            fail("label_size_bytes", "must be >= 1")
        if self.n_chains < 0:
            fail("n_chains", "must be >= 0")
        if self.chain_retries < 1 or self.chain_period_retries < 1:
            fail("chain_retries", "and chain_period_retries must be >= 1")
        if not 0 <= self.bsw_target_utilization_per_core < 1:
            fail("bsw_target_utilization_per_core", "must lie in [0, 1)")
        if self.n_cores < 1:
            fail("n_cores", "must be >= 1")
        if self.core_rom_kb <= 1258:
            fail("core_rom_kb", "must exceed the largest BSW ROM reserve (1258 kB)")
        if self.core_ram_kb <= 0:
            fail("core_ram_kb", "must be > 0")
        if self.lockstep_flags and len(self.lockstep_flags) != self.n_cores:
            fail("lockstep_flags", "needs one flag per core")
        self.synthesis.validate()
        return self

    def replace(self, **changes):
        return dataclasses.replace(self, **changes).validate()

    def to_dict(self):
        return dataclasses.asdict(self)

    @property
    def digest(self):
        """Stable hash of the canonical configuration."""
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(GeneratorConfig)}
_SYNTH_TYPES = {f.name: f.type for f in dataclasses.fields(SynthesisConfig)}


def _coerce(name, kind, value):
    if isinstance(kind, str):
        kind = {"int": int, "float": float, "tuple": tuple}[kind]
    if kind is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if kind is tuple and isinstance(value, list):
        # Lists hold either weights or booleans.
        if all(isinstance(v, bool) for v in value):
            return tuple(value)
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            return tuple(float(v) for v in value)
    raise ConfigError(f"{name}: expected {kind.__name__}, got {value!r}", name)


def from_mapping(data) -> GeneratorConfig:
    data = dict(data)
    synth = data.pop("synthesis", {}) or {}
    if not isinstance(synth, dict):
        raise ConfigError("synthesis must be a section", "synthesis")
    kwargs = {}
    for key, value in data.items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown key {key!r}", key)
        kwargs[key] = _coerce(key, _FIELD_TYPES[key], value)
    synth_kwargs = {}
    for key, value in synth.items():
        name = f"synthesis.{key}"
        if key not in _SYNTH_TYPES:
            raise ConfigError(f"unknown key {name!r}", name)
        synth_kwargs[key] = _coerce(name, _SYNTH_TYPES[key], value)
    return GeneratorConfig(synthesis=SynthesisConfig(**synth_kwargs), **kwargs).validate()


def parse_config(text: str) -> GeneratorConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        # The decoder message carries "(at line L, column C)".
        raise ConfigError(f"syntax error: {exc}") from exc
    return from_mapping(data)


def format_config(config: GeneratorConfig) -> str:
    """Render ``config`` in the text format accepted by :func:`parse_config`."""

    def fmt(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, (tuple, list)):
            return "[" + ", ".join(fmt(x) for x in v) + "]"
        return repr(v)

    d = config.to_dict()
    synth = d.pop("synthesis")
    lines = [f"{k} = {fmt(v)}" for k, v in d.items()]
    lines += ["", "[synthesis]"] + [f"{k} = {fmt(v)}" for k, v in synth.items()]
    return "\n".join(lines) + "\n"
