import json
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from ecusynth.analysis import analyze_system
from ecusynth.config import (ConfigError, GeneratorConfig, SynthesisConfig, format_config,
                             parse_config)
from ecusynth.generator import generate_system, stage_rngs
from ecusynth.pipeline import build_system
from ecusynth.serialize import (SchemaError, deserialize_system, load_report,
                                report_to_json, serialize_system)
from ecusynth.synthesis import synthesize

from helpers import base_system


def test_empty_config_is_defaults():
    cfg = parse_config("")
    assert cfg == GeneratorConfig()
    assert cfg.wcet_shape == 2.0 and cfg.comm_same_period_weight == 0.6
    assert cfg.synthesis == SynthesisConfig(6, 0.69)


def test_invalid_value_names_field():
    with pytest.raises(ConfigError) as err:
        parse_config("wcet_shape = -1")
    assert err.value.field == "wcet_shape"
    assert "wcet_shape" in str(err.value)


@pytest.mark.parametrize("text, field", [
    ("n_runnables = 0", "n_runnables"),
    ("bogus = 1", "bogus"),
    ("n_cores = 2.5", "n_cores"),
    ("[synthesis]\nutilization_cap = 1.5", "synthesis.utilization_cap"),
    ("[synthesis]\nnope = 1", "synthesis.nope"),
    ("n_cores = 2\nlockstep_flags = [true]", "lockstep_flags"),
])
def test_invalid_configs(text, field):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.field == field


def test_syntax_error_reports_position():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("seed = 1\nn_cores = = 2\n")


def test_digest_ignores_key_order():
    a = parse_config("seed = 3\nn_cores = 4\n[synthesis]\nutilization_cap = 0.5\n")
    b = parse_config("synthesis.utilization_cap = 0.5\nn_cores = 4\nseed = 3\n")
    assert a == b and a.digest == b.digest
    assert a.digest != GeneratorConfig().digest


@settings(max_examples=30)
@given(seed=st.integers(0, 2 ** 63), n=st.integers(1, 10 ** 5),
       shape=st.floats(0.1, 10), cap=st.floats(0.05, 1.0),
       sizes=st.lists(st.floats(0.01, 5), min_size=1, max_size=10))
def test_format_parse_round_trip(seed, n, shape, cap, sizes):
    cfg = GeneratorConfig(seed=seed, n_runnables=n, wcet_shape=shape,
                          swc_size_distribution=tuple(sizes),
                          synthesis=SynthesisConfig(utilization_cap=cap)).validate()
    assert parse_config(format_config(cfg)) == cfg


def test_round_trip_minimal():
    system, _ = build_system(GeneratorConfig(n_runnables=1, n_chains=0))
    text = serialize_system(system)
    back = deserialize_system(text)
    assert back == system
    assert serialize_system(back) == text


def test_round_trip_large():
    cfg = GeneratorConfig(seed=2, n_runnables=10_000, n_chains=20, n_cores=40)
    system, _ = synthesize(generate_system(cfg), cfg.synthesis, stage_rngs(2, 5)[4])
    text = serialize_system(system)
    back = deserialize_system(text)
    assert back == system
    assert serialize_system(back) == text


def test_truncated_file():
    text = serialize_system(base_system())
    with pytest.raises(SchemaError, match=r"^\$"):
        deserialize_system(text[: len(text) // 2])


def test_tampered_file():
    doc = json.loads(serialize_system(base_system()))
    doc["system"]["runnables"][0]["wcet_us"] = 1.0
    with pytest.raises(SchemaError, match="digest"):
        deserialize_system(json.dumps(doc))


def test_unsupported_version():
    doc = json.loads(serialize_system(base_system()))
    doc["schema_version"] = 99
    with pytest.raises(SchemaError, match="schema_version"):
        deserialize_system(json.dumps(doc))


def test_type_error_names_path():
    from ecusynth.serialize import SYSTEM_SCHEMA, canonical_json, seal
    doc = json.loads(serialize_system(base_system()))
    del doc["content_digest"]
    doc["system"]["tasks"][1]["period_ms"] = "20"
    body = {"system": doc["system"]}
    text = canonical_json(seal(SYSTEM_SCHEMA, body, doc["seed"], doc["config_digest"]))
    with pytest.raises(SchemaError, match=r"\$\.system\.tasks\[1\]\.period_ms"):
        deserialize_system(text)


def test_report_carries_provenance():
    system = replace(base_system(), seed=7, config_digest="abc")
    doc = load_report(report_to_json(analyze_system(system), system))
    assert doc["seed"] == 7 and doc["config_digest"] == "abc"
    assert doc["accepted"] is True
    assert doc["chains"][0]["bound_us"] == 31820
