import json
from pathlib import Path

import numpy as np
import pytest

from simforge.dsl import get_param, make_entity as E, make_scene, parse_scene, replace_param
from simforge.errors import CompileError, IdentifiabilityError, ProbeError, PruneError, QAError
from simforge.prune import PruneConfig
from simforge.qa.describe import describe_scene, fmt_number
from simforge.qa.generate import QAConfig, generate_for_scene, make_numeric, make_reverse, make_symbolic
from simforge.qa.pairs import QAPair, read_jsonl, write_jsonl
from simforge.runner import run_scene
from simforge.scene_gen import GenConfig, derive_seed, generate_scene

SCENES = Path(__file__).resolve().parent.parent / "scenes"


def atwood(m1=10.0, m2=5.0):
    return make_scene("atwood", [E("e", "MassWithFixedPulley", (0, 0, 5),
                                   {"mass_type": "Atwood", "mass_values": [m1, m2]})])


def free_ball(**params):
    return make_scene("ball", [E("ball", "EMEntity", (0, 0, 0), {"mass": 1.0, **params})])


def numbers_in(value):
    if isinstance(value, bool) or isinstance(value, str):
        return []
    if isinstance(value, (int, float)):
        return [value]
    if isinstance(value, dict):
        return [x for v in value.values() for x in numbers_in(v)]
    return [x for v in value for x in numbers_in(v)]


def test_atwood_description():
    text = describe_scene(atwood())
    assert "10 kg" in text and "5 kg" in text
    assert "one string passing over a pulley" in text


def test_free_mass_has_one_entity_sentence():
    text = describe_scene(free_ball())
    assert text.count("Entity ") == 1
    assert "1 kg" in text


def test_pulley_file_description_names_both_entities():
    text = describe_scene(parse_scene((SCENES / "pulley_chain.yaml").read_text()))
    assert "entity1" in text and "entity2" in text
    assert "joins port outer of entity entity1 to port top of entity entity2" in text


def test_every_parameter_appears_verbatim():
    for i in range(60):
        scene = generate_scene(GenConfig(rng_seed=derive_seed(5, i)))
        text = describe_scene(scene)
        for e in scene.entities:
            for v in numbers_in(e.parameters):
                assert fmt_number(v) in text, (e.kind, v)


def test_masked_parameter_hidden():
    text = describe_scene(atwood(), masked="e.mass_values[0]")
    assert "10 kg" not in text and "5 kg" in text


def test_numeric_free_fall():
    scene = free_ball()
    trace = run_scene(scene)
    qa = make_numeric(trace, scene, "ball.particle", "velocity_z", 3.0)
    assert qa.mode == "numeric"
    assert qa.answer.value == pytest.approx(-29.43, rel=1e-9)
    assert qa.answer.unit == "m/s"
    assert qa.question.startswith(describe_scene(scene))
    ke = make_numeric(trace, scene, "ball.particle", "kinetic_energy_linear", 3.0)
    assert round(ke.answer.value, 1) == 433.1
    assert make_numeric(trace, scene, "ball.particle", "displacement_z", 0.0).answer.value == 0.0


def test_numeric_propagates_probe_errors():
    scene = free_ball()
    trace = run_scene(scene)
    with pytest.raises(ProbeError):
        make_numeric(trace, scene, "ball.particle", "velocity_z", 50.0)


def test_reverse_atwood_mass():
    scene = atwood()
    trace = run_scene(scene)
    qa = make_reverse(trace, scene, "e.mass_values[0]", ("e.mass0", "acceleration_norm", 0.5))
    assert qa.mode == "reverse" and qa.answer.value == 10.0 and qa.answer.unit == "kg"
    assert round(qa.observed, 2) == 3.27
    assert "10 kg" not in qa.question


def test_reverse_gravity():
    scene = free_ball()
    trace = run_scene(scene)
    qa = make_reverse(trace, scene, "scene.g", ("ball.particle", "velocity_norm", 3.0))
    assert qa.answer.value == pytest.approx(9.81)
    assert qa.observed == pytest.approx(29.43)


def test_reverse_insensitive_parameter():
    scene = free_ball()
    trace = run_scene(scene)
    with pytest.raises(IdentifiabilityError):
        make_reverse(trace, scene, "ball.mass", ("ball.particle", "velocity_norm", 3.0))


def test_reverse_rejects_unknown_path():
    scene = free_ball()
    with pytest.raises(QAError):
        make_reverse(run_scene(scene), scene, "ball.colour", ("ball.particle", "velocity_z", 1.0))


@pytest.mark.parametrize("scene, body, quantity, expected", [
    (free_ball(), "ball.particle", "speed", "g*t"),
    (free_ball(velocity=[0.0, 0.0, 12.0]), "ball.particle", "max_height", "v_0^2/(2*g)"),
    (atwood(), "e.mass0", "downward_acceleration", "(m_1 - m_2)*g/(m_1 + m_2)"),
])
def test_symbolic_examples(scene, body, quantity, expected):
    qa = make_symbolic(scene, body, quantity)
    assert qa.mode == "symbolic"
    assert qa.answer.expression == expected
    assert set(qa.answer.symbols) >= {"g"}
    # numbers are replaced by symbols
    assert "9.81" not in qa.question


def test_projectile_height_matches_trace():
    scene = free_ball(velocity=[0.0, 0.0, 12.0])
    qa = make_symbolic(scene, "ball.particle", "max_height")
    z = run_scene(scene, prune=None).series("ball.particle", "displacement_z")
    assert qa.answer.evaluate() == pytest.approx(12.0**2 / (2 * 9.81), rel=1e-12)
    assert z.max() == pytest.approx(qa.answer.evaluate(), rel=0.01)


def test_symbolic_requires_closed_form():
    with pytest.raises(QAError):
        make_symbolic(atwood(), "e.pulley", "velocity_z")


def corpus_sample(n_scenes=12, seed=3):
    out = []
    for i in range(n_scenes):
        scene = generate_scene(GenConfig(rng_seed=derive_seed(seed, i)))
        try:
            trace = run_scene(scene)
        except (CompileError, PruneError):
            continue
        pairs, _ = generate_for_scene(scene, trace, QAConfig(), np.random.default_rng([seed, i]))
        out += pairs
    return out


def test_generation_deterministic():
    a = [qa.to_json() for qa in corpus_sample()]
    b = [qa.to_json() for qa in corpus_sample()]
    assert a == b and len(a) > 20


def test_numeric_answers_reproduce():
    for qa in corpus_sample():
        if qa.mode != "numeric":
            continue
        p = qa.provenance
        trace = run_scene(qa.scene, PruneConfig())
        again = trace.probe(p["body"], p["quantity"], p["t"])
        assert again == pytest.approx(qa.answer.value, rel=1e-6, abs=1e-12)


def test_reverse_soundness():
    checked = 0
    for qa in corpus_sample(20, seed=8):
        if qa.mode != "reverse":
            continue
        p = qa.provenance
        scene = replace_param(qa.scene, qa.answer.path, qa.answer.value)
        assert get_param(scene, qa.answer.path) == qa.answer.value
        trace = run_scene(scene, PruneConfig())
        assert trace.probe(p["body"], p["quantity"], p["t"]) == pytest.approx(qa.observed, rel=0.005)
        checked += 1
    assert checked >= 3


def test_jsonl_round_trip(tmp_path):
    pairs = corpus_sample(6)
    write_jsonl(pairs, tmp_path / "qa.jsonl")
    back = read_jsonl(tmp_path / "qa.jsonl")
    assert [q.to_json() for q in back] == [q.to_json() for q in pairs]


def test_tampered_record_rejected():
    d = json.loads(corpus_sample(2)[0].to_json())
    d["question"] += " "
    with pytest.raises(QAError, match="id mismatch"):
        QAPair.from_dict(d)


def test_qa_config_invariants():
    with pytest.raises(QAError):
        QAConfig(modes=())
