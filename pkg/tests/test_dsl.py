import math

import pytest
from hypothesis import given, settings, strategies as st

from simforge.dsl import (
    Connection,
    canonical_bytes,
    canonical_hash,
    dump_scene,
    get_param,
    make_entity,
    make_scene,
    parse_scene,
    replace_param,
    validate_connection,
    with_weld,
    without_entity,
)
from simforge.errors import DSLError
from simforge.registry import BODY_PARAMS, ENTITY_KINDS, validate_body

PULLEY_DOC = """\
scene:
  name: "Pulley System"
  entities:
    - name: "entity1"
      type: "MassWithFixedPulley"
      position: [0, 2, 0]
      parameters:
        mass_type: "Mass"
        mass_values: [10]
    - name: "entity2"
      type: "MassWithMovablePulley"
      position: [0, 1, 0]
    ...
  connections:
    - tendon:
      - entity: "entity1"
        direction: "inner_to_outer"
      - entity: "entity2"
        direction: "outer_to_inner"
    ...
"""


def atwood(m1=10.0, m2=5.0, name="atwood"):
    return make_scene(name, [make_entity("e", "MassWithFixedPulley", (0, 0, 5),
                                         {"mass_type": "Atwood", "mass_values": [m1, m2]})])


def test_pulley_document_parses():
    s = parse_scene(PULLEY_DOC)
    assert s.name == "Pulley System"
    assert [e.kind for e in s.entities] == ["mass_with_fixed_pulley", "mass_with_movable_pulley"]
    assert len(s.connections) == 1
    c = s.connections[0]
    assert {c.a.entity, c.b.entity} == {"entity1", "entity2"}
    assert s.entity("entity1").position == (0.0, 2.0, 0.0)
    assert s.gravity == (0.0, 0.0, -9.81)


def test_two_parses_hash_equal():
    assert canonical_hash(parse_scene(PULLEY_DOC)) == canonical_hash(parse_scene(PULLEY_DOC))


def test_empty_entities_rejected():
    with pytest.raises(DSLError, match="disconnected/empty scene"):
        parse_scene("scene:\n  name: x\n  entities: []\n")


def test_dangling_reference_rejected():
    doc = PULLEY_DOC.replace('entity: "entity2"', 'entity: "ghost"')
    with pytest.raises(DSLError, match="dangling reference"):
        parse_scene(doc)


def test_syntax_error_has_position():
    with pytest.raises(DSLError) as err:
        parse_scene("scene:\n  entities: [\n")
    assert err.value.line is not None


@pytest.mark.parametrize("mutation, message", [
    (("position: [0, 2, 0]", "position: [0, 2, 0]\n      colour: red"), "unknown key"),
    (('type: "MassWithMovablePulley"', 'type: "FlyingCarpet"'), "FlyingCarpet"),
    (("mass_values: [10]", "mass_values: [-10]"), "mass_values"),
    (('mass_type: "Mass"', 'mass_type: "Atwood"'), "Atwood"),
    (("connections:", "gravity: [0, 0]\n  connections:"), "gravity"),
])
def test_invariant_violations_rejected(mutation, message):
    doc = PULLEY_DOC.replace(*mutation)
    assert doc != PULLEY_DOC
    with pytest.raises(DSLError, match=message):
        parse_scene(doc)


def test_missing_required_parameter():
    doc = "scene:\n  entities:\n    - name: a\n      type: SolarSystem\n      parameters: {star_mass: 2.0e30}\n"
    with pytest.raises(DSLError, match="missing required"):
        parse_scene(doc)


def test_disconnected_graph_rejected():
    doc = PULLEY_DOC.split("  connections:")[0]
    with pytest.raises(DSLError, match="not connected"):
        parse_scene(doc)


def test_port_used_twice_rejected():
    a = make_entity("a", "MassWithFixedPulley", parameters={"mass_type": "Mass", "mass_values": [1]})
    b = make_entity("b", "MassWithMovablePulley", parameters={"mass_values": [1]})
    assert validate_connection((a, "outer"), (b, "top"))
    v = validate_connection((a, "outer"), (b, "top"), occupied={("a", "outer")})
    assert not v and "occupied" in v.reason


def test_plane_cannot_hang_from_pulley():
    a = make_entity("a", "MassWithFixedPulley", parameters={"mass_type": "Mass", "mass_values": [1]})
    p = make_entity("p", "TwoSideMassPlane", parameters={"mass": 1.0})
    v = validate_connection((a, "outer"), (p, "plane"))
    assert not v and "immobile" in v.reason


def test_directed_ports_must_oppose():
    a = make_entity("a", "MassWithFixedPulley", parameters={"mass_type": "Mass", "mass_values": [1]})
    b = make_entity("b", "MassWithFixedPulley", parameters={"mass_type": "Mass", "mass_values": [2]})
    v = validate_connection((a, "outer"), (b, "outer"))
    assert not v and "oppose" in v.reason


def test_hash_order_invariant():
    s = parse_scene(PULLEY_DOC)
    flipped = make_scene("other name", list(reversed(s.entities)),
                         [Connection(c.b, c.a, c.kind, c.length) for c in s.connections], rng_seed=7)
    assert canonical_hash(flipped) == canonical_hash(s)


def test_hash_parameter_sensitive():
    assert canonical_hash(atwood(10.0)) != canonical_hash(atwood(10.5))


def test_canonical_bytes_are_compact_json():
    b = canonical_bytes(atwood())
    assert b.startswith(b'{"scene":{"connections":[],"entities":[{"name":"e"')
    assert b" " not in b


def test_round_trip():
    s = parse_scene(PULLEY_DOC)
    again = parse_scene(dump_scene(s))
    assert again == s
    assert canonical_hash(again) == canonical_hash(s)


@settings(max_examples=40, deadline=None)
@given(m1=st.floats(0.1, 100), m2=st.floats(0.1, 100), x=st.floats(-50, 50))
def test_round_trip_property(m1, m2, x):
    s = make_scene("s", [make_entity("e", "MassWithFixedPulley", (x, 0, 5),
                                     {"mass_type": "Atwood", "mass_values": [m1, m2]})])
    assert canonical_hash(parse_scene(dump_scene(s))) == canonical_hash(s)


def test_every_body_kind_is_representable():
    samples = {
        "mass": {"m": 1.0}, "sphere": {"m": 1.0, "r": 0.1}, "cylinder": {"m": 1.0, "r": 0.1, "h": 0.2},
        "disc": {"m": 1.0, "r": 0.1}, "bar": {"m": 1.0, "l": 1.0},
        "polygonal_prism": {"m": 1.0, "n": 6, "r": 0.2, "h": 0.1},
        "hemisphere": {"m": 1.0, "r": 0.1}, "bowl": {"m": 1.0, "r": 0.3, "h_c": 0.1, "t": 0.02},
        "sphere_with_hole": {"m": 1.0, "r": 0.3, "r_h": 0.1, "p_h": 0.1, "t": 0.0},
        "rocket": {"m0": 300.0, "m_dry": 100.0}, "pulley": {"m": 0.5},
        "triangular_prism": {"m": 5.0, "alpha_L": 0.5, "alpha_R": 0.7, "h": 1.0},
        "plane": {"alpha": 0.3},
        "spring_mass_system": {"m": [1.0, 2.0], "k": [50.0], "l0": [0.5], "x": [0.0, 0.6]},
    }
    assert set(samples) == set(BODY_PARAMS)
    for kind, params in samples.items():
        params = {k: params.get(k, 1.0) for k in BODY_PARAMS[kind]}
        validate_body(kind, params)


@pytest.mark.parametrize("kind, params", [
    ("mass", {"m": 0.0}),
    ("sphere", {"m": 1.0, "r": -0.1}),
    ("triangular_prism", {"m": 5.0, "alpha_L": math.pi / 2, "alpha_R": 0.7, "h": 1.0}),
    ("rocket", {"m0": 50.0, "m_dry": 100.0}),
    ("mass", {"m": 1.0, "r": 1.0}),
])
def test_body_invariants(kind, params):
    with pytest.raises(DSLError):
        validate_body(kind, params)


def test_rocket_dry_mass_above_initial_rejected():
    with pytest.raises(DSLError):
        make_entity("r", "RocketEntity", parameters={"m0": 100.0, "m_dry": 300.0})


def test_all_entity_kinds_registered():
    assert len(ENTITY_KINDS) == 15
    for k in ENTITY_KINDS.values():
        assert k.camel and k.name


def test_param_paths():
    s = atwood()
    assert get_param(s, "e.mass_values[1]") == 5.0
    t = replace_param(s, "e.mass_values[1]", 6.0)
    assert get_param(t, "e.mass_values[1]") == 6.0
    assert get_param(s, "e.mass_values[1]") == 5.0
    assert get_param(replace_param(s, "scene.g", 1.62), "scene.g") == pytest.approx(1.62)


def test_ablation_helpers():
    s = parse_scene(PULLEY_DOC)
    rest = without_entity(s, "entity2")
    assert rest.entity_names == ["entity1"] and not rest.connections
    welded = with_weld(s, "entity2.bearing")
    assert welded.welds == ("entity2.bearing",)
    assert canonical_hash(welded) != canonical_hash(s)
