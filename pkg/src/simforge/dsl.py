"""Scene-composition DSL: parsing, validation, canonical form.

A scene document is YAML shaped like::

    scene:
      name: "Pulley System"
      entities:
        - name: "entity1"
          type: "MassWithFixedPulley"
          position: [0, 2, 0]
          parameters:
            mass_type: "Mass"
            mass_values: [10]
      connections:
        - tendon:
          - entity: "entity1"
            direction: "inner_to_outer"
          - entity: "entity2"
            direction: "outer_to_inner"

Lines consisting only of ``...`` are treated as elisions and skipped.
All numbers are SI (angles in radians).
"""
from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field, replace
from typing import Any, Iterable

import yaml

from .errors import DSLError
from .registry import (
    ENTITY_KINDS,
    IMMOBILE_BODIES,
    EntityKind,
    Port,
    ports_compatible,
    resolve_entity_kind,
    validate_body,
)

DEFAULT_GRAVITY = (0.0, 0.0, -9.81)
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class BodySpec:
    name: str
    kind: str
    params: dict


@dataclass(frozen=True)
class EntitySpec:
    name: str
    kind: str
    position: tuple[float, float, float]
    parameters: dict
    bodies: tuple[BodySpec, ...]
    connection_points: tuple[Port, ...]

    @property
    def registry(self) -> EntityKind:
        return ENTITY_KINDS[self.kind]

    def port(self, name: str) -> Port | None:
        for p in self.connection_points:
            if p.name == name:
                return p
        return None

    def body(self, name: str) -> BodySpec | None:
        for b in self.bodies:
            if b.name == name:
                return b
        return None


@dataclass(frozen=True, order=True)
class Endpoint:
    entity: str
    port: str


@dataclass(frozen=True)
class Connection:
    a: Endpoint
    b: Endpoint
    kind: str = "tendon"
    length: float | None = None  # accepted, has no effect on dynamics

    def key(self) -> tuple:
        lo, hi = sorted((self.a, self.b))
        return (lo.entity, lo.port, hi.entity, hi.port)


@dataclass(frozen=True)
class SceneSpec:
    name: str
    entities: tuple[EntitySpec, ...]
    connections: tuple[Connection, ...] = ()
    rng_seed: int = 0
    gravity: tuple[float, float, float] = DEFAULT_GRAVITY
    welds: tuple[str, ...] = ()  # joint ids held rigid, written "<entity>.<joint>"

    def entity(self, name: str) -> EntitySpec:
        for e in self.entities:
            if e.name == name:
                return e
        raise KeyError(name)

    @property
    def entity_names(self) -> list[str]:
        return [e.name for e in self.entities]


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


# ---------------------------------------------------------------------------
# construction


def make_entity(name: str, kind: str, position=(0.0, 0.0, 0.0), parameters: dict | None = None) -> EntitySpec:
    """Build a validated EntitySpec; ``kind`` may be snake_case or CamelCase."""
    if not isinstance(name, str) or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_\-]*", name):
        raise DSLError(f"invalid entity name {name!r}")
    ek = resolve_entity_kind(kind)
    where = f"entity {name!r}"
    params = ek.normalize(parameters, where)
    bodies = []
    for bname, bkind, bparams in ek.bodies(params):
        try:
            validate_body(bkind, bparams)
        except DSLError as exc:
            raise DSLError(f"{where}: {exc}") from None
        bodies.append(BodySpec(bname, bkind, dict(bparams)))
    pos = tuple(float(v) for v in position)
    if len(pos) != 3 or not all(math.isfinite(v) for v in pos):
        raise DSLError(f"{where}: position must be a finite 3-vector")
    return EntitySpec(name, ek.name, pos, params, tuple(bodies), tuple(ek.ports(params)))


def validate_connection(a: tuple[EntitySpec, str], b: tuple[EntitySpec, str], occupied: Iterable = ()) -> Verdict:
    """Decide whether two entity ports may be joined by a tendon.

    ``a`` and ``b`` are ``(entity, port_name)`` pairs; ``occupied`` holds
    ``(entity_name, port_name)`` pairs already used by other connections.
    """
    occupied = set(occupied)
    ports = []
    for ent, pname in (a, b):
        port = ent.port(pname)
        if port is None:
            body = ent.body(pname)
            if body is not None and body.kind in IMMOBILE_BODIES:
                return Verdict(False, f"{ent.name}.{pname} is an immobile {body.kind} and cannot be a suspended load")
            if body is not None:
                return Verdict(False, f"{ent.name}.{pname} is a body, not a connection point")
            return Verdict(False, f"{ent.name} has no connection point {pname!r}")
        if (ent.name, pname) in occupied:
            return Verdict(False, f"port {ent.name}.{pname} already occupied")
        ports.append(port)
    if a[0].name == b[0].name and a[1] == b[1]:
        return Verdict(False, f"port {a[0].name}.{a[1]} already occupied")
    ok, why = ports_compatible(*ports)
    if not ok:
        return Verdict(False, why)
    return Verdict(True)


def _connected(names: list[str], connections: Iterable[Connection]) -> bool:
    if not names:
        return False
    adj = {n: set() for n in names}
    for c in connections:
        adj[c.a.entity].add(c.b.entity)
        adj[c.b.entity].add(c.a.entity)
    seen, stack = {names[0]}, [names[0]]
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(names)


def entity_graph_connected(scene: SceneSpec) -> bool:
    return _connected(scene.entity_names, scene.connections)


def make_scene(
    name: str,
    entities: Iterable[EntitySpec],
    connections: Iterable[Connection] = (),
    rng_seed: int = 0,
    gravity=DEFAULT_GRAVITY,
    welds: Iterable[str] = (),
) -> SceneSpec:
    """Assemble and validate a scene from already-built entities."""
    entities = tuple(entities)
    connections = tuple(connections)
    if not entities:
        raise DSLError("disconnected/empty scene: no entities")
    names = [e.name for e in entities]
    if len(set(names)) != len(names):
        raise DSLError(f"duplicate entity names in {names}")
    by_name = {e.name: e for e in entities}
    occupied: set[tuple[str, str]] = set()
    for c in connections:
        for ep in (c.a, c.b):
            if ep.entity not in by_name:
                raise DSLError(f"dangling reference: connection names unknown entity {ep.entity!r}")
        v = validate_connection((by_name[c.a.entity], c.a.port), (by_name[c.b.entity], c.b.port), occupied)
        if not v:
            raise DSLError(f"invalid connection {c.a.entity}.{c.a.port} - {c.b.entity}.{c.b.port}: {v.reason}")
        occupied.add((c.a.entity, c.a.port))
        occupied.add((c.b.entity, c.b.port))
        if c.length is not None and not c.length > 0:
            raise DSLError("tendon length must be > 0")
    if not _connected(names, connections):
        raise DSLError("disconnected/empty scene: entity graph is not connected")
    g = tuple(float(v) for v in gravity)
    if len(g) != 3 or not all(math.isfinite(v) for v in g):
        raise DSLError("gravity must be a finite 3-vector")
    if not isinstance(rng_seed, int) or not 0 <= rng_seed < 2**64:
        raise DSLError("rng_seed must be a 64-bit unsigned integer")
    for w in welds:
        if not isinstance(w, str) or "." not in w or w.split(".", 1)[0] not in by_name:
            raise DSLError(f"weld {w!r} must name a joint as <entity>.<joint>")
    welds = tuple(sorted(set(welds)))
    return SceneSpec(str(name), entities, connections, rng_seed, g, welds)


# ---------------------------------------------------------------------------
# parsing


def _strip_elisions(text: str) -> str:
    # keep line numbering intact for error positions
    return "\n".join("" if line.strip() == "..." else line for line in text.splitlines())


class _Loader(yaml.SafeLoader):
    pass


# YAML 1.1 reads 2.0e30 (no exponent sign) as a string; accept it as a float
_Loader.yaml_implicit_resolvers = {k: list(v) for k, v in yaml.SafeLoader.yaml_implicit_resolvers.items()}
_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
    |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
    |\.[0-9_]+(?:[eE][-+][0-9]+)?
    |[-+]?\.(?:inf|Inf|INF)
    |\.(?:nan|NaN|NAN))$""", re.X),
    list("-+0123456789."),
)
_SCALARS = _Loader("")


def _to_python(node, path, marks):
    marks[path] = node.start_mark
    if isinstance(node, yaml.MappingNode):
        out = {}
        for knode, vnode in node.value:
            key = _SCALARS.construct_object(knode) if isinstance(knode, yaml.ScalarNode) else None
            if not isinstance(key, str):
                m = knode.start_mark
                raise DSLError("mapping keys must be plain strings", m.line + 1, m.column + 1)
            if key in out:
                m = knode.start_mark
                raise DSLError(f"duplicate key {key!r}", m.line + 1, m.column + 1)
            marks[path + (key, "__key__")] = knode.start_mark
            out[key] = _to_python(vnode, path + (key,), marks)
        return out
    if isinstance(node, yaml.SequenceNode):
        return [_to_python(v, path + (i,), marks) for i, v in enumerate(node.value)]
    return _SCALARS.construct_object(node, deep=True)


class _Doc:
    def __init__(self, marks):
        self.marks = marks

    def fail(self, path, message):
        m = self.marks.get(path)
        while m is None and path:
            path = path[:-1]
            m = self.marks.get(path)
        if m is None:
            raise DSLError(message)
        raise DSLError(message, m.line + 1, m.column + 1)

    def keys(self, obj, path, allowed, required=()):
        if not isinstance(obj, dict):
            self.fail(path, f"expected a mapping at {'.'.join(map(str, path)) or 'top level'}")
        for k in obj:
            if k not in allowed:
                self.fail(path + (k, "__key__"), f"unknown key {k!r} (allowed: {sorted(allowed)})")
        for k in required:
            if k not in obj:
                self.fail(path, f"missing required key {k!r}")


def parse_scene(text: str) -> SceneSpec:
    """Parse a DSL document into a validated SceneSpec."""
    try:
        root = yaml.compose(_strip_elisions(text), Loader=_Loader)
    except yaml.MarkedYAMLError as exc:
        m = exc.problem_mark or exc.context_mark
        raise DSLError(f"syntax error: {exc.problem}", m.line + 1 if m else None, m.column + 1 if m else None) from None
    if root is None:
        raise DSLError("empty document")
    marks: dict = {}
    data = _to_python(root, (), marks)
    return scene_from_dict(data, _Doc(marks))


def scene_from_dict(data: Any, doc: _Doc | None = None) -> SceneSpec:
    """Validate a plain-python scene document (as produced by YAML/JSON)."""
    doc = doc or _Doc({})
    doc.keys(data, (), {"scene"}, ("scene",))
    s = data["scene"]
    P = ("scene",)
    doc.keys(s, P, {"name", "entities", "connections", "rng_seed", "gravity", "welds"}, ("entities",))
    raw_entities = s.get("entities") or []
    if not isinstance(raw_entities, list):
        doc.fail(P + ("entities",), "entities must be a list")
    if not raw_entities:
        doc.fail(P + ("entities",), "disconnected/empty scene: no entities")
    entities = []
    for i, e in enumerate(raw_entities):
        ep = P + ("entities", i)
        doc.keys(e, ep, {"name", "type", "position", "parameters"}, ("name", "type"))
        try:
            entities.append(make_entity(e["name"], e["type"], e.get("position", (0, 0, 0)), e.get("parameters")))
        except DSLError as exc:
            doc.fail(ep, str(exc))
        except (TypeError, ValueError) as exc:
            doc.fail(ep, f"invalid entity: {exc}")
    by_name = {}
    for i, e in enumerate(entities):
        if e.name in by_name:
            doc.fail(P + ("entities", i), f"duplicate entity name {e.name!r}")
        by_name[e.name] = e

    connections = []
    occupied: set[tuple[str, str]] = set()
    raw_conns = s.get("connections") or []
    if not isinstance(raw_conns, list):
        doc.fail(P + ("connections",), "connections must be a list")
    for i, c in enumerate(raw_conns):
        cp = P + ("connections", i)
        doc.keys(c, cp, {"tendon", "length"}, ("tendon",))
        ends = c["tendon"]
        if not isinstance(ends, list) or len(ends) != 2:
            doc.fail(cp + ("tendon",), "a tendon joins exactly two endpoints")
        resolved = []
        for j, end in enumerate(ends):
            epath = cp + ("tendon", j)
            doc.keys(end, epath, {"entity", "port", "direction"}, ("entity",))
            ename = end["entity"]
            if ename not in by_name:
                doc.fail(epath, f"dangling reference: unknown entity {ename!r}")
            port = _resolve_port(by_name[ename], end.get("port"), end.get("direction"), occupied, doc, epath)
            resolved.append(Endpoint(ename, port))
            occupied.add((ename, port))
        length = c.get("length")
        if length is not None and (isinstance(length, bool) or not isinstance(length, (int, float))):
            doc.fail(cp + ("length",), "tendon length must be a number")
        connections.append(Connection(resolved[0], resolved[1], "tendon", None if length is None else float(length)))

    seed = s.get("rng_seed", 0)
    gravity = s.get("gravity", DEFAULT_GRAVITY)
    welds = s.get("welds") or []
    if not isinstance(welds, list):
        doc.fail(P + ("welds",), "welds must be a list of joint ids")
    try:
        return make_scene(s.get("name", "scene"), entities, connections, seed, gravity, welds)
    except DSLError as exc:
        msg = str(exc)
        if msg.startswith("invalid connection"):
            doc.fail(P + ("connections",), msg)
        if "gravity" in msg:
            doc.fail(P + ("gravity",), msg)
        if "rng_seed" in msg:
            doc.fail(P + ("rng_seed",), msg)
        if "weld" in msg:
            doc.fail(P + ("welds",), msg)
        doc.fail(P, msg)
    except TypeError as exc:
        doc.fail(P, str(exc))


def _resolve_port(entity: EntitySpec, port, direction, occupied, doc, path) -> str:
    if port is not None:
        p = entity.port(port)
        if p is None:
            v = validate_connection((entity, port), (entity, port))
            doc.fail(path, v.reason or f"{entity.name} has no connection point {port!r}")
        if direction is not None and p.direction is not None and p.direction != direction:
            doc.fail(path, f"port {entity.name}.{port} has direction {p.direction}, not {direction}")
        if (entity.name, port) in occupied:
            doc.fail(path, f"port {entity.name}.{port} already occupied")
        return port
    if direction is None:
        doc.fail(path, "endpoint needs a port or a direction")
    candidates = [p for p in entity.connection_points if p.direction == direction] or [
        p for p in entity.connection_points if p.direction is None
    ]
    if not candidates:
        doc.fail(path, f"{entity.name} ({entity.kind}) has no connection point for direction {direction!r}")
    free = [p for p in candidates if (entity.name, p.name) not in occupied]
    if not free:
        doc.fail(path, f"all {direction} ports of {entity.name} are already occupied")
    return free[0].name


# ---------------------------------------------------------------------------
# canonical form


def _plain(v):
    if isinstance(v, dict):
        return {k: _plain(v[k]) for k in sorted(v)}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def scene_to_dict(scene: SceneSpec, canonical: bool = False) -> dict:
    """Document form of a scene; ``canonical`` drops naming metadata and sorts."""
    ents = sorted(scene.entities, key=lambda e: e.name) if canonical else scene.entities
    conns = sorted(scene.connections, key=Connection.key) if canonical else scene.connections
    entities = [
        {
            "name": e.name,
            "type": e.kind if canonical else ENTITY_KINDS[e.kind].camel,
            "position": list(e.position),
            "parameters": _plain(e.parameters),
        }
        for e in ents
    ]
    connections = []
    for c in conns:
        a, b = sorted((c.a, c.b)) if canonical else (c.a, c.b)
        ends = []
        for ep in (a, b):
            d = {"entity": ep.entity, "port": ep.port}
            port = scene.entity(ep.entity).port(ep.port)
            if port.direction and not canonical:
                d["direction"] = port.direction
            ends.append(d)
        item = {"tendon": ends}
        if c.length is not None:
            item["length"] = c.length
        connections.append(item)
    body = {"entities": entities, "connections": connections, "gravity": list(scene.gravity)}
    if scene.welds:
        body["welds"] = sorted(scene.welds)
    if not canonical:
        body = {"name": scene.name, "rng_seed": scene.rng_seed, **body}
    return {"scene": body}


def canonical_bytes(scene: SceneSpec) -> bytes:
    """Byte-exact canonical serialization used for hashing.

    Compact JSON (sorted keys, ``,``/``:`` separators, ASCII) of the
    canonical document: entities sorted by name, connection endpoints and
    connections sorted, scene name and seed omitted.
    """
    doc = scene_to_dict(scene, canonical=True)
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=True, allow_nan=False).encode()


def canonical_hash(scene: SceneSpec) -> str:
    """SHA-256 hex digest of :func:`canonical_bytes`."""
    return hashlib.sha256(canonical_bytes(scene)).hexdigest()


class _Dumper(yaml.SafeDumper):
    pass


def _repr_list(dumper, data):
    flow = all(not isinstance(v, (dict, list)) for v in data)
    return dumper.represent_sequence("tag:yaml.org,2002:seq", data, flow_style=flow)


_Dumper.add_representer(list, _repr_list)


def dump_scene(scene: SceneSpec) -> str:
    """Serialize a scene to DSL text that :func:`parse_scene` reads back."""
    return yaml.dump(scene_to_dict(scene), Dumper=_Dumper, sort_keys=False, allow_unicode=False, width=100)


# ---------------------------------------------------------------------------
# parameter paths:  "<entity>.<param>[i].<field>[j]"  or  "scene.g"

_TOKEN = re.compile(r"\.?([A-Za-z_][A-Za-z0-9_]*)|\[(\d+)\]")


def _split_path(path: str) -> list:
    out, pos = [], 0
    while pos < len(path):
        m = _TOKEN.match(path, pos)
        if not m:
            raise DSLError(f"bad parameter path {path!r}")
        out.append(m.group(1) if m.group(1) is not None else int(m.group(2)))
        pos = m.end()
    return out


def get_param(scene: SceneSpec, path: str):
    toks = _split_path(path)
    if toks == ["scene", "g"]:
        return math.sqrt(sum(v * v for v in scene.gravity))
    try:
        obj: Any = scene.entity(toks[0]).parameters
        for t in toks[1:]:
            obj = obj[t]
    except (KeyError, IndexError, TypeError):
        raise DSLError(f"parameter path {path!r} does not resolve") from None
    return obj


def _set_in(obj, toks, value):
    if not toks:
        return value
    head, rest = toks[0], toks[1:]
    if isinstance(obj, dict):
        if head not in obj:
            raise KeyError(head)
        new = dict(obj)
        new[head] = _set_in(obj[head], rest, value)
        return new
    if isinstance(obj, tuple):
        lst = list(obj)
        lst[head] = _set_in(obj[head], rest, value)
        return tuple(lst)
    raise TypeError(type(obj))


def replace_param(scene: SceneSpec, path: str, value) -> SceneSpec:
    """Return a re-validated copy of ``scene`` with one parameter changed."""
    toks = _split_path(path)
    if toks == ["scene", "g"]:
        g0 = get_param(scene, path)
        if g0 == 0:
            raise DSLError("cannot rescale zero gravity")
        return replace(scene, gravity=tuple(v * value / g0 for v in scene.gravity))
    ent = scene.entity(toks[0])
    try:
        params = _set_in(ent.parameters, toks[1:], value)
    except (KeyError, IndexError, TypeError):
        raise DSLError(f"parameter path {path!r} does not resolve") from None
    new_ent = make_entity(ent.name, ent.kind, ent.position, _thaw(params))
    ents = tuple(new_ent if e.name == ent.name else e for e in scene.entities)
    return make_scene(scene.name, ents, scene.connections, scene.rng_seed, scene.gravity, scene.welds)


def _thaw(v):
    if isinstance(v, dict):
        return {k: _thaw(x) for k, x in v.items()}
    if isinstance(v, tuple):
        return [_thaw(x) for x in v]
    return v


def without_entity(scene: SceneSpec, name: str) -> SceneSpec:
    """Drop one entity and every connection touching it (no connectivity check)."""
    ents = tuple(e for e in scene.entities if e.name != name)
    conns = tuple(c for c in scene.connections if name not in (c.a.entity, c.b.entity))
    welds = tuple(w for w in scene.welds if w.split(".", 1)[0] != name)
    return SceneSpec(scene.name, ents, conns, scene.rng_seed, scene.gravity, welds)


def with_weld(scene: SceneSpec, joint: str) -> SceneSpec:
    """Copy of ``scene`` with one more joint held rigid."""
    return make_scene(scene.name, scene.entities, scene.connections, scene.rng_seed, scene.gravity,
                      scene.welds + (joint,))
