"""Scene compilation: concatenate per-entity dynamics into one model."""
from __future__ import annotations

import math

import numpy as np

from ..dsl import SceneSpec, canonical_hash
from ..errors import CompileError
from .entities import BUILDERS
from .model import Affine, Builder, CompiledModel, ForceTerm, Pivot, StringModel, row_vector

DEFAULT_DT = 1e-3
DEFAULT_HORIZON = 10.0


def _link_name(a, b) -> str:
    lo, hi = sorted((a, b))
    return f"{lo.entity}.{lo.port}~{hi.entity}.{hi.port}"


def _expand(term: ForceTerm, n: int) -> ForceTerm:
    if term.fn is not None or term.coords is None:
        return term
    c = np.asarray(term.coords)
    out = ForceTerm(term.name)
    if term.Kq is not None:
        out.Kq = np.zeros((n, n))
        out.Kq[np.ix_(c, c)] = term.Kq
    if term.Kv is not None:
        out.Kv = np.zeros((n, n))
        out.Kv[np.ix_(c, c)] = term.Kv
    if term.f is not None:
        out.f = np.zeros(n)
        out.f[c] = term.f
    return out


def _pivot_gravity(bodies, g, n):
    """Gravity torque on pivoting bodies, as a generalized force."""
    index = bodies[0].kin.index
    arms = np.array([b.kin.arm + b.kin.R0 @ b.com_local for b in bodies])
    masses = np.array([b.mass for b in bodies])
    # first moments of the assembly about the pivot at zero angle
    mx, mz = float(masses @ arms[:, 0]), float(masses @ arms[:, 2])
    gx, gz = float(g[0]), float(g[2])

    def force(t, q, v, phase):
        c, s = math.cos(q[index]), math.sin(q[index])
        # rotation about +y: x' = c x + s z, z' = -s x + c z; torque_y = (r x m g)_y
        Q = np.zeros(n)
        Q[index] = (-s * mx + c * mz) * gx - (c * mx + s * mz) * gz
        return Q

    return ForceTerm("pivot_gravity", fn=force)


def _spring_force(s: StringModel, n: int) -> ForceTerm:
    c = row_vector(s.terms, n)
    k = s.stiffness
    return ForceTerm(f"{s.id}.elastic", Kq=-k * np.outer(c, c), f=-k * (s.offset - s.rest_length) * c)


def compile_scene(scene: SceneSpec, dt: float | None = None, horizon: float | None = None) -> CompiledModel:
    """Build the dynamical model of ``scene``.

    ``dt`` and ``horizon`` default to 1 ms and 10 s, or to the time scales
    requested by celestial and rocket entities.
    """
    g = np.asarray(scene.gravity, dtype=float)
    b = Builder(g)
    for e in scene.entities:
        builder = BUILDERS.get(e.kind)
        if builder is None:
            raise CompileError(f"unsupported entity kind {e.kind!r}")
        builder(b, e, g)

    for c in scene.connections:
        ta, oa, pa = b.ports[(c.a.entity, c.a.port)]
        tb, ob, pb = b.ports[(c.b.entity, c.b.port)]
        terms = dict(ta)
        for i, v in tb.items():
            terms[i] = terms.get(i, 0.0) + v
        offset = oa + ob + float(np.linalg.norm(pa - pb))
        name = _link_name(c.a, c.b)
        b.strings.append(StringModel(name, c.a.entity, terms, offset))

    n = len(b.q0)
    if n == 0:
        raise CompileError("scene has no movable coordinates")
    ropes = [row_vector(s.terms, n) for s in b.strings if s.stiffness is None]
    if ropes and np.linalg.matrix_rank(np.array(ropes)) < len(ropes):
        raise CompileError("inconsistent string constraints: over-constrained string loop")

    joints = {j.id: j for j in b.joints}
    welds = []
    for w in scene.welds:
        if w not in joints:
            raise CompileError(f"weld names unknown joint {w!r}")
        welds.extend(joints[w].rows)

    forces = [_expand(f, n) for f in b.forces]
    forces += [_spring_force(s, n) for s in b.strings if s.stiffness is not None]
    const = np.zeros(n)
    for body in b.bodies:
        if isinstance(body.kin, Affine) and body.uniform_gravity and body.mass_fn is None:
            for i, col in body.kin.J.items():
                const[i] += body.mass * float(col @ g)
    if const.any():
        forces.append(ForceTerm("gravity", f=const))
    pivots = [body for body in b.bodies if isinstance(body.kin, Pivot)]
    if pivots and g.any():
        forces.append(_pivot_gravity(pivots, g, n))

    if dt is None or horizon is None:
        if b.time_hints:
            dt_hint = min(h[0] for h in b.time_hints)
            hz_hint = max(h[1] for h in b.time_hints)
        else:
            dt_hint, hz_hint = DEFAULT_DT, DEFAULT_HORIZON
        dt = dt_hint if dt is None else dt
        horizon = hz_hint if horizon is None else horizon
    if not dt > 0:
        raise CompileError("dt must be > 0")
    if not horizon > 0:
        raise CompileError("zero-length horizon")

    entity_of = {x.id: x.entity for x in b.bodies + b.strings + b.contacts}
    model = CompiledModel(
        scene_hash=canonical_hash(scene),
        coord_names=b.coord_names,
        q0=np.array(b.q0),
        v0=np.array(b.v0),
        bodies=b.bodies,
        strings=b.strings,
        contacts=b.contacts,
        limits=b.limits,
        joints=b.joints,
        collisions=b.collisions,
        forces=forces,
        welds=welds,
        gravity=g,
        dt=float(dt),
        horizon=float(horizon),
        params={e.name: e.parameters for e in scene.entities},
        entity_of=entity_of,
        events=sorted(b.events),
        variable_mass=b.variable_mass,
    )
    M = model.mass_matrix()
    if np.linalg.matrix_rank(M) < n:
        raise CompileError("singular mass matrix: a coordinate moves no mass")
    return model
