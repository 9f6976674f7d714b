"""Compiled dynamical model: coordinates, bodies, constraints, forces, events.

Every scene is reduced to generalized coordinates ``q`` with a mass matrix
``M``. String, weld and sticking-friction constraints are linear rows
``c . q = const``; their multipliers are the string tensions and static
friction forces. Bodies map coordinates to world positions either affinely
(``p = p0 + J q``) or through a single pivot angle.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

Terms = dict  # coordinate index -> coefficient


def rot_axis(axis: np.ndarray, angle) -> np.ndarray:
    """Rotation matrices about a unit axis; ``angle`` may be an array."""
    a = np.asarray(angle, dtype=float)
    x, y, z = axis
    c, s = np.cos(a), np.sin(a)
    C = 1 - c
    R = np.empty(a.shape + (3, 3))
    R[..., 0, 0] = c + x * x * C
    R[..., 0, 1] = x * y * C - z * s
    R[..., 0, 2] = x * z * C + y * s
    R[..., 1, 0] = y * x * C + z * s
    R[..., 1, 1] = c + y * y * C
    R[..., 1, 2] = y * z * C - x * s
    R[..., 2, 0] = z * x * C - y * s
    R[..., 2, 1] = z * y * C + x * s
    R[..., 2, 2] = c + z * z * C
    return R


def row_vector(terms: Terms, n: int) -> np.ndarray:
    r = np.zeros(n)
    for i, c in terms.items():
        r[i] += c
    return r


@dataclass
class Affine:
    """COM position ``p0 + J q``; optional spin ``angle = spin . q`` about ``axis``.

    The body frame is ``rot(axis, angle) @ R0``.
    """

    p0: np.ndarray
    J: dict  # coord -> 3-vector
    R0: np.ndarray = field(default_factory=lambda: np.eye(3))
    axis: np.ndarray | None = None
    spin: Terms | None = None


@dataclass
class Pivot:
    """Body swinging about ``pivot`` around +y with angle coordinate ``index``.

    ``arm`` is the body-frame origin relative to the pivot at zero angle.
    """

    pivot: np.ndarray
    index: int
    arm: np.ndarray
    R0: np.ndarray = field(default_factory=lambda: np.eye(3))


Y_AXIS = np.array([0.0, 1.0, 0.0])


@dataclass
class BodyModel:
    id: str
    entity: str
    kind: str
    mass: float
    inertia: np.ndarray  # about COM, body axes
    com_local: np.ndarray
    kin: Affine | Pivot
    mass_fn: Callable | None = None  # time -> mass for variable-mass bodies
    potential: Callable | None = None  # (Q, t) -> potential energy series
    em_potential: Callable | None = None
    uniform_gravity: bool = True

    def mass_at(self, t):
        if self.mass_fn is None:
            return np.full(np.shape(t), self.mass, dtype=float) if np.ndim(t) else self.mass
        return self.mass_fn(t)


@dataclass
class StringModel:
    """Rope (inextensible, constraint row) or spring with length ``c . q + offset``."""

    id: str
    entity: str
    terms: Terms
    offset: float
    stiffness: float | None = None  # None -> inextensible
    rest_length: float = 0.0


@dataclass
class ContactModel:
    """Contact between supported bodies and a support.

    ``normal`` is the direction of the force on the supported bodies;
    ``tangent`` the direction of the recorded friction force. ``terms`` give
    the relative tangential speed in coordinates.
    """

    id: str
    entity: str
    supported: list[str]
    normal: np.ndarray
    tangent: np.ndarray
    terms: Terms
    mode: str = "none"  # none | coulomb | rolling
    mu: float = 0.0
    normal_load: float = 0.0  # constant normal force for coulomb contacts


@dataclass
class LimitModel:
    """Unmodelled travel stop on ``c . q`` (block meets pulley, floor, edge)."""

    id: str
    terms: Terms
    lo: float
    hi: float


@dataclass
class JointModel:
    """A joint or contact that an ablation may weld rigid."""

    id: str
    entity: str
    kind: str
    rows: list[Terms]


@dataclass
class CollisionModel:
    """Restitution contact between two bodies (or a body and a fixed wall).

    ``kind`` is ``sphere`` (3-D centre distance) or ``axial`` (1-D along x).
    For ``axial`` pairs ``left``/``right`` are half-extents along x.
    """

    id: str
    a: str | None
    b: str | None
    kind: str
    restitution: float
    radius_a: float = 0.0
    radius_b: float = 0.0
    wall_x: float | None = None


@dataclass
class ForceTerm:
    """Generalized force. Linear terms give ``Kq q + Kv v + f``; others a callable.

    When ``coords`` is set the linear matrices act on those coordinates only.
    """

    name: str
    coords: list[int] | None = None
    Kq: np.ndarray | None = None
    Kv: np.ndarray | None = None
    f: np.ndarray | None = None
    fn: Callable | None = None  # (t, q, v, phase) -> Q; phase counts scheduled events passed
    time_varying: bool = False

    @property
    def linear(self) -> bool:
        return self.fn is None


@dataclass
class CompiledModel:
    scene_hash: str
    coord_names: list[str]
    q0: np.ndarray
    v0: np.ndarray
    bodies: list[BodyModel]
    strings: list[StringModel]
    contacts: list[ContactModel]
    limits: list[LimitModel]
    joints: list[JointModel]
    collisions: list[CollisionModel]
    forces: list[ForceTerm]
    welds: list[Terms]
    gravity: np.ndarray
    dt: float
    horizon: float
    params: dict
    entity_of: dict  # body/string/contact id -> entity name
    events: list[tuple[float, str]] = field(default_factory=list)  # scheduled mode switches
    variable_mass: bool = False

    @property
    def n(self) -> int:
        return len(self.q0)

    @property
    def state_layout(self) -> dict[str, list[int]]:
        """Body id -> indices of the coordinates that move it."""
        out = {}
        for b in self.bodies:
            if isinstance(b.kin, Pivot):
                out[b.id] = [b.kin.index]
            else:
                idx = set(b.kin.J)
                if b.kin.spin:
                    idx |= set(b.kin.spin)
                out[b.id] = sorted(idx)
        return out

    def body(self, bid: str) -> BodyModel:
        for b in self.bodies:
            if b.id == bid:
                return b
        raise KeyError(bid)

    def jacobian(self, body: BodyModel) -> np.ndarray:
        J = np.zeros((3, self.n))
        for i, v in body.kin.J.items():
            J[:, i] += v
        return J

    def constraint_rows(self) -> np.ndarray:
        rows = [row_vector(s.terms, self.n) for s in self.strings if s.stiffness is None]
        rows += [row_vector(w, self.n) for w in self.welds]
        return np.array(rows).reshape(len(rows), self.n)

    @property
    def dof(self) -> int:
        C = self.constraint_rows()
        return self.n - (np.linalg.matrix_rank(C) if len(C) else 0)

    def mass_matrix(self, t: float = 0.0, q: np.ndarray | None = None) -> np.ndarray:
        n = self.n
        q = self.q0 if q is None else q
        M = np.zeros((n, n))
        for b in self.bodies:
            m = b.mass_at(t)
            if isinstance(b.kin, Pivot):
                k = b.kin
                r = k.arm + k.R0 @ b.com_local
                I = k.R0 @ b.inertia @ k.R0.T
                i = k.index
                M[i, i] += m * (r[0] ** 2 + r[2] ** 2) + Y_AXIS @ I @ Y_AXIS
                continue
            J = self.jacobian(b)
            M += m * J.T @ J
            if b.kin.spin:
                s = row_vector(b.kin.spin, n)
                I = b.kin.R0 @ b.inertia @ b.kin.R0.T
                M += (b.kin.axis @ I @ b.kin.axis) * np.outer(s, s)
        return M

    def pivot_bodies(self) -> list[BodyModel]:
        return [b for b in self.bodies if isinstance(b.kin, Pivot)]


class Builder:
    """Accumulates coordinates and model parts while compiling entities."""

    def __init__(self, gravity):
        self.gravity = np.asarray(gravity, dtype=float)
        self.coord_names: list[str] = []
        self.q0: list[float] = []
        self.v0: list[float] = []
        self.bodies: list[BodyModel] = []
        self.strings: list[StringModel] = []
        self.contacts: list[ContactModel] = []
        self.limits: list[LimitModel] = []
        self.joints: list[JointModel] = []
        self.collisions: list[CollisionModel] = []
        self.forces: list = []  # callables (n) -> ForceTerm, resolved at finish
        self.events: list[tuple[float, str]] = []
        self.ports: dict[tuple[str, str], tuple[Terms, float, np.ndarray]] = {}
        self.time_hints: list[tuple[float, float]] = []  # (dt, horizon) requests
        self.variable_mass = False

    def coord(self, name: str, q0: float, v0: float = 0.0) -> int:
        self.coord_names.append(name)
        self.q0.append(float(q0))
        self.v0.append(float(v0))
        return len(self.q0) - 1

    def body(self, *args, **kwargs) -> BodyModel:
        b = BodyModel(*args, **kwargs)
        self.bodies.append(b)
        return b

    def port(self, entity: str, name: str, terms: Terms, offset: float, exit_point) -> None:
        self.ports[(entity, name)] = (dict(terms), float(offset), np.asarray(exit_point, dtype=float))
