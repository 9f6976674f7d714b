"""Recorded time series and their on-disk format.

A trace maps ``(target, quantity)`` to an array whose first axis is time.
Targets are bodies and contacts (``"<entity>.<role>"``), strings and
entity aggregates (``"<entity>"``). Vector quantities are read one
component at a time with a suffix: ``velocity_z``, ``momentum_ry``,
``displacement_norm``, ``inertia_xy``. A dash works in place of the
underscore (``velocity-z``).

File format: a NumPy ``.npz`` archive. ``times`` holds the sample times;
``s0, s1, ...`` hold the series; ``header`` holds UTF-8 JSON with
``{"schema": 1, "truncated_at": int|null, "meta": {...}, "series":
[{"key": "s0", "target": ..., "quantity": ..., "unit": ..., "stride": 1,
"shape": [...]}, ...]}``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ProbeError
from .model import Affine, CompiledModel, Pivot, Y_AXIS, rot_axis, row_vector

UNITS = {
    "displacement": "m",
    "com_offset": "m",
    "velocity": ("m/s", "rad/s"),
    "acceleration": ("m/s^2", "rad/s^2"),
    "mass": "kg",
    "momentum": ("kg*m/s", "kg*m^2/s"),
    "net_force": ("N", "N*m"),
    "kinetic_energy_linear": "J",
    "kinetic_energy_angular": "J",
    "potential_energy": "J",
    "inertia": "kg*m^2",
    "em_potential_energy": "J",
    "normal_force": "N",
    "friction_force": "N",
    "length": "m",
    "force": "N",
    "stiffness": "N/m",
    "elastic_energy": "J",
    "total_energy": "J",
}
SIX = ("velocity", "acceleration", "momentum", "net_force")
THREE = ("displacement", "com_offset")
COMPONENTS6 = {"x": 0, "y": 1, "z": 2, "rx": 3, "ry": 4, "rz": 5}
COMPONENTS3 = {"x": 0, "y": 1, "z": 2}
INERTIA = {"xx": (0, 0), "yy": (1, 1), "zz": (2, 2), "xy": (0, 1), "xz": (0, 2), "yz": (1, 2)}
BASES = sorted(UNITS, key=len, reverse=True)


def split_quantity(name: str) -> tuple[str, str | None]:
    """``"velocity-z"`` -> ``("velocity", "z")``; scalars give ``(name, None)``."""
    name = name.replace("-", "_")
    for base in BASES:
        if name == base:
            return base, None
        if name.startswith(base + "_"):
            return base, name[len(base) + 1:]
    raise ProbeError(f"unknown quantity {name!r}")


def unit_of(name: str, target_kind: str = "body") -> str:
    base, comp = split_quantity(name)
    u = UNITS[base]
    if isinstance(u, tuple):
        if target_kind != "body":
            return u[0]
        return u[1] if comp in ("rx", "ry", "rz", "rnorm") else u[0]
    if base == "velocity" and target_kind == "string":
        return "m/s"
    return u


@dataclass(frozen=True)
class Trace:
    times: np.ndarray
    data: dict  # (target, base quantity) -> array
    kinds: dict  # target -> body | string | contact | entity
    truncated_at: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times.setflags(write=False)
        for arr in self.data.values():
            arr.setflags(write=False)

    @property
    def last_time(self) -> float:
        return float(self.times[-1])

    def __len__(self) -> int:
        return len(self.times)

    @property
    def targets(self) -> list[str]:
        return list(self.kinds)

    def bodies(self) -> list[str]:
        return [t for t, k in self.kinds.items() if k == "body"]

    def quantities(self, target: str) -> list[str]:
        return [q for (t, q) in self.data if t == target]

    def scalar_names(self, target: str) -> list[str]:
        """Every scalar quantity name readable on ``target``."""
        out = []
        for q in self.quantities(target):
            arr = self.data[(target, q)]
            if q == "inertia":
                out += [f"inertia_{c}" for c in INERTIA]
            elif arr.ndim == 1:
                out.append(q)
            elif arr.shape[1] == 6:
                out += [f"{q}_{c}" for c in COMPONENTS6] + [f"{q}_norm", f"{q}_rnorm"]
            else:
                out += [f"{q}_{c}" for c in COMPONENTS3] + [f"{q}_norm"]
        return out

    def series(self, target: str, quantity: str) -> np.ndarray:
        """Scalar time series of one (component of a) quantity."""
        if target not in self.kinds:
            raise ProbeError(f"unknown target {target!r}")
        base, comp = split_quantity(quantity)
        arr = self.data.get((target, base))
        if arr is None:
            raise ProbeError(f"quantity {base!r} not recorded for {target!r}")
        if base == "inertia":
            if comp not in INERTIA:
                raise ProbeError(f"inertia needs a component suffix {sorted(INERTIA)}")
            i, j = INERTIA[comp]
            return arr[:, i, j]
        if arr.ndim == 1:
            if comp is not None:
                raise ProbeError(f"{base!r} is a scalar quantity")
            return arr
        width = arr.shape[1]
        if comp == "norm":
            return np.linalg.norm(arr[:, :3], axis=1)
        if comp == "rnorm" and width == 6:
            return np.linalg.norm(arr[:, 3:], axis=1)
        table = COMPONENTS6 if width == 6 else COMPONENTS3
        if comp not in table:
            raise ProbeError(f"{base!r} needs a component suffix from {sorted(table) + ['norm']}")
        return arr[:, table[comp]]

    def probe(self, target: str, quantity: str, t: float) -> float:
        """Linearly interpolated value at time ``t``."""
        tol = 1e-9 * max(1.0, self.last_time)
        if not -tol <= t <= self.last_time + tol:
            if self.truncated_at is not None and t > self.last_time:
                raise ProbeError(f"t={t} lies beyond the truncation time {self.last_time:.6g}")
            raise ProbeError(f"t={t} outside the recorded interval [0, {self.last_time:.6g}]")
        y = self.series(target, quantity)
        return float(np.interp(min(max(t, 0.0), self.last_time), self.times, y))

    def truncated(self, index: int, **meta) -> "Trace":
        """Copy keeping samples ``[0, index)``."""
        data = {k: np.array(v[:index]) for k, v in self.data.items()}
        m = dict(self.meta)
        m.update(meta)
        return Trace(np.array(self.times[:index]), data, dict(self.kinds), index, m)

    # -- storage --------------------------------------------------------------

    def save(self, path) -> None:
        arrays = {"times": np.asarray(self.times)}
        entries = []
        for i, ((target, q), arr) in enumerate(self.data.items()):
            key = f"s{i}"
            arrays[key] = np.asarray(arr)
            kind = self.kinds[target]
            unit = UNITS[q] if not isinstance(UNITS[q], tuple) else list(UNITS[q])
            if q == "velocity" and kind == "string":
                unit = "m/s"
            entries.append({"key": key, "target": target, "quantity": q, "unit": unit, "stride": 1,
                            "shape": list(arr.shape[1:])})
        header = {"schema": 1, "truncated_at": self.truncated_at, "meta": self.meta, "series": entries,
                  "kinds": self.kinds}
        arrays["header"] = np.frombuffer(json.dumps(header).encode(), dtype=np.uint8)
        with open(path, "wb") as fh:
            np.savez(fh, **arrays)

    @classmethod
    def load(cls, path) -> "Trace":
        with np.load(path) as z:
            header = json.loads(bytes(z["header"]).decode())
            data = {(e["target"], e["quantity"]): np.array(z[e["key"]]) for e in header["series"]}
            return cls(np.array(z["times"]), data, header["kinds"], header["truncated_at"], header["meta"])


def probe(trace: Trace, body: str, quantity: str, t: float) -> float:
    return trace.probe(body, quantity, t)


def _cross(a, b):
    return np.cross(a, b)


def build_trace(model: CompiledModel, run) -> Trace:
    """Turn integrator output into the recorded quantities."""
    n = model.n
    T = len(run.Y)
    t = np.arange(T) * model.dt
    Q, V, A = run.Y[:, :n], run.Y[:, n:], run.QDD
    g = model.gravity
    data: dict = {}
    kinds: dict = {}
    lin_acc = {}
    masses = {}
    ent_parts: dict = {}

    for b in model.bodies:
        if b.mass == 0 and b.mass_fn is None:
            continue  # immobile support surfaces carry no dynamics
        k = b.kin
        if isinstance(k, Pivot):
            th = Q[:, k.index]
            R = rot_axis(Y_AXIS, th) @ k.R0
            r0 = k.arm + k.R0 @ b.com_local
            r = rot_axis(Y_AXIS, th) @ r0
            com = k.pivot + r
            w = np.outer(V[:, k.index], Y_AXIS)
            al = np.outer(A[:, k.index], Y_AXIS)
            vel = _cross(w, r)
            acc = _cross(al, r) + _cross(w, _cross(w, r))
        else:
            J = model.jacobian(b)
            com = k.p0 + Q @ J.T
            vel = V @ J.T
            acc = A @ J.T
            if k.spin:
                s = row_vector(k.spin, n)
                R = rot_axis(k.axis, Q @ s) @ k.R0
                w = np.outer(V @ s, k.axis)
                al = np.outer(A @ s, k.axis)
            else:
                R = np.broadcast_to(k.R0, (T, 3, 3))
                w = np.zeros((T, 3))
                al = np.zeros((T, 3))
        m = b.mass_at(t) if b.mass_fn is not None else np.full(T, b.mass)
        mdot = np.gradient(m, t) if b.mass_fn is not None and T > 1 else np.zeros(T)
        Iw = R @ b.inertia @ np.swapaxes(R, 1, 2)
        Lw = np.einsum("tij,tj->ti", Iw, w)
        torque = np.einsum("tij,tj->ti", Iw, al) + _cross(w, Lw)
        ke_lin = 0.5 * m * np.einsum("ti,ti->t", vel, vel)
        ke_ang = 0.5 * np.einsum("ti,ti->t", w, Lw)
        if b.potential is not None:
            pe = b.potential(Q, t)
        elif b.uniform_gravity:
            pe = -m * (com @ g)
        else:
            pe = np.zeros(T)
        rec = {
            "displacement": com,
            "com_offset": R @ b.com_local,
            "velocity": np.hstack([vel, w]),
            "acceleration": np.hstack([acc, al]),
            "mass": m,
            "momentum": np.hstack([m[:, None] * vel, Lw]),
            "net_force": np.hstack([m[:, None] * acc + mdot[:, None] * vel, torque]),
            "kinetic_energy_linear": ke_lin,
            "kinetic_energy_angular": ke_ang,
            "potential_energy": np.asarray(pe, dtype=float),
            "inertia": np.array(Iw),
        }
        if b.em_potential is not None:
            rec["em_potential_energy"] = np.asarray(b.em_potential(Q, t), dtype=float)
        kinds[b.id] = "body"
        for q, arr in rec.items():
            data[(b.id, q)] = np.ascontiguousarray(arr, dtype=float)
        lin_acc[b.id] = acc
        masses[b.id] = m
        parts = ent_parts.setdefault(b.entity, {})
        for q in ("kinetic_energy_linear", "kinetic_energy_angular", "potential_energy", "em_potential_energy"):
            if q in rec:
                parts[q] = parts.get(q, 0.0) + rec[q]
        parts["momentum"] = parts.get("momentum", 0.0) + m[:, None] * vel

    rope = 0
    for s in model.strings:
        c = row_vector(s.terms, n)
        length = Q @ c + s.offset
        kinds[s.id] = "string"
        data[(s.id, "length")] = length
        data[(s.id, "velocity")] = V @ c
        if s.stiffness is None:
            data[(s.id, "force")] = np.array(run.TENS[:, rope])
            rope += 1
        else:
            stretch = length - s.rest_length
            data[(s.id, "force")] = s.stiffness * stretch
            data[(s.id, "stiffness")] = np.full(T, float(s.stiffness))
            data[(s.id, "elastic_energy")] = 0.5 * s.stiffness * stretch**2
            parts = ent_parts.setdefault(s.entity, {})
            parts["elastic_energy"] = parts.get("elastic_energy", 0.0) + data[(s.id, "elastic_energy")]

    for ci, c in enumerate(model.contacts):
        load = sum(masses[b][:, None] * (lin_acc[b] - g) for b in c.supported if b in lin_acc)
        kinds[c.id] = "contact"
        data[(c.id, "normal_force")] = np.asarray(load @ c.normal if np.ndim(load) else np.zeros(T), float)
        if c.mode == "rolling":
            data[(c.id, "friction_force")] = np.asarray(load @ c.tangent, float)
        else:
            data[(c.id, "friction_force")] = np.array(run.FRIC[:, ci])

    for ent, parts in ent_parts.items():
        if ent in kinds:
            continue
        kinds[ent] = "entity"
        total = np.zeros(T)
        for q, arr in parts.items():
            data[(ent, q)] = np.ascontiguousarray(arr, dtype=float) * np.ones((T,) + np.shape(arr)[1:])
            if q != "momentum":
                total = total + data[(ent, q)]
        data[(ent, "total_energy")] = total

    meta = {"scene_hash": model.scene_hash, "dt": model.dt, "horizon": model.horizon,
            "stops": [[int(k), sid] for k, sid in run.stops]}
    truncated_at = None
    if run.diagnostic:
        meta["diagnostic"] = run.diagnostic
        truncated_at = T
    if T and not math.isclose(t[-1], model.horizon, rel_tol=1e-9, abs_tol=model.dt / 2):
        meta["stopped_at"] = float(t[-1])
    return Trace(t, data, kinds, truncated_at, meta)
