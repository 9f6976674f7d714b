"""Question phrasing: quantity and target names plus paraphrase pools."""
from __future__ import annotations

from ..sim.trace import split_quantity

NOUNS = {
    "displacement": "position",
    "com_offset": "centre-of-mass offset",
    "velocity": "velocity",
    "acceleration": "acceleration",
    "mass": "mass",
    "momentum": "momentum",
    "net_force": "net force",
    "kinetic_energy_linear": "translational kinetic energy",
    "kinetic_energy_angular": "rotational kinetic energy",
    "potential_energy": "potential energy",
    "inertia": "inertia tensor about the centre of mass",
    "em_potential_energy": "electromagnetic potential energy",
    "normal_force": "normal force",
    "friction_force": "friction force",
    "length": "length",
    "force": "tension",
    "stiffness": "stiffness",
    "elastic_energy": "elastic energy",
    "total_energy": "total mechanical energy",
}
ROTATIONAL = {
    "velocity": "angular velocity",
    "acceleration": "angular acceleration",
    "momentum": "angular momentum",
    "net_force": "net torque",
}

NUMERIC_TEMPLATES = {
    "numeric.0": "What is the {quantity} of {target} at t = {t} s?",
    "numeric.1": "At time t = {t} s, what is the {quantity} of {target}?",
    "numeric.2": "Find the {quantity} of {target} when t = {t} s.",
}
REVERSE_TEMPLATES = {
    "reverse.0": "At t = {t} s the {quantity} of {target} is measured to be {observed}. What is {param}?",
    "reverse.1": "The {quantity} of {target} at time t = {t} s equals {observed}. Determine {param}.",
    "reverse.2": "A measurement shows that the {quantity} of {target} is {observed} at t = {t} s. Find {param}.",
}


def quantity_phrase(quantity: str, target_kind: str = "body") -> str:
    base, comp = split_quantity(quantity)
    if target_kind == "string":
        if base == "velocity":
            return "rate of change of the length"
        return NOUNS[base]
    noun = NOUNS[base]
    if base == "inertia":
        return f"{comp} entry of the {noun}"
    if comp is None:
        return noun
    if comp in ("rx", "ry", "rz"):
        return f"{comp[1]}-component of the {ROTATIONAL[base]}"
    if comp == "rnorm":
        return f"magnitude of the {ROTATIONAL[base]}"
    if comp == "norm":
        return f"magnitude of the {noun}"
    return f"{comp}-component of the {noun}"


def target_phrase(target: str, kind: str) -> str:
    if kind == "body":
        return f"body {target}"
    if kind == "string":
        return f"the string {target}"
    if kind == "contact":
        return f"the contact {target}"
    return f"entity {target} taken as a whole"


def format_time(t: float) -> str:
    return f"{t:.6g}"


def format_value(v: float, unit: str) -> str:
    text = f"{v:.6g}"
    return f"{text} {unit}" if unit else text


def param_phrase(path: str, unit: str) -> str:
    tail = f", in {unit}" if unit else ""
    if path == "scene.g":
        return f"the strength of gravity (shown as [unknown]{tail})"
    return f"the hidden parameter {path} (shown as [unknown]{tail})"


def pick(pool: dict, seed: int) -> tuple[str, str]:
    keys = sorted(pool)
    key = keys[seed % len(keys)]
    return key, pool[key]
