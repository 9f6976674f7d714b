"""QA pair records and their JSON form."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

from ..dsl import SceneSpec, scene_from_dict, scene_to_dict
from ..errors import QAError
from . import expr

MODES = ("numeric", "reverse", "symbolic")


@dataclass(frozen=True)
class Number:
    value: float
    unit: str

    def to_dict(self):
        return {"type": "number", "value": self.value, "unit": self.unit}


@dataclass(frozen=True)
class MaskedParam:
    path: str
    value: float
    unit: str

    def to_dict(self):
        return {"type": "masked_param", "path": self.path, "value": self.value, "unit": self.unit}


@dataclass(frozen=True)
class Symbolic:
    expression: str
    symbols: dict  # name -> {"meaning", "unit", "value"}

    def to_dict(self):
        return {"type": "symbolic", "expression": self.expression, "symbols": self.symbols}

    def evaluate(self, values: dict | None = None) -> float:
        vals = {k: s["value"] for k, s in self.symbols.items()}
        vals.update(values or {})
        return expr.evaluate(self.expression, vals)


def answer_from_dict(d: dict):
    t = d.get("type")
    if t == "number":
        return Number(float(d["value"]), d["unit"])
    if t == "masked_param":
        return MaskedParam(d["path"], float(d["value"]), d["unit"])
    if t == "symbolic":
        return Symbolic(d["expression"], d["symbols"])
    raise QAError(f"unknown answer type {t!r}")


@dataclass
class QAPair:
    question: str
    answer: Number | MaskedParam | Symbolic
    mode: str
    provenance: dict  # scene_hash, body, quantity, t
    scene: SceneSpec
    template: str
    observed: float | None = None  # reverse mode: the stated observation
    filter_verdicts: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise QAError(f"unknown mode {self.mode!r}")
        if isinstance(self.answer, (Number, MaskedParam)) and not math.isfinite(self.answer.value):
            raise QAError("numeric answer is not finite")
        if isinstance(self.answer, Symbolic):
            free = expr.symbols(expr.parse(self.answer.expression))
            if not free <= set(self.answer.symbols):
                raise QAError(f"expression uses undeclared symbols {sorted(free - set(self.answer.symbols))}")

    @property
    def id(self) -> str:
        core = {"question": self.question, "answer": self.answer.to_dict(), "mode": self.mode,
                "provenance": self.provenance}
        blob = json.dumps(core, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()[:20]

    @property
    def value(self) -> float | None:
        """The number a solver must produce, if any."""
        return None if isinstance(self.answer, Symbolic) else self.answer.value

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "question": self.question,
            "answer": self.answer.to_dict(),
            "mode": self.mode,
            "provenance": dict(self.provenance),
            "filter_verdicts": dict(sorted(self.filter_verdicts.items())),
            "template": self.template,
            "scene": scene_to_dict(self.scene)["scene"],
        }
        if self.observed is not None:
            d["observed"] = self.observed
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), allow_nan=False)

    @classmethod
    def from_dict(cls, d: dict) -> "QAPair":
        qa = cls(
            question=d["question"],
            answer=answer_from_dict(d["answer"]),
            mode=d["mode"],
            provenance=dict(d["provenance"]),
            scene=scene_from_dict({"scene": d["scene"]}),
            template=d["template"],
            observed=d.get("observed"),
            filter_verdicts=dict(d.get("filter_verdicts", {})),
        )
        if "id" in d and d["id"] != qa.id:
            raise QAError(f"QA id mismatch: stored {d['id']}, computed {qa.id}")
        return qa


def write_jsonl(pairs, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for qa in pairs:
            fh.write(qa.to_json() + "\n")


def read_jsonl(path) -> list[QAPair]:
    with open(path, encoding="utf-8") as fh:
        return [QAPair.from_dict(json.loads(line)) for line in fh if line.strip()]
