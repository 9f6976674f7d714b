"""Shortcut filtering by scene ablation, and corpus deduplication.

A QA pair is a shortcut when some simplified scene (one entity removed,
or one joint glued rigid) gives the same answer within the reward
tolerance: a solver could then reach the right number with the wrong
physics.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .dsl import SceneSpec, _connected, canonical_hash, with_weld, without_entity
from .errors import CompileError, DSLError, PruneError
from .prune import PruneConfig
from .qa.generate import probe_horizon
from .qa.pairs import QAPair
from .runner import run_scene
from .sim import compile_scene
from .sim.trace import Trace

DEFAULT_TOL = 0.05
EPS = 1e-9


@dataclass
class AblationVariant:
    kind: str  # entity_removal | joint_glue
    target: str
    scene: SceneSpec
    trace: Trace | None = None
    error: str | None = None

    @property
    def key(self) -> dict:
        return {"kind": self.kind, "target": self.target}


def removable_entities(scene: SceneSpec) -> list[str]:
    """Entities whose removal leaves a nonempty connected entity graph."""
    out = []
    for name in scene.entity_names:
        rest = [n for n in scene.entity_names if n != name]
        conns = [c for c in scene.connections if name not in (c.a.entity, c.b.entity)]
        if rest and _connected(rest, conns):
            out.append(name)
    return out


def glueable_joints(scene: SceneSpec) -> list[str]:
    model = compile_scene(scene)
    return [j.id for j in model.joints if j.id not in scene.welds]


def variant_scene(scene: SceneSpec, kind: str, target: str) -> SceneSpec:
    if kind == "entity_removal":
        return without_entity(scene, target)
    if kind == "joint_glue":
        return with_weld(scene, target)
    raise ValueError(f"unknown ablation kind {kind!r}")


def _simulate(scene: SceneSpec, prune, dt, horizon):
    try:
        return run_scene(scene, prune, dt=dt, horizon=horizon), None
    except (CompileError, PruneError, DSLError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def enumerate_ablations(scene: SceneSpec, prune: PruneConfig | None = PruneConfig(), dt: float | None = None,
                        horizon: float | None = None, simulate: bool = True) -> list[AblationVariant]:
    """Every connectivity-preserving entity removal and every single-joint weld.

    ``dt`` and ``horizon`` should be those of the original trace. Variants
    whose simulation fails keep ``trace=None`` and record the error.
    """
    out = []
    for name in removable_entities(scene):
        out.append(AblationVariant("entity_removal", name, variant_scene(scene, "entity_removal", name)))
    for joint in glueable_joints(scene):
        out.append(AblationVariant("joint_glue", joint, variant_scene(scene, "joint_glue", joint)))
    if simulate:
        for v in out:
            v.trace, v.error = _simulate(v.scene, prune, dt, horizon)
    return out


def scene_variants(scene: SceneSpec, last_t: float, prune: PruneConfig | None = PruneConfig()):
    """Variants run with the original dt, just long enough to cover ``last_t``."""
    base = run_scene(scene, prune)
    dt = base.meta["dt"]
    return enumerate_ablations(scene, prune, dt, probe_horizon(last_t, dt, base.meta["horizon"], prune))


@dataclass
class ShortcutVerdict:
    shortcut: bool
    witness: dict | None = None
    original: float | None = None
    variant_answer: float | None = None
    delta: float | None = None
    skipped: list = field(default_factory=list)


def _reference(qa: QAPair) -> float:
    return qa.observed if qa.mode == "reverse" else qa.answer.value


def variant_answer(qa: QAPair, trace: Trace) -> float:
    """The probe of ``qa`` read on another trace; LookupError if unavailable."""
    p = qa.provenance
    if p["body"] not in trace.kinds:
        raise LookupError(f"{p['body']} absent from variant")
    return trace.probe(p["body"], p["quantity"], p["t"])


def same_answer(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= max(tol * abs(a), EPS)


def is_shortcut(qa: QAPair, variants: list[AblationVariant], tol: float = DEFAULT_TOL) -> ShortcutVerdict:
    """Shortcut iff some variant reproduces the answer within ``tol``.

    Reverse questions compare their stated observation, the quantity a
    solver would compute from the simplified scene.
    """
    if qa.mode == "symbolic":
        raise ValueError("symbolic questions are not probe-based")
    ref = _reference(qa)
    skipped = []
    for v in variants:
        if v.trace is None:
            skipped.append((v.kind, v.target, v.error))
            continue
        try:
            ans = variant_answer(qa, v.trace)
        except LookupError as exc:
            skipped.append((v.kind, v.target, str(exc)))
            continue
        if same_answer(ref, ans, tol):
            return ShortcutVerdict(True, v.key, ref, ans, abs(ans - ref), skipped)
    return ShortcutVerdict(False, None, ref, None, None, skipped)


def recheck_witness(qa: QAPair, witness: dict, tol: float = DEFAULT_TOL,
                    prune: PruneConfig | None = PruneConfig()) -> bool:
    """Re-simulate a stored witness variant and confirm the answer matches."""
    scene = variant_scene(qa.scene, witness["kind"], witness["target"])
    original = run_scene(qa.scene, prune)
    trace = run_scene(scene, prune, dt=original.meta["dt"], horizon=original.meta["horizon"])
    return same_answer(_reference(qa), variant_answer(qa, trace), tol)


def dedup_key(qa: QAPair) -> tuple:
    p = qa.provenance
    t = None if p["t"] is None else round(float(p["t"]), 6)
    masked = qa.answer.path if qa.mode == "reverse" else ""
    return (p["scene_hash"], qa.template, p["body"], p["quantity"], t, masked)


def filter_corpus(pairs: list[QAPair], tol: float = DEFAULT_TOL, dedup: bool = True,
                  prune: PruneConfig | None = PruneConfig()):
    """Deduplicate, then drop shortcut-solvable pairs.

    Returns ``(kept, discarded, stats)``. ``discarded`` holds log records
    ``{"qa_id", "reason", "witness", "delta", ...}``; kept pairs carry
    their verdicts in ``filter_verdicts``. The result does not depend on
    the input order.
    """
    pairs = sorted(pairs, key=lambda q: (dedup_key(q), q.id))
    stats = {"input": len(pairs), "duplicate": 0, "shortcut": 0, "symbolic_bypass": 0, "variant_errors": 0}
    kept, discarded = [], []
    seen = set()
    unique = []
    for qa in pairs:
        k = dedup_key(qa)
        if dedup and k in seen:
            stats["duplicate"] += 1
            discarded.append({"qa_id": qa.id, "reason": "duplicate", "witness": None, "delta": None})
            continue
        seen.add(k)
        unique.append(qa)

    last_t: dict[str, float] = {}
    for qa in unique:
        if qa.mode != "symbolic":
            h = canonical_hash(qa.scene)
            last_t[h] = max(last_t.get(h, 0.0), float(qa.provenance["t"]))
    variants_of: dict[str, list[AblationVariant]] = {}
    for qa in unique:
        verdicts = {"dedup": "pass"}
        if qa.mode == "symbolic":
            stats["symbolic_bypass"] += 1
            verdicts["shortcut"] = "bypass"
        else:
            h = canonical_hash(qa.scene)
            if h not in variants_of:
                variants_of[h] = scene_variants(qa.scene, last_t[h], prune)
                stats["variant_errors"] += sum(v.trace is None for v in variants_of[h])
            verdict = is_shortcut(qa, variants_of[h], tol)
            if verdict.shortcut:
                stats["shortcut"] += 1
                discarded.append({"qa_id": qa.id, "reason": "shortcut", "witness": verdict.witness,
                                  "delta": verdict.delta, "original": verdict.original,
                                  "variant_answer": verdict.variant_answer})
                continue
            verdicts["shortcut"] = "pass"
        qa.filter_verdicts.update(verdicts)
        kept.append(qa)

    kept.sort(key=lambda q: (q.provenance["scene_hash"], q.id))
    discarded.sort(key=lambda d: d["qa_id"])
    stats["kept"] = len(kept)
    stats["discarded"] = len(discarded)
    stats["discard_fraction"] = len(discarded) / len(pairs) if pairs else 0.0
    return kept, discarded, stats
