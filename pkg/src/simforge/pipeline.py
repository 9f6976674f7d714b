"""Corpus generation: scenes -> traces -> QA pairs -> filtered JSONL shards.

Scene ``i`` of a run is generated from the child seed ``(seed, i)`` and
processed independently of every other scene, so the corpus does not
depend on how scenes are spread over worker processes. Scenes are taken
in index order until ``count`` QA pairs have been generated; the pairs
are then deduplicated, shortcut pairs are dropped and the rest are
written sorted by scene hash and pair id.
"""
from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np
import yaml

from .dsl import canonical_hash
from .errors import ForgeError, PruneError
from .filter import DEFAULT_TOL, dedup_key, is_shortcut, scene_variants
from .prune import PruneConfig
from .qa.generate import QAConfig, generate_for_scene
from .qa.pairs import QAPair
from .runner import run_scene
from .scene_gen import GenConfig, derive_seed, generate_scene

SCHEMA_VERSION = 1
MAX_LOGGED_ERRORS = 50
# what one bad scene may raise without taking the corpus down
SCENE_ERRORS = (ForgeError, ArithmeticError, ValueError, np.linalg.LinAlgError)


@dataclass(frozen=True)
class FilterConfig:
    tol: float = DEFAULT_TOL
    dedup: bool = True


@dataclass(frozen=True)
class PipelineConfig:
    gen: GenConfig = GenConfig()
    prune: PruneConfig = PruneConfig()
    qa: QAConfig = QAConfig()
    filter: FilterConfig = FilterConfig()
    out: str = "corpus"
    shard_size: int = 500
    seed: int = 0
    count: int = 1000
    workers: int = 1
    chunk: int = 16  # scenes per scheduling round

    def __post_init__(self):
        if self.shard_size < 1:
            raise ForgeError("shard_size must be >= 1")
        if self.count < 1:
            raise ForgeError("count must be >= 1")
        if self.workers < 1:
            raise ForgeError("workers must be >= 1")

    def to_dict(self) -> dict:
        """Everything that determines the corpus (not where or how fast it is written)."""
        gen = asdict(self.gen)
        gen["allowed_entity_kinds"] = sorted(self.gen.allowed_entity_kinds)
        gen["entity_count_range"] = list(self.gen.entity_count_range)
        gen["parameter_ranges"] = {k: list(v) for k, v in sorted(self.gen.parameter_ranges.items())}
        gen.pop("rng_seed")
        qa = asdict(self.qa)
        qa["modes"] = list(self.qa.modes)
        qa["t_window"] = list(self.qa.t_window)
        return {"gen": gen, "prune": asdict(self.prune), "qa": qa, "filter": asdict(self.filter),
                "shard_size": self.shard_size, "seed": self.seed, "count": self.count}

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


def _tuple(v):
    return tuple(v) if isinstance(v, list) else v


def load_config(path: str | None = None, **overrides) -> PipelineConfig:
    """Read a YAML or JSON config; keys mirror PipelineConfig and its sections."""
    data = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ForgeError("config file must hold a mapping")
    unknown = set(data) - {"gen", "prune", "qa", "filter", "out", "shard_size", "seed", "count", "workers", "chunk"}
    if unknown:
        raise ForgeError(f"unknown config keys {sorted(unknown)}")
    try:
        gen = dict(data.get("gen") or {})
        if "allowed_entity_kinds" in gen:
            gen["allowed_entity_kinds"] = frozenset(gen["allowed_entity_kinds"])
        if "entity_count_range" in gen:
            gen["entity_count_range"] = tuple(gen["entity_count_range"])
        if "parameter_ranges" in gen:
            gen["parameter_ranges"] = {k: tuple(v) for k, v in gen["parameter_ranges"].items()}
        qa = {k: _tuple(v) for k, v in (data.get("qa") or {}).items()}
        cfg = PipelineConfig(
            gen=GenConfig(**gen),
            prune=PruneConfig(**(data.get("prune") or {})),
            qa=QAConfig(**qa),
            filter=FilterConfig(**(data.get("filter") or {})),
            **{k: data[k] for k in ("out", "shard_size", "seed", "count", "workers", "chunk") if k in data},
        )
    except TypeError as exc:
        raise ForgeError(f"bad config: {exc}") from None
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, **overrides) if overrides else cfg


# -- per-scene work ----------------------------------------------------------------


def process_scene(cfg: PipelineConfig, index: int) -> dict:
    """Generate, simulate and question scene ``index``; scene failures become a status."""
    seed = derive_seed(cfg.seed, index)
    out = {"index": index, "seed": seed, "status": "ok", "pairs": [], "shortcut": {}, "fails": {}}
    try:
        scene = generate_scene(replace(cfg.gen, rng_seed=seed))
    except SCENE_ERRORS as exc:
        out.update(status="generation_error", error=f"{type(exc).__name__}: {exc}")
        return out
    out["scene_hash"] = canonical_hash(scene)
    out["kinds"] = sorted(e.kind for e in scene.entities)
    try:
        trace = run_scene(scene, cfg.prune)
    except SCENE_ERRORS as exc:
        status = "prune_rejected" if isinstance(exc, PruneError) else "simulation_error"
        out.update(status=status, error=f"{type(exc).__name__}: {exc}")
        return out
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, index, 1]))
    try:
        pairs, fails = generate_for_scene(scene, trace, cfg.qa, rng, cfg.prune)
        probe_pairs = [q for q in pairs if q.mode != "symbolic"]
        if probe_pairs:
            last_t = max(float(q.provenance["t"]) for q in probe_pairs)
            variants = scene_variants(scene, last_t, cfg.prune)
            for q in probe_pairs:
                v = is_shortcut(q, variants, cfg.filter.tol)
                if v.shortcut:
                    out["shortcut"][q.id] = {"witness": v.witness, "delta": v.delta, "original": v.original,
                                             "variant_answer": v.variant_answer}
    except SCENE_ERRORS as exc:
        out.update(status="qa_error", error=f"{type(exc).__name__}: {exc}")
        return out
    out["pairs"] = [q.to_dict() for q in pairs]
    out["fails"] = fails
    return out


def _worker(args):
    cfg, index = args
    return process_scene(cfg, index)


def _scene_results(cfg: PipelineConfig):
    """Per-scene results in index order, computed ``chunk`` scenes at a time."""
    index = 0
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        while True:
            batch = [(cfg, i) for i in range(index, index + cfg.chunk)]
            results = pool.map(_worker, batch) if pool else map(_worker, batch)
            for r in results:
                yield r
            index += cfg.chunk
    finally:
        if pool:
            pool.shutdown(cancel_futures=True)


# -- assembly --------------------------------------------------------------------


def entity_kind(qa: QAPair) -> str:
    """Kind of the entity a question is about (the lower endpoint for links)."""
    body = qa.provenance["body"]
    name = body.split("~")[0].split(".")[0]
    return qa.scene.entity(name).kind


def run_pipeline(cfg: PipelineConfig, max_scenes: int | None = None) -> dict:
    """Generate the corpus described by ``cfg``; returns the manifest."""
    max_scenes = max_scenes or max(100, 50 * cfg.count)
    scene_counts = {"scenes": 0, "ok": 0}
    errors, fails = [], {}
    generated: list[tuple[QAPair, dict | None]] = []
    seeds = []
    for r in _scene_results(cfg):
        scene_counts["scenes"] += 1
        scene_counts[r["status"]] = scene_counts.get(r["status"], 0) + 1
        seeds.append(r["seed"])
        if r["status"] != "ok":
            if len(errors) < MAX_LOGGED_ERRORS:
                errors.append({"index": r["index"], "seed": r["seed"], "status": r["status"], "error": r["error"]})
        for k, v in r["fails"].items():
            fails[k] = fails.get(k, 0) + v
        for d in r["pairs"]:
            qa = QAPair.from_dict(d)
            generated.append((qa, r["shortcut"].get(qa.id)))
            if len(generated) == cfg.count:
                break
        if len(generated) >= cfg.count or scene_counts["scenes"] >= max_scenes:
            break

    # dedup on the ordered stream, then shortcut removal
    kept, discards = [], []
    seen = set()
    for qa, short in sorted(generated, key=lambda x: (dedup_key(x[0]), x[0].id)):
        key = dedup_key(qa)
        if cfg.filter.dedup and key in seen:
            discards.append({"qa_id": qa.id, "reason": "duplicate", "witness": None, "delta": None})
            continue
        seen.add(key)
        qa.filter_verdicts["dedup"] = "pass"
        if qa.mode == "symbolic":
            qa.filter_verdicts["shortcut"] = "bypass"
        elif short is not None:
            discards.append({"qa_id": qa.id, "reason": "shortcut", **short})
            continue
        else:
            qa.filter_verdicts["shortcut"] = "pass"
        kept.append(qa)
    kept.sort(key=lambda q: (q.provenance["scene_hash"], q.id))
    discards.sort(key=lambda d: d["qa_id"])

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for old in out.glob("qa-*.jsonl"):
        old.unlink()
    shards = []
    for start in range(0, len(kept), cfg.shard_size):
        lines = "".join(q.to_json() + "\n" for q in kept[start:start + cfg.shard_size]).encode()
        digest = hashlib.sha256(lines).hexdigest()
        name = f"qa-{digest[:16]}.jsonl"
        (out / name).write_bytes(lines)
        shards.append({"file": name, "sha256": digest, "count": len(kept[start:start + cfg.shard_size])})
    discard_bytes = "".join(json.dumps(d, sort_keys=True, separators=(",", ":")) + "\n" for d in discards).encode()
    (out / "discards.jsonl").write_bytes(discard_bytes)

    by_reason = {}
    for d in discards:
        by_reason[d["reason"]] = by_reason.get(d["reason"], 0) + 1
    per_mode = {m: {"generated": 0, "kept": 0} for m in cfg.qa.modes}
    for qa, _ in generated:
        per_mode[qa.mode]["generated"] += 1
    for qa in kept:
        per_mode[qa.mode]["kept"] += 1
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "config": cfg.to_dict(),
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "scene_seeds": seeds,
        "counts": {
            "generated": len(generated),
            "discarded": by_reason,
            "kept": len(kept),
            "discard_fraction": (len(generated) - len(kept)) / len(generated) if generated else 0.0,
            "per_mode": per_mode,
            "scenes": scene_counts,
            "qa_failures": dict(sorted(fails.items())),
        },
        "shards": shards,
        "discard_log": {"file": "discards.jsonl", "sha256": hashlib.sha256(discard_bytes).hexdigest()},
        "errors": errors,
    }
    text = json.dumps(manifest, sort_keys=True, indent=2) + "\n"
    (out / "manifest.json").write_text(text, encoding="utf-8")
    manifest["manifest_sha256"] = hashlib.sha256(text.encode()).hexdigest()
    return manifest


def env_overrides() -> dict:
    """Seed and worker count from FORGE_SEED / FORGE_WORKERS."""
    out = {}
    if os.environ.get("FORGE_SEED"):
        out["seed"] = int(os.environ["FORGE_SEED"])
    if os.environ.get("FORGE_WORKERS"):
        out["workers"] = int(os.environ["FORGE_WORKERS"])
    return out
