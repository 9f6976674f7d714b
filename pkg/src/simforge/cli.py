"""``forge`` command line: generate, score, correlate, inspect.

Exit codes: 0 ok, 1 partial (some scenes failed or some ids did not
match), 2 fatal.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from scipy import stats

from .dsl import canonical_hash, dump_scene, parse_scene
from .errors import ForgeError
from .pipeline import entity_kind, env_overrides, load_config, run_pipeline
from .qa.describe import describe_scene
from .qa.pairs import QAPair, read_jsonl
from .reward import verify_answer, verify_symbolic
from .sim import compile_scene, simulate

OK, PARTIAL, FATAL = 0, 1, 2


# -- generate ------------------------------------------------------------------------


def cmd_generate(args) -> int:
    cfg = load_config(args.config)
    # config file < environment < flags
    cfg = replace(cfg, **env_overrides())
    flags = {"seed": args.seed, "count": args.count, "out": args.out, "workers": args.workers}
    cfg = replace(cfg, **{k: v for k, v in flags.items() if v is not None})
    prune = {"window": args.window, "k": args.k}
    if any(v is not None for v in prune.values()):
        cfg = replace(cfg, prune=replace(cfg.prune, **{k: v for k, v in prune.items() if v is not None}))
    manifest = run_pipeline(cfg)
    c = manifest["counts"]
    print(f"scenes {c['scenes']['scenes']}  generated {c['generated']}  kept {c['kept']}  "
          f"discard fraction {c['discard_fraction']:.3f}  -> {cfg.out}")
    for reason, n in sorted(c["discarded"].items()):
        print(f"  discarded ({reason}): {n}")
    if manifest["errors"]:
        print(f"  scene errors: {c['scenes']['scenes'] - c['scenes']['ok']}", file=sys.stderr)
        return PARTIAL
    return OK


# -- score ---------------------------------------------------------------------------


def load_corpus(path) -> list[QAPair]:
    """A shard file, or a corpus directory (every shard listed in its manifest)."""
    path = Path(path)
    if path.is_dir():
        manifest = json.loads((path / "manifest.json").read_text(encoding="utf-8"))
        pairs = []
        for shard in manifest["shards"]:
            pairs.extend(read_jsonl(path / shard["file"]))
        return pairs
    return read_jsonl(path)


def load_answers(path) -> dict:
    """JSONL lines ``{"id": ..., "answer": ...}`` or one JSON object ``{id: answer}``."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = None
    if isinstance(data, dict):
        return data
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        if line.strip():
            try:
                rec = json.loads(line)
                out[rec["id"]] = rec["answer"]
            except (json.JSONDecodeError, KeyError, TypeError):
                raise ForgeError(f"{path}:{n}: expected {{\"id\": ..., \"answer\": ...}}") from None
    return out


def score_item(qa: QAPair, predicted) -> int:
    if qa.mode == "symbolic":
        return verify_symbolic(predicted, qa.answer.expression, qa.answer.symbols)
    return verify_answer(predicted, qa.answer.value)


def score(pairs: list[QAPair], answers: dict) -> dict:
    """Accuracy over the corpus (missing answers score 0) with strata."""
    strata: dict[str, dict] = {}
    correct = 0
    missing = []
    for qa in sorted(pairs, key=lambda q: q.id):
        r = score_item(qa, answers[qa.id]) if qa.id in answers else 0
        if qa.id not in answers:
            missing.append(qa.id)
        correct += r
        key = f"{entity_kind(qa)}|{qa.provenance['quantity']}|{qa.mode}"
        s = strata.setdefault(key, {"n": 0, "correct": 0})
        s["n"] += 1
        s["correct"] += r
    for s in strata.values():
        s["accuracy"] = s["correct"] / s["n"]
    ids = {q.id for q in pairs}
    return {
        "n_items": len(pairs),
        "n_answered": len(pairs) - len(missing),
        "correct": correct,
        "accuracy": correct / len(pairs) if pairs else 0.0,
        "missing": missing,
        "unmatched": sorted(k for k in answers if k not in ids),
        "strata": dict(sorted(strata.items())),
    }


def cmd_score(args) -> int:
    report = score(load_corpus(args.corpus), load_answers(args.answers))
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    print(f"accuracy {report['accuracy']:.4f} ({report['correct']}/{report['n_items']})")
    if report["missing"] or report["unmatched"]:
        print(f"  {len(report['missing'])} items unanswered, {len(report['unmatched'])} answer ids unmatched",
              file=sys.stderr)
        return PARTIAL
    return OK


# -- correlate -----------------------------------------------------------------------


def _numbers(arg: str) -> list[float]:
    p = Path(arg)
    if p.is_file():
        data = json.loads(p.read_text(encoding="utf-8"))
        if isinstance(data, dict):
            data = [data[k] for k in sorted(data)]
        return [float(x) for x in data]
    return [float(x) for x in arg.split(",")]


def spearman(x, y) -> float:
    if len(x) != len(y) or len(x) < 2:
        raise ForgeError("spearman needs two equally long lists of at least two values")
    return float(stats.spearmanr(x, y).statistic)


def cmd_correlate(args) -> int:
    rho = spearman(_numbers(args.x), _numbers(args.y))
    print(f"spearman rho {rho:.4f}")
    return OK


# -- inspect -------------------------------------------------------------------------


def cmd_inspect(args) -> int:
    scene = parse_scene(Path(args.scene).read_text(encoding="utf-8"))
    model = compile_scene(scene)
    print(f"scene {scene.name}  hash {canonical_hash(scene)}")
    print(describe_scene(scene))
    print(f"dof {model.n}  dt {model.dt:.6g}  horizon {model.horizon:.6g}")
    print("joints: " + (", ".join(j.id for j in model.joints) or "none"))
    if args.canonical:
        print(dump_scene(scene), end="")
    if args.simulate:
        trace = simulate(model)
        print(f"samples {len(trace)}  last t {trace.last_time:.6g}  stops {trace.meta.get('stops', [])}")
        for target in trace.targets:
            print(f"  {target} ({trace.kinds[target]}): {', '.join(trace.quantities(target))}")
    return OK


# -- entry point ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="forge", description="Physics scene QA corpus tools.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a filtered QA corpus")
    g.add_argument("--config", help="YAML or JSON pipeline config")
    g.add_argument("--seed", type=int)
    g.add_argument("--count", type=int, help="QA pairs to generate before filtering")
    g.add_argument("--out", help="output directory")
    g.add_argument("--workers", type=int)
    g.add_argument("--window", type=int, help="spike detection window, samples")
    g.add_argument("--k", type=float, help="spike threshold in window standard deviations")
    g.set_defaults(fn=cmd_generate)

    s = sub.add_parser("score", help="score an answer file against a corpus")
    s.add_argument("--answers", required=True)
    s.add_argument("--corpus", required=True, help="corpus directory or JSONL shard")
    s.add_argument("--report", help="write the JSON report here")
    s.set_defaults(fn=cmd_score)

    c = sub.add_parser("correlate", help="Spearman rank correlation of two score lists")
    c.add_argument("--x", required=True, help="comma separated numbers or a JSON file")
    c.add_argument("--y", required=True, help="comma separated numbers or a JSON file")
    c.set_defaults(fn=cmd_correlate)

    i = sub.add_parser("inspect", help="validate, compile and describe a scene file")
    i.add_argument("--scene", required=True)
    i.add_argument("--simulate", action="store_true", help="also run the simulation")
    i.add_argument("--canonical", action="store_true", help="print the canonical serialization")
    i.set_defaults(fn=cmd_inspect)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ForgeError, OSError, ValueError) as exc:
        print(f"forge {args.command}: {exc}", file=sys.stderr)
        return FATAL


if __name__ == "__main__":
    sys.exit(main())
