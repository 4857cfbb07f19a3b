"""Command-line interface for the full lifecycle: ingest, synth, train,
diagnose, evaluate, meta-eval, serve.
"""
from __future__ import annotations

import argparse
import json
import sys
from collections import defaultdict
from pathlib import Path
from typing import Dict, Optional, Sequence

from .config import ConfigError, EngineConfig, load_config
from .corpus import (
    CorpusError,
    ErrorLabelSet,
    load_human_scores,
    load_samples,
    save_samples,
)
from .evaluator import (
    EvaluationFailure,
    EvaluationRequest,
    PromptMode,
    binary_answerability_criteria,
    default_criteria,
    evaluate_batch,
)
from .identifier import (
    decide_labels,
    load_identifier,
    predict_confidences_batch,
    sample_confidence,
)
from .metrics import MetricError, overestimation_rate, pearson
from .refinement import (
    StateLock,
    StateLockHeld,
    init_state,
    select_checkpoint,
    train_loop,
)
from .synthesis import SeedExample, synthesize
from .taxonomy import Dimension

__all__ = ["main", "build_parser"]


def _fail(message: str, code: int = 1) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load_config(args: argparse.Namespace) -> EngineConfig:
    overrides: Dict[str, object] = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "state_dir", None):
        overrides["state_dir"] = args.state_dir
    if getattr(args, "backend", None):
        overrides["backend"] = args.backend
    if getattr(args, "port", None) is not None:
        overrides["service_port"] = args.port
    return load_config(args.config, overrides)


def _write_jsonl(records: Sequence[dict], path: Optional[str]) -> None:
    lines = [json.dumps(r, ensure_ascii=False, separators=(",", ":")) for r in records]
    if path is None or path == "-":
        for line in lines:
            print(line)
    else:
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def cmd_ingest(args: argparse.Namespace) -> int:
    dataset = load_samples(args.input, kind=args.kind)
    save_samples(dataset, args.out)
    print(f"ingested {len(dataset)} samples -> {args.out}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    config = _load_config(args)
    seeds = [
        SeedExample(sample=item.sample, labels=item.labels)
        for item in load_samples(args.seeds, kind="labeled")
    ]
    pool = load_samples(args.pairs, kind="unlabeled")
    pairs = [(s.passage, s.answer) for s in pool]
    targets = [ErrorLabelSet.from_codes(code.split("+")) for code in args.targets.split(",")]
    kept = synthesize(
        generator=config.make_backend(),
        judges=config.make_judges(),
        seeds=seeds,
        pairs=pairs,
        targets=targets,
        quorum=args.quorum,
        tau_conf=args.tau_conf,
    )
    save_samples(kept, args.out)
    print(f"kept {len(kept)} of {len(pairs) * len(targets)} candidates -> {args.out}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    config = _load_config(args)
    training = load_samples(args.init, kind="labeled")
    pool = load_samples(args.pool, kind="unlabeled") if args.pool else []
    dev = load_samples(args.dev, kind="labeled")
    reviewer = None
    if args.review_oracle:
        gold = {
            item.sample.id: item.labels
            for item in load_samples(args.review_oracle, kind="labeled")
        }
        reviewer = lambda item: gold.get(item.sample.id)
    state = init_state(training, pool, dev)
    refinement = config.refinement_config()
    iterations = args.iterations or refinement.max_iterations
    try:
        with StateLock(config.state_dir):
            records = train_loop(
                state,
                refinement,
                iterations=iterations,
                state_dir=config.state_dir,
                reviewer=reviewer,
            )
    except StateLockHeld as exc:
        return _fail(str(exc), code=3)
    for record in records:
        print(
            f"iter {record.index}: micro_f1={record.micro_f1:.4f} "
            f"macro_f1={record.macro_f1:.4f} emr={record.emr:.4f} opr={record.opr:.4f} "
            f"train={record.train_size} (+{record.added_reliable} reliable, "
            f"+{record.added_human} human)"
        )
    best = select_checkpoint(records)
    print(f"best checkpoint: iter_{records[best].index} (dev micro_f1 {records[best].micro_f1:.4f})")
    return 0


def _latest_checkpoint(state_dir: str) -> Path:
    state = Path(state_dir)
    iter_dirs = sorted(
        (p for p in state.glob("iter_*") if p.is_dir()),
        key=lambda p: int(p.name.split("_")[1]),
    )
    if not iter_dirs:
        raise FileNotFoundError(f"no iteration checkpoints under {state_dir}")
    return iter_dirs[-1] / "ei.ckpt"


def _resolve_identifier(args: argparse.Namespace, config: EngineConfig):
    path = args.checkpoint or _latest_checkpoint(config.state_dir)
    return load_identifier(path)


def cmd_diagnose(args: argparse.Namespace) -> int:
    config = _load_config(args)
    samples = load_samples(args.input, kind="unlabeled")
    model = _resolve_identifier(args, config)
    conf = predict_confidences_batch(model, samples)
    records = []
    for sample, row in zip(samples, conf):
        labels = decide_labels(row, model.decision_threshold)
        records.append(
            {
                "sample_id": sample.id,
                "labels": labels.to_codes(),
                "confidences": [float(c) for c in row],
                "p_e": sample_confidence(row, labels),
            }
        )
    _write_jsonl(records, args.out)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _load_config(args)
    mode = PromptMode(args.mode)
    dimension = Dimension(args.dimension)
    criteria = (
        binary_answerability_criteria()
        if args.scale == "binary"
        else default_criteria(dimension)
    )
    backend = config.make_backend()

    diagnostics: Dict[str, ErrorLabelSet] = {}
    if mode is PromptMode.ERROR_AWARE:
        if args.diagnostics == "gold":
            labeled = load_samples(args.input, kind="labeled")
            samples = [item.sample for item in labeled]
            diagnostics = {item.sample.id: item.labels for item in labeled}
        else:
            samples = load_samples(args.input, kind="unlabeled")
            model = _resolve_identifier(args, config)
            conf = predict_confidences_batch(model, samples)
            diagnostics = {
                s.id: decide_labels(row, model.decision_threshold)
                for s, row in zip(samples, conf)
            }
    else:
        try:
            samples = load_samples(args.input, kind="unlabeled")
        except CorpusError:
            samples = [item.sample for item in load_samples(args.input, kind="labeled")]

    requests = [
        EvaluationRequest(
            sample=s,
            criteria=criteria,
            mode=mode,
            diagnostics=diagnostics.get(s.id),
        )
        for s in samples
    ]
    results = evaluate_batch(backend, requests, max_inflight=args.max_inflight)
    records = []
    for result in results:
        if isinstance(result, EvaluationFailure):
            records.append(
                {
                    "sample_id": result.sample_id,
                    "dimension": result.dimension.value,
                    "mode": result.mode.value,
                    "error": result.error,
                    "detail": result.detail,
                }
            )
        else:
            records.append(
                {
                    "sample_id": result.sample_id,
                    "dimension": result.dimension.value,
                    "mode": result.mode.value,
                    "score": result.score,
                    "reason": result.reason,
                    "backend": result.backend_id,
                    "prompt_hash": result.prompt_hash,
                }
            )
    _write_jsonl(records, args.out)
    failures = sum(1 for r in records if "error" in r)
    if failures:
        print(f"{failures} of {len(records)} evaluations failed", file=sys.stderr)
    return 0


def cmd_meta_eval(args: argparse.Namespace) -> int:
    human = load_human_scores(args.human)
    human_by_key = {(r.sample_id, r.dimension): r.score for r in human}
    predictions = defaultdict(list)
    for line in Path(args.pred).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        if "score" not in record:
            continue
        key = (record["sample_id"], Dimension(record["dimension"]))
        if key in human_by_key:
            predictions[key[1]].append((human_by_key[key], record["score"]))

    if not predictions:
        return _fail("no overlapping (sample, dimension) pairs between pred and human")

    rows = []
    print(f"{'dimension':<20} {'n':>5} {'pearson':>9} {'overr':>7}")
    for dimension in Dimension:
        paired = predictions.get(dimension)
        if not paired:
            continue
        h = [p[0] for p in paired]
        m = [p[1] for p in paired]
        try:
            r = pearson(h, m)
            r_text = f"{r:9.4f}"
        except MetricError:
            r = None
            r_text = f"{'--':>9}"
        try:
            overr = overestimation_rate(h, m)
            overr_text = f"{overr:7.4f}"
        except MetricError:
            overr = None
            overr_text = f"{'--':>7}"
        print(f"{dimension.value:<20} {len(paired):>5} {r_text} {overr_text}")
        rows.append(
            {
                "dimension": dimension.value,
                "n": len(paired),
                "pearson": r,
                "overestimation_rate": overr,
            }
        )
    if args.out:
        _write_jsonl(rows, args.out)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    config = _load_config(args)
    from .service import run_server

    run_server(config)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qgdiag",
        description="Error-aware evaluation engine for generated questions.",
    )
    parser.add_argument("--config", help="path to a key = value config file")
    parser.add_argument("--seed", type=int, help="override the config seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and canonicalize a sample file")
    p.add_argument("--input", required=True)
    p.add_argument("--kind", choices=["labeled", "unlabeled"], default="labeled")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("synth", help="LLM error simulation with agreement filtering")
    p.add_argument("--seeds", required=True, help="labeled seed examples (.jsonl)")
    p.add_argument("--pairs", required=True, help="passage/answer pool (.jsonl)")
    p.add_argument(
        "--targets",
        default="Inc,NAQ,Spell,Gram,Vag,Copy,OTP,Fact,INM,OTA,NoErr",
        help="comma-separated target label sets; combine labels with +",
    )
    p.add_argument("--quorum", type=int, default=2)
    p.add_argument("--tau-conf", type=float, default=0.8)
    p.add_argument("--backend", choices=["mock", "http"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="run refinement iterations")
    p.add_argument("--init", required=True, help="initial labeled training set (.jsonl)")
    p.add_argument("--pool", help="unlabeled question pool (.jsonl)")
    p.add_argument("--dev", required=True, help="labeled dev set (.jsonl)")
    p.add_argument("--iterations", type=int)
    p.add_argument("--state-dir")
    p.add_argument(
        "--review-oracle",
        help="labeled .jsonl consulted to auto-answer review items (testing)",
    )
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("diagnose", help="predict error labels for samples")
    p.add_argument("--input", required=True)
    p.add_argument("--checkpoint", help="ei.ckpt path (default: latest in state dir)")
    p.add_argument("--state-dir")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("evaluate", help="score samples on a dimension via an LLM backend")
    p.add_argument("--input", required=True)
    p.add_argument("--dimension", required=True, choices=[d.value for d in Dimension])
    p.add_argument("--mode", choices=[m.value for m in PromptMode], default="vanilla")
    p.add_argument("--scale", choices=["likert3", "binary"], default="likert3")
    p.add_argument(
        "--diagnostics",
        choices=["ei", "gold"],
        default="ei",
        help="diagnostics source for error-aware mode",
    )
    p.add_argument("--backend", choices=["mock", "http"])
    p.add_argument("--checkpoint")
    p.add_argument("--state-dir")
    p.add_argument("--max-inflight", type=int, default=4)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("meta-eval", help="per-dimension alignment with human scores")
    p.add_argument("--pred", required=True, help="evaluation results (.jsonl)")
    p.add_argument("--human", required=True, help="human scores (.jsonl)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_meta_eval)

    p = sub.add_parser("serve", help="run the review/evaluation HTTP service")
    p.add_argument("--port", type=int)
    p.add_argument("--state-dir")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CorpusError, MetricError, FileNotFoundError, ValueError) as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
