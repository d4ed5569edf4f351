"""Command-line entry point.

Subcommands: ``process`` (run the staged pipeline), ``label`` (propagate
seed annotations), ``train-ood`` (fit the rejection SVM), ``eval`` (score
predictions), ``bench`` (stage-subset latency comparison), ``serve``
(annotation HTTP service).  Exit codes: 0 success, 1 invalid input,
2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .annodoc import SOURCE_HUMAN, AnnotationDocument
from .autolabel import PropagationConfig, propagate_annotations
from .config import ConfigError, build_pipeline_config, load_config_file
from .frameio import DecodeError, iter_source
from .imgcore import Frame
from .metrics import match_and_score
from .ood import EdgeGridExtractor, svm_train
from .pipeline import MockSpotter, run_pipeline

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the contract here is exit 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


class CliError(Exception):
    """Invalid input detected after argument parsing."""


def _build_parser() -> _Parser:
    parser = _Parser(prog="e2vts",
                     description="Energy-aware video text-spotting toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("process", parents=[], help="run the staged pipeline")
    p.add_argument("--frames", required=True,
                   help="frame directory or .y4m file")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--trace", help="write the per-frame trace JSON here")
    p.add_argument("--metrics", help="write the stage metrics JSON here")
    p.add_argument("--stages", default=None,
                   help="comma list of enabled stages, e.g. '1,2,3' or 'none'")
    p.add_argument("--ood-model", help="OOD model JSON (enables stage 3 input)")
    p.add_argument("--spotter", default="none",
                   help="downstream spotter: none | cost:<ms> | echo:<gt.json>")
    p.add_argument("--no-timings", action="store_true",
                   help="record zero durations so outputs are byte-reproducible")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("label", help="propagate seed annotations over frames")
    p.add_argument("--frames", required=True)
    p.add_argument("--seed", dest="seed_doc", required=True,
                   help="annotation document seeding the first frame")
    p.add_argument("--out", required=True)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--ratio", type=float, default=0.75)
    p.add_argument("--inlier-px", type=float, default=3.0)

    p = sub.add_parser("train-ood", help="train the rejection SVM")
    p.add_argument("--pos", required=True, help="directory of accept examples")
    p.add_argument("--neg", required=True, help="directory of reject examples")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reg", type=float, default=1e-4)
    p.add_argument("--epochs", type=int, default=100)

    p = sub.add_parser("eval", help="score predictions against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--report", required=True)

    p = sub.add_parser("bench", help="compare latency across stage subsets")
    p.add_argument("--frames", required=True)
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--ood-model")
    p.add_argument("--spotter", default="cost:5")
    p.add_argument("--out", help="write the comparison JSON here")

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--port", type=int, default=8731)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data", required=True, help="session storage directory")
    p.add_argument("--ui", help="serve this directory of static UI files at /")
    return parser


def _make_spotter(spec: str, seed: int) -> MockSpotter:
    if spec == "none":
        return MockSpotter()
    if spec.startswith("cost:"):
        return MockSpotter(cost_ms=float(spec[5:]))
    if spec.startswith("echo:"):
        doc = AnnotationDocument.load(spec[5:])
        return MockSpotter(echo=doc, seed=seed)
    raise CliError(f"unknown spotter spec {spec!r}")


def _pipeline_config(args) -> "PipelineConfig":
    values = load_config_file(args.config) if args.config else {}
    cfg = build_pipeline_config(values)
    if getattr(args, "stages", None) is not None:
        wanted = {s.strip() for s in args.stages.split(",") if s.strip()}
        if args.stages.strip().lower() in ("none", ""):
            wanted = set()
        unknown = wanted - {"1", "2", "3"}
        if unknown:
            raise CliError(f"unknown stages {sorted(unknown)}")
        cfg.stage1 = "1" in wanted
        cfg.stage2 = "2" in wanted
        cfg.stage3 = "3" in wanted
    if getattr(args, "ood_model", None):
        cfg.ood_model_path = args.ood_model
    if getattr(args, "no_timings", False):
        cfg.record_timings = False
    if getattr(args, "threads", None):
        cfg.threads = args.threads
    return cfg


def _cmd_process(args) -> int:
    cfg = _pipeline_config(args)
    spotter = _make_spotter(args.spotter, args.seed)
    result = run_pipeline(iter_source(args.frames), cfg, spotter)
    if args.trace:
        Path(args.trace).write_text(result.trace_json())
    if args.metrics:
        Path(args.metrics).write_text(result.metrics.to_json())
    spotted = sum(1 for e in result.trace if e.get("fate") == "spotted")
    print(f"processed {len(result.trace)} frames, stages {cfg.stages_label()}, "
          f"{spotted} spotted")
    return EXIT_OK


def _cmd_label(args) -> int:
    seed_doc = AnnotationDocument.load(args.seed_doc)
    frames = []
    for _, handle in iter_source(args.frames):
        frames.append(handle.load())
    if not frames:
        raise CliError("no frames found")
    seeds = seed_doc.annotations_for(frames[0].index)
    if not seeds:
        raise CliError("seed document has no annotations for the first frame")
    for ann in seeds:
        ann.source = SOURCE_HUMAN
    cfg = PropagationConfig(ratio=args.ratio, inlier_px=args.inlier_px,
                            seed=args.rng_seed)
    result = propagate_annotations(frames, seeds, cfg)
    result.to_document().save(args.out)
    status = "completed" if result.completed else f"halted at {result.halted_at}"
    print(f"labeled {len(result.frames)} of {len(frames)} frames ({status})")
    return EXIT_OK


def _load_dir_frames(directory: str) -> list[Frame]:
    frames = []
    for index, handle in iter_source(directory):
        try:
            frames.append(handle.load())
        except DecodeError as exc:
            print(f"warning: skipping {exc}", file=sys.stderr)
    return frames


def _cmd_train_ood(args) -> int:
    extractor = EdgeGridExtractor()
    samples, labels = [], []
    for directory, label in ((args.pos, 1), (args.neg, -1)):
        frames = _load_dir_frames(directory)
        if not frames:
            raise CliError(f"no usable frames in {directory}")
        for frame in frames:
            samples.append(extractor(frame))
            labels.append(label)
    model = svm_train(samples, labels, reg=args.reg, epochs=args.epochs,
                      seed=args.seed)
    model.extractor_id = extractor.extractor_id
    model.extractor_params = extractor.params()
    model.save(args.out)
    correct = sum(1 for s, l in zip(samples, labels)
                  if (model.decision_value(s) >= 0) == (l > 0))
    print(f"trained on {len(samples)} samples, "
          f"training accuracy {correct / len(samples):.3f}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    preds = AnnotationDocument.load(args.pred)
    gts = AnnotationDocument.load(args.gt)
    report = match_and_score(preds, gts)
    Path(args.report).write_text(
        json.dumps(report.to_dict(), sort_keys=True, indent=1) + "\n")
    print(f"gt={len(report.per_gt)} meanIoU={report.mean_iou:.4f} "
          f"meanIoP={report.mean_iop:.4f} meanIoG={report.mean_iog:.4f} "
          f"meanED={report.mean_edit_distance:.3f}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    values = load_config_file(args.config) if args.config else {}
    base = build_pipeline_config(values)
    if args.ood_model:
        base.ood_model_path = args.ood_model
    subsets = [(s1, s2, s3)
               for s1 in (False, True)
               for s2 in (False, True)
               for s3 in (False, True)]
    rows = []
    handles = list(iter_source(args.frames))
    for s1, s2, s3 in subsets:
        if s3 and not base.ood_model_path:
            continue
        cfg = build_pipeline_config(values)
        cfg.stage1, cfg.stage2, cfg.stage3 = s1, s2, s3
        cfg.ood_model_path = base.ood_model_path
        spotter = _make_spotter(args.spotter, 0)
        result = run_pipeline(handles, cfg, spotter)
        totals = result.metrics.totals()
        rows.append({
            "stages": cfg.stages_label(),
            "spotter_calls": result.metrics.entry("spotter").invocations,
            "wall_ms": totals["wall_ns"] / 1e6,
            "cpu_ms": totals["cpu_ns"] / 1e6,
        })
    baseline = next((r["wall_ms"] for r in rows if r["stages"] == "none"), None)
    for row in rows:
        row["relative_latency"] = (row["wall_ms"] / baseline
                                   if baseline else float("nan"))
    print(f"{'stages':<12}{'spotted':>9}{'wall ms':>12}{'cpu ms':>12}{'rel':>8}")
    for row in rows:
        print(f"{row['stages']:<12}{row['spotter_calls']:>9}"
              f"{row['wall_ms']:>12.2f}{row['cpu_ms']:>12.2f}"
              f"{row['relative_latency']:>8.3f}")
    if args.out:
        Path(args.out).write_text(
            json.dumps({"version": 1, "rows": rows}, sort_keys=True, indent=1)
            + "\n")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(Path(args.data), ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


_COMMANDS = {
    "process": _cmd_process,
    "label": _cmd_label,
    "train-ood": _cmd_train_ood,
    "eval": _cmd_eval,
    "bench": _cmd_bench,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help exits 0, bad flags exit 1
        return int(exc.code or 0)
    if args.command is None:
        parser.print_help()
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except (CliError, ConfigError, FileNotFoundError, DecodeError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # pragma: no cover - defensive
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
