"""Command-line driver: build prototypes, score batches, evaluate, sweep.

Subcommands
-----------
* ``prototypes`` — build a prototype set from labeled embeddings or a
  weight matrix; write it in the binary feature format plus a JSON sidecar.
* ``score`` — score test embeddings; write a CSV of per-sample results.
* ``eval`` — score ID and OOD test files and report AUROC / FPR at 95% TPR.
* ``sweep`` — repeat ``eval`` over comma-separated grids of ``--lambda``,
  ``--omega``, and/or ``--batch-size``; write one CSV row per grid point.
* ``synth`` — materialize a synthetic benchmark from a JSON spec.

Exit codes: 0 success, 2 file/I-O errors (also argparse usage errors),
3 validation errors, 4 solver failures.  Feature files ending in ``.csv``
or ``.txt`` are read as CSV, anything else as the binary format.  Set
``POT_LOG=debug|info|warning|error`` for diagnostics on stderr.

Every subcommand is deterministic: rerunning with identical inputs, flags,
and seed produces byte-identical output files.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import metrics, synth
from .errors import LoadError, SolverError, ValidationError
from .ingest import (
    FeatureMatrix,
    LabeledDataset,
    load_features,
    load_labels,
    save_features,
    save_labels,
)
from .prototypes import l2_normalize_rows, prototypes_from_data, prototypes_from_weights
from .scorer import score_stream
from .transport import SolverConfig

logger = logging.getLogger("pot_ood.cli")


def main(argv=None) -> int:
    _configure_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LoadError as exc:
        return _fail(exc, 2)
    except OSError as exc:
        return _fail(exc, 2)
    except ValidationError as exc:
        return _fail(exc, 3)
    except SolverError as exc:
        return _fail(exc, 4)


def _fail(exc: Exception, code: int) -> int:
    print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return code


def _configure_logging() -> None:
    level_name = os.environ.get("POT_LOG", "warning").strip().lower()
    level = {
        "debug": logging.DEBUG,
        "info": logging.INFO,
        "warning": logging.WARNING,
        "error": logging.ERROR,
    }.get(level_name, logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pot-ood",
        description="Prototype-based optimal-transport OOD scoring over embeddings.",
    )
    sub = parser.add_subparsers(required=True, metavar="subcommand")

    proto_src = argparse.ArgumentParser(add_help=False)
    proto_src.add_argument("--train-features", help="labeled training embeddings")
    proto_src.add_argument("--train-labels", help="integer labels, one per line")
    proto_src.add_argument("--weights", help="classifier weight matrix (dim x classes)")
    proto_src.add_argument("--transpose", action="store_true",
                           help="the --weights file is stored classes x dim")
    proto_src.add_argument("--normalize", action="store_true",
                           help="L2-normalize prototypes and test features")

    def add_solver_flags(p, as_grid=False):
        grid = " (comma-separated grid allowed)" if as_grid else ""
        cast = str if as_grid else float
        p.add_argument("--lambda", dest="lam", type=cast, default=None,
                       help=f"fixed regularization strength{grid}")
        p.add_argument("--lambda-relative", type=float, default=0.5, metavar="FACTOR",
                       help="set regularization to FACTOR * median(cost) per batch "
                            "(default 0.5; ignored when --lambda is given)")
        p.add_argument("--tolerance", type=float, default=1e-8,
                       help="marginal residual target (default 1e-8)")
        p.add_argument("--max-iters", type=int, default=10000,
                       help="iteration budget per solve (default 10000)")
        p.add_argument("--stabilization", choices=["log_domain", "plain"],
                       default="log_domain")

    def add_batch_flags(p, as_grid=False):
        grid = " (comma-separated grid allowed)" if as_grid else ""
        p.add_argument("--omega", type=str if as_grid else float, default=None,
                       help=f"extrapolation factor > 1, default 2.0{grid}")
        p.add_argument("--batch-size", type=str if as_grid else int, default=None,
                       help=f"test batch size >= 2, default 512{grid}")
        p.add_argument("--seed", type=int, default=0, help="shuffle seed (default 0)")

    p_proto = sub.add_parser("prototypes", parents=[proto_src],
                             help="build and save a prototype set")
    p_proto.add_argument("--out", required=True, help="output path (binary matrix; "
                         "a .json sidecar is written next to it)")
    p_proto.set_defaults(func=cmd_prototypes)

    p_score = sub.add_parser("score", parents=[proto_src],
                             help="score test embeddings")
    p_score.add_argument("--test-id", required=True, help="test embeddings to score")
    p_score.add_argument("--test-ood", help="optional extra embeddings, scored jointly")
    add_solver_flags(p_score)
    add_batch_flags(p_score)
    p_score.add_argument("--out", required=True, help="output CSV path")
    p_score.set_defaults(func=cmd_score)

    p_eval = sub.add_parser("eval", parents=[proto_src],
                            help="score ID+OOD files and report metrics")
    p_eval.add_argument("--test-id", required=True)
    p_eval.add_argument("--test-ood", required=True)
    add_solver_flags(p_eval)
    add_batch_flags(p_eval)
    p_eval.add_argument("--out", help="report path (default: stdout)")
    p_eval.add_argument("--format", choices=["json", "csv"], default="json",
                        help="report format (default json)")
    p_eval.set_defaults(func=cmd_eval)

    p_sweep = sub.add_parser("sweep", parents=[proto_src],
                             help="evaluate over parameter grids")
    p_sweep.add_argument("--test-id", required=True)
    p_sweep.add_argument("--test-ood", required=True)
    add_solver_flags(p_sweep, as_grid=True)
    add_batch_flags(p_sweep, as_grid=True)
    p_sweep.add_argument("--out", required=True, help="output CSV path")
    p_sweep.set_defaults(func=cmd_sweep)

    p_synth = sub.add_parser("synth", help="generate a synthetic benchmark")
    p_synth.add_argument("--spec", required=True, help="JSON spec path")
    p_synth.add_argument("--out", required=True, help="output directory")
    p_synth.set_defaults(func=cmd_synth)
    return parser


def _file_format(path: str) -> str:
    return "csv" if Path(path).suffix.lower() in (".csv", ".txt") else "binary"


def _load_matrix(path: str) -> FeatureMatrix:
    return load_features(path, format=_file_format(path))


def _build_prototypes(args):
    if args.weights:
        if args.train_features or args.train_labels:
            raise ValidationError(
                "--weights and --train-features/--train-labels are mutually exclusive"
            )
        weights = _load_matrix(args.weights).data
        if args.transpose:
            weights = weights.T
        protos = prototypes_from_weights(weights)
    else:
        if not (args.train_features and args.train_labels):
            raise ValidationError(
                "need --train-features with --train-labels, or --weights"
            )
        if args.transpose:
            raise ValidationError("--transpose only applies to --weights input")
        features = _load_matrix(args.train_features)
        labels = load_labels(args.train_labels)
        dataset = LabeledDataset.build(features, labels)
        protos = prototypes_from_data(dataset)
    if args.normalize:
        protos = protos.normalized()
    logger.info("built %d prototypes (dim %d, source %s)",
                protos.num_classes, protos.dim, protos.source)
    return protos


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        lam=args.lam,
        lam_factor=args.lambda_relative,
        tolerance=args.tolerance,
        max_iterations=args.max_iters,
        stabilization=args.stabilization,
    )


def _load_test(args) -> tuple[np.ndarray, int]:
    """Stacked test matrix and the number of leading ID rows."""
    test_id = _load_matrix(args.test_id).data
    n_id = test_id.shape[0]
    if getattr(args, "test_ood", None):
        test_ood = _load_matrix(args.test_ood).data
        if test_ood.shape[1] != test_id.shape[1]:
            raise ValidationError(
                f"--test-ood dim {test_ood.shape[1]} != --test-id dim {test_id.shape[1]}"
            )
        combined = np.vstack([test_id, test_ood])
    else:
        combined = test_id
    if args.normalize:
        combined = l2_normalize_rows(combined)
    return combined, n_id


def _write_text(path, text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_prototypes(args) -> int:
    protos = _build_prototypes(args)
    save_features(FeatureMatrix.from_array(protos.vectors), args.out)
    sidecar = {
        "num_classes": protos.num_classes,
        "dim": protos.dim,
        "masses": [float(m) for m in protos.masses],
        "source": protos.source,
    }
    Path(str(args.out) + ".json").write_text(
        json.dumps(sidecar, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return 0


def _run_stream(args):
    protos = _build_prototypes(args)
    test, n_id = _load_test(args)
    omega = 2.0 if args.omega is None else float(args.omega)
    batch_size = 512 if args.batch_size is None else int(args.batch_size)
    stream = score_stream(
        protos, test,
        batch_size=batch_size,
        seed=args.seed,
        omega=omega,
        config=_solver_config(args),
    )
    if not stream.all_converged:
        logger.warning("some batches stopped at the iteration budget; "
                       "scores may be less accurate")
    return stream, n_id


def cmd_score(args) -> int:
    stream, _ = _run_stream(args)
    lines = ["sample_index,score,t_id,t_out,batch_index"]
    for j in range(stream.scores.shape[0]):
        lines.append(
            f"{j},{float(stream.scores[j])!r},{float(stream.t_id[j])!r},"
            f"{float(stream.t_out[j])!r},{stream.batch_index[j]}"
        )
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def _eval_metrics(args) -> dict:
    stream, n_id = _run_stream(args)
    if n_id == stream.scores.shape[0]:
        raise ValidationError("--test-ood produced no rows; nothing to evaluate")
    report = metrics.evaluate(
        stream.scores[:n_id], stream.scores[n_id:], orientation="higher_is_ood"
    )
    return {
        "auroc": report.auroc,
        "fpr95": report.fpr95,
        "threshold": report.threshold_at_tpr95,
        "n_id": report.n_id,
        "n_ood": report.n_ood,
    }


def cmd_eval(args) -> int:
    result = _eval_metrics(args)
    result["config"] = {
        "lambda": args.lam,
        "lambda_relative": args.lambda_relative,
        "omega": 2.0 if args.omega is None else float(args.omega),
        "batch_size": 512 if args.batch_size is None else int(args.batch_size),
        "seed": args.seed,
        "stabilization": args.stabilization,
        "tolerance": args.tolerance,
        "max_iters": args.max_iters,
        "normalize": bool(args.normalize),
    }
    if args.format == "json":
        text = json.dumps(result, sort_keys=True, indent=2) + "\n"
    else:
        text = (
            "auroc,fpr95,threshold,n_id,n_ood\n"
            f"{result['auroc']!r},{result['fpr95']!r},{result['threshold']!r},"
            f"{result['n_id']},{result['n_ood']}\n"
        )
    _write_text(args.out, text)
    return 0


def _parse_grid(raw, cast, flag):
    if raw is None:
        return None
    try:
        values = [cast(tok.strip()) for tok in str(raw).split(",") if tok.strip()]
    except ValueError:
        raise ValidationError(f"{flag}: cannot parse {raw!r} as a number list") from None
    if not values:
        raise ValidationError(f"{flag}: empty grid")
    return values


def cmd_sweep(args) -> int:
    """One evaluation row per grid value, one parameter swept at a time.

    Every sweepable flag that was supplied (`--lambda`, `--omega`,
    `--batch-size`) becomes a grid; while one grid is swept the other
    parameters sit at their base value (their first grid entry if supplied,
    their default otherwise).
    """
    grids = {
        "lambda": _parse_grid(args.lam, float, "--lambda"),
        "omega": _parse_grid(args.omega, float, "--omega"),
        "batch_size": _parse_grid(args.batch_size, int, "--batch-size"),
    }
    if all(v is None for v in grids.values()):
        raise ValidationError(
            "nothing to sweep: pass --lambda, --omega, and/or --batch-size"
        )
    base = {name: (grid[0] if grid else None) for name, grid in grids.items()}

    lines = ["parameter,value,seed,auroc,fpr95"]
    for name in ("lambda", "omega", "batch_size"):
        grid = grids[name]
        if grid is None:
            continue
        for value in grid:
            point = dict(base)
            point[name] = value
            run_args = argparse.Namespace(**vars(args))
            run_args.lam = point["lambda"]
            run_args.omega = point["omega"]
            run_args.batch_size = point["batch_size"]
            result = _eval_metrics(run_args)
            logger.info("sweep %s=%s seed=%d auroc=%.4f fpr95=%.4f",
                        name, value, args.seed, result["auroc"], result["fpr95"])
            lines.append(
                f"{name},{value!r},{args.seed},"
                f"{result['auroc']!r},{result['fpr95']!r}"
            )
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def cmd_synth(args) -> int:
    spec = synth.SynthSpec.from_json(Path(args.spec).read_text(encoding="utf-8"))
    train, test_id, test_ood = synth.generate(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_features(train.features, out / "train_features.potf")
    save_labels(train.labels, out / "train_labels.txt")
    save_features(test_id, out / "test_id.potf")
    save_features(test_ood, out / "test_ood.potf")
    manifest = {
        "spec": json.loads(spec.to_json()),
        "files": {
            "train_features": "train_features.potf",
            "train_labels": "train_labels.txt",
            "test_id": "test_id.potf",
            "test_ood": "test_ood.potf",
        },
        "shapes": {
            "train": list(train.features.data.shape),
            "test_id": list(test_id.data.shape),
            "test_ood": list(test_ood.data.shape),
        },
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
