"""Command-line interface.

Subcommands: decompose (block low-rank decomposition of a cube over a given
superpixel raster), segment (emit a superpixel raster), classify (the full
pipeline), and metrics (score a predictions raster against ground truth).

A --config file supplies defaults for the flags of the same name; flags win.
Exit codes: 0 success, 1 usage error, 2 data/format error, 3 non-converged
solve under --strict.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import io as spio
from .classify import LabelField, evaluate
from .cube import HsiCube
from .errors import DegenerateInput, FormatError, NonFiniteData, SvdFailure
from .pipeline import PipelineConfig, run
from .solver import BlockPartition, DlrrParams, solve
from .superpixel import project_base_image, segment

_PRESET_DIR = os.path.join(os.path.dirname(__file__), "configs")

_DEFAULTS = {
    "seed": 0,
    "t_max": 3,
    "superpixels": 50,
    "delta": 0.6,
    "m_split": 3,
    "lambda": 0.01,
    "beta": 1.0,
    "mu0": 1e-4,
    "rho": 1.1,
    "mu_max": 1e12,
    "eps": 1e-6,
    "max_iter": 500,
    "classifier": "nearest-centroid",
    "knn_k": 5,
    "percent": 0.05,
}


class UsageError(Exception):
    pass


class NotConvergedStrict(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _build_parser():
    parser = _Parser(prog="spdlrr", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    def add_common(p):
        p.add_argument("--config", help="config file path or preset name")

    def add_solver_flags(p):
        p.add_argument("--lambda", dest="lam", type=float)
        p.add_argument("--beta", type=float)
        p.add_argument("--mu0", type=float)
        p.add_argument("--rho", type=float)
        p.add_argument("--mu-max", dest="mu_max", type=float)
        p.add_argument("--eps", type=float)
        p.add_argument("--max-iter", dest="max_iter", type=int)

    p = sub.add_parser("decompose", help="low-rank + sparse split over given superpixels")
    add_common(p)
    p.add_argument("--cube")
    p.add_argument("--partition")
    p.add_argument("--out-dir", dest="out_dir")
    add_solver_flags(p)
    p.add_argument("--strict", action="store_true")

    p = sub.add_parser("segment", help="superpixel segmentation raster")
    add_common(p)
    p.add_argument("--cube")
    p.add_argument("--out")
    p.add_argument("--superpixels", type=int)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("classify", help="full restoration + classification pipeline")
    add_common(p)
    p.add_argument("--cube")
    p.add_argument("--labels")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--seed", type=int)
    p.add_argument("--t-max", dest="t_max", type=int)
    p.add_argument("--superpixels", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--m-split", dest="m_split", type=int)
    add_solver_flags(p)
    p.add_argument("--classifier")
    p.add_argument("--knn-k", dest="knn_k", type=int)
    p.add_argument("--percent", type=float)
    p.add_argument("--strict", action="store_true")

    p = sub.add_parser("metrics", help="score a predictions raster against truth")
    p.add_argument("predictions")
    p.add_argument("truth")
    p.add_argument("--out", help="metrics JSON path (default: print to stdout)")

    return parser


def _resolve_config(name):
    """A config is a filesystem path or the name of a shipped preset
    (with or without the .cfg suffix)."""
    if name is None:
        return {}
    if not os.path.exists(name):
        for candidate in (name, name + ".cfg"):
            preset = os.path.join(_PRESET_DIR, os.path.basename(candidate))
            if os.path.exists(preset):
                name = preset
                break
    return spio.load_config(name)


def _merged(args, config, key, attr=None, required=False):
    """Flag value if given, else config value, else default; `required`
    turns an absent value into a usage error."""
    attr = attr or key
    value = getattr(args, attr, None)
    if value is None:
        value = config.get(key)
    if value is None:
        value = _DEFAULTS.get(key)
    if value is None and required:
        raise UsageError(f"missing required option --{key.replace('_', '-')}")
    return value


def _dlrr_params(args, config):
    return DlrrParams(
        lam=_merged(args, config, "lambda", attr="lam"),
        beta=_merged(args, config, "beta"),
        mu0=_merged(args, config, "mu0"),
        rho=_merged(args, config, "rho"),
        mu_max=_merged(args, config, "mu_max"),
        eps=_merged(args, config, "eps"),
        max_iter=_merged(args, config, "max_iter"),
    )


def _cmd_decompose(args):
    config = _resolve_config(args.config)
    cube_path = _merged(args, config, "cube", required=True)
    part_path = _merged(args, config, "partition", required=True)
    out_dir = _merged(args, config, "out_dir", required=True)
    params = _dlrr_params(args, config)
    cube = spio.load_cube(cube_path)
    partition = spio.load_partition(part_path)
    if partition.labels.shape != (cube.height, cube.width):
        raise FormatError("partition raster does not match the cube dimensions")
    blocks = BlockPartition.from_labels(partition.labels)
    restored, variations, trace, converged = solve(cube.x, blocks, params)
    os.makedirs(out_dir, exist_ok=True)
    spio.write_cube(HsiCube(cube.height, cube.width, restored), os.path.join(out_dir, "L.json"))
    spio.write_cube(HsiCube(cube.height, cube.width, variations), os.path.join(out_dir, "E.json"))
    spio.write_trace_csv(trace, os.path.join(out_dir, "trace.csv"))
    status = "converged" if converged else "did not converge"
    print(f"decompose: {status} after {trace.iterations} iterations")
    if args.strict and not converged:
        raise NotConvergedStrict()
    return 0


def _cmd_segment(args):
    config = _resolve_config(args.config)
    cube_path = _merged(args, config, "cube", required=True)
    out_path = args.out
    if out_path is None:
        raise UsageError("missing required option --out")
    target = _merged(args, config, "superpixels")
    seed = _merged(args, config, "seed")
    cube = spio.load_cube(cube_path)
    base = project_base_image(cube)
    partition = segment(base, target, seed)
    spio.write_raster(partition.labels, out_path)
    print(f"segment: {partition.count} superpixels")
    return 0


def _cmd_classify(args):
    config = _resolve_config(args.config)
    if args.seed is None:
        raise UsageError("classify requires an explicit --seed")
    cube_path = _merged(args, config, "cube", required=True)
    labels_path = _merged(args, config, "labels", required=True)
    out_dir = _merged(args, config, "out_dir", required=True)
    pipe_config = PipelineConfig(
        t_max=_merged(args, config, "t_max"),
        initial_superpixels=_merged(args, config, "superpixels"),
        delta=_merged(args, config, "delta"),
        m_split=_merged(args, config, "m_split"),
        dlrr=_dlrr_params(args, config),
        classifier=_merged(args, config, "classifier"),
        knn_k=_merged(args, config, "knn_k"),
        split_percent=_merged(args, config, "percent"),
        seed=args.seed,
    )
    cube = spio.load_cube(cube_path)
    labels, mapping = spio.load_labels(labels_path)
    result = run(cube, labels, pipe_config)
    os.makedirs(out_dir, exist_ok=True)
    n_classes = labels.n_classes
    back = np.zeros(n_classes + 1, dtype=np.int64)
    for orig, dense in mapping.items():
        back[dense] = orig
    spio.write_raster(back[result.final_predictions.labels], os.path.join(out_dir, "predictions.txt"))
    spio.render_map(
        result.final_predictions,
        os.path.join(out_dir, "map.pgm"),
        n_classes=n_classes,
        class_ids=back.tolist(),
    )
    spio.write_metrics_json(result.metrics, os.path.join(out_dir, "metrics.json"))
    for t, trace in enumerate(result.traces, 1):
        spio.write_trace_csv(trace, os.path.join(out_dir, f"trace_{t}.csv"))
    m = result.metrics
    print(f"classify: oa={m.oa:.4f} aa={m.aa:.4f} kappa={m.kappa:.4f}")
    if args.strict and not all(result.converged):
        raise NotConvergedStrict()
    return 0


def _cmd_metrics(args):
    pred_grid = spio.load_raster(args.predictions)
    truth_grid = spio.load_raster(args.truth)
    if pred_grid.shape != truth_grid.shape:
        raise FormatError("prediction and truth rasters have different shapes")
    # One consistent dense mapping across both rasters, truth ids first.
    lut = {}
    for grid in (truth_grid, pred_grid):
        for v in grid.ravel():
            v = int(v)
            if v != 0 and v not in lut:
                lut[v] = len(lut) + 1
    lut[0] = 0
    remap = np.vectorize(lut.__getitem__, otypes=[np.int64])
    dense_truth = remap(truth_grid)
    dense_pred = remap(pred_grid)
    mask = truth_grid > 0
    if (pred_grid[mask] == 0).any():
        raise FormatError("predictions are unlabeled on scored pixels")
    report = evaluate(LabelField(dense_pred), LabelField(dense_truth), mask)
    if args.out:
        spio.write_metrics_json(report, args.out)
    else:
        print(json.dumps(report.to_json_dict(), indent=2))
    return 0


_COMMANDS = {
    "decompose": _cmd_decompose,
    "segment": _cmd_segment,
    "classify": _cmd_classify,
    "metrics": _cmd_metrics,
}


def cli_main(argv):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage())
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except NotConvergedStrict:
        print("solver did not converge (--strict)", file=sys.stderr)
        return 3
    except (FormatError, NonFiniteData, DegenerateInput, SvdFailure, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)


def main():
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
