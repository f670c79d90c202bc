"""Command-line front end.

Subcommands: import, resample, index, train, predict, eval, make-synthetic.
All data output goes to files; diagnostics go to stderr (verbosity via the
LITTERSCAN_LOG environment variable: error, info or debug). Every
subcommand is a pure function of its input files, flags and --seed, so
reruns produce byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import dataset, evaluation, indexes, mlp, raster_io, resample, synthetic

log = logging.getLogger("litterscan")


def _setup_logging() -> None:
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("LITTERSCAN_LOG", "error").lower(), logging.ERROR
    )
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(levelname)s %(name)s: %(message)s")


def _band_arg(value: str) -> tuple[str, str]:
    if "=" not in value:
        raise argparse.ArgumentTypeError("expected ID=path.pgm")
    bid, path = value.split("=", 1)
    return bid, path


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="litterscan")
    sub = p.add_subparsers(dest="subcommand", required=True)

    sp = sub.add_parser("import", help="build a band-stack container from PGM files")
    sp.add_argument("--band", action="append", type=_band_arg, required=True,
                    metavar="ID=PATH", help="band id and PGM path (repeatable)")
    sp.add_argument("--extent-m", type=float, required=True)
    sp.add_argument("--out", required=True, help="manifest path to write")

    sp = sub.add_parser("resample", help="align a stack onto the finest grid")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--out", required=True, help="cube manifest path to write")

    sp = sub.add_parser("index", help="compute an index map or combined mask")
    sp.add_argument("--cube", required=True)
    sp.add_argument("--method", required=True, choices=["ndvi", "fdi", "b8b9", "combined"])
    sp.add_argument("--out", required=True,
                    help="float raster (ndvi/fdi/b8b9) or PGM mask (combined)")
    sp.add_argument("--threshold", type=float, default=None,
                    help="also write a thresholded mask (ndvi/fdi/b8b9)")
    sp.add_argument("--mask-out", default=None, help="mask path for --threshold")
    sp.add_argument("--ndvi-max", type=float, default=None)
    sp.add_argument("--fdi-min", type=float, default=None)

    sp = sub.add_parser("train", help="build the dataset and train the classifier")
    sp.add_argument("--cube", required=True)
    sp.add_argument("--mask", required=True, help="ground-truth PGM mask")
    sp.add_argument("--out", required=True, help="model JSON path")
    sp.add_argument("--report", default=None,
                    help="training report JSON (default: <out>.report.json)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-iters", type=int, default=1000)
    sp.add_argument("--val-failures", type=int, default=6)
    sp.add_argument("--train-frac", type=float, default=0.70)
    sp.add_argument("--val-frac", type=float, default=0.15)
    sp.add_argument("--test-frac", type=float, default=0.15)

    sp = sub.add_parser("predict", help="apply a model to a cube")
    sp.add_argument("--model", required=True)
    sp.add_argument("--cube", required=True)
    sp.add_argument("--out", required=True, help="PGM mask path")
    sp.add_argument("--map-out", default=None, help="raw-output float raster path")
    sp.add_argument("--threshold", type=float, default=0.5)

    sp = sub.add_parser("eval", help="confusion matrix of two masks")
    sp.add_argument("--pred", required=True)
    sp.add_argument("--truth", required=True)
    sp.add_argument("--out", required=True, help="metrics JSON path")

    sp = sub.add_parser("make-synthetic", help="write the seeded synthetic scene")
    sp.add_argument("--out-cube", required=True)
    sp.add_argument("--out-mask", required=True)
    sp.add_argument("--rows", type=int, default=100)
    sp.add_argument("--cols", type=int, default=100)
    sp.add_argument("--plastic-frac", type=float, default=0.15)
    sp.add_argument("--seed", type=int, default=0)
    return p


def _cmd_import(args) -> None:
    from .bands import canonical_spec

    bands = []
    for bid, path in args.band:
        bands.append(raster_io.import_pgm_band(path, canonical_spec(bid)))
    stack = raster_io.BandStack(tuple(bands), args.extent_m)
    raster_io.save_stack(stack, args.out)
    log.info("wrote stack with %d band(s) to %s", len(stack.bands), args.out)


def _cmd_resample(args) -> None:
    stack = raster_io.load_stack(args.manifest)
    cube = resample.align_stack(stack)
    resample.save_cube(cube, args.out)
    log.info("aligned %d band(s) to %dx%d", cube.n_bands, cube.rows, cube.cols)


def _cmd_index(args) -> None:
    cube = resample.load_cube(args.cube)
    if args.method == "combined":
        if args.ndvi_max is None or args.fdi_min is None:
            raise ValueError("combined method needs --ndvi-max and --fdi-min")
        mask = indexes.combined_index_mask(cube, args.ndvi_max, args.fdi_min)
        raster_io.write_mask(mask, args.out)
        return
    imap = {"ndvi": indexes.ndvi, "fdi": indexes.fdi, "b8b9": indexes.b8b9_index}[
        args.method](cube)
    raster_io.write_float_raster(imap.values, args.out)
    if args.threshold is not None:
        mask_path = args.mask_out or args.out + ".mask.pgm"
        raster_io.write_mask(indexes.threshold_map(imap, args.threshold), mask_path)


def _cmd_train(args) -> None:
    cube = resample.load_cube(args.cube)
    truth = raster_io.read_mask(args.mask)
    samples = dataset.extract_samples(cube, truth)
    log.info("dataset: %s", dataset.dataset_report(samples))

    balanced = dataset.balance(samples, args.seed)
    spec = dataset.SplitSpec(args.train_frac, args.val_frac, args.test_frac, args.seed)
    train_raw, val_raw, test_raw = dataset.split(balanced, spec)
    norm = dataset.fit_normalizer(train_raw)
    train_set = dataset.normalize_set(norm, train_raw)
    val_set = dataset.normalize_set(norm, val_raw)
    test_set = dataset.normalize_set(norm, test_raw)

    cfg = mlp.TrainConfig(max_iters=args.max_iters, max_val_failures=args.val_failures,
                          seed=args.seed)
    model = mlp.init_model(args.seed, norm, cube.band_ids)
    model, report = mlp.train(model, train_set, val_set, cfg)

    test_pred = (mlp.forward_batch(model, test_set.features) >= 0.5).astype(int)
    cm = evaluation.confusion(test_pred, test_set.labels)
    test_metrics = evaluation.metrics(cm)
    log.info("test error rate: %.3f%%", 100.0 * test_metrics["error_rate"])

    mlp.save_model(model, args.out)
    full_report = {
        "dataset": dataset.dataset_report(balanced),
        "split": {"train": len(train_set), "val": len(val_set), "test": len(test_set)},
        "training": report.to_dict(),
        "test": test_metrics,
    }
    raster_io.atomic_write_bytes(args.report or args.out + ".report.json",
                                 json.dumps(full_report, indent=2).encode())


def _cmd_predict(args) -> None:
    model = mlp.load_model(args.model)
    cube = resample.load_cube(args.cube)
    mask, omap = mlp.predict_map(model, cube, args.threshold)
    raster_io.write_mask(mask, args.out)
    if args.map_out:
        raster_io.write_float_raster(omap.values, args.map_out)


def _cmd_eval(args) -> None:
    pred = raster_io.read_mask(args.pred)
    truth = raster_io.read_mask(args.truth)
    cm = evaluation.confusion(pred, truth)
    log.info("\n%s", evaluation.format_report(cm))
    raster_io.atomic_write_bytes(args.out,
                                 json.dumps(evaluation.metrics(cm), indent=2).encode())


def _cmd_make_synthetic(args) -> None:
    cube, mask = synthetic.make_scene(args.rows, args.cols, args.plastic_frac,
                                      args.seed)
    resample.save_cube(cube, args.out_cube)
    raster_io.write_mask(mask, args.out_mask)


_COMMANDS = {
    "import": _cmd_import,
    "resample": _cmd_resample,
    "index": _cmd_index,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "eval": _cmd_eval,
    "make-synthetic": _cmd_make_synthetic,
}


def main(argv=None) -> int:
    _setup_logging()
    args = _parser().parse_args(argv)
    try:
        _COMMANDS[args.subcommand](args)
    except (ValueError, OSError, ArithmeticError, KeyError) as e:
        print(f"litterscan {args.subcommand}: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
