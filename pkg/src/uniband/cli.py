"""Command line entry point: ``uniband validate|cluster|lut|run|report``."""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from . import clustering, pipeline, plotting, radio

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("uniband")


def _load(path):
    try:
        return pipeline.load_config(path), []
    except FileNotFoundError:
        return None, [f"config: {path} does not exist"]
    except pipeline.ConfigError as exc:
        return None, exc.problems
    except (ValueError, TypeError) as exc:
        return None, [f"config: {exc}"]


def _report_problems(problems) -> int:
    for p in problems:
        print(f"error: {p}", file=sys.stderr)
    return EXIT_INVALID


def cmd_validate(args) -> int:
    config, problems = _load(args.config)
    if config is not None:
        problems = pipeline.validate(config)
    if problems:
        return _report_problems(problems)
    print("ok")
    return EXIT_OK


def cmd_cluster(args) -> int:
    features = clustering.load_features(args.features)
    model = clustering.fit_countries(features, k=args.k, seed=args.seed)
    clustering.write_clusters(model, args.out)
    print(f"wrote {args.out} (k={args.k}, wss={model.wss:.6g})")
    if args.wss_plot:
        z, _, _ = clustering.standardize(features)
        k_max = min(args.k_max, len({tuple(r) for r in z.tolist()}))
        curve = clustering.wss_curve(z, k_max, seed=args.seed)
        plotting.plot_wss(curve, args.wss_plot)
        print(f"wrote {args.wss_plot}")
    return EXIT_OK


def cmd_lut(args) -> int:
    params = radio.RadioParams()
    if args.receivers is not None:
        params = dataclasses.replace(params, receivers=args.receivers)
    lut = radio.build_capacity_lut(params=params, seed=args.seed, jobs=args.jobs)
    lut.to_csv(args.out)
    print(f"wrote {args.out} ({len(lut.entries)} entries)")
    return EXIT_OK


def cmd_run(args) -> int:
    config, problems = _load(args.config)
    if config is None:
        return _report_problems(problems)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    try:
        manifest = pipeline.run_sweep(
            config, out_dir=args.out, jobs=args.jobs, emit_intermediates=args.emit_intermediates
        )
    except pipeline.ConfigError as exc:
        return _report_problems(exc.problems)
    except Exception as exc:  # noqa: BLE001 - any failure mid-sweep maps to exit 2
        log.debug("run failed", exc_info=True)
        print(f"error: run failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"{len(manifest['triples'])} triples, {len(manifest['files'])} files")
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        written = plotting.render_report(args.run, args.out)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    for p in written:
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uniband", description="Universal 4G/5G broadband cost assessment")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a run configuration")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("cluster", help="group countries by k-means")
    p.add_argument("--features", required=True)
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--wss-plot", help="also write an elbow plot to this path")
    p.add_argument("--k-max", type=int, default=10)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("lut", help="generate the capacity lookup table")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--receivers", type=int)
    p.set_defaults(func=cmd_lut)

    p = sub.add_parser("run", help="sweep countries x scenarios x strategies")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--emit-intermediates", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="summary CSV and figures for a run directory")
    p.add_argument("--run", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
