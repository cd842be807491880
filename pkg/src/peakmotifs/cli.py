"""Command line interface. Subcommands mirror the pipeline stages so any
stage can be re-run on its own from the files of the previous one."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import cluster as cl
from . import ingest, pipeline, synth, validity


def _add_ingest_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--holidays", dest="holidays_path", default=None,
                   help="holiday list file, one ISO date per line")
    p.add_argument("--timezone", default=ingest.DEFAULT_TIMEZONE)
    p.add_argument("--season", default="spring",
                   choices=["spring", "summer", "autumn", "winter", "any"])
    p.add_argument("--day-type", default="working",
                   choices=["working", "weekend", "holiday", "any"])
    p.add_argument("--peak-start", default="16:00")
    p.add_argument("--peak-end", default="20:00")
    p.add_argument("--min-days", type=int, default=ingest.DEFAULT_MIN_DAYS)
    p.add_argument("--max-gap-minutes", type=float, default=ingest.DEFAULT_MAX_GAP_MINUTES)


def _add_sax_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alphabet", type=int, default=5)
    p.add_argument("--motif-len", type=int, default=6)
    p.add_argument("--noise-floor-watts", type=float, default=100.0)
    p.add_argument("--include-final-window", action="store_true")


def _add_cluster_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=cl.DEFAULT_K)
    p.add_argument("--algorithms", default=",".join(cl.ALGORITHMS),
                   help="comma-separated subset of " + ",".join(cl.ALGORITHMS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fuzzifier", type=float, default=cl.DEFAULT_FUZZIFIER)
    p.add_argument("--rf-trees", type=int, default=cl.DEFAULT_RF_TREES)
    p.add_argument("--init", dest="kmeans_init", default="random",
                   choices=["random", "kmeanspp"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="peakmotifs",
        description="Evening-peak motif variability clustering pipeline",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic readings CSV")
    p.add_argument("--scenario", required=True, help="scenario INI file")
    p.add_argument("--out", required=True, help="output readings CSV")
    p.add_argument("--truth", default=None, help="ground-truth CSV output")

    p = sub.add_parser("ingest", help="parse, align and window raw readings")
    p.add_argument("--input", required=True)
    p.add_argument("--out-dir", required=True)
    _add_ingest_args(p)

    p = sub.add_parser("features", help="build a feature matrix from windows")
    p.add_argument("--windows", required=True, help="windows.csv from the ingest stage")
    p.add_argument("--features", default="motif", choices=pipeline.FEATURE_MODES)
    p.add_argument("--out", required=True)
    _add_sax_args(p)

    p = sub.add_parser("cluster", help="cluster a feature matrix")
    p.add_argument("--features-file", required=True, dest="features_file")
    p.add_argument("--out", required=True)
    _add_cluster_args(p)

    p = sub.add_parser("report", help="validity and consistency report")
    p.add_argument("--features-file", required=True, dest="features_file")
    p.add_argument("--partitions", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--mia-raw", action="store_true")

    p = sub.add_parser("run", help="run the full pipeline end to end")
    p.add_argument("--input")
    p.add_argument("--out-dir")
    p.add_argument("--features", default="motif", choices=pipeline.FEATURE_MODES)
    p.add_argument("--manifest", default=None,
                   help="reproduce a prior run from its manifest.json")
    p.add_argument("--mia-raw", action="store_true")
    p.add_argument("--no-plots", action="store_true")
    p.add_argument("--threads", type=int, default=1,
                   help="accepted for compatibility; stages run sequentially")
    _add_ingest_args(p)
    _add_sax_args(p)
    _add_cluster_args(p)
    return parser


def _config_from_args(args: argparse.Namespace) -> pipeline.RunConfig:
    return pipeline.RunConfig(
        input_path=args.input,
        out_dir=args.out_dir,
        features=args.features,
        holidays_path=args.holidays_path,
        timezone=args.timezone,
        season=None if args.season == "any" else args.season,
        day_type=None if args.day_type == "any" else args.day_type,
        peak_start=args.peak_start,
        peak_end=args.peak_end,
        min_days=args.min_days,
        max_gap_minutes=args.max_gap_minutes,
        alphabet=args.alphabet,
        motif_len=args.motif_len,
        noise_floor_watts=args.noise_floor_watts,
        include_final_window=args.include_final_window,
        k=args.k,
        algorithms=tuple(args.algorithms.split(",")),
        seed=args.seed,
        fuzzifier=args.fuzzifier,
        rf_trees=args.rf_trees,
        kmeans_init=args.kmeans_init,
        mia_raw=args.mia_raw,
        plots=not args.no_plots,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _dispatch(args)
    except pipeline.PipelineError as exc:
        print(f"error: {exc.category}: {exc}", file=sys.stderr)
        return 1
    except (ingest.IngestError, cl.ClusterConfigError,
            validity.ValidityError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "synth":
        scenario = synth.load_scenario(args.scenario)
        with open(args.out, "w") as fh:
            truth = synth.generate(scenario, fh)
        if args.truth:
            with open(args.truth, "w") as fh:
                synth.write_ground_truth(truth, fh)
        print(f"wrote {args.out} ({sum(1 for _ in truth.archetype_of)} households)")
        return 0

    if args.command == "ingest":
        cfg = pipeline.RunConfig(
            input_path=args.input, out_dir=args.out_dir,
            holidays_path=args.holidays_path, timezone=args.timezone,
            season=None if args.season == "any" else args.season,
            day_type=None if args.day_type == "any" else args.day_type,
            peak_start=args.peak_start, peak_end=args.peak_end,
            min_days=args.min_days, max_gap_minutes=args.max_gap_minutes,
        )
        os.makedirs(args.out_dir, exist_ok=True)
        windows_by_hh, parsed = pipeline.compute_windows(cfg)
        pipeline.write_rejects_csv(parsed.rejects, os.path.join(args.out_dir, "rejects.csv"))
        pipeline.write_windows_csv(windows_by_hh, os.path.join(args.out_dir, "windows.csv"))
        print(f"parsed {parsed.total_rows} rows ({len(parsed.rejects)} rejected), "
              f"retained {len(windows_by_hh)} households")
        return 0

    if args.command == "features":
        windows_by_hh = pipeline.read_windows_csv(args.windows)
        params = pipeline.RunConfig(
            input_path="", out_dir="", alphabet=args.alphabet,
            motif_len=args.motif_len, noise_floor_watts=args.noise_floor_watts,
            include_final_window=args.include_final_window,
        ).sax_params()
        matrix = pipeline.build_features(windows_by_hh, args.features, params)
        pipeline.write_features_csv(matrix, args.out)
        print(f"wrote {args.out}: {matrix.n} households x {len(matrix.feature_names)} features")
        return 0

    if args.command == "cluster":
        matrix = pipeline.read_features_csv(args.features_file)
        normalized = cl.minmax_normalize(matrix)
        partitions = cl.run_suite(
            normalized, args.k, args.seed, tuple(args.algorithms.split(",")),
            args.fuzzifier, args.rf_trees, args.kmeans_init,
        )
        if not partitions:
            raise pipeline.PipelineError("clustering-failed", "no partitions produced")
        pipeline.write_partitions_csv(partitions, args.out)
        print(f"wrote {args.out}: {len(partitions)} partitions")
        return 0

    if args.command == "report":
        matrix = pipeline.read_features_csv(args.features_file)
        normalized = cl.minmax_normalize(matrix)
        partitions = pipeline.read_partitions_csv(args.partitions)
        report = validity.consistency_report(partitions, normalized, args.mia_raw)
        os.makedirs(args.out_dir, exist_ok=True)
        pipeline.write_validity_report(
            report,
            os.path.join(args.out_dir, "validity.json"),
            os.path.join(args.out_dir, "table1.csv"),
            os.path.join(args.out_dir, "table2.csv"),
        )
        print(f"mean off-diagonal corrected Rand: {report.mean_offdiagonal_rand:.4f}")
        return 0

    if args.command == "run":
        if args.manifest:
            with open(args.manifest) as fh:
                cfg = pipeline.RunConfig.from_manifest(json.load(fh))
            if args.out_dir:
                cfg.out_dir = args.out_dir
        else:
            if not args.input or not args.out_dir:
                raise pipeline.PipelineError(
                    "bad-arguments", "run needs --input and --out-dir (or --manifest)")
            cfg = _config_from_args(args)
        report = pipeline.run_pipeline(cfg)
        print(f"run complete: {len(report.partitions)} partitions, "
              f"mean off-diagonal corrected Rand {report.mean_offdiagonal_rand:.4f}")
        return 0

    raise pipeline.PipelineError("bad-arguments", f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
