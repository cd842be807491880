"""End-to-end orchestration: ingest -> sax -> motif -> cluster -> validity,
plus the flat-file formats each stage reads and writes so stages can be
re-run independently."""

from __future__ import annotations

import csv
import dataclasses
import datetime as dt
import json
import logging
from dataclasses import dataclass, field

import numpy as np

from . import cluster as cl
from . import ingest, motif, sax, validity

log = logging.getLogger(__name__)

FEATURE_MODES = ("motif", "profile", "nonmotif")


class PipelineError(Exception):
    def __init__(self, category: str, message: str):
        super().__init__(message)
        self.category = category


@dataclass
class RunConfig:
    input_path: str
    out_dir: str
    features: str = "motif"
    holidays_path: str | None = None
    timezone: str = ingest.DEFAULT_TIMEZONE
    season: str | None = "spring"
    day_type: str | None = "working"
    peak_start: str = "16:00"
    peak_end: str = "20:00"
    min_days: int = ingest.DEFAULT_MIN_DAYS
    max_gap_minutes: float = ingest.DEFAULT_MAX_GAP_MINUTES
    alphabet: int = 5
    motif_len: int = 6
    noise_floor_watts: float = 100.0
    include_final_window: bool = False
    k: int = cl.DEFAULT_K
    algorithms: tuple[str, ...] = cl.ALGORITHMS
    seed: int = 0
    fuzzifier: float = cl.DEFAULT_FUZZIFIER
    rf_trees: int = cl.DEFAULT_RF_TREES
    kmeans_init: str = "random"
    mia_raw: bool = False
    plots: bool = True

    def to_manifest(self) -> dict:
        d = dataclasses.asdict(self)
        d["algorithms"] = list(self.algorithms)
        return d

    @classmethod
    def from_manifest(cls, d: dict) -> "RunConfig":
        d = dict(d)
        d["algorithms"] = tuple(d.get("algorithms", cl.ALGORITHMS))
        names = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})

    def sax_params(self) -> sax.SaxParams:
        return sax.SaxParams(
            alphabet_size=self.alphabet,
            motif_len=self.motif_len,
            noise_floor_watts=self.noise_floor_watts,
            include_final_window=self.include_final_window,
        )


# ---------------------------------------------------------------- stages

def compute_windows(cfg: RunConfig) -> tuple[dict[str, list[ingest.PeakDayWindow]], ingest.ParseResult]:
    """Parse, align and window the raw input; only households meeting the
    min-days threshold are kept."""
    try:
        stream = ingest.open_readings(cfg.input_path)
    except OSError as exc:
        raise PipelineError("input-not-found", str(exc))
    with stream:
        parsed = ingest.parse_readings(stream)
    holidays = (
        ingest.read_holiday_file(cfg.holidays_path) if cfg.holidays_path else set()
    )
    from zoneinfo import ZoneInfo
    tz = ZoneInfo(cfg.timezone)
    windows_by_hh: dict[str, list[ingest.PeakDayWindow]] = {}
    for hid, readings in sorted(ingest.group_by_household(parsed.readings).items()):
        series = ingest.align_to_grid(readings, cfg.max_gap_minutes)
        if series is None:
            continue
        labels = ingest.label_days(ingest.series_dates(series, tz), holidays)
        ws = ingest.extract_peak_windows(
            series, labels, cfg.season, cfg.day_type,
            cfg.peak_start, cfg.peak_end, cfg.timezone,
        )
        if ws:
            windows_by_hh[hid] = ws
    retained = ingest.filter_households(windows_by_hh, cfg.min_days)
    return {h: windows_by_hh[h] for h in sorted(retained)}, parsed


def build_features(
    windows_by_hh: dict[str, list[ingest.PeakDayWindow]],
    mode: str,
    params: sax.SaxParams = sax.SaxParams(),
) -> cl.FeatureMatrix:
    """Feature matrix for one representation over the retained households."""
    if mode not in FEATURE_MODES:
        raise PipelineError("bad-feature-mode", f"unknown feature mode {mode!r}")
    ids, rows = [], []
    for hid in sorted(windows_by_hh):
        windows = windows_by_hh[hid]
        valid = [w for w in windows if w.valid]
        if not valid:
            continue
        if mode == "motif":
            occurrences = []
            for w in valid:
                ds = sax.difference(w)
                occurrences.extend(sax.window_words(ds, params))
            catalog = motif.exclude_trivial(
                motif.build_catalog(hid, occurrences, days_sampled=len(valid))
            )
            vec = motif.motif_features(catalog).as_array()
            names = motif.MOTIF_FEATURE_NAMES
        elif mode == "profile":
            vec = motif.profile_features(valid).as_array()
            names = motif.PROFILE_FEATURE_NAMES
        else:
            vec = motif.nonmotif_features(valid).as_array()
            names = motif.NONMOTIF_FEATURE_NAMES
        ids.append(hid)
        rows.append(vec)
    if not rows:
        raise PipelineError("no-households", "no households survived filtering")
    return cl.FeatureMatrix(ids, np.array(rows), list(names))


# ---------------------------------------------------------------- file formats

def _fmt(x: float) -> str:
    return repr(float(x))


def write_windows_csv(windows_by_hh: dict[str, list[ingest.PeakDayWindow]], path: str) -> None:
    n = max(len(w.readings) for ws in windows_by_hh.values() for w in ws)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["household_id", "date", "valid"] + [f"r{i:02d}" for i in range(n)])
        for hid in sorted(windows_by_hh):
            for win in windows_by_hh[hid]:
                w.writerow([hid, win.date.isoformat(), int(win.valid)]
                           + [_fmt(v) for v in win.readings])


def read_windows_csv(path: str) -> dict[str, list[ingest.PeakDayWindow]]:
    windows: dict[str, list[ingest.PeakDayWindow]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            hid, date, valid = row[0], dt.date.fromisoformat(row[1]), bool(int(row[2]))
            readings = np.array([float(v) for v in row[3:]])
            windows.setdefault(hid, []).append(
                ingest.PeakDayWindow(hid, date, readings, valid)
            )
    return windows


def write_features_csv(matrix: cl.FeatureMatrix, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["household_id"] + matrix.feature_names)
        for hid, row in zip(matrix.household_ids, matrix.rows):
            w.writerow([hid] + [_fmt(v) for v in row])


def read_features_csv(path: str) -> cl.FeatureMatrix:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        ids, rows = [], []
        for row in reader:
            ids.append(row[0])
            rows.append([float(v) for v in row[1:]])
    return cl.FeatureMatrix(ids, np.array(rows), header[1:])


def write_partitions_csv(partitions: dict[str, cl.Partition], path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["household_id", "algorithm", "cluster"])
        for name in sorted(partitions):
            part = partitions[name]
            for hid, label in zip(part.ids, part.labels):
                w.writerow([hid, name, int(label)])


def read_partitions_csv(path: str) -> dict[str, cl.Partition]:
    rows: dict[str, list[tuple[str, int]]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for hid, name, label in reader:
            rows.setdefault(name, []).append((hid, int(label)))
    partitions = {}
    for name, pairs in rows.items():
        ids = [h for h, _ in pairs]
        labels = np.array([c for _, c in pairs], dtype=int)
        partitions[name] = cl.Partition(ids, labels, k=int(labels.max()), algorithm=name)
    return partitions


def write_validity_report(report: validity.ValidityReport, json_path: str,
                          table1_path: str, table2_path: str) -> None:
    with open(json_path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(table1_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["algorithm", "cluster_sizes", "mia", "cdi"])
        for p in report.partitions:
            w.writerow([
                p.algorithm,
                " ".join(str(s) for s in p.cluster_sizes),
                _fmt(p.mia),
                "" if p.cdi is None else _fmt(p.cdi),
            ])
    with open(table2_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["algorithm"] + report.rand_names)
        for name, row in zip(report.rand_names, report.rand_matrix):
            w.writerow([name] + [_fmt(v) for v in row])
        w.writerow(["mean_offdiagonal", _fmt(report.mean_offdiagonal_rand)])


def write_rejects_csv(rejects: list[ingest.RejectedRow], path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["line_number", "reason", "line"])
        for r in rejects:
            w.writerow([r.line_number, r.reason, r.line])


# ---------------------------------------------------------------- end to end

def run_pipeline(cfg: RunConfig) -> validity.ValidityReport:
    """Run every stage, writing all artifacts into ``cfg.out_dir``."""
    import os

    os.makedirs(cfg.out_dir, exist_ok=True)

    def out(name: str) -> str:
        return os.path.join(cfg.out_dir, name)

    with open(out("manifest.json"), "w") as fh:
        json.dump(cfg.to_manifest(), fh, indent=2, sort_keys=True)
        fh.write("\n")

    windows_by_hh, parsed = compute_windows(cfg)
    write_rejects_csv(parsed.rejects, out("rejects.csv"))
    write_windows_csv(windows_by_hh, out("windows.csv"))

    matrix = build_features(windows_by_hh, cfg.features, cfg.sax_params())
    write_features_csv(matrix, out("features.csv"))

    normalized = cl.minmax_normalize(matrix)
    partitions = cl.run_suite(
        normalized, cfg.k, cfg.seed, cfg.algorithms,
        cfg.fuzzifier, cfg.rf_trees, cfg.kmeans_init,
    )
    if not partitions:
        raise PipelineError("clustering-failed", "no algorithm produced a partition")
    write_partitions_csv(partitions, out("partitions.csv"))

    report = validity.consistency_report(partitions, normalized, cfg.mia_raw)
    write_validity_report(report, out("validity.json"), out("table1.csv"), out("table2.csv"))

    if cfg.plots:
        try:
            from . import plots
            plots.write_all(windows_by_hh, matrix, partitions, cfg.out_dir)
        except Exception:
            log.exception("plot generation failed; continuing")
    return report
