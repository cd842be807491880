"""Best-effort SVG summary plots, written directly as SVG text so the
package needs no rendering dependency."""

from __future__ import annotations

import os

import numpy as np

from .cluster import FeatureMatrix, Partition
from .ingest import PeakDayWindow
from .motif import profile_features

WIDTH, HEIGHT = 640, 400
MARGIN = 45
PALETTE = [
    "#1b6ca8", "#d1495b", "#66a182", "#edae49", "#8d5a97",
    "#00798c", "#a44a3f", "#5b5f97",
]


def _svg(elements: list[str], title: str) -> str:
    body = "\n  ".join(elements)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">\n'
        f'  <rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>\n'
        f'  <text x="{WIDTH / 2}" y="20" text-anchor="middle" font-size="14" '
        f'font-family="sans-serif">{title}</text>\n'
        f"  {body}\n</svg>\n"
    )


def _scale(values, lo, hi, out_lo, out_hi):
    span = hi - lo if hi > lo else 1.0
    return out_lo + (np.asarray(values, float) - lo) / span * (out_hi - out_lo)


def _axes() -> list[str]:
    return [
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
    ]


def profile_overlay(profiles: list[np.ndarray], title: str) -> str:
    """One polyline per household's average profile."""
    elements = _axes()
    if profiles:
        ymax = max(float(np.max(p)) for p in profiles) or 1.0
        for i, p in enumerate(profiles):
            xs = _scale(np.arange(len(p)), 0, max(len(p) - 1, 1), MARGIN, WIDTH - MARGIN)
            ys = _scale(p, 0, ymax, HEIGHT - MARGIN, MARGIN)
            pts = " ".join(f"{x:.1f},{y:.1f}" for x, y in zip(xs, ys))
            color = PALETTE[i % len(PALETTE)]
            elements.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" '
                f'stroke-width="1" opacity="0.7"/>'
            )
    return _svg(elements, title)


def scatter(xs, ys, title: str, labels=None) -> str:
    elements = _axes()
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    if len(xs):
        px = _scale(xs, float(xs.min()), float(xs.max()), MARGIN, WIDTH - MARGIN)
        py = _scale(ys, float(ys.min()), float(ys.max()), HEIGHT - MARGIN, MARGIN)
        for i, (x, y) in enumerate(zip(px, py)):
            color = PALETTE[(labels[i] - 1) % len(PALETTE)] if labels is not None else PALETTE[0]
            elements.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="3" fill="{color}" opacity="0.8"/>')
    return _svg(elements, title)


def size_bars(sizes_by_algorithm: dict[str, list[int]], title: str) -> str:
    elements = _axes()
    names = sorted(sizes_by_algorithm)
    all_sizes = [s for name in names for s in sizes_by_algorithm[name]]
    if all_sizes:
        ymax = max(all_sizes)
        total_bars = len(all_sizes)
        bar_w = (WIDTH - 2 * MARGIN) / max(total_bars + len(names), 1)
        x = MARGIN
        for gi, name in enumerate(names):
            for s in sizes_by_algorithm[name]:
                h = (HEIGHT - 2 * MARGIN) * s / ymax
                elements.append(
                    f'<rect x="{x:.1f}" y="{HEIGHT - MARGIN - h:.1f}" '
                    f'width="{bar_w * 0.9:.1f}" height="{h:.1f}" '
                    f'fill="{PALETTE[gi % len(PALETTE)]}"/>'
                )
                x += bar_w
            elements.append(
                f'<text x="{x - bar_w:.1f}" y="{HEIGHT - MARGIN + 16}" font-size="10" '
                f'font-family="sans-serif" text-anchor="end">{name}</text>'
            )
            x += bar_w
    return _svg(elements, title)


def write_all(
    windows_by_hh: dict[str, list[PeakDayWindow]],
    matrix: FeatureMatrix,
    partitions: dict[str, Partition],
    out_dir: str,
) -> list[str]:
    """Emit the summary SVGs for the first available partition."""
    written = []

    def emit(name: str, svg_text: str) -> None:
        path = os.path.join(out_dir, name)
        with open(path, "w") as fh:
            fh.write(svg_text)
        written.append(path)

    sizes = {
        name: sorted(np.bincount(p.labels)[1:][np.bincount(p.labels)[1:] > 0].tolist())
        for name, p in partitions.items()
    }
    emit("cluster_sizes.svg", size_bars(sizes, "Cluster sizes by algorithm"))

    if not partitions:
        return written
    name, part = sorted(partitions.items())[0]
    by_id = part.assignments()

    if matrix.rows.shape[1] >= 2:
        ids = matrix.household_ids
        labels = [by_id.get(h, 1) for h in ids]
        emit(
            "feature_scatter.svg",
            scatter(matrix.rows[:, 0], matrix.rows[:, 1],
                    f"{matrix.feature_names[0]} vs {matrix.feature_names[1]} ({name})",
                    labels=labels),
        )

    for lab in sorted(set(int(c) for c in part.labels)):
        members = [h for h in part.ids if by_id[h] == lab]
        profiles = []
        for h in members:
            valid = [w for w in windows_by_hh.get(h, []) if w.valid]
            if valid:
                profiles.append(profile_features(valid).values)
        emit(
            f"profiles_cluster_{lab}.svg",
            profile_overlay(profiles, f"Average load profiles, cluster {lab} ({name})"),
        )
    return written
