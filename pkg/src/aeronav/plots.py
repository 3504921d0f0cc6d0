"""Figure and CSV emission for corpus statistics reports."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .metrics import Histogram, StatsReport  # noqa: E402


def _hist_csv(h: Histogram, path: Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["bin_start", "bin_end", "count"])
        for lo, hi, c in zip(h.edges, h.edges[1:], h.counts):
            w.writerow([lo, hi, c])


def _hist_png(h: Histogram, path: Path, title: str, xlabel: str) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    widths = [b - a for a, b in zip(h.edges, h.edges[1:])]
    ax.bar(h.edges[:-1], h.counts, width=widths, align="edge",
           color="#4878b0", edgecolor="white")
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("count")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _bars_png(props: dict[str, float], path: Path, title: str) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    keys = list(props)
    ax.bar(range(len(keys)), [props[k] for k in keys], color="#4878b0")
    ax.set_xticks(range(len(keys)))
    ax.set_xticklabels(keys, rotation=30, ha="right", fontsize=8)
    ax.set_title(title)
    ax.set_ylabel("proportion")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_stats_artifacts(stats: StatsReport, outdir: str | Path) -> list[Path]:
    """Write one CSV and one PNG per statistic; return the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    for name, hist, xlabel in [
        ("dist_to_goal", stats.dist_to_goal, "start-to-goal distance (m)"),
        ("description_words", stats.description_words, "description length (words)"),
        ("actions_per_trajectory", stats.actions_per_trajectory, "actions per trajectory"),
    ]:
        csv_path = outdir / f"{name}.csv"
        png_path = outdir / f"{name}.png"
        _hist_csv(hist, csv_path)
        _hist_png(hist, png_path, name.replace("_", " "), xlabel)
        written += [csv_path, png_path]

    for name, props in [
        ("action_proportions", stats.action_proportions),
        ("action_proportions_near_landmark", stats.action_proportions_near_landmark),
        ("action_proportions_elsewhere", stats.action_proportions_elsewhere),
    ]:
        csv_path = outdir / f"{name}.csv"
        with open(csv_path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["action", "proportion"])
            for k, v in props.items():
                w.writerow([k, v])
        png_path = outdir / f"{name}.png"
        _bars_png(props, png_path, name.replace("_", " "))
        written += [csv_path, png_path]

    alt = stats.altitude_by_distance_bin
    csv_path = outdir / "altitude_by_distance.csv"
    with open(csv_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["distance_bin_start", "mean_altitude"])
        for e, m in zip(alt["edges"], alt["mean_altitude"]):
            w.writerow([e, m])
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(alt["edges"], alt["mean_altitude"], marker="o", ms=3, color="#b0485a")
    ax.set_xlabel("distance to goal (m, 20 m bins)")
    ax.set_ylabel("mean altitude (m)")
    ax.set_title("altitude vs distance to goal")
    fig.tight_layout()
    png_path = outdir / "altitude_by_distance.png"
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    written += [csv_path, png_path]

    csv_path = outdir / "landmark_rates.csv"
    with open(csv_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["metric", "value"])
        w.writerow(["pass_over_polygon", stats.landmark_pass_rate])
        for k, v in stats.landmark_near_rates.items():
            w.writerow([f"within_{k}_of_centroid", v])
    written.append(csv_path)
    return written
