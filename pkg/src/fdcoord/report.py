"""Campaign output writing: delimited CDF files, summaries, and figures.

File layout inside an output directory (names are stable API):

    config.json                              resolved configuration echo
    cdf__<metric>__<scheme>__<view>.csv      sorted sample vector, one per line
    summary.json                             machine-readable summary
    summary.txt                              human-readable median table
    fig__<metric>__<view>.png                CDF overlay across schemes

Metrics: ``interference`` (dBm at DL users on FD resources), ``dl_se`` and
``uldl_se`` (normalized spectral efficiency, bits/s/Hz), ``dl_rate`` (raw
rate density). Views: ``cell`` (whole cell) and ``center`` where emitted.
All writers are deterministic: identical inputs produce identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .sim import CampaignResult, CdfSeries  # noqa: E402

SCHEME_LABELS = {
    "hd": "HD",
    "fdrand": "FDrand",
    "fdregrand": "FDregrand",
    "fdreghdelse": "FDregHDelse",
    "optimal": "Optimal",
}

_AXIS_LABELS = {
    "interference": "inter-user interference at DL user (dBm)",
    "dl_se": "DL normalized spectral efficiency (bits/s/Hz)",
    "uldl_se": "UL+DL normalized spectral efficiency (bits/s/Hz)",
    "dl_rate": "DL rate density (bits/s/Hz)",
}


def cdf_filename(metric: str, scheme: str, view: str) -> str:
    return f"cdf__{metric}__{scheme}__{view}.csv"


def write_cdf_csv(series: CdfSeries, metric: str, path: Path) -> None:
    lines = [metric]
    lines.extend(repr(float(v)) for v in series.values)
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def read_cdf_csv(path: Path) -> list[float]:
    lines = path.read_text(encoding="ascii").splitlines()
    return [float(v) for v in lines[1:]]


def summary_table(summary: dict) -> str:
    lines = []
    keys = sorted({k for s in summary["schemes"].values() for k in s["medians"]})
    header = f"{'scheme':<14}" + "".join(f"{k:>22}" for k in keys)
    lines.append(header)
    lines.append("-" * len(header))
    for scheme in sorted(summary["schemes"]):
        medians = summary["schemes"][scheme]["medians"]
        row = f"{scheme:<14}"
        for key in keys:
            row += f"{medians[key]:>22.4f}" if key in medians else f"{'-':>22}"
        lines.append(row)
    lines.append("")
    noise = summary["noise_floor_dbm"]
    for scheme in sorted(summary["schemes"]):
        inter = summary["schemes"][scheme]["interference"]
        if inter is not None:
            lines.append(
                f"{scheme}: P(I > {noise:g} dBm) = {inter['p_above_noise']:.4f}, "
                f"mass at floor = {inter['mass_at_floor']:.4f}"
            )
    if summary["gains"]:
        lines.append("")
        lines.append("median gains:")
        for name in sorted(summary["gains"]):
            lines.append(f"  {name} = {summary['gains'][name]:.4f}")
    return "\n".join(lines) + "\n"


def _plot_cdf_overlay(
    series_by_scheme: dict[str, CdfSeries],
    xlabel: str,
    out_path: Path,
    vline: float | None = None,
) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for scheme in sorted(series_by_scheme):
        series = series_by_scheme[scheme]
        probs = np.arange(1, len(series) + 1) / len(series)
        ax.step(
            series.values,
            probs,
            where="post",
            label=SCHEME_LABELS.get(scheme, scheme),
        )
    if vline is not None:
        ax.axvline(vline, color="gray", linestyle="--", linewidth=1.0)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("CDF")
    ax.set_ylim(0.0, 1.0)
    ax.grid(alpha=0.3)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_figures(
    out_dir: Path, results: dict[str, CampaignResult], noise_floor_dbm: float
) -> list[Path]:
    """One CDF overlay figure per (metric, view) that any scheme emitted."""
    written = []
    pairs: dict[tuple[str, str], dict[str, CdfSeries]] = {}
    for scheme, result in results.items():
        for key, series in result.series.items():
            metric, view = key.split("__")
            pairs.setdefault((metric, view), {})[scheme] = series
    for (metric, view), by_scheme in sorted(pairs.items()):
        path = out_dir / f"fig__{metric}__{view}.png"
        vline = noise_floor_dbm if metric == "interference" else None
        _plot_cdf_overlay(by_scheme, _AXIS_LABELS.get(metric, metric), path, vline=vline)
        written.append(path)
    return written


def write_campaign_outputs(
    out_dir: Path,
    results: dict[str, CampaignResult],
    summary: dict,
    resolved_config: dict,
    figures: bool = True,
) -> None:
    """Write the full output tree for a set of per-scheme campaign results."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.json").write_text(
        json.dumps(resolved_config, indent=2, sort_keys=True) + "\n", encoding="ascii"
    )
    for scheme, result in sorted(results.items()):
        for key, series in sorted(result.series.items()):
            metric, view = key.split("__")
            write_cdf_csv(series, metric, out_dir / cdf_filename(metric, scheme, view))
    (out_dir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="ascii"
    )
    (out_dir / "summary.txt").write_text(summary_table(summary), encoding="ascii")
    if figures:
        render_figures(out_dir, results, summary["noise_floor_dbm"])
