"""Report rendering: results.json, per-model/per-group CSV tables, SVG charts.

CSV tables print values with 2 decimal places and flag each row's best
value with a trailing asterisk; results.json keeps full precision and is
byte-deterministic apart from its provenance timestamp. Charts are plain
hand-built SVG (no plotting dependency): grouped bars with a 0.1-step
axis and value labels.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import CorruptFileError, VersionMismatchError
from .experiment import CellResult, ExperimentMatrix, _aggregate
from .metrics import ConfusionMatrix
from .schema import builtin_groups

RESULTS_FORMAT_VERSION = 1

_AGG_TOLERANCE = 1e-12


def matrix_to_dict(matrix: ExperimentMatrix) -> dict:
    cells = []
    for g in matrix.groups:
        for m in matrix.models:
            c = matrix.cells[(g, m)]
            cells.append(
                {
                    "group": g,
                    "model": m,
                    "hyperparameters": c.hyperparameters,
                    "accuracy": c.accuracy,
                    "f1": c.f1,
                    "macro_f1": c.macro_f1,
                    "confusion": None
                    if c.confusion is None
                    else {
                        "tp": c.confusion.tp,
                        "fp": c.confusion.fp,
                        "tn": c.confusion.tn,
                        "fn": c.confusion.fn,
                    },
                    "n_test": c.n_test,
                    "cv_table": c.cv_table,
                    "error": c.error,
                }
            )
    return {
        "format_version": RESULTS_FORMAT_VERSION,
        "provenance": matrix.provenance,
        "groups": list(matrix.groups),
        "models": list(matrix.models),
        "cells": cells,
        "group_stats": matrix.group_stats,
        "model_stats": matrix.model_stats,
    }


def matrix_from_dict(raw: dict) -> ExperimentMatrix:
    try:
        version = raw["format_version"]
        if version != RESULTS_FORMAT_VERSION:
            raise VersionMismatchError(f"unsupported results version: {version}")
        cells = {}
        for entry in raw["cells"]:
            cm = entry["confusion"]
            cells[(entry["group"], entry["model"])] = CellResult(
                group_id=entry["group"],
                model_id=entry["model"],
                hyperparameters=entry["hyperparameters"],
                accuracy=entry["accuracy"],
                f1=entry["f1"],
                macro_f1=entry["macro_f1"],
                confusion=None if cm is None else ConfusionMatrix(**cm),
                cv_table=entry["cv_table"],
                n_test=entry["n_test"],
                error=entry["error"],
            )
        return ExperimentMatrix(
            groups=tuple(raw["groups"]),
            models=tuple(raw["models"]),
            cells=cells,
            group_stats=raw["group_stats"],
            model_stats=raw["model_stats"],
            provenance=raw["provenance"],
        )
    except VersionMismatchError:
        raise
    except (KeyError, TypeError) as exc:
        raise CorruptFileError(f"results file is malformed: {exc}") from exc


def load_results(path) -> ExperimentMatrix:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CorruptFileError(f"results file is not valid JSON: {exc}") from exc
    return matrix_from_dict(raw)


def results_json_text(matrix: ExperimentMatrix) -> str:
    return json.dumps(matrix_to_dict(matrix), sort_keys=True, indent=2) + "\n"


def _fmt_cell(value, best) -> str:
    if value is None:
        return "ERR"
    text = f"{value:.2f}"
    return text + "*" if best else text


def render_table4(matrix: ExperimentMatrix) -> str:
    """Model × metric rows against group columns, best value per row starred."""
    lines = ["Model," + ",".join(matrix.groups)]
    for m in matrix.models:
        for metric, attr in (("Acc", "accuracy"), ("F1", "f1")):
            values = [getattr(matrix.cells[(g, m)], attr) for g in matrix.groups]
            present = [v for v in values if v is not None]
            best = max(present) if present else None
            row = [f"{m} ({metric})"]
            row += [_fmt_cell(v, v is not None and v == best) for v in values]
            lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def render_table5(matrix: ExperimentMatrix) -> str:
    """Per-group mean and sample-SD of accuracy and F1 across models."""
    lines = ["group,mean_acc,sd_acc,mean_f1,sd_f1"]
    for g in matrix.groups:
        s = matrix.group_stats[g]
        fields = [g] + [
            "ERR" if s[key] is None else f"{s[key]:.2f}"
            for key in ("mean_acc", "sd_acc", "mean_f1", "sd_f1")
        ]
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def render_table5_text(matrix: ExperimentMatrix) -> str:
    """Aligned stdout rendering of the per-group summary."""
    names = {g: grp.name for g, grp in builtin_groups().items()}
    header = f"{'group':<6}{'variables':<30}{'mean_acc':>9}{'sd_acc':>8}{'mean_f1':>9}{'sd_f1':>8}"
    lines = [header, "-" * len(header)]
    for g in matrix.groups:
        s = matrix.group_stats[g]
        cells = [
            "ERR" if s[key] is None else f"{s[key]:.2f}"
            for key in ("mean_acc", "sd_acc", "mean_f1", "sd_f1")
        ]
        lines.append(
            f"{g:<6}{names.get(g, ''):<30}{cells[0]:>9}{cells[1]:>8}{cells[2]:>9}{cells[3]:>8}"
        )
    return "\n".join(lines)


def _svg_grouped_bars(title: str, categories, series: dict, width=720, height=400) -> str:
    """Two-series grouped bar chart on a fixed [0, 1] axis with 0.1 ticks."""
    margin_l, margin_r, margin_t, margin_b = 56, 16, 44, 56
    plot_w = width - margin_l - margin_r
    plot_h = height - margin_t - margin_b
    colors = ("#4878a8", "#e49444", "#6aa56e", "#d1605e")
    n_cat = len(categories)
    n_ser = len(series)
    slot = plot_w / max(n_cat, 1)
    bar_w = slot * 0.72 / max(n_ser, 1)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
    ]
    # y axis: ticks every 0.1
    for i in range(11):
        v = i / 10.0
        y = margin_t + plot_h * (1.0 - v)
        out.append(
            f'<line x1="{margin_l}" y1="{y:.1f}" x2="{width - margin_r}" y2="{y:.1f}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{margin_l - 6}" y="{y + 4:.1f}" text-anchor="end">{v:.1f}</text>'
        )
    # bars
    for si, (name, values) in enumerate(series.items()):
        color = colors[si % len(colors)]
        for ci, value in enumerate(values):
            x = margin_l + ci * slot + slot * 0.14 + si * bar_w
            if value is None:
                label_y = margin_t + plot_h - 4
                out.append(
                    f'<text x="{x + bar_w / 2:.1f}" y="{label_y:.1f}" '
                    f'text-anchor="middle" fill="{color}">n/a</text>'
                )
                continue
            h = plot_h * max(0.0, min(1.0, value))
            y = margin_t + plot_h - h
            out.append(
                f'<rect x="{x:.1f}" y="{y:.1f}" width="{bar_w:.1f}" height="{h:.1f}" fill="{color}"/>'
            )
            out.append(
                f'<text x="{x + bar_w / 2:.1f}" y="{y - 3:.1f}" text-anchor="middle" '
                f'font-size="9">{value:.2f}</text>'
            )
    # x labels
    for ci, cat in enumerate(categories):
        x = margin_l + ci * slot + slot / 2
        y = margin_t + plot_h + 16
        out.append(f'<text x="{x:.1f}" y="{y:.1f}" text-anchor="middle">{cat}</text>')
    # legend
    lx = margin_l
    ly = height - 18
    for si, name in enumerate(series):
        color = colors[si % len(colors)]
        out.append(f'<rect x="{lx}" y="{ly - 9}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{lx + 14}" y="{ly}">{name}</text>')
        lx += 14 + 8 * len(name) + 24
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_fig2a(matrix: ExperimentMatrix) -> str:
    stats = matrix.group_stats
    return _svg_grouped_bars(
        "Mean accuracy and F1 by variable group (across models)",
        matrix.groups,
        {
            "Accuracy": [stats[g]["mean_acc"] for g in matrix.groups],
            "F1": [stats[g]["mean_f1"] for g in matrix.groups],
        },
    )


def render_fig2b(matrix: ExperimentMatrix) -> str:
    stats = matrix.model_stats
    return _svg_grouped_bars(
        "Mean accuracy and F1 by model (across variable groups)",
        matrix.models,
        {
            "Accuracy": [stats[m]["mean_acc"] for m in matrix.models],
            "F1": [stats[m]["mean_f1"] for m in matrix.models],
        },
        width=860,
    )


def _check_aggregates(matrix: ExperimentMatrix) -> None:
    group_stats, model_stats = _aggregate(matrix.cells, matrix.groups, matrix.models)
    for g in matrix.groups:
        for key, fresh in group_stats[g].items():
            stored = matrix.group_stats[g][key]
            if fresh is None or stored is None:
                if fresh != stored:
                    raise AssertionError(f"aggregate mismatch for group {g}/{key}")
            elif abs(fresh - stored) > _AGG_TOLERANCE:
                raise AssertionError(f"aggregate mismatch for group {g}/{key}")
    for m in matrix.models:
        for key, fresh in model_stats[m].items():
            stored = matrix.model_stats[m][key]
            if fresh is None or stored is None:
                if fresh != stored:
                    raise AssertionError(f"aggregate mismatch for model {m}/{key}")
            elif abs(fresh - stored) > _AGG_TOLERANCE:
                raise AssertionError(f"aggregate mismatch for model {m}/{key}")


def emit_report(matrix: ExperimentMatrix, out_dir, write_results: bool = True) -> dict:
    """Write table4.csv, table5.csv, fig2a.svg, fig2b.svg and results.json.

    Aggregates are recomputed from the cells before writing and must agree
    with the stored ones to within 1e-12.
    """
    _check_aggregates(matrix)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "table4": out / "table4.csv",
        "table5": out / "table5.csv",
        "fig2a": out / "fig2a.svg",
        "fig2b": out / "fig2b.svg",
    }
    files["table4"].write_text(render_table4(matrix), encoding="utf-8")
    files["table5"].write_text(render_table5(matrix), encoding="utf-8")
    files["fig2a"].write_text(render_fig2a(matrix), encoding="utf-8")
    files["fig2b"].write_text(render_fig2b(matrix), encoding="utf-8")
    if write_results:
        files["results"] = out / "results.json"
        files["results"].write_text(results_json_text(matrix), encoding="utf-8")
    return files
