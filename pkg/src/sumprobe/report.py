"""Render score reports as markdown, CSV or JSON."""

from __future__ import annotations

import csv
import io
import json
import math

MEASURE_ORDER = (
    "word_list_inclusion",
    "word_list_inclusion_uniform",
    "entity_inclusion",
    "hallucination_bias",
    "distinguishability_count",
    "distinguishability_dense",
)

ALIGNMENT_ROWS = (
    ("input_entities", "Input entities"),
    ("summary_entities", "Summary entities"),
    ("input_entities_with_alignment", "Input entities with alignment in summary"),
    ("aligned_summary_entities", "Aligned summary entities"),
    ("hallucinated", "Summary entities tagged as hallucinated"),
    ("gender_classified_hallucinations", "...of these with gender classification"),
    ("unresolved", "Unresolved summary entities"),
)


def _fmt(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return f"{value:.2f}"


def _cell(entry: dict) -> str:
    parts = [_fmt(entry["point"])]
    for axis in ("s", "d"):
        ci = entry.get(f"ci_{axis}")
        if ci is not None:
            parts.append(f"{axis}: {_fmt(ci[0])},{_fmt(ci[1])}")
    return " · ".join(parts)


def _measure_names(report: dict) -> list[str]:
    present = {m for s in report["systems"].values() for m in s["measures"]}
    ordered = [m for m in MEASURE_ORDER if m in present]
    return ordered + sorted(present - set(ordered))


def render_markdown(report: dict) -> str:
    out = io.StringIO()
    systems = sorted(report["systems"])
    out.write("# Bias report\n\n")
    cfg = report.get("config", {})
    if cfg:
        out.write(
            f"scheme: `{cfg.get('scheme')}` · seed: `{cfg.get('seed')}` · "
            f"variants/original: `{cfg.get('variants')}` · "
            f"bootstrap replicates: `{cfg.get('replicates')}`\n\n"
        )
    out.write("## Scores\n\n")
    out.write("| Measure | " + " | ".join(systems) + " |\n")
    out.write("|---" * (len(systems) + 1) + "|\n")
    for measure in _measure_names(report):
        cells = []
        for system in systems:
            entry = report["systems"][system]["measures"].get(measure)
            cells.append(_cell(entry) if entry else "n/a")
        out.write(f"| {measure} | " + " | ".join(cells) + " |\n")

    out.write("\n## Alignment counts\n\n")
    out.write("| Count | " + " | ".join(systems) + " |\n")
    out.write("|---" * (len(systems) + 1) + "|\n")
    for key, label in ALIGNMENT_ROWS:
        row = []
        for system in systems:
            counts = report["systems"][system]["alignment_counts"]
            row.append(str(counts.get(key, 0)))
        out.write(f"| {label} | " + " | ".join(row) + " |\n")

    for system in systems:
        top = report["systems"][system]["hallucination_top"]
        out.write(f"\n## Most frequent hallucinations: {system}\n\n")
        if not top:
            out.write("_none_\n")
            continue
        out.write("| Entity | Count | Gender |\n|---|---|---|\n")
        for name, count, tag in top:
            out.write(f"| {name} | {count} | {tag} |\n")
    return out.getvalue()


def render_csv(report: dict) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["system", "measure", "point", "s_lo", "s_hi", "d_lo", "d_hi", "n"])
    for system in sorted(report["systems"]):
        measures = report["systems"][system]["measures"]
        for measure in _measure_names(report):
            if measure not in measures:
                continue
            entry = measures[measure]
            ci_s = entry.get("ci_s") or (None, None)
            ci_d = entry.get("ci_d") or (None, None)
            writer.writerow(
                [system, measure, entry["point"], ci_s[0], ci_s[1], ci_d[0], ci_d[1], entry["n"]]
            )
    return out.getvalue()


def render_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=1) + "\n"


RENDERERS = {"markdown": render_markdown, "md": render_markdown,
             "csv": render_csv, "json": render_json}


def render_report(report: dict, fmt: str) -> str:
    if fmt not in RENDERERS:
        raise ValueError(f"unknown report format {fmt!r}")
    return RENDERERS[fmt](report)
