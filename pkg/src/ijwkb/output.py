"""CSV, JSON and SVG emission.  Everything written here is deterministic."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

NEGATIVE_CONTROL_TAG = "NEGATIVE_CONTROL"


def fmt(value) -> str:
    if isinstance(value, str):
        return value
    return "%.17g" % (float(value) + 0.0)  # + 0.0 folds -0 into 0


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def read_csv(path):
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    return header, np.array(rows, dtype=float).reshape(-1, len(header))


def write_field(path, field, with_abs=False):
    """Columns x, re, im (and abs) of a ComplexField."""
    v = field.values
    cols = [field.grid, v.real, v.imag] + ([np.abs(v)] if with_abs else [])
    header = ["x", "re", "im"] + (["abs"] if with_abs else [])
    return write_csv(path, header, zip(*cols))


def write_json(path, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not serializable: {type(obj).__name__}")


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def write_svg(path, series, title="", xlabel="x", ylabel="", logy=False,
              width=640, height=400):
    """Polyline plot of ``series``: a list of (label, xs, ys)."""
    margin = 60
    pts = []
    for label, xs, ys in series:
        xs, ys = np.asarray(xs, float), np.asarray(ys, float)
        if logy:
            keep = ys > 0
            xs, ys = xs[keep], np.log10(ys[keep])
        keep = np.isfinite(xs) & np.isfinite(ys)
        pts.append((label, xs[keep], ys[keep]))
    allx = np.concatenate([p[1] for p in pts]) if pts else np.array([0.0])
    ally = np.concatenate([p[2] for p in pts]) if pts else np.array([0.0])
    if allx.size == 0:
        allx = ally = np.array([0.0])
    x0, x1 = float(allx.min()), float(allx.max())
    y0, y1 = float(ally.min()), float(ally.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def sx(x):
        return margin + (x - x0) / (x1 - x0) * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
           f'height="{height - 2 * margin}" fill="none" stroke="black"/>',
           f'<text x="{width / 2}" y="{margin / 2}" text-anchor="middle">{escape(title)}</text>',
           f'<text x="{width / 2}" y="{height - 15}" text-anchor="middle">{escape(xlabel)}</text>',
           f'<text x="15" y="{height / 2}" text-anchor="middle" '
           f'transform="rotate(-90 15 {height / 2})">'
           f'{escape(("log10 " if logy else "") + ylabel)}</text>']
    for value, anchor in ((x0, "start"), (x1, "end")):
        out.append(f'<text x="{sx(value):.2f}" y="{height - margin + 15}" '
                   f'text-anchor="{anchor}" font-size="10">{value:.4g}</text>')
    for value in (y0, y1):
        out.append(f'<text x="{margin - 5}" y="{sy(value):.2f}" text-anchor="end" '
                   f'font-size="10">{value:.4g}</text>')
    for n, (label, xs, ys) in enumerate(pts):
        color = _COLORS[n % len(_COLORS)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                   f'points="{coords}"/>')
        out.append(f'<text x="{width - margin + 5}" y="{margin + 15 * (n + 1)}" '
                   f'fill="{color}" font-size="10">{escape(label)}</text>')
    out.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out) + "\n")
    return path


def write_comparison(path, comparison):
    return write_csv(path, comparison.COLUMNS, comparison.table())


def write_diagnostics_bundle(outdir, report, params, claims=()):
    """One CSV per field, the turning-point table and summary.json."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for stem, field in report.fields().items():
        write_field(outdir / f"{stem}.csv", field)
    write_csv(outdir / "turning_point_table.csv", ["epsilon", "abs_eta", "abs_w_jwkb", "error"],
              [(r.epsilon, r.abs_eta, r.abs_w_jwkb, r.error) for r in report.turning_point_table])
    summary = {k: (None if isinstance(v, float) and math.isnan(v) else v)
               for k, v in report.summary().items()}
    summary["claims"] = [c.as_dict() for c in claims]
    summary["environment"] = {"hbar": params.hbar, "mass": params.mass}
    return write_json(outdir / "summary.json", summary)
