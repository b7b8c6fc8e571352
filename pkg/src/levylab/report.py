"""Check records, per-suite reports and their CSV / JSON / SVG emission.

Reports are byte-deterministic given the inputs: runtimes are never written
to files (the CLI prints them to stderr), keys are sorted and floats are
written with ``repr``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

__all__ = ["CheckRecord", "ExperimentReport", "render_svg"]


def _clean(v: Any) -> Any:
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else repr(f)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.ndarray):
        return [_clean(x) for x in v.tolist()]
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


@dataclass
class CheckRecord:
    name: str
    anchor: str
    statistics: dict[str, Any]
    bounds: dict[str, Any] = field(default_factory=dict)
    passed: bool | None = None  # None where no criterion is defined
    n_samples: int = 0
    seed: int = 0
    runtime: float = 0.0  # seconds; kept out of the files

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "anchor": self.anchor,
            "statistics": _clean(self.statistics),
            "bounds": _clean(self.bounds),
            "passed": None if self.passed is None else bool(self.passed),
            "n_samples": int(self.n_samples),
            "seed": int(self.seed),
        }


@dataclass
class ExperimentReport:
    suite: str
    model: str
    seed: int
    records: list[CheckRecord] = field(default_factory=list)
    series: list[dict[str, Any]] = field(default_factory=list)  # CSV rows
    error: str | None = None

    def add(self, rec: CheckRecord) -> CheckRecord:
        self.records.append(rec)
        return rec

    @property
    def passed(self) -> bool:
        return self.error is None and all(r.passed is not False for r in self.records)

    @property
    def runtime(self) -> float:
        return sum(r.runtime for r in self.records)

    def summary(self) -> dict:
        return {
            "suite": self.suite,
            "model": self.model,
            "seed": int(self.seed),
            "passed": None if self.passed is None else bool(self.passed),
            "error": self.error,
            "records": [r.as_dict() for r in self.records],
        }

    def json_text(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True) + "\n"

    def csv_text(self) -> str:
        buf = io.StringIO()
        if self.series:
            cols: list[str] = []
            for row in self.series:
                cols += [k for k in row if k not in cols]
            w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
            w.writeheader()
            for row in self.series:
                w.writerow({k: _fmt(row.get(k, "")) for k in cols})
        return buf.getvalue()

    def write(self, out_dir: str | Path, svg: bool = False) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = f"{self.suite}_{self.model}_seed{self.seed}"
        paths = [out / f"{stem}.json", out / f"{stem}.csv"]
        paths[0].write_text(self.json_text())
        paths[1].write_text(self.csv_text())
        if svg and self.series:
            p = out / f"{stem}.svg"
            p.write_text(render_svg(self.series, title=f"{self.suite} / {self.model}"))
            paths.append(p)
        return paths


def _fmt(v: Any) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    return str(v)


def render_svg(rows: list[dict], title: str = "", x: str | None = None,
               ys: list[str] | None = None, width: int = 480, height: int = 320) -> str:
    """Minimal line chart of numeric CSV columns (log x-axis when x spans > 2 decades)."""
    num = [k for k in rows[0] if all(isinstance(r.get(k), (int, float, np.floating, np.integer))
                                   and not isinstance(r.get(k), bool) for r in rows)]
    if not num:
        return f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"/>\n'
    x = x or num[0]
    ys = ys or [k for k in num if k != x][:4]
    xv = np.array([float(r[x]) for r in rows])
    logx = bool(np.all(xv > 0) and xv.max() / xv.min() > 100)
    X = np.log10(xv) if logx else xv
    allv = np.array([[float(r[k]) for k in ys] for r in rows]) if ys else np.zeros((len(rows), 1))
    fin = allv[np.isfinite(allv)]
    ylo, yhi = (float(fin.min()), float(fin.max())) if fin.size else (0.0, 1.0)
    if yhi == ylo:
        yhi = ylo + 1.0
    xlo, xhi = float(X.min()), float(X.max())
    if xhi == xlo:
        xhi = xlo + 1.0
    m = 40
    sx = lambda v: m + (v - xlo) / (xhi - xlo) * (width - 2 * m)
    sy = lambda v: height - m - (v - ylo) / (yhi - ylo) * (height - 2 * m)
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="11">',
           f'<rect x="{m}" y="{m}" width="{width - 2 * m}" height="{height - 2 * m}" '
           f'fill="none" stroke="#444"/>',
           f'<text x="{width / 2:.1f}" y="18" text-anchor="middle">{title}</text>',
           f'<text x="{width / 2:.1f}" y="{height - 8}" text-anchor="middle">'
           f'{"log10 " if logx else ""}{x}</text>',
           f'<text x="4" y="{m - 6}">{ylo:.3g} .. {yhi:.3g}</text>']
    for i, k in enumerate(ys):
        pts = " ".join(f"{sx(a):.1f},{sy(b):.1f}" for a, b in zip(X, allv[:, i]) if math.isfinite(b))
        c = colors[i % len(colors)]
        out.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{width - m + 4}" y="{m + 14 * (i + 1)}" fill="{c}">{k}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
