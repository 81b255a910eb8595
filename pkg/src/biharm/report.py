"""Convergence studies and their CSV / JSON / SVG output."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

from .fe_spaces import FeSpace
from .mesh import unit_square_mesh
from .solver import solve_strong_bc, solve_weak_bc
from .verification import convergence_rates, field_errors, get_case

__all__ = [
    "ConvergenceReport",
    "ComparisonReport",
    "run_study",
    "run_comparison",
    "loglog_svg",
    "REPORT_COLUMNS",
]

log = logging.getLogger(__name__)

REPORT_COLUMNS = ("level", "h", "dofs", "l2_u", "h1h_u", "l2_phi", "energy", "rate_energy", "seconds")
COMPARE_COLUMNS = (
    "level",
    "h",
    "dofs",
    "energy_weak",
    "energy_strong",
    "rate_weak",
    "rate_strong",
    "residual_weak",
    "residual_strong",
)


def _rates_column(errors, hs):
    if len(errors) < 2:
        return [None] * len(errors)
    return [None] + [None if math.isnan(r) else r for r in convergence_rates(errors, hs)]


def _csv(columns, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(["" if row[c] is None else row[c] for c in columns])
    return buf.getvalue()


@dataclass
class ConvergenceReport:
    """Per-level errors of a mesh-refinement study and the observed energy rates."""

    case: str
    k: int
    method: str
    rows: list = field(default_factory=list)

    @property
    def hs(self):
        return [r["h"] for r in self.rows]

    @property
    def rates(self):
        return [r["rate_energy"] for r in self.rows[1:]]

    @property
    def final_rate(self):
        rates = self.rates
        return rates[-1] if rates else None

    @property
    def columns(self):
        if len(self.rows) < 2:
            return tuple(c for c in REPORT_COLUMNS if c != "rate_energy")
        return REPORT_COLUMNS

    def to_csv(self):
        return _csv(self.columns, self.rows)

    def to_dict(self):
        return {
            "case": self.case,
            "k": self.k,
            "method": self.method,
            "rows": [{c: r[c] for c in self.columns} for r in self.rows],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def to_svg(self):
        return loglog_svg(
            {"energy error": (self.hs, [r["energy"] for r in self.rows])},
            ref_slope=self.k,
            title=f"{self.case}, k={self.k}",
        )


@dataclass
class ComparisonReport:
    """Weak-BC and strong-BC energy errors on the same mesh sequence."""

    case: str
    k: int
    rows: list = field(default_factory=list)

    @property
    def hs(self):
        return [r["h"] for r in self.rows]

    @property
    def final_rates(self):
        if len(self.rows) < 2:
            return None, None
        return self.rows[-1]["rate_weak"], self.rows[-1]["rate_strong"]

    def to_csv(self):
        return _csv(COMPARE_COLUMNS, self.rows)

    def to_dict(self):
        return {"case": self.case, "k": self.k, "rows": [dict(r) for r in self.rows]}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def to_svg(self):
        return loglog_svg(
            {
                "weak BC": (self.hs, [r["energy_weak"] for r in self.rows]),
                "strong BC": (self.hs, [r["energy_strong"] for r in self.rows]),
            },
            ref_slope=self.k,
            title=f"{self.case}, k={self.k}: weak vs strong boundary conditions",
        )


def _levels(n_min, n_levels):
    return [n_min * 2**j for j in range(n_levels)]


def _map(fn, items, threads):
    if threads <= 1 or len(items) == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def run_study(case, k, n_min, n_levels, method="direct", tol=1e-10, threads=1, diagonal="right"):
    """Solve the weakly imposed problem on n_min * 2^j meshes, j < n_levels."""
    data = get_case(case)

    def level(n):
        t0 = time.perf_counter()
        space = FeSpace(unit_square_mesh(n, diagonal), k)
        sol = solve_weak_bc(space, data.f, data.g_D, data.g_N, method=method, tol=tol)
        err = field_errors(space, data, sol)
        seconds = time.perf_counter() - t0
        log.info("n=%d dofs=%d energy=%.4e (%.2fs)", n, space.n_dofs, err["energy"], seconds)
        return space, sol, err, seconds

    results = _map(level, _levels(n_min, n_levels), threads)
    report = ConvergenceReport(case=case, k=k, method=method)
    for j, (space, sol, err, seconds) in enumerate(results):
        report.rows.append(
            {
                "level": j,
                "h": space.mesh.h_max,
                "dofs": space.n_dofs,
                "l2_u": err["l2_u"],
                "h1h_u": err["h1h_u"],
                "l2_phi": err["l2_phi"],
                "energy": err["energy"],
                "rate_energy": None,
                "seconds": seconds,
                "residual": max(sol.info["residuals"]),
            }
        )
    rates = _rates_column([r["energy"] for r in report.rows], report.hs)
    for row, rate in zip(report.rows, rates):
        row["rate_energy"] = rate
    return report


def run_comparison(case, k, n_min, n_levels, threads=1, diagonal="right"):
    """Weak-BC and strong-BC solves on the same meshes."""
    data = get_case(case)

    def level(n):
        space = FeSpace(unit_square_mesh(n, diagonal), k)
        weak = solve_weak_bc(space, data.f, data.g_D, data.g_N)
        strong = solve_strong_bc(space, data.f, data.g_D, data.g_N)
        ew = field_errors(space, data, weak)["energy"]
        es = field_errors(space, data, strong)["energy"]
        log.info("n=%d weak=%.4e strong=%.4e", n, ew, es)
        return space, weak, strong, ew, es

    results = _map(level, _levels(n_min, n_levels), threads)
    report = ComparisonReport(case=case, k=k)
    for j, (space, weak, strong, ew, es) in enumerate(results):
        report.rows.append(
            {
                "level": j,
                "h": space.mesh.h_max,
                "dofs": space.n_dofs,
                "energy_weak": ew,
                "energy_strong": es,
                "rate_weak": None,
                "rate_strong": None,
                "residual_weak": max(weak.info["residuals"]),
                "residual_strong": max(strong.info["residuals"]),
            }
        )
    for key, col in (("energy_weak", "rate_weak"), ("energy_strong", "rate_strong")):
        rates = _rates_column([r[key] for r in report.rows], report.hs)
        for row, rate in zip(report.rows, rates):
            row[col] = rate
    return report


# -- log-log plot --------------------------------------------------------------

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def loglog_svg(series, ref_slope=None, title="", width=560, height=420):
    """Log-log plot of error against h as a standalone SVG document.

    `series` maps a label to (hs, errors). Each series is drawn as one
    polyline with circle markers; the optional reference slope is drawn
    as a triangle (a polygon, not a polyline).
    """
    left, right, top, bottom = 70, 150, 40, 55
    pw, ph = width - left - right, height - top - bottom
    xs = [h for hs, _ in series.values() for h in hs]
    ys = [e for _, es in series.values() for e in es if e > 0]
    if ref_slope is not None:
        ys.append(min(ys) / 2.0)  # room for the reference triangle
    lx0, lx1 = math.floor(math.log10(min(xs))), math.ceil(math.log10(max(xs)))
    ly0, ly1 = math.floor(math.log10(min(ys))), math.ceil(math.log10(max(ys)))
    lx1 = max(lx1, lx0 + 1)
    ly1 = max(ly1, ly0 + 1)

    def px(h):
        return left + (math.log10(h) - lx0) / (lx1 - lx0) * pw

    def py(e):
        return top + (ly1 - math.log10(e)) / (ly1 - ly0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{left + pw / 2:.1f}" y="{top - 15}" text-anchor="middle">{escape(title)}</text>',
        f'<text x="{left + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">h</text>',
        f'<text x="18" y="{top + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {top + ph / 2:.1f})">error</text>',
    ]
    for d in range(lx0, lx1 + 1):
        x = px(10.0**d)
        out.append(f'<line x1="{x:.1f}" y1="{top + ph}" x2="{x:.1f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.1f}" y="{top + ph + 20}" text-anchor="middle">1e{d}</text>')
    for d in range(ly0, ly1 + 1):
        y = py(10.0**d)
        out.append(f'<line x1="{left - 5}" y1="{y:.1f}" x2="{left}" y2="{y:.1f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{y + 4:.1f}" text-anchor="end">1e{d}</text>')

    for i, (label, (hs, es)) in enumerate(series.items()):
        color = _COLORS[i % len(_COLORS)]
        pts = [(px(h), py(e)) for h, e in zip(hs, es) if e > 0]
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
        out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>')
        out.extend(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{color}"/>' for x, y in pts)
        ly = top + 20 + 18 * i
        out.append(f'<rect x="{left + pw + 12}" y="{ly - 9}" width="12" height="3" fill="{color}"/>')
        out.append(f'<text x="{left + pw + 30}" y="{ly - 4}">{escape(label)}</text>')

    if ref_slope is not None and len(xs) >= 2:
        # anchored below the first series' last two points
        hs, es = next(iter(series.values()))
        h0, h1 = hs[-1], hs[-2]
        e0 = es[-1] / 2.0
        e1 = e0 * (h1 / h0) ** ref_slope
        if e0 > 0:
            x0, x1, y0, y1 = px(h0), px(h1), py(e0), py(e1)
            out.append(
                f'<polygon points="{x0:.2f},{y0:.2f} {x1:.2f},{y0:.2f} {x1:.2f},{y1:.2f}" '
                'fill="none" stroke="gray" stroke-dasharray="4,2"/>'
            )
            out.append(f'<text x="{x1 + 4:.2f}" y="{(y0 + y1) / 2:.2f}" fill="gray">{ref_slope:g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
