"""Deterministic CSV and SVG output (rect/text/line elements only).

Numbers are formatted with fixed precision and '.' decimals; nothing in the
output depends on time or locale, so identical inputs give identical bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from heterolab.errors import ValidationError

LOW = (240, 240, 240)
HIGH = (8, 48, 107)
CELL = 56
MARGIN = 48


@dataclass(frozen=True)
class HeatmapSpec:
    matrix: np.ndarray
    row_labels: tuple[str, ...] | None = None
    col_labels: tuple[str, ...] | None = None
    vmin: float = 0.0
    vmax: float = 1.0
    precision: int = 2
    title: str = ""


def _hex(rgb) -> str:
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def ramp(value: float, vmin: float = 0.0, vmax: float = 1.0) -> str:
    """Linear light-gray to dark-blue ramp, clamped to [vmin, vmax]."""
    t = 0.0 if vmax == vmin else (value - vmin) / (vmax - vmin)
    t = min(max(t, 0.0), 1.0)
    return _hex(tuple(round(lo + t * (hi - lo)) for lo, hi in zip(LOW, HIGH)))


def _f(x: float) -> str:
    return f"{x:.2f}"


def _header(width: float, height: float) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_f(width)}" '
        f'height="{_f(height)}" viewBox="0 0 {_f(width)} {_f(height)}">',
        f'<rect x="0.00" y="0.00" width="{_f(width)}" height="{_f(height)}" fill="#ffffff"/>',
    ]


def _text(x, y, s, size=12, anchor="middle", fill="#000000", extra="") -> str:
    return (
        f'<text x="{_f(x)}" y="{_f(y)}" font-family="sans-serif" font-size="{size}" '
        f'text-anchor="{anchor}" fill="{fill}"{extra}>{escape(str(s))}</text>'
    )


def _line(x1, y1, x2, y2, stroke="#000000", width=1.0) -> str:
    return (
        f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
        f'stroke="{stroke}" stroke-width="{_f(width)}"/>'
    )


def render_heatmap(spec: HeatmapSpec) -> str:
    M = np.asarray(spec.matrix, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"heatmap matrix must be square, got shape {M.shape}")
    if not np.isfinite(M).all():
        raise ValidationError("heatmap matrix has non-finite entries")
    C = M.shape[0]
    rows = spec.row_labels or tuple(str(i) for i in range(C))
    cols = spec.col_labels or tuple(str(i) for i in range(C))
    top = MARGIN + (20 if spec.title else 0)
    width = MARGIN + C * CELL + 16
    height = top + C * CELL + 16
    out = _header(width, height)
    if spec.title:
        out.append(_text(width / 2, 20, spec.title, size=14))
    mid = (spec.vmin + spec.vmax) / 2
    for j, lab in enumerate(cols):
        out.append(_text(MARGIN + (j + 0.5) * CELL, top - 8, lab))
    for i, lab in enumerate(rows):
        y = top + i * CELL
        out.append(_text(MARGIN - 8, y + CELL / 2 + 4, lab, anchor="end"))
        for j in range(C):
            v = float(M[i, j])
            x = MARGIN + j * CELL
            out.append(
                f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(CELL)}" height="{_f(CELL)}" '
                f'fill="{ramp(v, spec.vmin, spec.vmax)}" stroke="#ffffff" stroke-width="1.00"/>'
            )
            fg = "#ffffff" if v > mid else "#000000"
            out.append(_text(x + CELL / 2, y + CELL / 2 + 4, f"{v:.{spec.precision}f}", fill=fg))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def matrix_to_csv(M, decimals: int = 6) -> str:
    M = np.asarray(M, dtype=np.float64)
    return "".join(",".join(f"{v:.{decimals}f}" for v in row) + "\n" for row in M)


def csv_to_matrix(text: str) -> np.ndarray:
    rows = [r for r in text.splitlines() if r.strip()]
    return np.array([[float(v) for v in r.split(",")] for r in rows])


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * k / (count - 1) for k in range(count)]


def render_series(xs, ys, errs=None, *, x_label: str, y_label: str, title: str = "",
                  x_descending: bool = False, y_range=None, series_labels=None) -> str:
    """Line plot of one or more series; ``xs``/``ys``/``errs`` are lists of lists."""
    if not xs or any(len(x) < 2 for x in xs):
        raise ValidationError("a curve needs at least 2 points")
    W, H = 480.0, 320.0
    left, right, top, bottom = 64.0, 16.0, 36.0, 48.0
    all_x = [v for x in xs for v in x]
    x_lo, x_hi = min(all_x), max(all_x)
    if x_lo == x_hi:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_range is None:
        lo_vals = [y - (e or 0) for s, es in zip(ys, errs or [[0] * len(y) for y in ys]) for y, e in zip(s, es)]
        hi_vals = [y + (e or 0) for s, es in zip(ys, errs or [[0] * len(y) for y in ys]) for y, e in zip(s, es)]
        y_lo, y_hi = min(lo_vals), max(hi_vals)
        if y_lo == y_hi:
            y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    else:
        y_lo, y_hi = y_range

    def px(x):
        t = (x - x_lo) / (x_hi - x_lo)
        if x_descending:
            t = 1.0 - t
        return left + t * (W - left - right)

    def py(y):
        return top + (1.0 - (y - y_lo) / (y_hi - y_lo)) * (H - top - bottom)

    out = _header(W, H)
    if title:
        out.append(_text(W / 2, 20, title, size=14))
    out.append(_line(left, H - bottom, W - right, H - bottom))
    out.append(_line(left, top, left, H - bottom))
    for t in _nice_ticks(x_lo, x_hi):
        out.append(_line(px(t), H - bottom, px(t), H - bottom + 4))
        out.append(_text(px(t), H - bottom + 16, f"{t:.2f}", size=10))
    for t in _nice_ticks(y_lo, y_hi):
        out.append(_line(left - 4, py(t), left, py(t)))
        out.append(_text(left - 6, py(t) + 3, f"{t:.2f}", size=10, anchor="end"))
    out.append(_text((left + W - right) / 2, H - 12, x_label))
    out.append(_text(16, (top + H - bottom) / 2, y_label, extra=f' transform="rotate(-90 16.00 {_f((top + H - bottom) / 2)})"'))

    palette = ("#08306b", "#d94801", "#238b45", "#6a51a3")
    for s, (x, y) in enumerate(zip(xs, ys)):
        color = palette[s % len(palette)]
        e = errs[s] if errs else [0.0] * len(y)
        order = sorted(range(len(x)), key=lambda k: x[k])
        for a, b in zip(order, order[1:]):
            out.append(_line(px(x[a]), py(y[a]), px(x[b]), py(y[b]), stroke=color, width=1.5))
        for k in order:
            cx, cy = px(x[k]), py(y[k])
            if e[k]:
                out.append(_line(cx, py(y[k] - e[k]), cx, py(y[k] + e[k]), stroke=color))
                out.append(_line(cx - 3, py(y[k] - e[k]), cx + 3, py(y[k] - e[k]), stroke=color))
                out.append(_line(cx - 3, py(y[k] + e[k]), cx + 3, py(y[k] + e[k]), stroke=color))
            out.append(f'<rect x="{_f(cx - 2.5)}" y="{_f(cy - 2.5)}" width="5.00" height="5.00" fill="{color}"/>')
        if series_labels:
            out.append(_text(W - right - 4, top + 14 * (s + 1), series_labels[s], size=10, anchor="end", fill=color))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_curve(result) -> str:
    """Accuracy vs homophily ratio, x axis descending as K grows; error bars = std."""
    from heterolab.experiment import ExperimentResult

    if isinstance(result, dict):
        result = ExperimentResult.from_json(result)
    pts = result.points
    if len(pts) < 2:
        raise ValidationError("a curve needs at least 2 points")
    gamma = result.params.get("gamma")
    title = "GCN accuracy vs homophily" + (f" (gamma={gamma:g})" if gamma is not None else "")
    return render_series(
        [[p["h"] for p in pts]],
        [[p["acc_mean"] for p in pts]],
        [[p["acc_std"] for p in pts]],
        x_label="homophily ratio h",
        y_label="test accuracy",
        title=title,
        x_descending=True,
        y_range=(0.0, 1.0),
    )


def render_misclassification(curve: dict) -> str:
    """Analytic and Monte Carlo error rates of raw vs aggregated features against degree."""
    d = [math.log2(v) for v in curve["degrees"]]
    n = len(d)
    return render_series(
        [d, d, d, d],
        [[curve["p_x"]] * n, curve["p_h"], curve["p_x_hat"], curve["p_h_hat"]],
        x_label="log2 degree",
        y_label="misclassification probability",
        title=f"p={curve['p']:g}, q={curve['q']:g}, threshold={curve['threshold']:.4g}",
        series_labels=["p_x analytic", "p_h analytic", "p_x Monte Carlo", "p_h Monte Carlo"],
    )
