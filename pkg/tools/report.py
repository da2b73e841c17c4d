"""
CSV, plain-text and SVG reports
"""
import csv
import io
import math
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

from jinja2 import Environment, FileSystemLoader, select_autoescape
from pydantic import ValidationError

from core.config import settings
from core.exceptions import ParseError
from core.models import BoundResult, SlicePoint, SuiteResult, SweepRow

SWEEP_HEADER = ["t", "new_upper", "ac13_upper", "erasure_lower"]
SLICE_HEADER = ["lambda", "s2", "s3"]
RESIDUAL_HEADER = ["suite", "index", "residual"]

# Chart geometry in viewBox units
CHART_WIDTH = 800
CHART_HEIGHT = 600
PLOT_LEFT, PLOT_RIGHT = 90, 770
PLOT_TOP, PLOT_BOTTOM = 50, 520

SERIES = [
    ("new_upper", "New upper bound", "#d62728"),
    ("ac13_upper", "AC13 upper bound", "#1f77b4"),
    ("erasure_lower", "Erasure lower bound", "#2ca02c"),
]


def _number(value: float) -> str:
    return format(float(value), ".9g")


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _write(text: str, path: Optional[Union[str, Path]]) -> str:
    if path is not None:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    return text


def write_sweep_csv(rows: Sequence[SweepRow], path: Optional[Union[str, Path]] = None) -> str:
    """Header t,new_upper,ac13_upper,erasure_lower; 9 significant digits; LF line endings"""
    body = ([_number(row.t), _number(row.new_upper), _number(row.ac13_upper), _number(row.erasure_lower)] for row in rows)
    return _write(_csv_text(SWEEP_HEADER, body), path)


def read_sweep_csv(text: str) -> List[SweepRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != SWEEP_HEADER:
        raise ParseError(f"expected header {','.join(SWEEP_HEADER)}, got {header}", 1)
    rows = []
    for number, fields in enumerate(reader, start=2):
        if not fields:
            continue
        if len(fields) != len(SWEEP_HEADER):
            raise ParseError(f"expected {len(SWEEP_HEADER)} fields, got {len(fields)}", number)
        try:
            rows.append(SweepRow(**dict(zip(SWEEP_HEADER, (float(field) for field in fields)))))
        except (ValueError, ValidationError) as e:
            raise ParseError(str(e), number)
    return rows


def write_slice_csv(points: Sequence[SlicePoint], path: Optional[Union[str, Path]] = None) -> str:
    body = ([_number(p.weight), _number(p.point.s2), _number(p.point.s3)] for p in points)
    return _write(_csv_text(SLICE_HEADER, body), path)


def write_residual_csv(results: Sequence[SuiteResult], path: Optional[Union[str, Path]] = None) -> str:
    body = (
        [result.name, index, _number(residual)]
        for result in results
        for index, residual in enumerate(result.residuals)
    )
    return _write(_csv_text(RESIDUAL_HEADER, body), path)


def format_bound(label: str, result: BoundResult) -> str:
    px = " ".join(f"{p:.6f}" for p in result.arg_px.probs)
    return f"{label}: {result.value:.6f} bits/use  p(x) = [{px}]"


def format_verify_report(results: Sequence[SuiteResult]) -> str:
    """One line per suite, then the overall verdict"""
    lines = []
    for result in results:
        verdict = "PASS" if result.passed else "FAIL"
        lines.append(
            f"{result.name:<12} trials={result.trials:<6} worst_residual={result.worst_residual: .3e}  {verdict}"
        )
        for note in result.notes:
            lines.append(f"  note: {note}")
        if result.failure:
            lines.append(f"  failing case: {result.failure}")
        if result.error:
            lines.append(f"  error: {result.error}")
    overall = all(result.passed for result in results)
    lines.append(f"overall: {'PASS' if overall else 'FAIL'}")
    return "\n".join(lines) + "\n"


def _axis_top(rows: Sequence[SweepRow]) -> float:
    peak = max([0.0] + [max(row.new_upper, row.ac13_upper, row.erasure_lower) for row in rows])
    return max(0.1, math.ceil(peak * 10.0) / 10.0)


def render_sweep_svg(rows: Sequence[SweepRow], path: Optional[Union[str, Path]] = None) -> str:
    """Line chart of the three Z-channel curves over t, 800x600 viewBox"""
    y_top = _axis_top(rows)

    def x_of(t: float) -> float:
        return PLOT_LEFT + t * (PLOT_RIGHT - PLOT_LEFT)

    def y_of(value: float) -> float:
        return PLOT_BOTTOM - value / y_top * (PLOT_BOTTOM - PLOT_TOP)

    series = [
        {
            "label": label,
            "color": color,
            "points": " ".join(f"{x_of(row.t):.2f},{y_of(getattr(row, field)):.2f}" for row in rows),
        }
        for field, label, color in SERIES
    ]
    x_ticks = [{"position": f"{x_of(k / 10):.2f}", "label": f"{k / 10:.1f}"} for k in range(0, 11, 2)]
    y_ticks = [
        {"position": f"{y_of(y_top * k / 5):.2f}", "label": f"{y_top * k / 5:.2f}"} for k in range(6)
    ]

    env = Environment(loader=FileSystemLoader(settings.template_dir), autoescape=select_autoescape(["svg", "j2"]))
    text = env.get_template("sweep_chart.svg.j2").render(
        width=CHART_WIDTH,
        height=CHART_HEIGHT,
        left=PLOT_LEFT,
        right=PLOT_RIGHT,
        top=PLOT_TOP,
        bottom=PLOT_BOTTOM,
        series=series,
        x_ticks=x_ticks,
        y_ticks=y_ticks,
    )
    return _write(text, path)
