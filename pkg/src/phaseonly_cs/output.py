"""Result serialization: CSV tables, JSON run manifests, standalone SVG plots.

All writers are deterministic byte-for-byte for identical inputs: fixed field
order, ``.`` decimal separator, ``\\n`` line endings, no timestamps inside the
data files (wall-clock duration lives in the manifest only). Signal values are
printed with 17 significant digits so a written float round-trips exactly;
success rates get 6.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .experiments import SweepResult

#: Round-trip exact formatting for signal coefficients.
SIGNAL_FORMAT = "%.17g"
#: Success rates and interval half-widths.
RATE_FORMAT = "%.6g"


def _fmt(value: float, fmt: str = SIGNAL_FORMAT) -> str:
    return fmt % float(value)


def _atomic_write(path, data: str):
    """Write via a sibling temp file and rename, so readers never see a torn file."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_trial_csv(path, signal, estimates: dict):
    """One row per coefficient index: truth, then each method's estimate.

    ``estimates`` maps method ids to coefficient vectors; column order
    follows the mapping order. Real-mode vectors simply write zero imaginary
    parts, keeping the schema identical across modes.
    """
    coeffs = np.asarray(signal.coefficients)
    header = ["index", "true_re", "true_im"]
    columns = []
    for method, estimate in estimates.items():
        estimate = np.asarray(estimate)
        if estimate.shape != coeffs.shape:
            raise ValueError(
                f"estimate for {method.value} has shape {estimate.shape}, "
                f"expected {coeffs.shape}")
        header += [f"{method.value}_re", f"{method.value}_im"]
        columns.append(estimate)
    lines = [",".join(header)]
    for i in range(coeffs.shape[0]):
        row = [str(i), _fmt(coeffs[i].real), _fmt(np.imag(coeffs[i]))]
        for estimate in columns:
            row += [_fmt(estimate[i].real), _fmt(np.imag(estimate[i]))]
        lines.append(",".join(row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_sweep_csv(path, result: SweepResult):
    """One row per grid point: axis value, then per-method rate and half-width."""
    header = ["axis_value"]
    for method in result.config.methods:
        header += [f"{method.value}_spsr", f"{method.value}_halfwidth"]
    lines = [",".join(header)]
    for i, value in enumerate(result.grid):
        row = [str(value)]
        for method in result.config.methods:
            row += [_fmt(result.spsr[method][i], RATE_FORMAT),
                    _fmt(result.halfwidth[method][i], RATE_FORMAT)]
        lines.append(",".join(row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_manifest(path, manifest: dict):
    """Pretty-printed JSON with sorted keys, written atomically."""
    _atomic_write(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")


# Fixed palette; nothing downstream depends on the styling, it only has to
# be legible and stable across runs.
_SVG_COLORS = ("#1f6fb4", "#d1600f", "#2f8f4e", "#a0327f", "#6b6b6b")
_SVG_WIDTH = 640
_SVG_HEIGHT = 440
_SVG_MARGIN_L = 64
_SVG_MARGIN_R = 150
_SVG_MARGIN_T = 32
_SVG_MARGIN_B = 52


def render_sweep_svg(result: SweepResult, title: str = "") -> str:
    """Standalone SVG 1.1 line plot of every method's SPSR over the grid."""
    plot_w = _SVG_WIDTH - _SVG_MARGIN_L - _SVG_MARGIN_R
    plot_h = _SVG_HEIGHT - _SVG_MARGIN_T - _SVG_MARGIN_B
    lo, hi = result.grid[0], result.grid[-1]
    span = (hi - lo) or 1

    def sx(value):
        return _SVG_MARGIN_L + plot_w * (value - lo) / span

    def sy(rate):
        return _SVG_MARGIN_T + plot_h * (1.0 - rate)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_SVG_WIDTH}" height="{_SVG_HEIGHT}" '
        f'viewBox="0 0 {_SVG_WIDTH} {_SVG_HEIGHT}">',
        f'<rect width="{_SVG_WIDTH}" height="{_SVG_HEIGHT}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_SVG_MARGIN_L + plot_w / 2:g}" y="20" '
            f'text-anchor="middle" font-family="sans-serif" font-size="14">'
            f'{title}</text>')

    # frame and gridlines
    x0, y0 = _SVG_MARGIN_L, _SVG_MARGIN_T
    x1, y1 = _SVG_MARGIN_L + plot_w, _SVG_MARGIN_T + plot_h
    parts.append(f'<rect x="{x0}" y="{y0}" width="{plot_w}" height="{plot_h}" '
                 f'fill="none" stroke="black" stroke-width="1"/>')
    for tick in range(0, 11, 2):
        rate = tick / 10.0
        y = sy(rate)
        parts.append(f'<line x1="{x0}" y1="{y:g}" x2="{x1}" y2="{y:g}" '
                     f'stroke="#dddddd" stroke-width="1"/>')
        parts.append(f'<text x="{x0 - 8}" y="{y + 4:g}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="11">{rate:g}</text>')
    for value in result.grid:
        x = sx(value)
        parts.append(f'<line x1="{x:g}" y1="{y1}" x2="{x:g}" y2="{y1 + 5}" '
                     f'stroke="black" stroke-width="1"/>')
        parts.append(f'<text x="{x:g}" y="{y1 + 18}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="11">{value}</text>')

    axis_label = {"k": "sparsity K", "m": "measurements M"}.get(
        result.axis, result.axis)
    parts.append(f'<text x="{x0 + plot_w / 2:g}" y="{_SVG_HEIGHT - 14}" '
                 f'text-anchor="middle" font-family="sans-serif" font-size="12">'
                 f'{axis_label}</text>')
    parts.append(f'<text x="16" y="{y0 + plot_h / 2:g}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="12" '
                 f'transform="rotate(-90 16 {y0 + plot_h / 2:g})">SPSR</text>')

    # one polyline plus markers per method
    for i, method in enumerate(result.config.methods):
        color = _SVG_COLORS[i % len(_SVG_COLORS)]
        points = " ".join(
            f"{sx(v):g},{sy(r):g}"
            for v, r in zip(result.grid, result.spsr[method]))
        parts.append(f'<polyline points="{points}" fill="none" '
                     f'stroke="{color}" stroke-width="2"/>')
        for v, r in zip(result.grid, result.spsr[method]):
            parts.append(f'<circle cx="{sx(v):g}" cy="{sy(r):g}" r="3" '
                         f'fill="{color}"/>')

    # legend
    lx = x1 + 16
    for i, method in enumerate(result.config.methods):
        color = _SVG_COLORS[i % len(_SVG_COLORS)]
        ly = y0 + 12 + 20 * i
        parts.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 30}" y="{ly + 4}" '
                     f'font-family="sans-serif" font-size="12">'
                     f'{method.value.upper()}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_sweep_svg(path, result: SweepResult, title: str = ""):
    _atomic_write(path, render_sweep_svg(result, title))
