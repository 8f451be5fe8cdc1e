"""Minimal self-contained SVG plots (no plotting dependency)."""

from __future__ import annotations

COLORS = ("#1f6feb", "#d73a49", "#2da44e", "#bf8700", "#8250df")

W, H = 640, 420
MARGIN = 56


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    return [lo + span * k / (n - 1) for k in range(n)]


def line_plot(series: dict[str, tuple[list, list]], path, xlabel="", ylabel="", title=""):
    """series: name -> (xs, ys); overlaid polylines with a small legend."""
    all_x = [x for xs, _ in series.values() for x in xs]
    all_y = [y for _, ys in series.values() for y in ys]
    if not all_x:
        raise ValueError("nothing to plot")
    x_lo, x_hi = min(all_x), max(all_x)
    y_lo, y_hi = min(all_y), max(all_y)
    if x_hi == x_lo:
        x_hi = x_lo + 1
    if y_hi == y_lo:
        y_hi = y_lo + 1
    pad = 0.05 * (y_hi - y_lo)
    y_lo -= pad
    y_hi += pad

    def sx(x):
        return MARGIN + (x - x_lo) / (x_hi - x_lo) * (W - 2 * MARGIN)

    def sy(y):
        return H - MARGIN - (y - y_lo) / (y_hi - y_lo) * (H - 2 * MARGIN)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
    ]
    # axes + ticks
    parts.append(f'<g stroke="#444" stroke-width="1">')
    parts.append(f'<line x1="{MARGIN}" y1="{H - MARGIN}" x2="{W - MARGIN}" y2="{H - MARGIN}"/>')
    parts.append(f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{H - MARGIN}"/>')
    parts.append("</g>")
    for t in _ticks(x_lo, x_hi):
        parts.append(f'<line x1="{sx(t):.1f}" y1="{H - MARGIN}" x2="{sx(t):.1f}" y2="{H - MARGIN + 5}" stroke="#444"/>')
        parts.append(f'<text x="{sx(t):.1f}" y="{H - MARGIN + 18}" text-anchor="middle">{t:.3g}</text>')
    for t in _ticks(y_lo, y_hi):
        parts.append(f'<line x1="{MARGIN - 5}" y1="{sy(t):.1f}" x2="{MARGIN}" y2="{sy(t):.1f}" stroke="#444"/>')
        parts.append(f'<text x="{MARGIN - 8}" y="{sy(t) + 4:.1f}" text-anchor="end">{t:.3g}</text>')
    parts.append(f'<text x="{W / 2}" y="{H - 12}" text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="16" y="{H / 2}" text-anchor="middle" transform="rotate(-90 16 {H / 2})">{ylabel}</text>')

    for i, (name, (xs, ys)) in enumerate(series.items()):
        color = COLORS[i % len(COLORS)]
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        ly = MARGIN + 16 * i
        parts.append(f'<line x1="{W - MARGIN - 120}" y1="{ly}" x2="{W - MARGIN - 96}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{W - MARGIN - 90}" y="{ly + 4}">{name}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def trajectory_plot(trace, path, title="trajectory"):
    """Top (x-y) and side (x-z) views of a trace, in millimeters."""
    xs = [s.position[0] * 1e3 for s in trace.samples]
    ys = [s.position[1] * 1e3 for s in trace.samples]
    zs = [s.position[2] * 1e3 for s in trace.samples]
    line_plot(
        {"top view (y vs x)": (xs, ys), "side view (z vs x)": (xs, zs)},
        path, xlabel="x [mm]", ylabel="y / z [mm]", title=title,
    )
