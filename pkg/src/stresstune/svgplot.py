"""Tiny hand-rolled SVG line charts: textual, diffable, and free of
timestamps or library metadata, so identical inputs give identical bytes.
"""

from __future__ import annotations

_WIDTH, _HEIGHT = 640, 420
_ML, _MR, _MT, _MB = 70, 70, 40, 55


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _scale(values, lo_px, hi_px):
    vmin = min(values)
    vmax = max(values)
    if vmax == vmin:
        vmin -= 0.5
        vmax += 0.5
    span = vmax - vmin

    def to_px(v):
        return lo_px + (v - vmin) / span * (hi_px - lo_px)

    return to_px, vmin, vmax


def _polyline(xs_px, ys_px, color):
    pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in zip(xs_px, ys_px))
    marks = "".join(
        f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3" fill="{color}"/>'
        for x, y in zip(xs_px, ys_px)
    )
    return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>{marks}'


def _ticks(vmin, vmax, count=5):
    return [vmin + (vmax - vmin) * i / (count - 1) for i in range(count)]


def sweep_chart(hs, stresses, errors=None, title="stress sweep") -> str:
    """SVG chart of stress (left axis) and optional error (right axis) vs h."""
    if len(hs) != len(stresses) or not hs:
        raise ValueError("need one stress value per hop value")
    x0, x1 = _ML, _WIDTH - _MR
    y0, y1 = _HEIGHT - _MB, _MT
    sx, hmin, hmax = _scale(hs, x0, x1)
    sy, smin, smax = _scale(stresses, y0, y1)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH // 2}" y="22" text-anchor="middle" font-size="15" '
        f'font-family="sans-serif">{title}</text>',
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
    ]
    for tv in _ticks(hmin, hmax):
        px = sx(tv)
        parts.append(f'<line x1="{_fmt(px)}" y1="{y0}" x2="{_fmt(px)}" y2="{y0 + 5}" stroke="black"/>')
        parts.append(
            f'<text x="{_fmt(px)}" y="{y0 + 20}" text-anchor="middle" font-size="11" '
            f'font-family="sans-serif">{_fmt(tv)}</text>'
        )
    for tv in _ticks(smin, smax):
        py = sy(tv)
        parts.append(f'<line x1="{x0 - 5}" y1="{_fmt(py)}" x2="{x0}" y2="{_fmt(py)}" stroke="black"/>')
        parts.append(
            f'<text x="{x0 - 8}" y="{_fmt(py + 4)}" text-anchor="end" font-size="11" '
            f'font-family="sans-serif">{_fmt(tv)}</text>'
        )
    parts.append(
        f'<text x="{(x0 + x1) // 2}" y="{_HEIGHT - 12}" text-anchor="middle" font-size="13" '
        f'font-family="sans-serif">hops</text>'
    )
    parts.append(
        f'<text x="18" y="{(y0 + y1) // 2}" text-anchor="middle" font-size="13" '
        f'font-family="sans-serif" transform="rotate(-90 18 {(y0 + y1) // 2})">stress</text>'
    )
    parts.append(_polyline([sx(h) for h in hs], [sy(s) for s in stresses], "#1f6fb2"))
    parts.append(
        f'<text x="{x0 + 10}" y="{y1 + 14}" font-size="12" font-family="sans-serif" '
        f'fill="#1f6fb2">stress</text>'
    )
    if errors is not None:
        pairs = [(h, e) for h, e in zip(hs, errors) if e is not None]
        if pairs:
            ehs = [h for h, _ in pairs]
            evs = [e for _, e in pairs]
            sey, emin, emax = _scale(evs, y0, y1)
            for tv in _ticks(emin, emax):
                py = sey(tv)
                parts.append(
                    f'<line x1="{x1}" y1="{_fmt(py)}" x2="{x1 + 5}" y2="{_fmt(py)}" stroke="black"/>'
                )
                parts.append(
                    f'<text x="{x1 + 8}" y="{_fmt(py + 4)}" text-anchor="start" font-size="11" '
                    f'font-family="sans-serif">{_fmt(tv)}</text>'
                )
            parts.append(f'<line x1="{x1}" y1="{y0}" x2="{x1}" y2="{y1}" stroke="black"/>')
            parts.append(_polyline([sx(h) for h in ehs], [sey(e) for e in evs], "#c23b22"))
            parts.append(
                f'<text x="{x0 + 10}" y="{y1 + 30}" font-size="12" font-family="sans-serif" '
                f'fill="#c23b22">embedding error</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
