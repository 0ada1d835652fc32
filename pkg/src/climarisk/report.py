"""Output writers: round-trip JSON and minimal static SVG charts."""
import json
import math
from xml.sax.saxutils import escape

import numpy as np


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or (isinstance(obj, float) and not math.isfinite(obj)):
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return "null"
        text = format(v, ".17g")
        if not any(c in text for c in ".e"):
            text += ".0"
        return text
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: "
                 f"{_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj, indent=2):
    """JSON text with every float printed to 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


def write_json(obj, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))


# --------------------------------------------------------------------------
# svg

W, H, PAD = 640, 400, 56


def _num(v):
    return format(float(v), ".6g")


def _frame(title, xlabel, ylabel):
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2}" y="24" text-anchor="middle" font-size="16">{escape(title)}</text>',
        f'<line x1="{PAD}" y1="{H - PAD}" x2="{W - PAD}" y2="{H - PAD}" stroke="black"/>',
        f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{H - PAD}" stroke="black"/>',
        f'<text x="{W / 2}" y="{H - 12}" text-anchor="middle" font-size="12">'
        f'{escape(xlabel)}</text>',
        f'<text x="16" y="{H / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {H / 2})">{escape(ylabel)}</text>',
    ]


def line_svg(x, y, title="", xlabel="", ylabel="", hline=None, ylim=(0.0, 1.0)):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x0, x1 = float(x.min()), float(x.max())
    if x1 == x0:
        x1 = x0 + 1.0
    y0, y1 = ylim

    def px(v):
        return PAD + (v - x0) / (x1 - x0) * (W - 2 * PAD)

    def py(v):
        return H - PAD - (v - y0) / (y1 - y0) * (H - 2 * PAD)

    parts = _frame(title, xlabel, ylabel)
    for t in np.linspace(y0, y1, 6):
        parts.append(f'<text x="{PAD - 6}" y="{_num(py(t) + 4)}" text-anchor="end" '
                     f'font-size="10">{_num(t)}</text>')
    for t in np.linspace(x0, x1, 6):
        parts.append(f'<text x="{_num(px(t))}" y="{H - PAD + 16}" text-anchor="middle" '
                     f'font-size="10">{_num(t)}</text>')
    if hline is not None:
        parts.append(f'<line x1="{PAD}" y1="{_num(py(hline))}" x2="{W - PAD}" '
                     f'y2="{_num(py(hline))}" stroke="grey" stroke-dasharray="4 4"/>')
    pts = " ".join(f"{_num(px(a))},{_num(py(b))}" for a, b in zip(x, y))
    parts.append(f'<polyline fill="none" stroke="steelblue" stroke-width="2" points="{pts}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def bar_svg(labels, values, title="", ylabel="", hline=None, ylim=None):
    v = np.asarray(values, dtype=float)
    y0, y1 = ylim if ylim is not None else (min(0.0, float(v.min())), max(1.0, float(v.max())))
    n = max(len(v), 1)
    slot = (W - 2 * PAD) / n

    def py(val):
        return H - PAD - (val - y0) / (y1 - y0) * (H - 2 * PAD)

    parts = _frame(title, "", ylabel)
    for i, (lab, val) in enumerate(zip(labels, v)):
        x = PAD + i * slot + slot * 0.1
        top = py(max(val, y0))
        parts.append(f'<rect x="{_num(x)}" y="{_num(top)}" width="{_num(slot * 0.8)}" '
                     f'height="{_num(py(y0) - top)}" fill="steelblue"/>')
        cx = x + slot * 0.4
        parts.append(f'<text x="{_num(cx)}" y="{H - PAD + 12}" font-size="9" '
                     f'text-anchor="end" transform="rotate(-45 {_num(cx)} {H - PAD + 12})">'
                     f'{escape(str(lab))}</text>')
    if hline is not None:
        parts.append(f'<line x1="{PAD}" y1="{_num(py(hline))}" x2="{W - PAD}" '
                     f'y2="{_num(py(hline))}" stroke="firebrick" stroke-dasharray="4 4"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
