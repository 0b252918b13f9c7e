"""Static SVG charts on a fixed 800x600 canvas.

Output depends only on the input data: coordinates are printed with two
decimals, elements are emitted in a fixed order, and no fonts beyond the
generic ``sans-serif`` family are referenced.
"""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

WIDTH = 800
HEIGHT = 600
LEFT, TOP, RIGHT, BOTTOM = 90, 60, 760, 510

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e")


def _n(v: float) -> str:
    text = f"{v:.2f}"
    return "0.00" if text == "-0.00" else text


class Canvas:
    def __init__(self, title: str):
        self.parts: list[str] = [
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        ]
        self.text(WIDTH / 2, 32, title, size=20, weight="bold")

    def line(self, x1, y1, x2, y2, stroke="#000000", width=1.0, dash: str | None = None) -> None:
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<line x1="{_n(x1)}" y1="{_n(y1)}" x2="{_n(x2)}" y2="{_n(y2)}" '
            f'stroke="{stroke}" stroke-width="{_n(width)}"{extra}/>'
        )

    def rect(self, x, y, w, h, fill, stroke="#000000", opacity: float = 1.0) -> None:
        self.parts.append(
            f'<rect x="{_n(x)}" y="{_n(y)}" width="{_n(w)}" height="{_n(h)}" fill="{fill}" '
            f'fill-opacity="{opacity:.3f}" stroke="{stroke}"/>'
        )

    def polyline(self, points: Sequence[tuple[float, float]], stroke: str, width: float = 1.5) -> None:
        coords = " ".join(f"{_n(x)},{_n(y)}" for x, y in points)
        self.parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{stroke}" stroke-width="{_n(width)}"/>'
        )

    def text(self, x, y, s: str, size: int = 14, anchor: str = "middle", weight: str | None = None,
             rotate: bool = False) -> None:
        attrs = f'x="{_n(x)}" y="{_n(y)}" font-family="sans-serif" font-size="{size}" text-anchor="{anchor}"'
        if weight:
            attrs += f' font-weight="{weight}"'
        if rotate:
            attrs += f' transform="rotate(-90 {_n(x)} {_n(y)})"'
        self.parts.append(f"<text {attrs}>{escape(s)}</text>")

    def render(self) -> str:
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">'
        )
        return "\n".join([head, *self.parts, "</svg>"]) + "\n"


class _Axes:
    def __init__(self, x_range: tuple[float, float], y_range: tuple[float, float]):
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        if self.x1 == self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 == self.y0:
            self.y1 = self.y0 + 1.0

    def px(self, x: float) -> float:
        return LEFT + (x - self.x0) / (self.x1 - self.x0) * (RIGHT - LEFT)

    def py(self, y: float) -> float:
        return BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (BOTTOM - TOP)

    def draw(self, c: Canvas, xlabel: str, ylabel: str, ticks: int = 5) -> None:
        c.line(LEFT, BOTTOM, RIGHT, BOTTOM)
        c.line(LEFT, TOP, LEFT, BOTTOM)
        for i in range(ticks + 1):
            fx = self.x0 + (self.x1 - self.x0) * i / ticks
            fy = self.y0 + (self.y1 - self.y0) * i / ticks
            x, y = self.px(fx), self.py(fy)
            c.line(x, BOTTOM, x, BOTTOM + 6)
            c.text(x, BOTTOM + 22, f"{fx:g}" if fx == int(fx) else f"{fx:.2f}", size=12)
            c.line(LEFT - 6, y, LEFT, y)
            c.line(LEFT, y, RIGHT, y, stroke="#dddddd", width=0.5)
            c.text(LEFT - 10, y + 4, f"{fy:.2f}", size=12, anchor="end")
        c.text((LEFT + RIGHT) / 2, HEIGHT - 40, xlabel, size=14)
        c.text(30, (TOP + BOTTOM) / 2, ylabel, size=14, rotate=True)


def line_chart(
    series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    title: str,
    xlabel: str,
    ylabel: str,
    y_range: tuple[float, float] = (0.0, 1.0),
) -> str:
    """One polyline per ``(label, xs, ys)`` with a legend in the lower right."""
    xs_all = [x for _, xs, _ in series for x in xs]
    axes = _Axes((min(xs_all), max(xs_all)) if xs_all else (0.0, 1.0), y_range)
    c = Canvas(title)
    axes.draw(c, xlabel, ylabel)
    for i, (label, xs, ys) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        c.polyline([(axes.px(x), axes.py(y)) for x, y in zip(xs, ys)], stroke=color)
        ly = BOTTOM - 20 - 22 * (len(series) - 1 - i)
        c.line(RIGHT - 230, ly, RIGHT - 200, ly, stroke=color, width=3)
        c.text(RIGHT - 192, ly + 5, label, size=13, anchor="start")
    return c.render()


def confusion_chart(tp: int, fp: int, tn: int, fn: int, title: str) -> str:
    """2x2 grid: rows are the actual class, columns the final action."""
    c = Canvas(title)
    cells = [[("TP", tp), ("FN", fn)], [("FP", fp), ("TN", tn)]]
    total = max(tp + fp + tn + fn, 1)
    size = 200
    x0, y0 = (WIDTH - 2 * size) / 2, 150
    for col, label in enumerate(("Block", "Allow")):
        c.text(x0 + size * col + size / 2, y0 - 16, f"Predicted {label}", size=15)
    for row, label in enumerate(("Attack", "Normal")):
        c.text(x0 - 16, y0 + size * row + size / 2, f"Actual {label}", size=15, anchor="end")
        for col in range(2):
            name, count = cells[row][col]
            x, y = x0 + size * col, y0 + size * row
            c.rect(x, y, size, size, fill="#1f77b4", opacity=0.1 + 0.8 * count / total)
            c.text(x + size / 2, y + size / 2 - 6, str(count), size=28, weight="bold")
            c.text(x + size / 2, y + size / 2 + 24, name, size=14)
    return c.render()


def roc_chart(curve: Sequence[tuple[float, float]], auc: float, title: str) -> str:
    """Step ROC curve with the chance diagonal and an AUC annotation."""
    axes = _Axes((0.0, 1.0), (0.0, 1.0))
    c = Canvas(title)
    axes.draw(c, "False positive rate", "True positive rate")
    c.line(axes.px(0), axes.py(0), axes.px(1), axes.py(1), stroke="#888888", dash="6,4")
    c.polyline([(axes.px(x), axes.py(y)) for x, y in curve], stroke=PALETTE[0], width=2.5)
    c.text(RIGHT - 20, BOTTOM - 30, f"AUC = {auc:.2f}", size=18, anchor="end", weight="bold")
    return c.render()
