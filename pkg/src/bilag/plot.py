"""SVG plots of foliation leaves on 2-dimensional charts.

This is the one numeric corner of the package: leaves are drawn as integral
curves of the foliation frame fields, integrated with fixed-step RK4 on
unit-speed velocities, and everything runs in floating point.  Opaque
symbols must be bound to concrete symbol-free expressions before plotting;
the symbolic modules never see any of this.

Output is deterministic for fixed inputs: seeds lie on the window diagonal,
the integrator is fixed-step, and coordinates are emitted with a fixed
format.
"""

from __future__ import annotations

import math

from .calculus import VectorField
from .symexpr import Expr, ZeroDenominator, as_expr, bind_symbol, eval_float

__all__ = ["PlotError", "Window", "bind_field", "integral_curve", "leaf_plot"]


class PlotError(Exception):
    pass


class Window:
    """A plotting rectangle [x0, x1] x [y0, y1]."""

    __slots__ = ("x0", "x1", "y0", "y1")

    def __init__(self, x0=-2.0, x1=2.0, y0=-2.0, y1=2.0):
        self.x0, self.x1 = float(x0), float(x1)
        self.y0, self.y1 = float(y0), float(y1)
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise PlotError("window must have positive extent on both axes")

    @property
    def width(self):
        return self.x1 - self.x0

    @property
    def height(self):
        return self.y1 - self.y0

    def contains(self, x, y, margin=0.0):
        return (
            self.x0 - margin <= x <= self.x1 + margin
            and self.y0 - margin <= y <= self.y1 + margin
        )


def bind_field(field: VectorField, bindings: dict) -> VectorField:
    """Substitute concrete expressions for the chart's opaque symbols.

    `bindings` maps symbol names to symbol-free expressions; any jet left
    unbound afterwards is an error, since the plotter cannot evaluate it.
    """
    chart = field.chart
    by_name = {s.name: s for s in chart.symbols}
    unknown = sorted(set(bindings) - set(by_name))
    if unknown:
        raise PlotError(f"bindings for undeclared symbols: {', '.join(unknown)}")
    comps = []
    for comp in field.components:
        for name, value in sorted(bindings.items()):
            comp = bind_symbol(comp, by_name[name], as_expr(value))
        left = comp.jet_atoms()
        if left:
            missing = sorted({j.symbol.name for j in left})
            raise PlotError(
                "cannot plot with unbound opaque symbols: " + ", ".join(missing)
            )
        comps.append(comp)
    return VectorField(chart, comps)


def _velocity(comps, names, x, y):
    env = {names[0]: x, names[1]: y}
    try:
        vx = eval_float(comps[0], env)
        vy = eval_float(comps[1], env)
    except (ZeroDenominator, OverflowError, ValueError):
        return None
    norm = math.hypot(vx, vy)
    if not math.isfinite(norm) or norm < 1e-12:
        return None
    return vx / norm, vy / norm


def _half_curve(comps, names, start, window, steps, h, direction):
    pts = []
    x, y = start
    margin = 0.05 * max(window.width, window.height)
    for _ in range(steps):
        v = _velocity(comps, names, x, y)
        if v is None:
            break
        k1x, k1y = v
        v2 = _velocity(comps, names, x + 0.5 * h * direction * k1x,
                       y + 0.5 * h * direction * k1y)
        if v2 is None:
            break
        k2x, k2y = v2
        v3 = _velocity(comps, names, x + 0.5 * h * direction * k2x,
                       y + 0.5 * h * direction * k2y)
        if v3 is None:
            break
        k3x, k3y = v3
        v4 = _velocity(comps, names, x + h * direction * k3x,
                       y + h * direction * k3y)
        if v4 is None:
            break
        k4x, k4y = v4
        x += direction * h * (k1x + 2 * k2x + 2 * k3x + k4x) / 6.0
        y += direction * h * (k1y + 2 * k2y + 2 * k3y + k4y) / 6.0
        if not (math.isfinite(x) and math.isfinite(y)):
            break
        pts.append((x, y))
        if not window.contains(x, y, margin):
            break
    return pts


def integral_curve(field: VectorField, start, window: Window, steps: int = 240):
    """The leaf through `start`: unit-speed RK4 in both directions."""
    comps = field.components
    names = field.chart.names
    h = (window.width + window.height) / (2.0 * steps) * 4.0
    backward = _half_curve(comps, names, start, window, steps, h, -1.0)
    forward = _half_curve(comps, names, start, window, steps, h, +1.0)
    return list(reversed(backward)) + [tuple(map(float, start))] + forward


def _seeds(window: Window, count: int):
    if count == 1:
        return [(window.x0 + window.width / 2.0, window.y0 + window.height / 2.0)]
    out = []
    for i in range(count):
        t = i / (count - 1.0)
        out.append((window.x0 + t * window.width, window.y0 + t * window.height))
    return out


def _polyline(points, to_px, color):
    coords = " ".join(f"{px:.2f},{py:.2f}" for px, py in (to_px(x, y) for x, y in points))
    return (
        f'<polyline fill="none" stroke="{color}" stroke-width="1.4" points="{coords}"/>'
    )


def leaf_plot(f1: VectorField, f2: VectorField, window: Window = None,
              leaves: int = 9, steps: int = 240, size: int = 480,
              bindings: dict = None) -> str:
    """An SVG drawing of the two foliations' leaves on a 2-dimensional chart.

    Leaves of the first foliation are blue, of the second red; seed points
    sit on the window diagonal so transversal families stay distinct.
    """
    if f1.chart.dim != 2:
        raise PlotError(f"leaf plots need a 2-dimensional chart, got {f1.chart.dim}")
    window = window or Window()
    if bindings:
        f1 = bind_field(f1, bindings)
        f2 = bind_field(f2, bindings)
    else:
        for f in (f1, f2):
            jets = [j for c in f.components for j in c.jet_atoms()]
            if jets:
                missing = sorted({j.symbol.name for j in jets})
                raise PlotError(
                    "cannot plot with unbound opaque symbols: " + ", ".join(missing)
                )

    pad = 12.0
    scale = (size - 2 * pad) / max(window.width, window.height)

    def to_px(x, y):
        return (pad + (x - window.x0) * scale,
                pad + (window.y1 - y) * scale)

    width = 2 * pad + window.width * scale
    height = 2 * pad + window.height * scale
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.2f} {height:.2f}">',
        f'<rect x="0" y="0" width="{width:.2f}" height="{height:.2f}" fill="white"/>',
    ]
    if window.x0 < 0 < window.x1:
        x_px = to_px(0, 0)[0]
        parts.append(
            f'<line x1="{x_px:.2f}" y1="{pad:.2f}" x2="{x_px:.2f}" '
            f'y2="{height - pad:.2f}" stroke="#cccccc" stroke-width="0.8"/>'
        )
    if window.y0 < 0 < window.y1:
        y_px = to_px(0, 0)[1]
        parts.append(
            f'<line x1="{pad:.2f}" y1="{y_px:.2f}" x2="{width - pad:.2f}" '
            f'y2="{y_px:.2f}" stroke="#cccccc" stroke-width="0.8"/>'
        )
    for field, color in ((f1, "#1f77b4"), (f2, "#d62728")):
        for seed in _seeds(window, leaves):
            pts = integral_curve(field, seed, window, steps)
            if len(pts) >= 2:
                parts.append(_polyline(pts, to_px, color))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
