"""Canvas geometry: pixel dimensions and the world-to-pixel view transform."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..config import CanvasConfig
from ..manifold import Arc, Circle, Manifold


@dataclass(frozen=True)
class ViewTransform:
    """Uniform scale, y-flip, centered: px = ox + s*x, py = oy - s*y."""

    scale: float
    ox: float
    oy: float

    def to_px(self, x: float, y: float) -> tuple[float, float]:
        return self.ox + self.scale * x, self.oy - self.scale * y

    def to_world(self, px: float, py: float) -> tuple[float, float]:
        return (px - self.ox) / self.scale, (self.oy - py) / self.scale


@dataclass(frozen=True)
class CanvasSpec:
    width: int = 1600
    height: int = 1200
    line_width: int = 3
    line_color: str = "#000000"
    margin_frac: float = 0.05

    @staticmethod
    def from_config(cfg: CanvasConfig) -> "CanvasSpec":
        return CanvasSpec(cfg.width, cfg.height, cfg.line_width, cfg.line_color)

    def fit(self, m: Manifold) -> ViewTransform:
        """View transform putting every manifold element inside the margin box."""
        xs: list[float] = []
        ys: list[float] = []
        for p in m.points.values():
            x = float(p.x.interval(20).midpoint)
            y = float(p.y.interval(20).midpoint)
            xs.append(x)
            ys.append(y)
        for e in m.entities.values():
            if isinstance(e.kind, (Circle, Arc)):
                c = m.points[e.kind.center]
                cx = float(c.x.interval(20).midpoint)
                cy = float(c.y.interval(20).midpoint)
                r = float(e.kind.radius.interval(20).midpoint)
                xs.extend([cx - r, cx + r])
                ys.extend([cy - r, cy + r])
        if not xs:
            return ViewTransform(1.0, self.width / 2.0, self.height / 2.0)
        min_x, max_x = min(xs), max(xs)
        min_y, max_y = min(ys), max(ys)
        span_x = max(max_x - min_x, 1e-9)
        span_y = max(max_y - min_y, 1e-9)
        usable_w = self.width * (1.0 - 2.0 * self.margin_frac)
        usable_h = self.height * (1.0 - 2.0 * self.margin_frac)
        scale = min(usable_w / span_x, usable_h / span_y)
        cx = (min_x + max_x) / 2.0
        cy = (min_y + max_y) / 2.0
        ox = self.width / 2.0 - scale * cx
        oy = self.height / 2.0 + scale * cy
        return ViewTransform(scale, ox, oy)


def point_px(m: Manifold, pid: str, tf: ViewTransform) -> tuple[float, float]:
    p = m.points[pid]
    return tf.to_px(
        float(p.x.interval(20).midpoint), float(p.y.interval(20).midpoint)
    )


__all__ = ["CanvasSpec", "ViewTransform", "point_px"]
