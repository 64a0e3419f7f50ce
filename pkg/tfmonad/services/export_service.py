"""
Export Service
Writes reports as JSON, leaf clouds as CSV, and SVG scatter plots of
two-dimensional leaf clouds.
"""
import csv
import logging
from pathlib import Path
from typing import Any, Optional, Union

from jinja2 import Environment, PackageLoader, select_autoescape

from tfmonad.errors import ShapeMismatchError
from tfmonad.helpers.numeric import format_scalar
from tfmonad.helpers.serialize import dumps
from tfmonad.services.foliation_service import LeafCloud

logger = logging.getLogger(__name__)

_env = Environment(
    loader=PackageLoader("tfmonad", "templates"),
    autoescape=select_autoescape(["svg", "xml"], default_for_string=True),
)


class ExportService:
    """Artifact writers for the CLI."""

    def __init__(self, svg_size: int = 480, margin: int = 24):
        self.svg_size = svg_size
        self.margin = margin

    def write_json(self, report: Any, path: Optional[Union[str, Path]] = None) -> str:
        """Serialize report; write it to path when given and return the text."""
        text = dumps(report) + "\n"
        if path:
            target = Path(path)
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(text, encoding="utf-8")
            logger.info(f"[EXPORT] report written to {target}")
        return text

    def write_leaf_csv(self, cloud: LeafCloud, path: Union[str, Path]) -> Path:
        """One row per point: the parameters v_i, then h(x, v_i)."""
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        n = len(cloud.base)
        header = [f"v{i + 1}" for i in range(n)] + [f"y{i + 1}" for i in range(n)]
        with target.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            for params, point in zip(cloud.params, cloud.points):
                writer.writerow([format_scalar(float(c)) for c in tuple(params) + tuple(point)])
        logger.info(f"[EXPORT] {len(cloud.points)} leaf points written to {target}")
        return target

    def render_leaf_svg(self, cloud: LeafCloud, title: str = "leaf") -> str:
        if len(cloud.base) != 2:
            raise ShapeMismatchError(f"SVG scatter needs a 2-dimensional chart, got {len(cloud.base)}")
        xs = [p[0] for p in cloud.points] + [cloud.base[0]]
        ys = [p[1] for p in cloud.points] + [cloud.base[1]]
        lo_x, hi_x, lo_y, hi_y = min(xs), max(xs), min(ys), max(ys)
        span = max(hi_x - lo_x, hi_y - lo_y) or 1.0
        inner = self.svg_size - 2 * self.margin

        def place(p):
            # y grows downwards in SVG
            return (
                self.margin + (p[0] - lo_x) / span * inner,
                self.svg_size - self.margin - (p[1] - lo_y) / span * inner,
            )

        template = _env.get_template("leaf_cloud.svg.j2")
        return template.render(
            size=self.svg_size,
            title=title,
            points=[place(p) for p in cloud.points],
            base=place(cloud.base),
            dimension=cloud.dimension,
        )

    def write_leaf_svg(self, cloud: LeafCloud, path: Union[str, Path], title: str = "leaf") -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(self.render_leaf_svg(cloud, title), encoding="utf-8")
        return target


# Global service instance
export_service = ExportService()
