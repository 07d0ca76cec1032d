"""Visual-first rendering and grounding: rasterization, blob extraction,
contour mapping, shading, and final labeled output."""

from .blobs import LoopPlan, PiecePlan, RegionBlob, extract_blobs, map_contour
from .canvas import CanvasSpec, ViewTransform, point_px
from .raster import RasterImage, encode_png_gray, encode_png_rgb, lineart_png, render_lineart
from .shading import shade_regions
from .svg import final_raster, render_final, svg_document

__all__ = [
    "CanvasSpec",
    "ViewTransform",
    "RasterImage",
    "RegionBlob",
    "LoopPlan",
    "PiecePlan",
    "render_lineart",
    "extract_blobs",
    "map_contour",
    "shade_regions",
    "svg_document",
    "final_raster",
    "render_final",
    "lineart_png",
    "encode_png_gray",
    "encode_png_rgb",
    "point_px",
]
