from .gmm import ColorGmm, InsufficientSamplesError, fit_gmm
from .maxflow import PixelGraph, cut_capacity, max_flow_min_cut
from .segment import (
    DEF_BG,
    DEF_FG,
    PROB_BG,
    PROB_FG,
    GrabcutResult,
    SegmentationError,
    Stroke,
    apply_mask,
    grabcut_run,
    grabcut_segment,
    make_trimap,
    rasterize_strokes,
)

__all__ = [
    "ColorGmm",
    "InsufficientSamplesError",
    "fit_gmm",
    "PixelGraph",
    "cut_capacity",
    "max_flow_min_cut",
    "DEF_BG",
    "DEF_FG",
    "PROB_BG",
    "PROB_FG",
    "GrabcutResult",
    "SegmentationError",
    "Stroke",
    "apply_mask",
    "grabcut_run",
    "grabcut_segment",
    "make_trimap",
    "rasterize_strokes",
]
