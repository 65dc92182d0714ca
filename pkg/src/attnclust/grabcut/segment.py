"""Bounding-box-seeded foreground extraction.

Alternates color-model refits with graph min-cuts over a four-level
trimap; user strokes act as hard terminal constraints.  The tracked
energy (best-component data terms plus contrast-weighted smoothness)
is non-increasing across iterations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gmm import ColorGmm, fit_gmm
from .maxflow import PixelGraph, max_flow_min_cut

DEF_BG, PROB_BG, PROB_FG, DEF_FG = 0, 1, 2, 3

GAMMA_DEFAULT = 50.0
HARD_LINK = 1e9
STROKE_RADIUS = 3
MIN_CHANGE_FRACTION = 0.001


class SegmentationError(ValueError):
    """Invalid bounding box, strokes, or degenerate trimap."""


@dataclass(frozen=True)
class Stroke:
    """Polyline of (x, y) points marking definite foreground or background."""

    kind: str  # "fg" | "bg"
    points: tuple

    def __post_init__(self):
        if self.kind not in ("fg", "bg"):
            raise SegmentationError(f"stroke kind must be 'fg' or 'bg', got {self.kind!r}")
        pts = tuple((int(x), int(y)) for x, y in self.points)
        if not pts:
            raise SegmentationError("stroke needs at least one point")
        object.__setattr__(self, "points", pts)


@dataclass
class GrabcutResult:
    mask: np.ndarray  # H x W bool, True = foreground
    energies: list
    iterations_run: int


def validate_bbox(width: int, height: int, bbox: tuple) -> tuple:
    x, y, w, h = (int(v) for v in bbox)
    if w <= 0 or h <= 0:
        raise SegmentationError(f"bounding box must have positive area, got w={w}, h={h}")
    if x < 0 or y < 0 or x + w > width or y + h > height:
        raise SegmentationError(
            f"bounding box ({x},{y},{w},{h}) exceeds image bounds {width}x{height}"
        )
    if w * h >= width * height:
        raise SegmentationError("bounding box covers the whole image: no background sample")
    return x, y, w, h


def make_trimap(width: int, height: int, bbox: tuple) -> np.ndarray:
    """DefiniteBackground everywhere, ProbableForeground inside the box."""
    x, y, w, h = validate_bbox(width, height, bbox)
    trimap = np.full((height, width), DEF_BG, dtype=np.uint8)
    trimap[y : y + h, x : x + w] = PROB_FG
    return trimap


def _line_pixels(x0: int, y0: int, x1: int, y1: int):
    """Bresenham walk from (x0, y0) to (x1, y1), inclusive."""
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    while True:
        yield x0, y0
        if x0 == x1 and y0 == y1:
            return
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def rasterize_strokes(
    trimap: np.ndarray, strokes, radius: int = STROKE_RADIUS
) -> np.ndarray:
    """Stamp stroke polylines into the trimap as hard constraints.

    Each consecutive point pair is a segment; a disc of ``radius`` pixels is
    painted along it.  Rasterization lives here so batch and interactive
    callers produce identical trimaps.
    """
    height, width = trimap.shape
    out = trimap.copy()
    offsets = [
        (dx, dy)
        for dy in range(-radius, radius + 1)
        for dx in range(-radius, radius + 1)
        if dx * dx + dy * dy <= radius * radius
    ]
    for stroke in strokes:
        label = DEF_FG if stroke.kind == "fg" else DEF_BG
        for px, py in stroke.points:
            if not (0 <= px < width and 0 <= py < height):
                raise SegmentationError(f"stroke point ({px},{py}) outside {width}x{height} image")
        pairs = (
            zip(stroke.points, stroke.points[1:])
            if len(stroke.points) > 1
            else [(stroke.points[0], stroke.points[0])]
        )
        for (x0, y0), (x1, y1) in pairs:
            for cx, cy in _line_pixels(x0, y0, x1, y1):
                for dx, dy in offsets:
                    px, py = cx + dx, cy + dy
                    if 0 <= px < width and 0 <= py < height:
                        out[py, px] = label
    return out


def _neighbor_links(image: np.ndarray, gamma: float):
    """Symmetric 8-neighborhood contrast weights gamma * exp(-beta ||dz||^2)."""
    h, w = image.shape[:2]
    idx = np.arange(h * w, dtype=np.int32).reshape(h, w)
    z = image.astype(np.float64)
    pairs = []
    for du, dv, sl_a, sl_b in (
        (0, 1, np.s_[:, :-1], np.s_[:, 1:]),          # right
        (1, 0, np.s_[:-1, :], np.s_[1:, :]),          # down
        (1, 1, np.s_[:-1, :-1], np.s_[1:, 1:]),       # down-right
        (1, -1, np.s_[:-1, 1:], np.s_[1:, :-1]),      # down-left
    ):
        d2 = ((z[sl_a] - z[sl_b]) ** 2).sum(axis=2).ravel()
        pairs.append((idx[sl_a].ravel(), idx[sl_b].ravel(), d2))
    all_d2 = np.concatenate([p[2] for p in pairs])
    mean_d2 = all_d2.mean() if all_d2.size else 0.0
    beta = 1.0 / (2.0 * mean_d2) if mean_d2 > 0 else 0.0
    links_u = np.concatenate([p[0] for p in pairs])
    links_v = np.concatenate([p[1] for p in pairs])
    links_w = gamma * np.exp(-beta * all_d2)
    return links_u, links_v, links_w


def _build_graph(
    pixels: np.ndarray,
    trimap_flat: np.ndarray,
    fg_gmm: ColorGmm,
    bg_gmm: ColorGmm,
    links,
) -> PixelGraph:
    links_u, links_v, links_w = links
    n = pixels.shape[0]
    source_cap = np.empty(n)
    sink_cap = np.empty(n)
    unknown = (trimap_flat == PROB_BG) | (trimap_flat == PROB_FG)
    # cutting the source link assigns the pixel to background, so the
    # source side carries the background data term (and vice versa);
    # shifting both links by their per-pixel minimum keeps capacities
    # non-negative (densities can exceed 1) without moving the argmin
    to_bg = bg_gmm.neg_log_likelihood(pixels[unknown])
    to_fg = fg_gmm.neg_log_likelihood(pixels[unknown])
    shift = np.minimum(to_bg, to_fg)
    source_cap[unknown] = to_bg - shift
    sink_cap[unknown] = to_fg - shift
    source_cap[trimap_flat == DEF_FG] = HARD_LINK
    sink_cap[trimap_flat == DEF_FG] = 0.0
    source_cap[trimap_flat == DEF_BG] = 0.0
    sink_cap[trimap_flat == DEF_BG] = HARD_LINK
    return PixelGraph(source_cap, sink_cap, links_u, links_v, links_w)


def segmentation_energy(
    pixels: np.ndarray, fg_mask_flat: np.ndarray, fg_gmm: ColorGmm, bg_gmm: ColorGmm, links
) -> float:
    """Data terms under the current color models plus cut smoothness."""
    links_u, links_v, links_w = links
    data = float(fg_gmm.neg_log_likelihood(pixels[fg_mask_flat]).sum())
    data += float(bg_gmm.neg_log_likelihood(pixels[~fg_mask_flat]).sum())
    crossing = fg_mask_flat[links_u] != fg_mask_flat[links_v]
    return data + float(links_w[crossing].sum())


def grabcut_run(
    image: np.ndarray,
    bbox: tuple,
    strokes=None,
    iterations: int = 5,
    seed: int = 0,
    gamma: float = GAMMA_DEFAULT,
    components: int = 5,
    min_change: float = MIN_CHANGE_FRACTION,
) -> GrabcutResult:
    """Run the full segment loop and keep the per-iteration energy trace."""
    img = np.asarray(image)
    if img.ndim != 3 or img.shape[2] != 3:
        raise SegmentationError(f"expected H x W x 3 image, got shape {img.shape}")
    if iterations < 1:
        raise SegmentationError("iterations must be >= 1")
    height, width = img.shape[:2]
    trimap = make_trimap(width, height, bbox)
    if strokes:
        trimap = rasterize_strokes(trimap, strokes)
    tri = trimap.ravel()
    pixels = img.reshape(-1, 3).astype(np.float64)

    fg_mask = (tri == PROB_FG) | (tri == DEF_FG)
    if not fg_mask.any():
        raise SegmentationError("no foreground sample: strokes erased the whole box")
    if fg_mask.all():
        raise SegmentationError("no background sample")

    links = _neighbor_links(img, gamma)
    fg_gmm = bg_gmm = None
    energies = []
    rounds = 0
    for r in range(iterations):
        if fg_gmm is None:
            fg_gmm = fit_gmm(pixels[fg_mask], min(components, int(fg_mask.sum())), seed=seed)
            bg_gmm = fit_gmm(pixels[~fg_mask], min(components, int((~fg_mask).sum())), seed=seed + 1)
        else:
            # a region the cut emptied keeps its previous color model
            if fg_mask.any():
                fg_gmm = fg_gmm.refit(pixels[fg_mask])
            if not fg_mask.all():
                bg_gmm = bg_gmm.refit(pixels[~fg_mask])
        graph = _build_graph(pixels, tri, fg_gmm, bg_gmm, links)
        source_side, _ = max_flow_min_cut(graph)
        new_mask = fg_mask.copy()
        unknown = (tri == PROB_BG) | (tri == PROB_FG)
        new_mask[unknown] = source_side[unknown]
        new_mask[tri == DEF_FG] = True
        new_mask[tri == DEF_BG] = False
        energies.append(segmentation_energy(pixels, new_mask, fg_gmm, bg_gmm, links))
        changed = int((new_mask != fg_mask).sum())
        fg_mask = new_mask
        tri = np.where(unknown, np.where(fg_mask, PROB_FG, PROB_BG), tri).astype(np.uint8)
        rounds = r + 1
        if changed < min_change * fg_mask.size:
            break
    return GrabcutResult(mask=fg_mask.reshape(height, width), energies=energies, iterations_run=rounds)


def grabcut_segment(
    image: np.ndarray,
    bbox: tuple,
    strokes=None,
    iterations: int = 5,
    seed: int = 0,
    **kwargs,
) -> np.ndarray:
    """Binary foreground mask for the given box and optional strokes."""
    return grabcut_run(image, bbox, strokes, iterations=iterations, seed=seed, **kwargs).mask


def apply_mask(image: np.ndarray, mask: np.ndarray, fill=(0, 0, 0)) -> np.ndarray:
    """Replace background pixels with ``fill``, keep foreground unchanged."""
    img = np.asarray(image)
    m = np.asarray(mask, dtype=bool)
    if img.shape[:2] != m.shape:
        raise SegmentationError(f"mask shape {m.shape} does not match image {img.shape[:2]}")
    out = img.copy()
    out[~m] = np.asarray(fill, dtype=img.dtype)
    return out
