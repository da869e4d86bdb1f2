"""Synthetic ribbon and arc masks with analytically known width, angle, and curvature."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .raster_io import SIDEWALK, Geotransform, TileRaster, save_tile

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RibbonSpec:
    kind: str  # "straight" or "arc"
    width: int  # odd, >= 3
    heading: float = 0.0  # degrees, straight kind
    radius: float = 0.0  # pixels, arc kind
    length: float = 100.0  # pixels along the centerline
    canvas: tuple[int, int] | None = None  # (height, width); derived when omitted
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("straight", "arc"):
            raise ValueError(f"unknown ribbon kind {self.kind!r}")
        if self.width % 2 == 0 or self.width < 3:
            raise ValueError(f"width must be odd and >= 3, got {self.width}")
        if self.kind == "arc" and self.radius <= self.width:
            raise ValueError(f"radius {self.radius} must exceed width {self.width}")


@dataclass(frozen=True)
class GroundTruth:
    width: float
    angle: float | None  # straight ribbons only
    curvature: float  # 0 for straight, 1/R for arcs


def _canvas_for(spec: RibbonSpec, margin: int = 8) -> tuple[int, int]:
    if spec.canvas is not None:
        return spec.canvas
    if spec.kind == "straight":
        n = int(math.ceil(spec.length + spec.width + 2 * margin))
    else:
        n = int(math.ceil(2 * (spec.radius + spec.width) + 2 * margin))
    return n, n


def _straight_bits(spec: RibbonSpec, shape: tuple[int, int]) -> np.ndarray:
    h, w = shape
    cy, cx = h // 2, w // 2  # centerline through a pixel center keeps odd widths exact
    th = math.radians(spec.heading)
    dx, dy = math.cos(th), math.sin(th)
    yy, xx = np.mgrid[0:h, 0:w]
    ux = xx - cx
    uy = -(yy - cy)  # rows grow downward; work in y-up coordinates
    t = ux * dx + uy * dy
    p = -ux * dy + uy * dx
    return (np.abs(t) <= spec.length / 2) & (np.abs(p) <= spec.width / 2)


def _arc_bits(spec: RibbonSpec, shape: tuple[int, int]) -> np.ndarray:
    h, w = shape
    cy, cx = h // 2, w // 2
    yy, xx = np.mgrid[0:h, 0:w]
    d = np.hypot(yy - cy, xx - cx)
    span = math.degrees(spec.length / spec.radius)
    ang = np.degrees(np.arctan2(-(yy - cy), xx - cx)) % 360.0
    a0 = (45.0 - span / 2) % 360.0
    a1 = (45.0 + span / 2) % 360.0
    if a0 <= a1:
        in_sector = (ang >= a0) & (ang <= a1)
    else:
        in_sector = (ang >= a0) | (ang <= a1)
    return (np.abs(d - spec.radius) <= spec.width / 2) & in_sector


def make_ribbon(spec: RibbonSpec) -> tuple[np.ndarray, GroundTruth]:
    """Render the spec to a binary mask with its analytic ground truth."""
    shape = _canvas_for(spec)
    if spec.kind == "straight":
        bits = _straight_bits(spec, shape)
        truth = GroundTruth(width=float(spec.width), angle=spec.heading % 180.0, curvature=0.0)
    else:
        bits = _arc_bits(spec, shape)
        truth = GroundTruth(width=float(spec.width), angle=None, curvature=1.0 / spec.radius)
    if not bits.any():
        raise ValueError(f"spec does not fit canvas {shape}: {spec}")
    return bits, truth


def make_tile(specs: list[RibbonSpec], canvas: tuple[int, int],
              seed: int = 0, tile_id: str = "synth") -> tuple[TileRaster, list[GroundTruth]]:
    """Compose several ribbons onto one sidewalk-labeled tile at random offsets."""
    rng = np.random.default_rng(seed)
    h, w = canvas
    labels = np.zeros((h, w), dtype=np.uint8)
    truths = []
    for spec in specs:
        bits, truth = make_ribbon(spec)
        bh, bw = bits.shape
        if bh > h or bw > w:
            raise ValueError(f"ribbon canvas {bits.shape} exceeds tile canvas {canvas}")
        r0 = int(rng.integers(0, h - bh + 1))
        c0 = int(rng.integers(0, w - bw + 1))
        labels[r0:r0 + bh, c0:c0 + bw][bits] = SIDEWALK
        truths.append(truth)
    gt = Geotransform(origin_x=0.0, origin_y=0.0, pixel_size_x=1.0,
                      pixel_size_y=-1.0, crs_id="synthetic")
    return TileRaster(labels=labels, geotransform=gt, tile_id=tile_id), truths


def random_blob(rng: np.random.Generator, size: int = 64) -> np.ndarray:
    """Organic test blob: union of random rectangles and rotated ellipses."""
    bits = np.zeros((size, size), dtype=bool)
    yy, xx = np.mgrid[0:size, 0:size]
    for _ in range(int(rng.integers(1, 5))):
        if rng.random() < 0.5:
            r0, c0 = (int(v) for v in rng.integers(0, size, 2))
            bh, bw = (int(v) for v in rng.integers(3, max(4, size // 3), 2))
            bits[r0:r0 + bh, c0:c0 + bw] = True
        else:
            cy, cx = rng.uniform(5, size - 5, 2)
            ax, bx = rng.uniform(2, size // 4, 2)
            th = rng.uniform(0, math.pi)
            u = (xx - cx) * math.cos(th) + (yy - cy) * math.sin(th)
            v = -(xx - cx) * math.sin(th) + (yy - cy) * math.cos(th)
            bits |= (u / ax) ** 2 + (v / bx) ** 2 <= 1
    return bits


def random_tile_specs(rng: np.random.Generator,
                      canvas: tuple[int, int] = (512, 512)) -> list[RibbonSpec]:
    """Ribbon mix for one synthetic corpus tile, sized to fit the canvas."""
    limit = min(canvas)
    widths = [w for w in (3, 5, 7, 9) if limit - w - 17 >= 20]
    if not widths:
        raise ValueError(f"canvas {canvas} is too small for synthetic ribbons")
    specs = []
    for _ in range(int(rng.integers(2, 5))):
        width = int(rng.choice(widths))
        radii = [r for r in (25.0, 40.0, 50.0) if 2 * (r + width) + 17 <= limit]
        if radii and rng.random() >= 0.75:
            radius = float(rng.choice(radii))
            specs.append(RibbonSpec(
                kind="arc", width=width, radius=radius,
                length=radius * math.pi / 2,
            ))
        else:
            max_len = limit - width - 17
            lo = min(80, max(20, max_len // 2))
            hi = min(200, max_len)
            specs.append(RibbonSpec(
                kind="straight",
                width=width,
                heading=float(rng.choice([0, 30, 45, 60, 90, 120, 150])),
                length=float(rng.integers(lo, hi)) if hi > lo else float(hi),
            ))
    return specs


def emit_fixtures(out_dir: str | Path, count: int, canvas: tuple[int, int] = (512, 512),
                  seed: int = 0) -> list[str]:
    """Write a deterministic corpus of synthetic tiles with ground-truth sidecars."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tile_ids = []
    for i in range(count):
        rng = np.random.default_rng(seed * 1_000_003 + i)
        tile_id = f"synth_{i:05d}"
        specs = random_tile_specs(rng, canvas)
        tile, truths = make_tile(specs, canvas, seed=seed * 1_000_003 + i, tile_id=tile_id)
        save_tile(tile, out_dir / f"{tile_id}.png", out_dir / f"{tile_id}.json")
        truth_payload = [
            {"width": t.width, "angle": t.angle, "curvature": t.curvature}
            for t in truths
        ]
        (out_dir / f"{tile_id}.truth.json").write_text(
            json.dumps(truth_payload, sort_keys=True, indent=2) + "\n"
        )
        tile_ids.append(tile_id)
    return tile_ids
