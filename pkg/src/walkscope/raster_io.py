"""Class-labeled tile rasters, their georeference sidecars, and the canonical class encoding."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

logger = logging.getLogger(__name__)

BACKGROUND = 0
BUILDING = 1
ROAD = 2
SIDEWALK = 3

CLASS_IDS = (BACKGROUND, BUILDING, ROAD, SIDEWALK)
CLASS_NAMES = ("Background", "Building", "Road", "Sidewalk")

# overlay palette: RGB per class id
PALETTE = {
    BACKGROUND: (255, 255, 255),
    BUILDING: (0, 0, 255),
    ROAD: (128, 128, 128),
    SIDEWALK: (255, 0, 0),
}

SIDECAR_KEYS = ("origin_x", "origin_y", "pixel_size_x", "pixel_size_y", "crs_id", "tile_id")


class RasterError(Exception):
    """Base class for tile loading and validation failures."""


class SidecarError(RasterError):
    """Sidecar file missing, unparseable, or missing required keys."""


class InvalidLabelError(RasterError):
    """A pixel carries a value outside the class-id set."""


class DimensionMismatchError(RasterError):
    """Two rasters that must share a grid do not."""


@dataclass(frozen=True)
class Geotransform:
    origin_x: float
    origin_y: float
    pixel_size_x: float
    pixel_size_y: float
    crs_id: str

    def __post_init__(self) -> None:
        if self.pixel_size_x <= 0 or self.pixel_size_y == 0:
            raise ValueError(
                f"invalid pixel sizes ({self.pixel_size_x}, {self.pixel_size_y})"
            )

    def pixel_to_world(self, row: float, col: float) -> tuple[float, float]:
        """World coordinate of the pixel center."""
        x = self.origin_x + (col + 0.5) * self.pixel_size_x
        y = self.origin_y + (row + 0.5) * self.pixel_size_y
        return x, y

    def world_to_pixel(self, x: float, y: float) -> tuple[float, float]:
        """Fractional (row, col) whose center maps to (x, y)."""
        col = (x - self.origin_x) / self.pixel_size_x - 0.5
        row = (y - self.origin_y) / self.pixel_size_y - 0.5
        return row, col


@dataclass(frozen=True)
class TileRaster:
    labels: np.ndarray  # uint8, shape (height, width)
    geotransform: Geotransform
    tile_id: str

    def __post_init__(self) -> None:
        if self.labels.ndim != 2:
            raise ValueError(f"labels must be 2-D, got shape {self.labels.shape}")
        bad = (self.labels > SIDEWALK)
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise InvalidLabelError(
                f"tile {self.tile_id}: label {int(self.labels[r, c])} at pixel ({r}, {c})"
            )

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


@dataclass(frozen=True)
class ClassMask:
    bits: np.ndarray  # bool, shape (height, width)
    class_id: int
    geotransform: Geotransform

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]


def extract_class_mask(tile: TileRaster, class_id: int) -> ClassMask:
    if class_id not in CLASS_IDS:
        raise ValueError(f"unknown class id {class_id}")
    return ClassMask(
        bits=tile.labels == class_id,
        class_id=class_id,
        geotransform=tile.geotransform,
    )


def load_sidecar(path: str | Path) -> tuple[Geotransform, str]:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise SidecarError(f"sidecar not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SidecarError(f"sidecar is not valid JSON: {path}: {exc}") from exc
    missing = [k for k in SIDECAR_KEYS if k not in raw]
    if missing:
        raise SidecarError(f"sidecar {path} missing keys: {', '.join(missing)}")
    try:
        gt = Geotransform(
            origin_x=float(raw["origin_x"]),
            origin_y=float(raw["origin_y"]),
            pixel_size_x=float(raw["pixel_size_x"]),
            pixel_size_y=float(raw["pixel_size_y"]),
            crs_id=str(raw["crs_id"]),
        )
    except (TypeError, ValueError) as exc:
        raise SidecarError(f"sidecar {path} has invalid values: {exc}") from exc
    return gt, str(raw["tile_id"])


def save_sidecar(path: str | Path, gt: Geotransform, tile_id: str) -> None:
    payload = {
        "origin_x": gt.origin_x,
        "origin_y": gt.origin_y,
        "pixel_size_x": gt.pixel_size_x,
        "pixel_size_y": gt.pixel_size_y,
        "crs_id": gt.crs_id,
        "tile_id": tile_id,
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def read_labels(path: str | Path) -> np.ndarray:
    """Read an 8-bit single-channel PNG/PGM as a label grid, no sidecar."""
    path = Path(path)
    try:
        with Image.open(path) as im:
            if im.mode not in ("L", "P", "I;16", "1"):
                raise RasterError(f"{path}: expected single-channel image, got mode {im.mode}")
            labels = np.asarray(im.convert("L") if im.mode != "L" else im)
    except FileNotFoundError as exc:
        raise RasterError(f"tile image not found: {path}") from exc
    except OSError as exc:
        raise RasterError(f"unreadable tile image {path}: {exc}") from exc
    return labels.astype(np.uint8)


def load_tile(path: str | Path, sidecar: str | Path) -> TileRaster:
    """Read an 8-bit single-channel PNG/PGM plus its JSON sidecar."""
    gt, tile_id = load_sidecar(sidecar)
    return TileRaster(labels=read_labels(path), geotransform=gt, tile_id=tile_id)


def save_tile(tile: TileRaster, path: str | Path, sidecar: str | Path | None = None) -> None:
    """Write labels as 8-bit grayscale; PNG or PGM chosen by extension."""
    path = Path(path)
    Image.fromarray(tile.labels, mode="L").save(path)
    if sidecar is not None:
        save_sidecar(sidecar, tile.geotransform, tile.tile_id)


def render_overlay(tile: TileRaster) -> np.ndarray:
    """Color overlay per the class palette, shape (height, width, 3) uint8."""
    out = np.empty((tile.height, tile.width, 3), dtype=np.uint8)
    for cid, rgb in PALETTE.items():
        out[tile.labels == cid] = rgb
    return out


def save_overlay(tile: TileRaster, path: str | Path) -> None:
    Image.fromarray(render_overlay(tile), mode="RGB").save(Path(path))
