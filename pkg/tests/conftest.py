"""Shared brute-force oracles, independent of the implementations under test."""
import math

import numpy as np
import pytest


def brute_edt(mask: np.ndarray) -> np.ndarray:
    """All-pairs Euclidean distance to the nearest background pixel center.

    Pixels beyond the grid edge count as background, so a foreground pixel at
    the border is at distance 1 from the (virtual) neighbor outside.
    """
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    out = np.zeros((h, w), dtype=float)
    bg = np.argwhere(~mask)
    for r in range(h):
        for c in range(w):
            if not mask[r, c]:
                continue
            edge = min(r + 1, h - r, c + 1, w - c)
            best = float(edge)
            if bg.size:
                d2 = (bg[:, 0] - r) ** 2 + (bg[:, 1] - c) ** 2
                best = min(best, math.sqrt(float(d2.min())))
            out[r, c] = best
    return out


def convex_hull(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Monotone-chain hull, counterclockwise, no duplicate endpoint."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                (x1, y1), (x2, y2) = out[-2], out[-1]
                if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) <= 0:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return lower[:-1] + upper[:-1]


def convex_contains(hull: list[tuple[float, float]], x: float, y: float,
                    eps: float = 1e-9) -> bool | None:
    """Strict interior test for a counterclockwise convex ring.

    Returns None when the point sits within eps of an edge line (ambiguous
    under any boundary rule), True strictly inside, False strictly outside.
    """
    n = len(hull)
    ambiguous = False
    for i in range(n):
        x1, y1 = hull[i]
        x2, y2 = hull[(i + 1) % n]
        cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
        norm = math.hypot(x2 - x1, y2 - y1)
        if norm == 0:
            continue
        if abs(cross) / norm < eps:
            ambiguous = True
        elif cross < 0:
            return False
    return None if ambiguous else True


def degree_census(bits: np.ndarray) -> dict[int, int]:
    """Histogram of 8-neighbor counts over foreground pixels."""
    bits = np.asarray(bits, dtype=bool)
    padded = np.pad(bits, 1)
    census: dict[int, int] = {}
    for r, c in np.argwhere(bits):
        block = padded[r:r + 3, c:c + 3]
        deg = int(block.sum()) - 1
        census[deg] = census.get(deg, 0) + 1
    return census


def component_count(bits: np.ndarray) -> int:
    from scipy import ndimage

    _, n = ndimage.label(np.asarray(bits, dtype=bool), structure=np.ones((3, 3), dtype=int))
    return int(n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
