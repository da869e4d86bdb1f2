"""Morphological thinning to one-pixel-wide skeletons and tracing into ordered paths."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

# neighbor ring around a pixel: E, NE, N, NW, W, SW, S, SE
_RING = ((0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1))
# walk preference: cardinal moves first, each group clockwise from north
_WALK = ((-1, 0), (0, 1), (1, 0), (0, -1), (-1, 1), (1, 1), (1, -1), (-1, -1))


@dataclass(frozen=True)
class Skeleton:
    bits: np.ndarray  # bool, shape (height, width)
    source_class: int

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]


@dataclass(frozen=True)
class SkeletonPath:
    points: list[tuple[int, int]] = field(default_factory=list)
    closed: bool = False

    def __len__(self) -> int:
        return len(self.points)


def _subiteration(img: np.ndarray, first: bool) -> np.ndarray:
    """Deletion flags for one Zhang-Suen subiteration (simultaneous)."""
    a = np.pad(img, 1)
    p2 = a[:-2, 1:-1]; p3 = a[:-2, 2:]; p4 = a[1:-1, 2:]; p5 = a[2:, 2:]
    p6 = a[2:, 1:-1]; p7 = a[2:, :-2]; p8 = a[1:-1, :-2]; p9 = a[:-2, :-2]
    ring = (p2, p3, p4, p5, p6, p7, p8, p9)
    neighbors = np.zeros(img.shape, np.uint8)
    for x in ring:
        neighbors += x
    transitions = np.zeros(img.shape, np.uint8)
    for prev, nxt in zip(ring, ring[1:] + (ring[0],)):
        transitions += ~prev & nxt
    if first:
        c1 = ~(p2 & p4 & p6)
        c2 = ~(p4 & p6 & p8)
    else:
        c1 = ~(p2 & p4 & p8)
        c2 = ~(p2 & p6 & p8)
    return img & (neighbors >= 2) & (neighbors <= 6) & (transitions == 1) & c1 & c2


def _protect_squares(img: np.ndarray, flags: np.ndarray) -> np.ndarray:
    """Simultaneous deletion of a full 2x2 block would erase a component; keep its top-left pixel."""
    blk = (img[:-1, :-1] & img[1:, :-1] & img[:-1, 1:] & img[1:, 1:]
           & flags[:-1, :-1] & flags[1:, :-1] & flags[:-1, 1:] & flags[1:, 1:])
    out = flags.copy()
    out[:-1, :-1] &= ~blk
    return out


def _zhang_suen(bits: np.ndarray) -> np.ndarray:
    img = bits.astype(bool).copy()
    while True:
        changed = False
        for first in (True, False):
            flags = _protect_squares(img, _subiteration(img, first))
            if flags.any():
                img &= ~flags
                changed = True
        if not changed:
            return img


def _connectivity_number(vals: list[int]) -> int:
    """Yokoi number for 8-connectivity from ring values in _RING order."""
    x = [1 - v for v in vals]
    n = 0
    for k in (0, 2, 4, 6):
        n += x[k] - x[k] * x[(k + 1) % 8] * x[(k + 2) % 8]
    return n


def _minimal_reduce(bits: np.ndarray) -> np.ndarray:
    """Sequentially delete simple non-endpoint pixels until no redundancy remains.

    Zhang-Suen alone leaves two-pixel-wide diagonal staircases and the 2x2
    remnants kept by the square veto; this pass reduces them to unit width
    without changing connectivity.
    """
    out = np.pad(bits, 1).astype(bool)
    changed = True
    while changed:
        changed = False
        rs, cs = np.where(out)
        for r, c in zip(rs.tolist(), cs.tolist()):
            if not out[r, c]:
                continue
            vals = [int(out[r + dr, c + dc]) for dr, dc in _RING]
            if sum(vals) >= 2 and _connectivity_number(vals) == 1:
                out[r, c] = False
                changed = True
    return out[1:-1, 1:-1]


def _degree_map(bits: np.ndarray) -> np.ndarray:
    """Skeleton-neighbor count per pixel; -1 on background."""
    p = np.pad(bits, 1).astype(np.uint8)
    deg = np.zeros(bits.shape, dtype=np.int8)
    h, w = p.shape
    for dr, dc in _RING:
        deg += p[1 + dr:h - 1 + dr, 1 + dc:w - 1 + dc]
    return np.where(bits, deg, -1)


def _prune_spurs(bits: np.ndarray, min_len: int) -> np.ndarray:
    """Remove spurs of fewer than min_len pixels that end at a junction."""
    if min_len <= 0 or not bits.any():
        return bits
    out = bits.copy()
    while True:
        deg = _degree_map(out)
        removed = False
        for r, c in np.argwhere(deg == 1).tolist():
            walk = [(r, c)]
            prev = None
            cur = (r, c)
            hit_junction = False
            while len(walk) <= min_len:
                nbs = [(cur[0] + dr, cur[1] + dc) for dr, dc in _RING
                       if 0 <= cur[0] + dr < out.shape[0]
                       and 0 <= cur[1] + dc < out.shape[1]
                       and out[cur[0] + dr, cur[1] + dc]
                       and (cur[0] + dr, cur[1] + dc) != prev]
                if len(nbs) != 1:
                    hit_junction = len(nbs) > 1 or deg[cur] >= 3
                    break
                prev, cur = cur, nbs[0]
                if deg[cur] >= 3:
                    hit_junction = True
                    break
                walk.append(cur)
            if hit_junction and len(walk) < min_len:
                for p in walk:
                    out[p] = False
                removed = True
        if not removed:
            return out


def thin(bits: np.ndarray, source_class: int = 0, prune_len: int = 3) -> Skeleton:
    """Thin a binary mask to a unit-width skeleton.

    Zhang-Suen two-subiteration thinning run to fixpoint, followed by a
    sequential simple-point reduction and spur pruning. Preserves the
    8-connected component count of the input.
    """
    if bits.size == 0 or not bits.any():
        return Skeleton(bits=np.zeros_like(bits, dtype=bool), source_class=source_class)
    out = _minimal_reduce(_zhang_suen(bits))
    if prune_len > 0:
        out = _minimal_reduce(_prune_spurs(out, prune_len))
    return Skeleton(bits=out, source_class=source_class)


def _walk(pts: set, start: tuple[int, int], first: tuple[int, int],
          junctions: set, visited_edges: set) -> list[tuple[int, int]]:
    """Follow a chain from start through first until an endpoint, junction, or closure."""
    path = [start, first]
    visited_edges.add((start, first))
    visited_edges.add((first, start))
    prev, cur = start, first
    while cur not in junctions:
        nxt = None
        for dr, dc in _WALK:
            cand = (cur[0] + dr, cur[1] + dc)
            if cand in pts and cand != prev and (cur, cand) not in visited_edges:
                nxt = cand
                break
        if nxt is None:
            break
        visited_edges.add((cur, nxt))
        visited_edges.add((nxt, cur))
        path.append(nxt)
        prev, cur = cur, nxt
        if cur == start:
            break
    return path


def trace_paths(skel: Skeleton) -> list[SkeletonPath]:
    """Trace the skeleton into ordered paths.

    Junction pixels (3 or more skeleton neighbors) terminate every incident
    path; chains between junctions and endpoints become open paths; pure
    cycles become closed paths. Every non-junction pixel lands in exactly
    one path.
    """
    bits = skel.bits
    if not bits.any():
        return []
    deg = _degree_map(bits)
    pts = {tuple(p) for p in np.argwhere(bits).tolist()}
    junctions = {p for p in pts if deg[p] >= 3}
    visited_edges: set = set()
    claimed: set = set()
    paths: list[SkeletonPath] = []

    def neighbors(p):
        return [(p[0] + dr, p[1] + dc) for dr, dc in _WALK
                if (p[0] + dr, p[1] + dc) in pts]

    # chains incident to junctions and endpoints first
    seeds = sorted(p for p in pts if deg[p] == 1 or p in junctions)
    for seed in seeds:
        for nb in neighbors(seed):
            if (seed, nb) in visited_edges:
                continue
            path = _walk(pts, seed, nb, junctions, visited_edges)
            # a loop from a junction back to itself stays open: the junction
            # terminates it on both ends
            closed = path[0] == path[-1] and len(path) > 3 and path[0] not in junctions
            if closed:
                path = path[:-1]
            paths.append(SkeletonPath(points=path, closed=closed))
            claimed.update(path)
    # isolated pixels
    for p in sorted(pts):
        if deg[p] == 0 and p not in claimed:
            paths.append(SkeletonPath(points=[p], closed=False))
            claimed.add(p)
    # leftover pure cycles (no endpoint, no junction anywhere on them)
    for start in sorted(pts):
        if start in claimed:
            continue
        path = _walk(pts, start, neighbors(start)[0], junctions, visited_edges)
        closed = path[0] == path[-1] and len(path) > 3
        if closed:
            path = path[:-1]
        paths.append(SkeletonPath(points=path, closed=closed))
        claimed.update(path)
    return paths
