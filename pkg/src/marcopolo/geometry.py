"""Planar primitives for probe-search placements on the unit disk.

Everything here works in the "unit-disk frame": the current search area is
the closed disk of radius 1 centered at the origin, and probe radii are
proportional (0 < rho <= 1).  The module provides hexagonal lattices and
their circumscribed probes, chord and balanced probe placement math, and a
conservative quadtree certifier that proves coverage of the unit disk by a
union of probe disks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Point2",
    "Probe",
    "Hexagon",
    "CoverageReport",
    "hex_lattice",
    "circumscribe",
    "chord_probe",
    "balanced_probe_center",
    "certify_coverage",
    "uncovered_hulls",
]

# Ring-1 neighbor angles for a flat-top hexagonal lattice (centers at
# distance sqrt(3)*side), counterclockwise starting at 30 degrees.
_RING_ANGLES = [math.radians(30 + 60 * i) for i in range(6)]


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("non-finite coordinates")

    def dist(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @staticmethod
    def polar(r: float, angle: float) -> "Point2":
        return Point2(r * math.cos(angle), r * math.sin(angle))


@dataclass(frozen=True)
class Probe:
    """A probe disk: closed disk of radius ``rho`` about ``center``."""

    center: Point2
    rho: float

    def __post_init__(self):
        if not (0.0 < self.rho <= 1.0 + 1e-12):
            raise ValueError(f"probe radius {self.rho} outside (0, 1]")
        # the probe must be relevant to the unit-disk search area
        if math.hypot(self.center.x, self.center.y) > 1.0 + self.rho + 1e-12:
            raise ValueError("probe disk does not intersect the unit disk")

    def contains(self, p: Point2, tol: float = 0.0) -> bool:
        return self.center.dist(p) <= self.rho + tol


@dataclass(frozen=True)
class Hexagon:
    """Flat-top regular hexagon (horizontal edges at top and bottom)."""

    center: Point2
    side: float

    def __post_init__(self):
        if self.side <= 0:
            raise ValueError("hexagon side must be positive")

    def vertices(self) -> list[Point2]:
        return [
            Point2(
                self.center.x + self.side * math.cos(i * math.pi / 3),
                self.center.y + self.side * math.sin(i * math.pi / 3),
            )
            for i in range(6)
        ]

    def contains(self, p: Point2, tol: float = 1e-12) -> bool:
        qx = abs(p.x - self.center.x)
        qy = abs(p.y - self.center.y)
        s = self.side
        return (
            qy <= math.sqrt(3) / 2 * s + tol
            and math.sqrt(3) * qx + qy <= math.sqrt(3) * s + tol
        )


@dataclass
class CoverageReport:
    certified_covered: bool
    uncovered_area_upper_bound: float
    # one (n, 3) array [x, y, half_side] of uncovered cells per cluster,
    # largest cluster first
    uncovered_regions: list
    min_cell_size_reached: float

    def __post_init__(self):
        if self.certified_covered:
            assert self.uncovered_area_upper_bound == 0.0
            assert not self.uncovered_regions


def hex_lattice(layers: int, r: float) -> list[Hexagon]:
    """L-layer hexagonal lattice of side 2r/(3L-2) covering the radius-r disk.

    Returns 1 + 6*C(L,2) flat-top hexagons, enumerated ring by ring
    counterclockwise, center hexagon last.
    """
    if layers < 1:
        raise ValueError("layers must be >= 1")
    if r <= 0:
        raise ValueError("disk radius must be positive")
    s = 2.0 * r / (3 * layers - 2)
    step = math.sqrt(3) * s
    hexes: list[Hexagon] = []
    for ring in range(1, layers):
        # walk the ring: start at the 30-degree corner, take `ring` steps
        # along each of the 6 counterclockwise edge directions
        corner = Point2.polar(ring * step, _RING_ANGLES[0])
        cx, cy = corner.x, corner.y
        for edge in range(6):
            # edge direction: toward the next corner, counterclockwise
            ang = _RING_ANGLES[(edge + 2) % 6]
            dx = step * math.cos(ang)
            dy = step * math.sin(ang)
            for _ in range(ring):
                hexes.append(Hexagon(Point2(cx, cy), s))
                cx += dx
                cy += dy
    hexes.append(Hexagon(Point2(0.0, 0.0), s))
    return hexes


def circumscribe(hexagon: Hexagon) -> Probe:
    """Circumscribed circle of a regular hexagon: radius equals the side."""
    return Probe(hexagon.center, hexagon.side)


def chord_probe(rho_k: float, angle: float = 0.0) -> Probe:
    """Probe whose diameter is a chord of the unit circle.

    The center sits at distance sqrt(1 - rho_k^2) from the origin in the
    given angular direction; the probe covers the perimeter arc of
    half-angle arcsin(rho_k) around that direction.
    """
    if not (0.0 < rho_k <= 1.0):
        raise ValueError(f"chord probe radius {rho_k} outside (0, 1]")
    d = math.sqrt(max(0.0, 1.0 - rho_k * rho_k))
    return Probe(Point2.polar(d, angle), rho_k)


def balanced_probe_center(r1: float, rk: float) -> tuple[float, float]:
    """Angular step and center distance for an annulus-bridging probe.

    The probe of radius ``rk`` is positioned so that it spans the annulus
    between the central circle of radius ``r1`` and the unit circle, and the
    chords it cuts on both circles subtend the same angle at the origin:
    its boundary passes through collinear points at radii r1 and 1.

    Returns ``(theta, center_distance)`` where ``theta`` is the half-angle
    subtended by the probe on either circle and ``center_distance`` is
    ``sqrt(r1 + rk^2)``, the distance of the probe center from the origin.
    """
    w = (1.0 - r1) / 2.0
    if rk < w - 1e-15:
        raise ValueError(
            f"probe radius {rk} too small to bridge annulus of half-width {w}"
        )
    h = math.sqrt(max(0.0, rk * rk - w * w))
    theta = math.atan2(h, 1.0 - w)
    center_distance = math.sqrt(r1 + rk * rk)
    return theta, center_distance


def _probe_arrays(probes) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    px = np.array([p.center.x for p in probes])
    py = np.array([p.center.y for p in probes])
    pr = np.array([p.rho for p in probes])
    return px, py, pr


def certify_coverage(placement, min_cell: float = 1e-4,
                     stop_on_uncovered: bool = False,
                     refine_uncovered: bool = False) -> CoverageReport:
    """Conservative quadtree proof that the probes cover the closed unit disk.

    The disk is split into a core disk of radius 1 - delta (quadtree) and
    the remaining boundary annulus (exact 1-D angular-interval analysis:
    a radial segment lies inside a convex probe disk iff both endpoints
    do).  The split lets placements whose probe circles meet the region
    boundary with vanishing margin -- the hexagonal lattices do -- certify
    at finite resolution.  A square cell of the core is certified when it
    lies wholly outside the core disk or wholly inside a single probe disk
    (farthest corner within the radius).  Cells that cannot be certified
    are subdivided until their side drops below ``min_cell``; any
    survivors are reported as uncovered.  The check
    is sound up to a fixed 1e-9 boundary tolerance (closed probe disks that
    meet the region tangentially, as in the hexagonal lattices, still
    certify) but incomplete.

    ``placement`` is either a sequence of probes or an object with a
    ``probes`` attribute.  With ``stop_on_uncovered`` the subdivision is
    abandoned as soon as coverage is disproved at this resolution, which is
    cheaper inside bisection loops (the report then carries a partial
    uncovered set).
    """
    probes = getattr(placement, "probes", placement)
    if len(probes) == 0:
        raise ValueError("empty placement")
    if min_cell <= 0:
        raise ValueError("min_cell must be positive")
    px, py, pr = _probe_arrays(probes)
    pr2 = (pr + 1e-9) ** 2

    # a probe containing the whole unit disk certifies everything at once
    if np.any(np.hypot(px, py) + 1.0 <= pr + 1e-12):
        return CoverageReport(True, 0.0, [], 2.0)

    # boundary annulus 1 - delta < |z| <= 1, certified by exact arc
    # intervals; the quadtree below covers the core disk |z| <= 1 - delta.
    # The wide annulus lets tangent probe circles certify; refine_uncovered
    # callers need gap extents at the working resolution instead
    factor = 4.0 if refine_uncovered else 200.0
    delta = min(1e-2, max(1e-4, factor * min_cell))
    gaps = _annulus_gaps(px, py, pr, delta)
    gap_cells: list[np.ndarray] = []
    if gaps:
        if not refine_uncovered:
            cells = np.array([[math.cos(0.5 * (a + b)) * (1.0 - 0.5 * delta),
                               math.sin(0.5 * (a + b)) * (1.0 - 0.5 * delta),
                               0.5 * delta] for a, b in gaps])
            area = float(sum((b - a) for a, b in gaps)) * delta
            return CoverageReport(False, area, [cells[i:i + 1] for i in
                                                range(len(cells))], delta)
        # chain of delta-sized flagged cells along each uncovered arc,
        # merged with the core quadtree result below
        for a, b in gaps:
            steps = max(1, int(math.ceil((b - a) * (1.0 - 0.5 * delta)
                                         / delta)))
            ang = a + (b - a) * (np.arange(steps) + 0.5) / steps
            gap_cells.append(np.column_stack([
                np.cos(ang) * (1.0 - 0.5 * delta),
                np.sin(ang) * (1.0 - 0.5 * delta),
                np.full(steps, 0.5 * delta),
                np.ones(steps),
            ]))
    r_core = 1.0 - delta

    # cells whose center point is provably uncovered stop refining at this
    # coarser floor; only genuinely ambiguous cells (probe/disk boundaries)
    # descend to min_cell, keeping the frontier near-one-dimensional
    # refine_uncovered descends provably-uncovered cells all the way to
    # min_cell so callers measuring gap extents see true sizes
    bad_floor = min_cell if refine_uncovered else max(min_cell, 2.0 ** -7)

    cx = np.array([0.0])
    cy = np.array([0.0])
    half = 1.0  # all cells at one subdivision level share their size
    min_side_seen = 2.0
    unc: list[np.ndarray] = []  # (n, 3) blocks of [x, y, half]

    while cx.size:
        side = 2.0 * half
        min_side_seen = min(min_side_seen, side)
        # irrelevant: wholly outside the closed core disk
        nx = np.maximum(np.abs(cx) - half, 0.0)
        ny = np.maximum(np.abs(cy) - half, 0.0)
        alive = nx * nx + ny * ny <= r_core * r_core
        # covered: wholly inside some single probe disk
        covered = np.zeros(cx.size, dtype=bool)
        for j in range(px.size):
            todo = alive & ~covered
            if not todo.any():
                break
            fx = np.abs(cx[todo] - px[j]) + half
            fy = np.abs(cy[todo] - py[j]) + half
            sub = fx * fx + fy * fy <= pr2[j]
            idx = np.flatnonzero(todo)
            covered[idx[sub]] = True
        open_idx = np.flatnonzero(alive & ~covered)
        if open_idx.size == 0:
            break
        ox, oy = cx[open_idx], cy[open_idx]
        # exact disproof: a cell center inside the core disk but outside
        # every probe disk is a genuine uncovered point
        bad = ox * ox + oy * oy <= r_core * r_core
        for j in range(px.size):
            if not bad.any():
                break
            bad &= (ox - px[j]) ** 2 + (oy - py[j]) ** 2 > pr2[j]
        if bad.any() and stop_on_uncovered:
            pts = np.column_stack([ox[bad], oy[bad],
                                   np.full(int(bad.sum()), half)])
            area = float(open_idx.size) * side * side
            return CoverageReport(False, area, [pts], min_side_seen)
        at_floor = side / 2.0 < min_cell
        park = bad & (side <= bad_floor)
        if at_floor:
            park = np.ones(ox.size, dtype=bool)
        if park.any():
            unc.append(np.column_stack([ox[park], oy[park],
                                        np.full(int(park.sum()), half),
                                        bad[park].astype(float)]))
        keep = ~park
        if at_floor or not keep.any():
            break
        cx, cy = ox[keep], oy[keep]
        half /= 2.0
        n_open = cx.size
        cx = np.repeat(cx, 4) + np.tile([-half, -half, half, half], n_open)
        cy = np.repeat(cy, 4) + np.tile([-half, half, -half, half], n_open)

    unc.extend(gap_cells)
    if not unc:
        return CoverageReport(True, 0.0, [], min_side_seen)

    cells = np.concatenate(unc)
    # clusters of merely-unresolved cells (no provably uncovered point) can
    # still be certified when they sit at an exact probe-circle junction
    clusters = [c for c in _cluster_cells(cells)
                if c[:, 3].any() or not _junction_certified(c, px, py, pr)]
    if not clusters:
        return CoverageReport(True, 0.0, [], min_side_seen)
    area = float(sum(np.sum((2.0 * c[:, 2]) ** 2) for c in clusters))
    return CoverageReport(False, area, [c[:, :3] for c in clusters],
                          min_side_seen)


def _junction_certified(cluster: np.ndarray, px: np.ndarray, py: np.ndarray,
                        pr: np.ndarray) -> bool:
    """Certify a cluster of unresolved cells that surrounds an exact
    junction of probe circles.

    If a point V lies on (within the fixed 1e-9 tolerance) the boundary
    circles of several probes whose inward normals at V positively span the
    plane with angular gaps of at most 2*acos(mu), every point within
    mu * r_min / 2 of V lies in one of those closed probes (dilated by the
    tolerance): pick the probe whose inward normal is within acos(mu) of
    the displacement direction; its linear margin dominates the curvature
    correction on that ball.  The cluster is certified when it fits inside
    the ball.
    """
    z0x = float(cluster[:, 0].mean())
    z0y = float(cluster[:, 1].mean())
    reach = float(np.max(np.hypot(cluster[:, 0] - z0x, cluster[:, 1] - z0y)
                         + cluster[:, 2] * math.sqrt(2.0)))
    dist0 = np.hypot(px - z0x, py - z0y)
    near = np.flatnonzero(np.abs(dist0 - pr) <= reach + 1e-6)
    if near.size < 2:
        return False
    for i_pos in range(near.size):
        for j_pos in range(i_pos + 1, near.size):
            i, j = int(near[i_pos]), int(near[j_pos])
            for vx, vy in _circle_intersections(px[i], py[i], pr[i],
                                                px[j], py[j], pr[j]):
                if math.hypot(vx - z0x, vy - z0y) > 4.0 * reach + 1e-6:
                    continue
                dv = np.hypot(px - vx, py - vy)
                on = np.abs(dv - pr) <= 1e-9
                if int(on.sum()) < 2:
                    continue
                angles = np.sort(np.arctan2(vy - py[on], vx - px[on]))
                gap = float(np.max(np.diff(np.concatenate(
                    [angles, angles[:1] + 2.0 * math.pi]))))
                mu = math.cos(0.5 * gap)
                if mu <= 0.05:
                    continue
                r_safe = 0.5 * mu * float(pr[on].min())
                fits = np.hypot(cluster[:, 0] - vx, cluster[:, 1] - vy) \
                    + cluster[:, 2] * math.sqrt(2.0) <= r_safe
                if bool(fits.all()):
                    return True
    return False


def _circle_intersections(x1: float, y1: float, r1: float, x2: float,
                          y2: float, r2: float) -> list[tuple[float, float]]:
    """Intersection points of two circles (empty when disjoint or nested)."""
    dx, dy = x2 - x1, y2 - y1
    d = math.hypot(dx, dy)
    if d == 0.0 or d > r1 + r2 or d < abs(r1 - r2):
        return []
    a = (d * d + r1 * r1 - r2 * r2) / (2.0 * d)
    h2 = r1 * r1 - a * a
    h = math.sqrt(max(0.0, h2))
    mx, my = x1 + a * dx / d, y1 + a * dy / d
    return [(mx + h * dy / d, my - h * dx / d),
            (mx - h * dy / d, my + h * dx / d)]


def _annulus_gaps(px: np.ndarray, py: np.ndarray, pr: np.ndarray,
                  delta: float) -> list[tuple[float, float]]:
    """Angular intervals of the annulus 1 - delta < |z| <= 1 not certified
    covered.  A probe covers the full radial segment at angle theta iff it
    contains both segment endpoints (probe disks are convex)."""
    two_pi = 2.0 * math.pi
    intervals: list[tuple[float, float]] = []  # (start, length)
    for x, y, r in zip(px, py, pr):
        d = math.hypot(x, y)
        r_tol = r + 1e-9
        half = math.pi
        for t in (1.0 - delta, 1.0):
            if d + t <= r_tol:
                continue  # probe contains the whole circle of radius t
            if d == 0.0 or t > d + r_tol:
                half = -1.0
                break
            c = (t * t + d * d - r_tol * r_tol) / (2.0 * t * d)
            if c > 1.0:
                half = -1.0
                break
            half = min(half, math.acos(max(-1.0, c)))
        if half < 0.0:
            continue
        if half >= math.pi:
            return []
        intervals.append(((math.atan2(y, x) - half) % two_pi, 2.0 * half))
    if not intervals:
        return [(0.0, two_pi)]
    intervals.sort()
    # walk the circle from the first interval start, recording gaps
    start0, length0 = intervals[0]
    reach = start0 + length0
    gaps: list[tuple[float, float]] = []
    for a, ln in intervals[1:] + [(s + two_pi, ln) for s, ln in intervals]:
        if a >= start0 + two_pi:
            break
        if a > reach:
            gaps.append((reach, a))
        reach = max(reach, a + ln)
        if reach >= start0 + two_pi:
            break
    if reach < start0 + two_pi:
        gaps.append((reach, start0 + two_pi))
    return gaps


def _cluster_cells(cells: np.ndarray) -> list[np.ndarray]:
    """Group cells into 8-neighbor connected components.

    Cells may have mixed sizes; adjacency is judged on the grid of the
    coarsest cell so touching cells of different depths merge.
    """
    grid = 2.0 * float(cells[:, 2].max())
    ix = np.floor(cells[:, 0] / grid).astype(np.int64)
    iy = np.floor(cells[:, 1] / grid).astype(np.int64)
    index: dict[tuple[int, int], list[int]] = {}
    for i, key in enumerate(zip(ix.tolist(), iy.tolist())):
        index.setdefault(key, []).append(i)
    seen = np.zeros(cells.shape[0], dtype=bool)
    clusters = []
    for start in range(cells.shape[0]):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        members = []
        while stack:
            i = stack.pop()
            members.append(i)
            a, b = int(ix[i]), int(iy[i])
            for da in (-1, 0, 1):
                for db in (-1, 0, 1):
                    for j in index.get((a + da, b + db), ()):
                        if not seen[j]:
                            seen[j] = True
                            stack.append(j)
        clusters.append(cells[np.array(members)])
    clusters.sort(key=lambda c: -float(np.sum(c[:, 2] ** 2)))
    return clusters


def uncovered_hulls(report: CoverageReport) -> list[np.ndarray]:
    """Convex hull polygon per uncovered cluster, largest area first.

    Each hull is an (n, 2) array of counterclockwise vertices built from the
    cell corners, so the hull conservatively contains the whole cluster.
    """
    if report.certified_covered or not report.uncovered_regions:
        return []
    hulls = []
    for cells in report.uncovered_regions:
        h = cells[:, 2:3]
        xy = cells[:, :2]
        corners = np.concatenate([
            xy + np.column_stack([sx * h, sy * h])
            for sx in (-1, 1)
            for sy in (-1, 1)
        ])
        hulls.append(_convex_hull(corners))
    hulls.sort(key=lambda p: -_polygon_area(p))
    return hulls


def _convex_hull(points: np.ndarray) -> np.ndarray:
    """Andrew's monotone chain; returns CCW vertices without repetition."""
    pts = np.unique(points, axis=0)
    if pts.shape[0] <= 2:
        return pts

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                u = out[-1] - out[-2]
                v = p - out[-2]
                if u[0] * v[1] - u[1] * v[0] > 0:
                    break
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def _polygon_area(poly: np.ndarray) -> float:
    if poly.shape[0] < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
