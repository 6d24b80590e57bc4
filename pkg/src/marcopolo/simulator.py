"""Search execution against hidden worlds.

Implements the single-POI recursive descent (with last-probe omission and
rotation of each layer toward the searcher), the response-limited
hexagonal-family search, the memoryless find-all protocol with doubling
re-probes, and a reference TSP value for competitive checks.

Positions are absolute; each layer placement lives on the unit disk and is
scaled/rotated into the current search area.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Point2, Probe
from .placements import LayerPlacement

_EPS = 1e-9


@dataclass
class World:
    """Hidden ground truth: search radius and POI positions."""

    n: float
    pois: list[Point2]
    active: list[bool] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("search radius must be at least 1")
        if not self.active:
            self.active = [True] * len(self.pois)
        if not any(self.active):
            raise ValueError("world needs at least one active POI")
        if all(math.hypot(p.x, p.y) > self.n + _EPS
               for p, a in zip(self.pois, self.active) if a):
            raise ValueError("no active POI inside the search region")


@dataclass
class SearchState:
    area_center: Point2
    area_radius: float
    delta_pos: Point2
    rotation: float = 0.0


@dataclass
class SearchTrace:
    probes: int = 0
    distance: float = 0.0
    responses: int = 0
    path: list[Point2] = field(default_factory=list)
    success: bool = False
    found_poi: int = -1
    containment_lost: bool = False


def probe(world: World, center: Point2, d: float) -> bool:
    """True iff an active POI lies within closed distance d of center."""
    if d <= 0:
        raise ValueError("probe radius must be positive")
    return any(a and math.hypot(p.x - center.x, p.y - center.y) <= d + _EPS
               for p, a in zip(world.pois, world.active))


def _rotation_toward(placement: LayerPlacement, state: SearchState) -> float:
    """Rotation angle placing the first probe center nearest the searcher."""
    first = placement.probes[0].center
    d1 = math.hypot(first.x, first.y)
    dx = state.delta_pos.x - state.area_center.x
    dy = state.delta_pos.y - state.area_center.y
    if d1 < _EPS or math.hypot(dx, dy) < _EPS:
        return 0.0
    return math.atan2(dy, dx) - math.atan2(first.y, first.x)


def _abs_probe(p: Probe, state: SearchState) -> tuple[Point2, float]:
    c, s = math.cos(state.rotation), math.sin(state.rotation)
    x = state.area_center.x + state.area_radius * (c * p.center.x - s * p.center.y)
    y = state.area_center.y + state.area_radius * (s * p.center.x + c * p.center.y)
    return Point2(x, y), state.area_radius * p.rho


def _target_poi(world: World, state: SearchState) -> int:
    best, best_d = -1, math.inf
    for i, (p, a) in enumerate(zip(world.pois, world.active)):
        if not a:
            continue
        d = math.hypot(p.x - state.area_center.x, p.y - state.area_center.y)
        if d <= state.area_radius + _EPS and d < best_d:
            best, best_d = i, d
    return best


def run_single(placement: LayerPlacement, world: World,
               start: SearchState | None = None,
               adversarial: bool = False) -> SearchTrace:
    """Recursive single-POI descent with last-probe omission.

    Probes 1..m-1 are issued in order (the searcher walks the straight legs
    between probe centers); on the first positive response the search
    recurses into that probe's disk, otherwise into the omitted last
    probe's disk without visiting its center.  Each layer is rotated so
    its first probe center faces the searcher's current position.

    ``adversarial`` replaces the world's responses with the deterministic
    worst case (the POI is always found in the last executed probe).
    Containment of the target POI is asserted at every step; placements
    that only certify perimeter coverage may lose containment through an
    interior gap, which is reported via ``containment_lost`` instead.
    """
    state = start or SearchState(Point2(0.0, 0.0), world.n, Point2(0.0, 0.0))
    trace = SearchTrace(path=[state.delta_pos])
    target = _target_poi(world, state)
    if target < 0 and not adversarial:
        raise ValueError("no active POI inside the start area")

    while state.area_radius > 1.0:
        state.rotation = _rotation_toward(placement, state)
        m = placement.m
        hit = -1
        for k in range(m - 1):
            center, radius = _abs_probe(placement.probes[k], state)
            trace.distance += math.hypot(center.x - state.delta_pos.x,
                                         center.y - state.delta_pos.y)
            state.delta_pos = center
            trace.path.append(center)
            trace.probes += 1
            if adversarial:
                positive = k == m - 2
            else:
                p = world.pois[target]
                positive = math.hypot(p.x - center.x, p.y - center.y) \
                    <= radius + _EPS
            if positive:
                trace.responses += 1
                hit = k
                break
        if hit < 0:
            hit = m - 1  # omitted probe: inferred, not issued, no response
        center, radius = _abs_probe(placement.probes[hit], state)
        state = SearchState(center, radius, state.delta_pos)
        if not adversarial:
            p = world.pois[target]
            if math.hypot(p.x - center.x, p.y - center.y) > radius + _EPS:
                if placement.coverage == "perimeter":
                    trace.containment_lost = True
                else:
                    raise RuntimeError(
                        "POI escaped the search area: geometry bug")

    trace.distance += math.hypot(state.area_center.x - state.delta_pos.x,
                                 state.area_center.y - state.delta_pos.y)
    state.delta_pos = state.area_center
    trace.path.append(state.delta_pos)
    if not adversarial:
        p = world.pois[target]
        trace.success = math.hypot(p.x - state.delta_pos.x,
                                   p.y - state.delta_pos.y) <= 1.0 + _EPS
        trace.found_poi = target if trace.success else -1
    return trace


# ---------------------------------------------------------------------------
# Response-limited hexagonal family
# ---------------------------------------------------------------------------

def run_hexfam(r_max: int, world: World,
               layer: LayerPlacement | None = None) -> SearchTrace:
    """Hexagonal-lattice search: probe every hexagon but the last per layer,
    recurse into the hit (or omitted-last) circumscribed disk."""
    from .placements import hexfam_layer

    placement = layer or hexfam_layer(r_max, world.n)
    state = SearchState(Point2(0.0, 0.0), world.n, Point2(0.0, 0.0))
    trace = SearchTrace(path=[state.delta_pos])
    target = _target_poi(world, state)
    if target < 0:
        raise ValueError("no active POI inside the search region")
    poi = world.pois[target]

    while state.area_radius > 1.0:
        state.rotation = _rotation_toward(placement, state)
        hit = -1
        for k in range(placement.m - 1):
            center, radius = _abs_probe(placement.probes[k], state)
            trace.distance += math.hypot(center.x - state.delta_pos.x,
                                         center.y - state.delta_pos.y)
            state.delta_pos = center
            trace.path.append(center)
            trace.probes += 1
            if math.hypot(poi.x - center.x, poi.y - center.y) <= radius + _EPS:
                trace.responses += 1
                hit = k
                break
        if hit < 0:
            hit = placement.m - 1
        center, radius = _abs_probe(placement.probes[hit], state)
        state = SearchState(center, radius, state.delta_pos)
        if math.hypot(poi.x - center.x, poi.y - center.y) > radius + _EPS:
            raise RuntimeError("POI escaped the search area: geometry bug")

    trace.distance += math.hypot(state.area_center.x - state.delta_pos.x,
                                 state.area_center.y - state.delta_pos.y)
    state.delta_pos = state.area_center
    trace.path.append(state.delta_pos)
    trace.success = math.hypot(poi.x - state.delta_pos.x,
                               poi.y - state.delta_pos.y) <= 1.0 + _EPS
    trace.found_poi = target if trace.success else -1
    return trace


# ---------------------------------------------------------------------------
# Memoryless find-all
# ---------------------------------------------------------------------------

@dataclass
class FindAllResult:
    p_tot: int  # probes excluding termination probes
    d_tot: float
    termination_probes: int
    gaps: list[float]  # localized search radii 2^ceil(log2 e_i)
    traces: list[SearchTrace]
    found: list[int]

    @property
    def all_found(self) -> bool:
        return all(t.success for t in self.traces)


def find_all(placement: LayerPlacement, world: World) -> FindAllResult:
    """Find every active POI: single-POI search, shut off, then doubling
    probes from the searcher's position until the next POI responds.

    Termination (the paper leaves it open): once a doubling probe of radius
    at least 2n is negative, a final radius-2n probe at the original origin
    confirms no active POI remains; these probes are counted separately.
    """
    work = World(world.n, list(world.pois), list(world.active))
    trace0 = run_single(placement, work)
    if not trace0.success:
        raise RuntimeError("initial single-POI search failed")
    result = FindAllResult(trace0.probes, trace0.distance, 0, [], [trace0],
                           [trace0.found_poi])
    delta = trace0.path[-1]
    while True:
        work.active[result.found[-1]] = False
        radius = 2.0
        responded = False
        while True:
            if probe(work, delta, radius):
                responded = True
                break
            if radius >= 2.0 * world.n:
                break
            result.p_tot += 1  # counted below when a POI follows
            radius *= 2.0
        if not responded:
            # the failed doubling ladder becomes termination overhead
            result.p_tot -= int(math.log2(radius / 2.0))
            result.termination_probes += int(math.log2(radius / 2.0)) + 1
            if probe(work, Point2(0.0, 0.0), 2.0 * world.n):
                raise RuntimeError("termination check missed an active POI")
            result.termination_probes += 1
            return result
        result.p_tot += 1  # the positive doubling probe
        result.gaps.append(radius)
        trace = run_single(placement, work,
                           SearchState(delta, radius, delta))
        if not trace.success:
            raise RuntimeError("follow-up single-POI search failed")
        result.p_tot += trace.probes
        result.d_tot += trace.distance
        result.traces.append(trace)
        result.found.append(trace.found_poi)
        delta = trace.path[-1]


# ---------------------------------------------------------------------------
# Reference tour length
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TourLength:
    length: float
    exact: bool


def tsp_reference(pois: list[Point2]) -> TourLength:
    """Closed-tour length over the POIs: exact Held-Karp dynamic program
    for up to 12 points, nearest-neighbor plus 2-opt beyond (approximate)."""
    k = len(pois)
    if k < 2:
        raise ValueError("need at least two POIs")
    pts = np.array([[p.x, p.y] for p in pois])
    dist = np.hypot(pts[:, None, 0] - pts[None, :, 0],
                    pts[:, None, 1] - pts[None, :, 1])
    if k <= 12:
        return TourLength(_held_karp(dist), True)
    return TourLength(_two_opt(dist), False)


def _held_karp(dist: np.ndarray) -> float:
    k = dist.shape[0]
    full = 1 << (k - 1)  # subsets of cities 1..k-1; city 0 is the anchor
    dp = np.full((full, k - 1), np.inf)
    for j in range(k - 1):
        dp[1 << j, j] = dist[0, j + 1]
    for mask in range(1, full):
        for j in range(k - 1):
            if not mask & (1 << j) or not np.isfinite(dp[mask, j]):
                continue
            base = dp[mask, j]
            for nxt in range(k - 1):
                if mask & (1 << nxt):
                    continue
                new = base + dist[j + 1, nxt + 1]
                nm = mask | (1 << nxt)
                if new < dp[nm, nxt]:
                    dp[nm, nxt] = new
    return float(min(dp[full - 1, j] + dist[j + 1, 0] for j in range(k - 1)))


def _two_opt(dist: np.ndarray) -> float:
    k = dist.shape[0]
    tour = [0]
    left = set(range(1, k))
    while left:
        last = tour[-1]
        nxt = min(left, key=lambda j: dist[last, j])
        tour.append(nxt)
        left.remove(nxt)
    improved = True
    while improved:
        improved = False
        for i in range(1, k - 1):
            for j in range(i + 1, k):
                a, b = tour[i - 1], tour[i]
                c, d = tour[j], tour[(j + 1) % k]
                if dist[a, c] + dist[b, d] < dist[a, b] + dist[c, d] - 1e-12:
                    tour[i:j + 1] = tour[i:j + 1][::-1]
                    improved = True
    return float(sum(dist[tour[i], tour[(i + 1) % k]] for i in range(k)))


# ---------------------------------------------------------------------------
# Vectorized batch engine (Monte Carlo)
# ---------------------------------------------------------------------------

def run_batch(placement: LayerPlacement, n: float,
              poi_xy: np.ndarray) -> dict[str, np.ndarray]:
    """Vectorized single-POI searches for a batch of POI positions.

    Equivalent to ``run_single`` per row of ``poi_xy`` (shape (t, 2));
    returns arrays P (probes), D (distance), R (responses), success, lost.
    Probe centers are handled as complex numbers; all trials advance one
    layer per iteration.
    """
    pz = np.array([complex(p.center.x, p.center.y) for p in placement.probes])
    pr = np.array([p.rho for p in placement.probes])
    m = placement.m
    d1 = abs(pz[0])
    poi = poi_xy[:, 0] + 1j * poi_xy[:, 1]
    t = poi.shape[0]

    center = np.zeros(t, dtype=complex)
    radius = np.full(t, float(n))
    delta = np.zeros(t, dtype=complex)
    P = np.zeros(t, dtype=np.int64)
    D = np.zeros(t)
    R = np.zeros(t, dtype=np.int64)
    lost = np.zeros(t, dtype=bool)

    active = radius > 1.0
    while active.any():
        idx = np.flatnonzero(active)
        c0, r0, dl = center[idx], radius[idx], delta[idx]
        off = dl - c0
        if d1 < _EPS:
            rot = np.ones(idx.size, dtype=complex)
        else:
            mag = np.abs(off)
            safe = np.where(mag < _EPS, 1.0, mag)
            rot = np.where(mag < _EPS, 1.0 + 0j,
                           off / safe / (pz[0] / d1))
        # first-hit index per trial (m-1 executed probes, else omitted)
        hit = np.full(idx.size, m - 1, dtype=np.int64)
        for k in range(m - 2, -1, -1):
            centers_k = c0 + r0 * pz[k] * rot
            inside = np.abs(poi[idx] - centers_k) <= r0 * pr[k] + _EPS
            hit = np.where(inside, k, hit)
        # travel legs: delta -> probe1 -> ... -> probe_{min(hit+1, m-1)}
        pos = dl
        legs = np.zeros(idx.size)
        stop = np.minimum(hit, m - 2)
        for k in range(m - 1):
            centers_k = c0 + r0 * pz[k] * rot
            step = np.abs(centers_k - pos)
            walk = stop >= k
            legs += np.where(walk, step, 0.0)
            pos = np.where(walk, centers_k, pos)
        D[idx] += legs
        delta[idx] = pos
        P[idx] += stop + 1
        R[idx] += (hit < m - 1).astype(np.int64)
        new_center = c0 + r0 * pz[hit] * rot
        new_radius = r0 * pr[hit]
        lost[idx] |= np.abs(poi[idx] - new_center) > new_radius + _EPS
        center[idx] = new_center
        radius[idx] = new_radius
        active = radius > 1.0

    D += np.abs(center - delta)
    success = np.abs(poi - center) <= 1.0 + _EPS
    return {"P": P, "D": D, "R": R, "success": success, "lost": lost}
