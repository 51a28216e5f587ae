"""Settlement extraction and least-cost regional fiber extension.

Coordinates are planar km in the population grid frame; lengths on the
plan are reported in metres.
"""
from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .country import PopulationGrid

FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


@dataclass
class Settlement:
    id: str
    centroid: tuple  # (x, y) km
    population: float
    connected: bool = False
    region_id: str | None = None


@dataclass
class FiberPlan:
    existing_edges: list = field(default_factory=list)  # [x1, y1, x2, y2, length_m]
    new_edges: list = field(default_factory=list)  # [x1, y1, x2, y2, length_m]
    new_nodes: list = field(default_factory=list)  # settlement ids
    edge_ends: list = field(default_factory=list)  # (node_a, node_b) ids per new edge

    @property
    def total_new_length(self) -> float:
        return math.fsum(e[4] for e in self.new_edges)

    def to_json(self) -> str:
        return json.dumps(
            {
                "existing_edges": self.existing_edges,
                "new_edges": self.new_edges,
                "new_nodes": self.new_nodes,
                "total_new_length": self.total_new_length,
            },
            indent=2,
        ) + "\n"


def extract_settlements(grid: PopulationGrid, density_threshold, settlement_threshold, labels=None, region_ids=None):
    """4-connected clusters of dense cells with enough people to count.

    When a region label array is supplied, each settlement is tagged with
    the region holding the largest share of its population.
    """
    if density_threshold <= 0 or settlement_threshold <= 0:
        raise ValueError("thresholds must be positive")
    pop = np.nan_to_num(grid.values, nan=0.0)
    dense = pop / grid.cell_area >= density_threshold
    components, n = ndimage.label(dense, structure=FOUR_CONNECTED)
    out = []
    for comp in range(1, n + 1):
        cells = np.argwhere(components == comp)
        weights = pop[cells[:, 0], cells[:, 1]]
        total = weights.sum()
        if total < settlement_threshold:
            continue
        xy = np.array([grid.cell_center(r, c) for r, c in cells])
        cx, cy = (xy * weights[:, None]).sum(axis=0) / total
        region = None
        if labels is not None:
            by_region: dict[int, float] = {}
            for (r, c), w in zip(cells, weights):
                by_region[labels[r, c]] = by_region.get(labels[r, c], 0.0) + w
            best = max(sorted(by_region), key=lambda k: by_region[k])
            region = region_ids[best] if region_ids is not None else str(best)
        out.append(Settlement(f"s{len(out)}", (float(cx), float(cy)), float(total), region_id=region))
    return out


def point_segment_distance(p, seg) -> float:
    px, py = p
    x1, y1, x2, y2 = seg[:4]
    dx, dy = x2 - x1, y2 - y1
    denom = dx * dx + dy * dy
    if denom == 0:
        return math.hypot(px - x1, py - y1)
    t = max(0.0, min(1.0, ((px - x1) * dx + (py - y1) * dy) / denom))
    return math.hypot(px - (x1 + t * dx), py - (y1 + t * dy))


def mark_connected(settlements, existing_edges, buffer):
    """Flag settlements whose centroid lies within ``buffer`` (m) of existing fiber."""
    if buffer < 0:
        raise ValueError("buffer must be non-negative")
    buf_km = buffer / 1000.0
    for s in settlements:
        s.connected = any(point_segment_distance(s.centroid, e) <= buf_km + 1e-12 for e in existing_edges)
    return settlements


def attachment_points(existing_edges) -> list[tuple]:
    """Distinct segment endpoints of the existing network."""
    seen = {}
    for e in existing_edges:
        for p in ((e[0], e[1]), (e[2], e[3])):
            seen.setdefault((float(p[0]), float(p[1])), None)
    return list(seen)


def _dist_m(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1]) * 1000.0


def design_regional_fiber(settlements, existing_attachment_points, existing_edges=()) -> FiberPlan:
    """Prim's tree over unconnected settlements plus the existing network.

    The existing network (attachment points and already-connected
    settlements) is one super-node reached at zero cost, so the tree only
    pays for new links. Each unconnected node's distance to the super-node
    is its distance to the nearest member.
    """
    existing = [list(map(float, e[:4])) + [_dist_m(e[:2], e[2:4])] for e in existing_edges]
    todo = sorted((s for s in settlements if not s.connected), key=lambda s: s.id)
    if not todo:
        return FiberPlan(existing_edges=existing)
    anchors = [(f"attach{i}", tuple(p)) for i, p in enumerate(existing_attachment_points)]
    anchors += [(s.id, tuple(s.centroid)) for s in sorted(settlements, key=lambda s: s.id) if s.connected]

    nodes = [(s.id, tuple(s.centroid)) for s in todo]
    n = len(nodes)
    # best[i] = (cost, tiebreak, source) for joining node i to the tree
    best = [(math.inf, "", None)] * n
    in_tree = [False] * n
    heap = []
    if not anchors:
        raise ValueError("unconnected settlements need at least one attachment point")
    for i, (nid, p) in enumerate(nodes):
        d, src = min((_dist_m(p, ap), aid) for aid, ap in anchors)
        best[i] = (d, src, src)
        heapq.heappush(heap, (d, src, nid, i))

    plan = FiberPlan(existing_edges=existing)
    points = dict(anchors)
    points.update(dict(nodes))
    while heap:
        d, _, nid, i = heapq.heappop(heap)
        if in_tree[i] or d > best[i][0]:
            continue
        in_tree[i] = True
        src = best[i][2]
        a, b = points[src], nodes[i][1]
        plan.new_edges.append([a[0], a[1], b[0], b[1], d])
        plan.edge_ends.append((src, nid))
        plan.new_nodes.append(nid)
        for j, (mid, q) in enumerate(nodes):
            if in_tree[j]:
                continue
            dj = _dist_m(nodes[i][1], q)
            if (dj, nid) < best[j][:2]:
                best[j] = (dj, nid, nid)
                heapq.heappush(heap, (dj, nid, mid, j))
    return plan


def fiber_build_cost(plan: FiberPlan, per_meter, edge_classes=None) -> float:
    """Price new edges by length.

    ``per_meter`` is either one price for every edge or a mapping from
    settlement class to price, with ``edge_classes`` naming the class of each
    edge (the denser endpoint's region).
    """
    total = 0.0
    for k, edge in enumerate(plan.new_edges):
        if isinstance(per_meter, dict):
            price = per_meter[edge_classes[k]]
        else:
            price = per_meter
        if price < 0:
            raise ValueError("per-metre prices must be non-negative")
        total += edge[4] * price
    return total
