"""Time-varying network graph: ISL matching, gateway assignment, per-edge rates.

Each satellite carries four ISL antennas: two along its own plane (up = next
slot, down = previous slot) and two across planes (east = next plane, west =
previous plane, cyclic). Inter-plane links are matched greedily in ascending
satellite-id order so the result is reproducible. Each gateway connects to its
closest satellite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .link import LinkBudgets, select_rate
from .orbit import (
    ConstellationSpec,
    NodePosition,
    gateway_positions,
    propagate,
    slant_range,
)

DIR_UP, DIR_DOWN, DIR_EAST, DIR_WEST = 0, 1, 2, 3
DIRECTION_NAMES = ("up", "down", "east", "west")

INTRA = "intra"
INTER = "inter"
GSL = "gsl"


@dataclass
class EdgeSet:
    """Undirected ISL edges plus one GSL edge per gateway.

    isl_neighbors maps satellite id -> [up, down, east, west] neighbor id
    (-1 where the antenna is unused); it records which antenna carries which
    edge, which the edge list alone cannot express.
    """

    isl_edges: list[tuple[int, int, str]] = field(default_factory=list)
    gsl_edges: list[tuple[int, int]] = field(default_factory=list)
    isl_neighbors: np.ndarray | None = None


def greedy_isl_match(positions: list[NodePosition]) -> EdgeSet:
    """Intra-plane rings plus greedy inter-plane matching.

    positions must be one full satellite snapshot; satellites claim their
    east-plane counterpart in ascending id order, each counterpart's west
    antenna serving at most one link.
    """
    sats = sorted(positions, key=lambda p: p.node_id)
    planes = max(p.plane for p in sats) + 1
    slots = max(p.slot for p in sats) + 1
    by_ps = {(p.plane, p.slot): p for p in sats}
    n = sats[-1].node_id + 1
    neighbors = np.full((n, 4), -1, dtype=int)
    edges: dict[tuple[int, int], str] = {}

    if slots >= 2:
        for p in sats:
            succ = by_ps[(p.plane, (p.slot + 1) % slots)]
            pred = by_ps[(p.plane, (p.slot - 1) % slots)]
            neighbors[p.node_id, DIR_UP] = succ.node_id
            neighbors[p.node_id, DIR_DOWN] = pred.node_id
            a, b = sorted((p.node_id, succ.node_id))
            edges[(a, b)] = INTRA

    if planes >= 2:
        for plane in range(planes):
            east_plane = (plane + 1) % planes
            west_free = [p for p in sats if p.plane == east_plane]
            for p in (q for q in sats if q.plane == plane):
                if not west_free:
                    break
                best = min(west_free, key=lambda c: (slant_range(p, c), c.node_id))
                west_free.remove(best)
                neighbors[p.node_id, DIR_EAST] = best.node_id
                neighbors[best.node_id, DIR_WEST] = p.node_id
                a, b = sorted((p.node_id, best.node_id))
                edges.setdefault((a, b), INTER)

    isl_edges = sorted((a, b, kind) for (a, b), kind in edges.items())
    return EdgeSet(isl_edges=isl_edges, gsl_edges=[], isl_neighbors=neighbors)


def elevation_deg(gw: NodePosition, sat: NodePosition) -> float:
    """Elevation of the satellite above the gateway's local horizon."""
    los = sat.ecef - gw.ecef
    zenith = gw.ecef / np.linalg.norm(gw.ecef)
    return math.degrees(math.asin(float(np.dot(los, zenith)) / np.linalg.norm(los)))


def gsl_assign(
    positions: list[NodePosition],
    gateways: list[NodePosition],
    min_elevation_deg: float | None = None,
) -> EdgeSet:
    """Each gateway links to its closest satellite; ties broken by lowest id."""
    if not positions:
        raise ValueError("need at least one satellite")
    gsl = []
    for gw in sorted(gateways, key=lambda g: g.node_id):
        candidates = positions
        if min_elevation_deg is not None:
            candidates = [s for s in positions if elevation_deg(gw, s) >= min_elevation_deg]
            if not candidates:
                raise ValueError(
                    f"no satellite above {min_elevation_deg} deg elevation at {gw.name}"
                )
        best = min(candidates, key=lambda s: (slant_range(gw, s), s.node_id))
        gsl.append((gw.node_id, best.node_id))
    return EdgeSet(isl_edges=[], gsl_edges=gsl)


def build_graph(
    edge_set: EdgeSet,
    rates: dict[tuple[int, int], float],
    nodes: list[int] | None = None,
) -> dict[int, list[tuple[int, float]]]:
    """Directed adjacency with weight 1/rate; zero-rate edges are omitted."""
    graph: dict[int, list[tuple[int, float]]] = {n: [] for n in (nodes or [])}

    def add(a: int, b: int):
        rate = rates.get((a, b), 0.0)
        if rate > 0.0:
            graph.setdefault(a, []).append((b, 1.0 / rate))
        else:
            graph.setdefault(a, [])
        graph.setdefault(b, [])

    for a, b, _kind in edge_set.isl_edges:
        add(a, b)
        add(b, a)
    for gw, sat in edge_set.gsl_edges:
        add(gw, sat)
        add(sat, gw)
    for adj in graph.values():
        adj.sort()
    return graph


@dataclass
class TopologySnapshot:
    """The network at one instant: positions, edges, rates, distances."""

    t: float
    sats: list[NodePosition]
    gateways: list[NodePosition]
    nodes: dict[int, NodePosition]
    edge_set: EdgeSet
    rates: dict[tuple[int, int], float]
    distances: dict[tuple[int, int], float]
    gw_to_sat: dict[int, int]
    sat_to_gws: dict[int, list[int]]
    d_max_isl: float

    @property
    def n_sats(self) -> int:
        return len(self.sats)

    def rate(self, a: int, b: int) -> float:
        return self.rates.get((a, b), 0.0)

    def distance(self, a: int, b: int) -> float:
        return self.distances.get((a, b), 0.0)

    def neighbor(self, sat_id: int, direction: int) -> int:
        return int(self.edge_set.isl_neighbors[sat_id, direction])

    def isl_action_mask(self, sat_id: int) -> np.ndarray:
        """True where the directional antenna has a live (rate > 0) neighbor."""
        mask = np.zeros(4, dtype=bool)
        for d in range(4):
            nbr = self.neighbor(sat_id, d)
            mask[d] = nbr >= 0 and self.rate(sat_id, nbr) > 0.0
        return mask

    def graph(self) -> dict[int, list[tuple[int, float]]]:
        return build_graph(self.edge_set, self.rates, nodes=sorted(self.nodes))


def build_snapshot(
    spec: ConstellationSpec,
    t: float,
    gateway_count: int,
    budgets: LinkBudgets,
    min_elevation_deg: float | None = None,
    gateway_nodes: list[NodePosition] | None = None,
) -> TopologySnapshot:
    sats = propagate(spec, t)
    if gateway_nodes is None:
        gws = gateway_positions(gateway_count, id_offset=spec.n_sats)
    else:
        gws = list(gateway_nodes)
    isl_part = greedy_isl_match(sats)
    gsl_part = gsl_assign(sats, gws, min_elevation_deg)
    edge_set = EdgeSet(
        isl_edges=isl_part.isl_edges,
        gsl_edges=gsl_part.gsl_edges,
        isl_neighbors=isl_part.isl_neighbors,
    )
    nodes = {n.node_id: n for n in sats + gws}

    rates: dict[tuple[int, int], float] = {}
    distances: dict[tuple[int, int], float] = {}
    d_max_isl = 0.0
    for a, b, _kind in edge_set.isl_edges:
        d = slant_range(nodes[a], nodes[b])
        r = select_rate(budgets.isl, budgets.table, d) if d > 0 else 0.0
        rates[(a, b)] = rates[(b, a)] = r
        distances[(a, b)] = distances[(b, a)] = d
        d_max_isl = max(d_max_isl, d)
    for gw, sat in edge_set.gsl_edges:
        d = slant_range(nodes[gw], nodes[sat])
        rates[(gw, sat)] = select_rate(budgets.gsl_up, budgets.table, d) if d > 0 else 0.0
        rates[(sat, gw)] = select_rate(budgets.gsl_down, budgets.table, d) if d > 0 else 0.0
        distances[(gw, sat)] = distances[(sat, gw)] = d

    gw_to_sat = dict(edge_set.gsl_edges)
    sat_to_gws: dict[int, list[int]] = {}
    for gw, sat in edge_set.gsl_edges:
        sat_to_gws.setdefault(sat, []).append(gw)

    return TopologySnapshot(
        t=t,
        sats=sats,
        gateways=gws,
        nodes=nodes,
        edge_set=edge_set,
        rates=rates,
        distances=distances,
        gw_to_sat=gw_to_sat,
        sat_to_gws=sat_to_gws,
        d_max_isl=d_max_isl,
    )


def snapshot_rows(snap: TopologySnapshot) -> list[tuple]:
    """Directed edge rows (t, node_a, node_b, kind, distance_m, rate_bps)."""
    rows = []
    for a, b, kind in snap.edge_set.isl_edges:
        rows.append((snap.t, a, b, kind, snap.distance(a, b), snap.rate(a, b)))
        rows.append((snap.t, b, a, kind, snap.distance(b, a), snap.rate(b, a)))
    for gw, sat in snap.edge_set.gsl_edges:
        rows.append((snap.t, gw, sat, GSL, snap.distance(gw, sat), snap.rate(gw, sat)))
        rows.append((snap.t, sat, gw, GSL, snap.distance(sat, gw), snap.rate(sat, gw)))
    rows.sort(key=lambda r: (r[1], r[2]))
    return rows
