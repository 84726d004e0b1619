"""Model-view explanation artifacts: pattern-relationship projection (MDS +
signed influence edges), attribute flow data, layered network layout, and
before/after attribute distributions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .bayesnet import BayesianNetwork, learn_structure, topological_order
from .data import CATEGORICAL, NUMERICAL, DataError, Dataset, Discretization
from .engine import mixture_weights
from .metrics import wasserstein_1d

INFLUENCE_PROBE_WEIGHT = 4.0  # single-pattern boost used for influence probing


class AnalyticsError(ValueError):
    """Unusable analytics inputs."""


# ---------------------------------------------------------------------------
# Pattern relationship: distances, MDS, influence edges
# ---------------------------------------------------------------------------


def pattern_distance(
    ds: Dataset, disc: Mapping[str, Discretization], p_i, p_j
) -> float:
    """Dissimilarity of two patterns: the mean over all schema attributes of
    the 1-D W1 distance between their record subsets, on bin indices for
    categorical attributes and domain-normalized values for numerical ones."""
    if len(p_i.records) == 0 or len(p_j.records) == 0:
        raise AnalyticsError("patterns must be non-empty")
    rows_i = np.asarray(p_i.records, dtype=np.int64)
    rows_j = np.asarray(p_j.records, dtype=np.int64)
    total = 0.0
    for attr in ds.schema:
        col = ds.column(attr.name)
        if attr.kind == NUMERICAL:
            width = attr.width or 1.0
            a = (col[rows_i] - attr.domain[0]) / width
            b = (col[rows_j] - attr.domain[0]) / width
        else:
            codes = disc[attr.name].codes(col)
            a, b = codes[rows_i], codes[rows_j]
        total += wasserstein_1d(a, b)
    return total / ds.d


def mds_layout(distances: np.ndarray) -> np.ndarray:
    """Classical (Torgerson) MDS into 2-D.

    Double-center the squared distances, take the top-2 eigenpairs, and scale
    eigenvectors by sqrt(eigenvalue). Signs are fixed by making each
    eigenvector's largest-magnitude entry positive. One pattern maps to the
    origin; two patterns to (-d/2, 0), (d/2, 0).
    """
    d = np.asarray(distances, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise AnalyticsError("distance matrix must be square")
    if not np.allclose(d, d.T, rtol=0, atol=1e-12):
        raise AnalyticsError("distance matrix must be symmetric")
    n = d.shape[0]
    if n == 1:
        return np.zeros((1, 2))
    if n == 2:
        half = d[0, 1] / 2.0
        return np.array([[-half, 0.0], [half, 0.0]])
    j = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * j @ (d**2) @ j
    evals, evecs = np.linalg.eigh(b)
    idx = np.argsort(evals)[::-1][:2]
    coords = np.zeros((n, 2))
    for c, i in enumerate(idx):
        lam = max(evals[i], 0.0)
        vec = evecs[:, i]
        pivot = int(np.argmax(np.abs(vec)))
        if vec[pivot] < 0:
            vec = -vec
        coords[:, c] = vec * math.sqrt(lam)
    return coords


@dataclass(frozen=True)
class RelationshipGraph:
    """MDS-positioned pattern nodes plus signed pairwise influence edges."""

    nodes: tuple
    edges: tuple

    def to_json(self) -> dict:
        return {"v": 1, "nodes": list(self.nodes), "edges": list(self.edges)}


def influence_score(edges_a: frozenset, edges_b: frozenset) -> int:
    """AP-pair set algebra: |A ∩ B| - |A Δ B| over (child, parent) edge sets."""
    return len(edges_a & edges_b) - len(edges_a ^ edges_b)


def influence_edges(
    ds: Dataset,
    patterns: Sequence,
    k: int,
    disc: Mapping[str, Discretization],
) -> list[dict]:
    """Pairwise influence from AP-pair set algebra over probe networks.

    For each pattern, learn a deterministic oracle-mode network with only
    that pattern boosted (weight 4, others 0); the influence score of a pair
    is |edges_i ∩ edges_j| - |edges_i Δ edges_j|: positive means the two
    constraints pull the structure the same way.
    """
    if len(patterns) < 2:
        raise AnalyticsError("influence needs at least two patterns")
    nets: dict[str, frozenset] = {}
    for p in patterns:
        boosted = [_Boosted(q.id, tuple(q.records), INFLUENCE_PROBE_WEIGHT if q.id == p.id else 0.0) for q in patterns]
        mw = mixture_weights(ds, boosted)
        net = learn_structure(ds, disc, weights=mw.values, k=k, weight_ceiling=mw.ceiling)
        nets[p.id] = net.edges
    edges = []
    ids = [p.id for p in patterns]
    for a_pos in range(len(ids)):
        for b_pos in range(a_pos + 1, len(ids)):
            score = influence_score(nets[ids[a_pos]], nets[ids[b_pos]])
            edges.append(
                {
                    "source": ids[a_pos],
                    "target": ids[b_pos],
                    "sign": "positive" if score >= 0 else "negative",
                    "magnitude": abs(score),
                }
            )
    return edges


@dataclass(frozen=True)
class _Boosted:
    id: str
    records: tuple
    weight: float


def relationship_graph(
    ds: Dataset,
    patterns: Sequence,
    k: int,
    disc: Mapping[str, Discretization],
) -> RelationshipGraph:
    """Full pattern-relationship payload: MDS node positions + influence edges."""
    if not patterns:
        raise AnalyticsError("no patterns")
    n = len(patterns)
    dist = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            dist[i, j] = dist[j, i] = pattern_distance(ds, disc, patterns[i], patterns[j])
    coords = mds_layout(dist)
    nodes = tuple(
        {
            "id": p.id,
            "pattern_type": p.pattern_type,
            "records": len(p.records),
            "weight": p.weight,
            "x": float(coords[i, 0]),
            "y": float(coords[i, 1]),
        }
        for i, p in enumerate(patterns)
    )
    edges = tuple(influence_edges(ds, patterns, k, disc)) if n >= 2 else ()
    return RelationshipGraph(nodes=nodes, edges=edges)


# ---------------------------------------------------------------------------
# Attribute flow (Sankey data)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlowData:
    """Per-column bin heights and adjacent-column flows; heights and flow
    counts each sum to n per column / column pair (and to the pattern size
    for the highlighted sub-flows)."""

    columns: tuple
    bins: tuple  # per column: list of {label, count}
    links: tuple  # per adjacent pair: list of {source, target, count, sub}
    highlight: str | None = None

    def to_json(self) -> dict:
        return {
            "v": 1,
            "columns": list(self.columns),
            "bins": [list(b) for b in self.bins],
            "links": [list(l) for l in self.links],
            "highlight": self.highlight,
        }


def sankey_flow(
    ds: Dataset,
    disc: Mapping[str, Discretization],
    columns: Sequence[str],
    highlight=None,
) -> FlowData:
    """Bin heights per column and record flows between adjacent columns,
    with optional per-pattern sub-flow counts."""
    for c in columns:
        ds.attribute(c)  # raises on unknown columns
    mask = None
    if highlight is not None:
        mask = np.zeros(ds.n, dtype=bool)
        if len(highlight.records):
            mask[np.asarray(highlight.records, dtype=np.int64)] = True
    codes = {c: disc[c].codes(ds.column(c)) for c in columns}
    bins = []
    for c in columns:
        dz = disc[c]
        counts = np.bincount(codes[c], minlength=dz.n_bins)
        bins.append(
            tuple(
                {"bin": i, "label": str(dz.bin_label(i)), "count": int(counts[i])}
                for i in range(dz.n_bins)
            )
        )
    links = []
    for a, b in zip(columns[:-1], columns[1:]):
        na, nb = disc[a].n_bins, disc[b].n_bins
        key = codes[a] * nb + codes[b]
        counts = np.bincount(key, minlength=na * nb)
        subs = (
            np.bincount(key[mask], minlength=na * nb) if mask is not None else None
        )
        pair_links = []
        for s in range(na):
            for t in range(nb):
                c = int(counts[s * nb + t])
                if c == 0 and (subs is None or subs[s * nb + t] == 0):
                    continue
                link = {"source": s, "target": t, "count": c}
                if subs is not None:
                    link["sub"] = int(subs[s * nb + t])
                pair_links.append(link)
        links.append(tuple(pair_links))
    return FlowData(
        columns=tuple(columns),
        bins=tuple(bins),
        links=tuple(links),
        highlight=highlight.id if highlight is not None else None,
    )


# ---------------------------------------------------------------------------
# Network layout
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NetworkLayout:
    """Layered DAG layout: layer = longest path from any root, slots evenly
    spaced per layer in child-name order."""

    nodes: tuple  # {attribute, layer, slot, y}
    edges: tuple  # {parent, child}

    def to_json(self) -> dict:
        return {"v": 1, "nodes": list(self.nodes), "edges": list(self.edges)}


def network_layout(net: BayesianNetwork) -> NetworkLayout:
    order = topological_order(net)
    depth: dict[str, int] = {}
    for pair in net.pairs:
        depth[pair.child] = (
            max(depth[p] for p in pair.parents) + 1 if pair.parents else 0
        )
    layers: dict[int, list[str]] = {}
    for name in order:
        layers.setdefault(depth[name], []).append(name)
    nodes = []
    for layer in sorted(layers):
        members = sorted(layers[layer])
        for slot, name in enumerate(members):
            nodes.append(
                {
                    "attribute": name,
                    "layer": layer,
                    "slot": slot,
                    "y": (slot + 0.5) / len(members),
                }
            )
    edges = tuple(
        {"parent": parent, "child": pair.child}
        for pair in net.pairs
        for parent in pair.parents
    )
    return NetworkLayout(nodes=tuple(nodes), edges=edges)


# ---------------------------------------------------------------------------
# Before/after attribute distributions
# ---------------------------------------------------------------------------


def gaussian_kde_grid(values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Gaussian KDE evaluated on a fixed grid, Silverman rule-of-thumb
    bandwidth (falls back to a small positive width for constant samples)."""
    values = np.asarray(values, dtype=float)
    n = values.size
    sigma = values.std()
    h = sigma * (4.0 / (3.0 * n)) ** 0.2 if sigma > 0 else max(abs(values[0]), 1.0) * 1e-3
    z = (grid[:, None] - values[None, :]) / h
    dens = np.exp(-0.5 * z**2).sum(axis=1) / (n * h * math.sqrt(2 * math.pi))
    return dens


def node_distributions(
    ds: Dataset,
    synthetic: Dataset,
    attr: str,
    disc: Mapping[str, Discretization],
    grid_points: int = 128,
) -> dict:
    """Paired before/after distribution for one attribute: a KDE curve on a
    shared 128-point grid for numerical attributes, normalized histograms
    for categorical ones."""
    attribute = ds.attribute(attr)
    col_b = ds.column(attr)
    col_a = synthetic.column(attr)
    if col_b.size == 0 or col_a.size == 0:
        raise AnalyticsError(f"empty column {attr!r}")
    if attribute.kind == NUMERICAL:
        lo = min(col_b.min(), col_a.min())
        hi = max(col_b.max(), col_a.max())
        if hi <= lo:
            hi = lo + 1.0
        grid = np.linspace(lo, hi, grid_points)
        return {
            "v": 1,
            "attribute": attr,
            "kind": NUMERICAL,
            "grid": grid.tolist(),
            "before": gaussian_kde_grid(col_b, grid).tolist(),
            "after": gaussian_kde_grid(col_a, grid).tolist(),
        }
    values = list(attribute.domain)
    hb = [float(np.sum(col_b == v)) / col_b.size for v in values]
    ha = [float(np.sum(col_a == v)) / col_a.size for v in values]
    return {
        "v": 1,
        "attribute": attr,
        "kind": CATEGORICAL,
        "values": [str(v) for v in values],
        "before": hb,
        "after": ha,
    }
