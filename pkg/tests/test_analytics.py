import itertools
import math

import numpy as np
import pytest

from privcharts.analytics import (
    AnalyticsError,
    gaussian_kde_grid,
    influence_edges,
    mds_layout,
    network_layout,
    node_distributions,
    pattern_distance,
    relationship_graph,
    sankey_flow,
)
from privcharts.bayesnet import APPair, BayesianNetwork
from privcharts.charts import PatternCatalog
from privcharts.data import CATEGORICAL, NUMERICAL, Attribute, Dataset, discretize_all
from privcharts.fixtures import adult_like, adult_like_charts, adult_like_selections
from privcharts.metrics import wasserstein_1d


class FakePattern:
    def __init__(self, pid, records, weight=0.0, pattern_type="cluster"):
        self.id = pid
        self.records = tuple(records)
        self.weight = weight
        self.pattern_type = pattern_type


@pytest.fixture
def two_col_ds():
    schema = [
        Attribute("v", NUMERICAL, (0.0, 10.0)),
        Attribute("g", CATEGORICAL, ("a", "b")),
    ]
    rows = [(float(i), "a" if i < 5 else "b") for i in range(10)]
    return Dataset(schema, rows)


def test_pattern_distance_identical(two_col_ds):
    disc = discretize_all(two_col_ds)
    p = FakePattern("P0", range(5))
    assert pattern_distance(two_col_ds, disc, p, p) == 0.0


def test_pattern_distance_symmetric(two_col_ds):
    disc = discretize_all(two_col_ds)
    p, q = FakePattern("P0", range(5)), FakePattern("P1", range(5, 10))
    assert pattern_distance(two_col_ds, disc, p, q) == pytest.approx(
        pattern_distance(two_col_ds, disc, q, p)
    )


def test_pattern_distance_opposite_ends_contribution():
    # one numerical attribute: disjoint subsets at opposite domain ends -> W1 = 1
    # (normalized width), averaged over d=1 attribute
    schema = [Attribute("v", NUMERICAL, (0.0, 10.0))]
    ds = Dataset(schema, [(0.0,), (0.0,), (10.0,), (10.0,)])
    disc = discretize_all(ds)
    p, q = FakePattern("P0", [0, 1]), FakePattern("P1", [2, 3])
    assert pattern_distance(ds, disc, p, q) == pytest.approx(1.0)


def test_pattern_distance_empty_pattern(two_col_ds):
    disc = discretize_all(two_col_ds)
    with pytest.raises(AnalyticsError):
        pattern_distance(two_col_ds, disc, FakePattern("P0", []), FakePattern("P1", [1]))


def test_mds_all_zero():
    coords = mds_layout(np.zeros((3, 3)))
    assert np.allclose(coords, 0.0)


def test_mds_two_points_closed_form():
    d = np.array([[0.0, 4.0], [4.0, 0.0]])
    coords = mds_layout(d)
    assert np.allclose(coords, [[-2.0, 0.0], [2.0, 0.0]])


def test_mds_three_equidistant_triangle():
    d = np.ones((3, 3)) - np.eye(3)
    coords = mds_layout(d)
    for i, j in itertools.combinations(range(3), 2):
        assert np.linalg.norm(coords[i] - coords[j]) == pytest.approx(1.0, abs=1e-9)


def test_mds_reproduces_euclidean_embeddable():
    pts = np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]])
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    coords = mds_layout(d)
    got = np.linalg.norm(coords[:, None, :] - coords[None, :, :], axis=2)
    assert np.allclose(got, d, atol=1e-9)


def test_mds_rejects_asymmetric():
    with pytest.raises(AnalyticsError):
        mds_layout(np.array([[0.0, 1.0], [2.0, 0.0]]))


def test_mds_single_pattern_origin():
    assert np.allclose(mds_layout(np.zeros((1, 1))), [[0.0, 0.0]])


# ---------------------------------------------------------------------------
# influence edges
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def adult_world():
    ds = adult_like(n=300)
    disc = discretize_all(ds)
    charts = adult_like_charts()
    sels = adult_like_selections()
    cat = PatternCatalog()
    patterns = [cat.add(ds, charts[t], sels[t], 1.0) for t in ("cluster", "correlation", "order")]
    return ds, disc, patterns


def test_influence_symmetry_and_determinism(adult_world):
    ds, disc, patterns = adult_world
    e1 = influence_edges(ds, patterns, 1, disc)
    e2 = influence_edges(ds, patterns, 1, disc)
    assert e1 == e2
    assert len(e1) == 3  # one edge per unordered pair
    for e in e1:
        assert e["sign"] in ("positive", "negative")
        assert e["magnitude"] >= 0


def test_influence_identical_patterns_positive(adult_world):
    ds, disc, patterns = adult_world
    twin_a = FakePattern("A", patterns[0].records, 1.0)
    twin_b = FakePattern("B", patterns[0].records, 1.0)
    edges = influence_edges(ds, [twin_a, twin_b], 1, disc)
    # identical boosts give identical probe networks: score = |E| - 0 > 0
    assert edges[0]["sign"] == "positive"
    assert edges[0]["magnitude"] == ds.d - 1  # a k=1 tree has d-1 edges


def test_influence_set_algebra_matches_hand_count(adult_world):
    ds, disc, patterns = adult_world
    from privcharts.bayesnet import learn_structure
    from privcharts.engine import mixture_weights

    nets = {}
    for p in patterns[:2]:
        boosted = [
            FakePattern(q.id, q.records, 4.0 if q.id == p.id else 0.0) for q in patterns[:2]
        ]
        mw = mixture_weights(ds, boosted)
        nets[p.id] = learn_structure(ds, disc, weights=mw.values, k=1, weight_ceiling=mw.ceiling).edges
    ea, eb = nets[patterns[0].id], nets[patterns[1].id]
    expected = len(ea & eb) - len(ea ^ eb)
    edge = influence_edges(ds, patterns[:2], 1, disc)[0]
    got = edge["magnitude"] if edge["sign"] == "positive" else -edge["magnitude"]
    assert got == expected


def test_relationship_graph_payload(adult_world):
    ds, disc, patterns = adult_world
    graph = relationship_graph(ds, patterns, 1, disc)
    assert len(graph.nodes) == 3
    payload = graph.to_json()
    assert payload["v"] == 1
    assert {n["id"] for n in payload["nodes"]} == {p.id for p in patterns}


# ---------------------------------------------------------------------------
# sankey flow
# ---------------------------------------------------------------------------


def test_sankey_single_column(two_col_ds):
    disc = discretize_all(two_col_ds)
    flow = sankey_flow(two_col_ds, disc, ["g"])
    assert flow.links == ()
    assert sum(b["count"] for b in flow.bins[0]) == two_col_ds.n


def test_sankey_two_binary_columns():
    schema = [Attribute("x", CATEGORICAL, ("0", "1")), Attribute("y", CATEGORICAL, ("0", "1"))]
    ds = Dataset(schema, [("0", "0"), ("0", "0"), ("1", "1")])
    disc = discretize_all(ds)
    flow = sankey_flow(ds, disc, ["x", "y"])
    links = {(l["source"], l["target"]): l["count"] for l in flow.links[0]}
    assert links == {(0, 0): 2, (1, 1): 1}


def test_sankey_conservation(adult_world):
    ds, disc, patterns = adult_world
    cols = [a.name for a in ds.schema]
    flow = sankey_flow(ds, disc, cols)
    for col_bins in flow.bins:
        assert sum(b["count"] for b in col_bins) == ds.n
    for pair_links in flow.links:
        assert sum(l["count"] for l in pair_links) == ds.n


def test_sankey_highlight_subflows(adult_world):
    ds, disc, patterns = adult_world
    p = patterns[0]
    flow = sankey_flow(ds, disc, [a.name for a in ds.schema], highlight=p)
    assert flow.highlight == p.id
    for pair_links in flow.links:
        assert sum(l.get("sub", 0) for l in pair_links) == len(p.records)
        assert all(l.get("sub", 0) <= max(l["count"], 1) for l in pair_links)


def test_sankey_unknown_column(two_col_ds):
    disc = discretize_all(two_col_ds)
    with pytest.raises(Exception):
        sankey_flow(two_col_ds, disc, ["nope"])


# ---------------------------------------------------------------------------
# network layout
# ---------------------------------------------------------------------------


def test_layout_product_network():
    net = BayesianNetwork(pairs=(APPair("a"), APPair("b"), APPair("c")), k=0)
    layout = network_layout(net)
    assert all(n["layer"] == 0 for n in layout.nodes)


def test_layout_chain():
    net = BayesianNetwork(pairs=(APPair("a"), APPair("b", ("a",)), APPair("c", ("b",))), k=1)
    layout = network_layout(net)
    layers = {n["attribute"]: n["layer"] for n in layout.nodes}
    assert layers == {"a": 0, "b": 1, "c": 2}


def test_layout_diamond_longest_path():
    net = BayesianNetwork(
        pairs=(APPair("a"), APPair("b", ("a",)), APPair("c", ("a",)), APPair("d", ("b", "c"))),
        k=2,
    )
    layout = network_layout(net)
    layers = {n["attribute"]: n["layer"] for n in layout.nodes}
    assert layers["d"] == 2


def test_layout_respects_topology_across_seeds(adult_world):
    ds, disc, _ = adult_world
    from privcharts.bayesnet import learn_structure
    from privcharts.mechanisms import NoiseSource

    for seed in range(100):
        net = learn_structure(ds, disc, k=2, epsilon1=1.0, src=NoiseSource(seed))
        layout = network_layout(net)
        layers = {n["attribute"]: n["layer"] for n in layout.nodes}
        for e in layout.edges:
            assert layers[e["parent"]] < layers[e["child"]]


# ---------------------------------------------------------------------------
# node distributions
# ---------------------------------------------------------------------------


def test_node_distributions_identity(adult_world):
    ds, disc, _ = adult_world
    out = node_distributions(ds, ds, "age", disc)
    assert np.allclose(out["before"], out["after"], atol=1e-12)


def test_node_distributions_categorical_masses():
    schema = [Attribute("g", CATEGORICAL, ("a", "b"))]
    before = Dataset(schema, [("a",), ("b",)])
    after = Dataset(schema, [("a",), ("a",), ("a",), ("b",), ("b",)])
    out = node_distributions(before, after, "g", {"g": discretize_all(before)["g"]})
    assert out["before"] == [0.5, 0.5]
    assert out["after"] == [0.6, 0.4]


def test_kde_peak_near_zero():
    rng = np.random.default_rng(1)
    sample = rng.normal(0, 1, 1000)
    grid = np.linspace(-4, 4, 128)
    dens = gaussian_kde_grid(sample, grid)
    assert abs(grid[np.argmax(dens)]) <= 0.2


def test_kde_integrates_to_one():
    rng = np.random.default_rng(1)
    sample = rng.normal(5, 2, 500)
    grid = np.linspace(-5, 15, 400)
    dens = gaussian_kde_grid(sample, grid)
    assert np.trapezoid(dens, grid) == pytest.approx(1.0, abs=0.01)
