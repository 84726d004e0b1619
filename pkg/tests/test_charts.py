import numpy as np
import pytest

from privcharts.charts import (
    ChartError,
    ChartSpec,
    PatternCatalog,
    Selection,
    render_chart_data,
    resolve_pattern,
)
from privcharts.data import CATEGORICAL, NUMERICAL, Attribute, Dataset


@pytest.fixture
def ds():
    schema = [
        Attribute("x", NUMERICAL, (0.0, 20.0)),
        Attribute("y", NUMERICAL, (0.0, 10.0)),
        Attribute("kind", CATEGORICAL, ("a", "b")),
    ]
    rows = [
        (1.0, 2.0, "a"),
        (9.0, 4.0, "a"),
        (11.0, 6.0, "b"),
    ]
    return Dataset(schema, rows)


def test_scatter_passthrough(ds):
    spec = ChartSpec(id="c", chart_type="scatter", x="x", y="y")
    cd = render_chart_data(ds, spec)
    assert list(cd.xs) == [1.0, 9.0, 11.0]
    assert list(cd.ys) == [2.0, 4.0, 6.0]
    assert list(cd.rows) == [0, 1, 2]


def test_bar_count_categorical():
    schema = [Attribute("kind", CATEGORICAL, ("a", "b"))]
    ds = Dataset(schema, [("a",), ("a",), ("b",)])
    cd = render_chart_data(ds, ChartSpec(id="c", chart_type="bar", x="kind"))
    assert cd.keys == ("a", "b")
    assert list(cd.values) == [2.0, 1.0]


def test_line_mean_binned(ds):
    spec = ChartSpec(id="c", chart_type="line", x="x", y="y", x_step=10.0, aggregate="mean")
    cd = render_chart_data(ds, spec)
    # bins anchored at domain min 0: [0,10) -> mean(2,4)=3; [10,20) -> 6
    assert cd.keys == (0.0, 10.0)
    assert list(cd.values) == [3.0, 6.0]


def test_aggregation_count_conserves_rows(ds):
    spec = ChartSpec(id="c", chart_type="bar", x="x", x_step=5.0, aggregate="count")
    cd = render_chart_data(ds, spec)
    assert sum(cd.values) == ds.n


def test_chart_validation():
    schema = [
        Attribute("x", NUMERICAL, (0.0, 1.0)),
        Attribute("k", CATEGORICAL, ("a",)),
    ]
    ds = Dataset(schema, [])
    with pytest.raises(ChartError):
        ChartSpec(id="c", chart_type="scatter", x="k", y="x").validate(ds.schema)
    with pytest.raises(ChartError):
        ChartSpec(id="c", chart_type="bar", x="x").validate(ds.schema)  # numerical x needs x_step
    with pytest.raises(ChartError):
        ChartSpec(id="c", chart_type="line", x="k", aggregate="mean").validate(ds.schema)  # mean needs y
    with pytest.raises(ChartError):
        ChartSpec(id="c", chart_type="funnel", x="k").validate(ds.schema)


def test_resolve_rectangle_full_bbox(ds):
    spec = ChartSpec(id="c", chart_type="scatter", x="x", y="y")
    sel = Selection(kind="region", rect=(1.0, 2.0, 11.0, 6.0))
    assert list(resolve_pattern(ds, spec, sel)) == [0, 1, 2]


def test_resolve_interval_empty_allowed(ds):
    spec = ChartSpec(id="c", chart_type="line", x="x", y="y", x_step=10.0, aggregate="mean")
    sel = Selection(kind="interval", interval=(100.0, 120.0))
    assert resolve_pattern(ds, spec, sel).size == 0


def test_resolve_polygon_matches_brute_force():
    rng = np.random.default_rng(0)
    xs = rng.uniform(0, 10, 50)
    ys = rng.uniform(0, 10, 50)
    schema = [Attribute("x", NUMERICAL, (0.0, 10.0)), Attribute("y", NUMERICAL, (0.0, 10.0))]
    ds = Dataset(schema, list(zip(xs, ys)))
    triangle = ((1.0, 1.0), (9.0, 1.0), (5.0, 9.0))
    spec = ChartSpec(id="c", chart_type="scatter", x="x", y="y")
    got = set(resolve_pattern(ds, spec, Selection(kind="region", polygon=triangle)))

    def inside(px, py):  # oracle: brute-force even-odd crossing test
        cnt = 0
        pts = list(triangle)
        for i in range(3):
            ax, ay = pts[i]
            bx, by = pts[(i + 1) % 3]
            if (ay > py) != (by > py):
                if px < (bx - ax) * (py - ay) / (by - ay) + ax:
                    cnt += 1
        return cnt % 2 == 1

    expected = {i for i in range(50) if inside(xs[i], ys[i])}
    assert got == expected


def test_resolve_polygon_triangle_fixture():
    pts = [(2.0, 2.0), (5.0, 3.0), (8.0, 8.0), (0.5, 9.0), (4.0, 1.2)]
    schema = [Attribute("x", NUMERICAL, (0.0, 10.0)), Attribute("y", NUMERICAL, (0.0, 10.0))]
    ds = Dataset(schema, pts)
    triangle = ((1.0, 1.0), (9.0, 1.0), (5.0, 9.0))
    spec = ChartSpec(id="c", chart_type="scatter", x="x", y="y")
    got = set(resolve_pattern(ds, spec, Selection(kind="region", polygon=triangle)))
    assert got == {0, 1, 4}  # interior points only


def test_resolve_bars():
    schema = [Attribute("kind", CATEGORICAL, ("a", "b", "c"))]
    ds = Dataset(schema, [("a",), ("b",), ("c",), ("a",)])
    spec = ChartSpec(id="c", chart_type="bar", x="kind")
    sel = Selection(kind="bars", bars=("a", "c"))
    assert list(resolve_pattern(ds, spec, sel)) == [0, 2, 3]


def test_resolve_incompatible_kind(ds):
    spec = ChartSpec(id="c", chart_type="scatter", x="x", y="y")
    with pytest.raises(ChartError):
        resolve_pattern(ds, spec, Selection(kind="interval", interval=(0.0, 1.0)))


def test_resolve_is_pure(ds):
    spec = ChartSpec(id="c", chart_type="scatter", x="x", y="y")
    sel = Selection(kind="region", rect=(0.0, 0.0, 10.0, 10.0))
    a = resolve_pattern(ds, spec, sel)
    b = resolve_pattern(ds, spec, sel)
    assert np.array_equal(a, b)


def test_selection_invariants():
    with pytest.raises(ChartError):
        Selection(kind="region", polygon=((0, 0), (1, 1)))
    with pytest.raises(ChartError):
        Selection(kind="interval", interval=(2.0, 1.0))
    with pytest.raises(ChartError):
        Selection(kind="bars", bars=())
    with pytest.raises(ChartError):
        Selection(kind="blob")


def test_catalog_ids_and_ops(ds):
    spec = ChartSpec(id="c", chart_type="scatter", x="x", y="y")
    sel = Selection(kind="region", rect=(0.0, 0.0, 20.0, 10.0))
    cat = PatternCatalog()
    p0 = cat.add(ds, spec, sel, 0.5)
    p1 = cat.add(ds, spec, sel, 1.0)
    p2 = cat.add(ds, spec, sel, 0.0)
    assert [p.id for p in (p0, p1, p2)] == ["P0", "P1", "P2"]
    assert p0.pattern_type == "cluster"

    updated = cat.set_weight("P0", 1.0)
    assert updated.weight == 1.0
    assert cat.get("P1").weight == 1.0  # untouched

    cat.remove("P2")
    assert len(cat) == 2
    with pytest.raises(ChartError):
        cat.get("P2")
    with pytest.raises(ChartError):
        cat.set_weight("P0", -1.0)


def test_add_then_remove_restores_size(ds):
    spec = ChartSpec(id="c", chart_type="scatter", x="x", y="y")
    sel = Selection(kind="region", rect=(0.0, 0.0, 20.0, 10.0))
    cat = PatternCatalog()
    before = len(cat)
    p = cat.add(ds, spec, sel, 0.5)
    cat.remove(p.id)
    assert len(cat) == before


def test_pattern_type_pairing_enforced(ds):
    cat = PatternCatalog()
    bar_spec = ChartSpec(id="b", chart_type="bar", x="kind")
    with pytest.raises(ChartError):
        cat.add(ds, bar_spec, Selection(kind="interval", interval=(0.0, 1.0)), 0.1)
    p = cat.add(ds, bar_spec, Selection(kind="bars", bars=("a",)), 0.1)
    assert p.pattern_type == "order"


def test_chart_json_round_trip(ds):
    spec = ChartSpec(id="c1", chart_type="line", x="x", y="y", x_step=5.0, aggregate="sum")
    assert ChartSpec.from_json(spec.to_json()) == spec
    sel = Selection(kind="region", polygon=((0.0, 0.0), (1.0, 0.0), (0.5, 1.0)))
    assert Selection.from_json(sel.to_json()) == sel


def test_chart_data_json(ds):
    spec = ChartSpec(id="c", chart_type="scatter", x="x", y="y", color="kind")
    payload = render_chart_data(ds, spec).to_json()
    assert payload["v"] == 1
    assert payload["mark"] == "point"
    assert payload["data"][0] == {"x": 1.0, "y": 2.0, "row": 0, "color": "a"}
