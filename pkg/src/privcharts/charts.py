"""Chart specifications, chart-ready data, and interactive-selection resolution
into pattern constraints (weighted record subsets)."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .data import CATEGORICAL, NUMERICAL, DataError, Dataset

SCATTER = "scatter"
LINE = "line"
BAR = "bar"

CLUSTER = "cluster"
CORRELATION = "correlation"
ORDER = "order"

# pattern type implied by the chart it was brushed on
PATTERN_FOR_CHART = {SCATTER: CLUSTER, LINE: CORRELATION, BAR: ORDER}
SELECTION_FOR_CHART = {SCATTER: "region", LINE: "interval", BAR: "bars"}

AGGREGATES = ("count", "mean", "sum")


class ChartError(ValueError):
    """Invalid chart configuration or selection."""


@dataclass(frozen=True)
class ChartSpec:
    id: str
    chart_type: str
    x: str
    y: str | None = None
    color: str | None = None
    x_step: float | None = None
    aggregate: str = "count"

    def validate(self, schema: Sequence) -> None:
        attrs = {a.name: a for a in schema}
        if self.chart_type not in (SCATTER, LINE, BAR):
            raise ChartError(f"unknown chart type {self.chart_type!r}")
        if self.x not in attrs:
            raise ChartError(f"unknown x attribute {self.x!r}")
        if self.chart_type == SCATTER:
            if self.y is None or self.y not in attrs:
                raise ChartError("scatter needs a y attribute")
            if attrs[self.x].kind != NUMERICAL or attrs[self.y].kind != NUMERICAL:
                raise ChartError("scatter requires numerical x and y")
            if self.color is not None:
                if self.color not in attrs or attrs[self.color].kind != CATEGORICAL:
                    raise ChartError("color must be a categorical attribute")
            return
        # line / bar
        if self.color is not None:
            raise ChartError("color encoding is only supported on scatter charts")
        if attrs[self.x].kind == NUMERICAL:
            if self.x_step is None or self.x_step <= 0:
                raise ChartError(f"{self.chart_type} on numerical x needs a positive x_step")
        if self.aggregate not in AGGREGATES:
            raise ChartError(f"unknown aggregate {self.aggregate!r}")
        if self.aggregate != "count":
            if self.y is None or self.y not in attrs or attrs[self.y].kind != NUMERICAL:
                raise ChartError(f"aggregate {self.aggregate!r} needs a numerical y attribute")

    def to_json(self) -> dict:
        return {
            "v": 1,
            "id": self.id,
            "chart_type": self.chart_type,
            "x": self.x,
            "y": self.y,
            "color": self.color,
            "x_step": self.x_step,
            "aggregate": self.aggregate,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "ChartSpec":
        return cls(
            id=obj.get("id", ""),
            chart_type=obj["chart_type"],
            x=obj["x"],
            y=obj.get("y"),
            color=obj.get("color"),
            x_step=obj.get("x_step"),
            aggregate=obj.get("aggregate", "count"),
        )


@dataclass(frozen=True)
class ChartData:
    """Chart-ready values plus row provenance.

    Scatter: parallel xs/ys (+ colors) arrays with the contributing row index
    per point. Line/bar: one group per x bin or category with the aggregated
    y value and the contributing rows.
    """

    spec_id: str
    chart_type: str
    # scatter
    xs: np.ndarray | None = None
    ys: np.ndarray | None = None
    colors: tuple | None = None
    rows: np.ndarray | None = None
    # line / bar
    keys: tuple = ()
    values: np.ndarray | None = None
    group_rows: tuple = ()

    def to_json(self) -> dict:
        """Declarative chart description: marks + encodings + inline data."""
        if self.chart_type == SCATTER:
            data = [
                {"x": float(x), "y": float(y), "row": int(r)}
                for x, y, r in zip(self.xs, self.ys, self.rows)
            ]
            if self.colors is not None:
                for item, c in zip(data, self.colors):
                    item["color"] = c
            encoding = {"x": "x", "y": "y"} | ({"color": "color"} if self.colors else {})
            return {"v": 1, "spec": self.spec_id, "mark": "point", "encoding": encoding, "data": data}
        mark = "line" if self.chart_type == LINE else "bar"
        data = [
            {"x": key if isinstance(key, str) else float(key), "y": float(v), "rows": len(rows)}
            for key, v, rows in zip(self.keys, self.values, self.group_rows)
        ]
        return {"v": 1, "spec": self.spec_id, "mark": mark, "encoding": {"x": "x", "y": "y"}, "data": data}


def render_chart_data(ds: Dataset, spec: ChartSpec) -> ChartData:
    """Produce chart-ready data: point passthrough for scatter, grouped
    aggregation (keyed by category or by x_step bins anchored at the domain
    minimum) for line and bar charts."""
    spec.validate(ds.schema)
    if spec.chart_type == SCATTER:
        return ChartData(
            spec_id=spec.id,
            chart_type=SCATTER,
            xs=ds.column(spec.x),
            ys=ds.column(spec.y),
            colors=tuple(ds.column(spec.color)) if spec.color else None,
            rows=np.arange(ds.n),
        )
    keys = group_keys(ds, spec)
    groups: dict = {}
    for i, key in enumerate(keys):
        groups.setdefault(key, []).append(i)
    y = ds.column(spec.y) if spec.aggregate != "count" else None
    out_keys, out_values, out_rows = [], [], []
    for key in sorted(groups):
        rows = np.array(groups[key], dtype=np.int64)
        if spec.aggregate == "count":
            value = float(rows.size)
        elif spec.aggregate == "sum":
            value = float(y[rows].sum())
        else:
            value = float(y[rows].mean())
        out_keys.append(key)
        out_values.append(value)
        out_rows.append(rows)
    return ChartData(
        spec_id=spec.id,
        chart_type=spec.chart_type,
        keys=tuple(out_keys),
        values=np.array(out_values),
        group_rows=tuple(out_rows),
    )


def group_keys(ds: Dataset, spec: ChartSpec) -> list:
    """Per-row group key for line/bar charts: the category itself, or the
    bin start value for numerical x binned at x_step from the domain min."""
    attr = ds.attribute(spec.x)
    col = ds.column(spec.x)
    if attr.kind == CATEGORICAL:
        return list(col)
    lo = attr.domain[0]
    idx = np.floor((col - lo) / spec.x_step).astype(np.int64)
    return [float(lo + i * spec.x_step) for i in idx]


# ---------------------------------------------------------------------------
# Selections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Selection:
    """A brushed chart region in data coordinates.

    kind "region" carries a rectangle (x0, y0, x1, y1) or a polygon vertex
    list; "interval" carries [lo, hi] on x; "bars" carries the clicked group
    keys.
    """

    kind: str
    rect: tuple[float, float, float, float] | None = None
    polygon: tuple[tuple[float, float], ...] | None = None
    interval: tuple[float, float] | None = None
    bars: tuple = ()

    def __post_init__(self) -> None:
        if self.kind == "region":
            if self.rect is None and self.polygon is None:
                raise ChartError("region selection needs a rect or polygon")
            if self.polygon is not None and len(self.polygon) < 3:
                raise ChartError("polygon needs at least 3 vertices")
        elif self.kind == "interval":
            if self.interval is None or self.interval[0] > self.interval[1]:
                raise ChartError("interval needs lo <= hi")
        elif self.kind == "bars":
            if not self.bars:
                raise ChartError("bars selection cannot be empty")
        else:
            raise ChartError(f"unknown selection kind {self.kind!r}")

    def to_json(self) -> dict:
        obj: dict = {"v": 1, "kind": self.kind}
        if self.rect is not None:
            obj["rect"] = list(self.rect)
        if self.polygon is not None:
            obj["polygon"] = [list(v) for v in self.polygon]
        if self.interval is not None:
            obj["interval"] = list(self.interval)
        if self.bars:
            obj["bars"] = list(self.bars)
        return obj

    @classmethod
    def from_json(cls, obj: Mapping) -> "Selection":
        return cls(
            kind=obj["kind"],
            rect=tuple(obj["rect"]) if obj.get("rect") else None,
            polygon=tuple(tuple(v) for v in obj["polygon"]) if obj.get("polygon") else None,
            interval=tuple(obj["interval"]) if obj.get("interval") else None,
            bars=tuple(obj.get("bars", ())),
        )


def _points_in_polygon(xs: np.ndarray, ys: np.ndarray, polygon) -> np.ndarray:
    """Even-odd (crossing parity) test, boundary-inclusive."""
    verts = np.asarray(polygon, dtype=float)
    inside = np.zeros(xs.size, dtype=bool)
    on_edge = np.zeros(xs.size, dtype=bool)
    for i in range(len(verts)):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % len(verts)]
        # boundary: collinear with the edge and within its bounding box
        cross = (bx - ax) * (ys - ay) - (by - ay) * (xs - ax)
        within = (
            (min(ax, bx) - 1e-12 <= xs)
            & (xs <= max(ax, bx) + 1e-12)
            & (min(ay, by) - 1e-12 <= ys)
            & (ys <= max(ay, by) + 1e-12)
        )
        on_edge |= (np.abs(cross) <= 1e-12 * max(1.0, abs(bx - ax) + abs(by - ay))) & within
        if ay != by:  # horizontal edges never cross a horizontal ray
            crosses = ((ay > ys) != (by > ys)) & (
                xs < (bx - ax) * (ys - ay) / (by - ay) + ax
            )
            inside ^= crosses
    return inside | on_edge


def resolve_pattern(ds: Dataset, spec: ChartSpec, sel: Selection) -> np.ndarray:
    """Resolve a selection into the sorted row indices it covers.

    Rectangles and intervals are closed on both ends; polygons use the
    boundary-inclusive even-odd rule; bars match the chart's group keys.
    """
    spec.validate(ds.schema)
    expected = SELECTION_FOR_CHART[spec.chart_type]
    if sel.kind != expected:
        raise ChartError(
            f"selection kind {sel.kind!r} is incompatible with a {spec.chart_type} chart"
        )
    if sel.kind == "region":
        xs, ys = ds.column(spec.x), ds.column(spec.y)
        if sel.rect is not None:
            x0, y0, x1, y1 = sel.rect
            x0, x1 = min(x0, x1), max(x0, x1)
            y0, y1 = min(y0, y1), max(y0, y1)
            mask = (xs >= x0) & (xs <= x1) & (ys >= y0) & (ys <= y1)
        else:
            mask = _points_in_polygon(xs, ys, sel.polygon)
        return np.flatnonzero(mask)
    if sel.kind == "interval":
        if ds.attribute(spec.x).kind != NUMERICAL:
            raise ChartError("interval selection needs a numerical x attribute")
        lo, hi = sel.interval
        xs = ds.column(spec.x)
        return np.flatnonzero((xs >= lo) & (xs <= hi))
    keys = group_keys(ds, spec)
    chosen = set(sel.bars)
    return np.flatnonzero(np.array([key in chosen for key in keys], dtype=bool))


# ---------------------------------------------------------------------------
# Pattern constraints
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PatternConstraint:
    """A typed selection resolved to a record subset, with an importance weight."""

    id: str
    pattern_type: str
    chart_id: str
    selection: Selection
    weight: float
    records: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.weight < 0:
            raise ChartError("pattern weight must be >= 0")

    def to_json(self) -> dict:
        return {
            "v": 1,
            "id": self.id,
            "pattern_type": self.pattern_type,
            "chart": self.chart_id,
            "selection": self.selection.to_json(),
            "weight": self.weight,
            "records": list(self.records),
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "PatternConstraint":
        return cls(
            id=obj["id"],
            pattern_type=obj["pattern_type"],
            chart_id=obj["chart"],
            selection=Selection.from_json(obj["selection"]),
            weight=float(obj["weight"]),
            records=tuple(int(r) for r in obj["records"]),
        )


class PatternCatalog:
    """Single-writer store of saved patterns with monotonically increasing ids."""

    def __init__(self) -> None:
        self._patterns: dict[str, PatternConstraint] = {}
        self._next_id = 0

    def add(
        self, ds: Dataset, spec: ChartSpec, sel: Selection, weight: float
    ) -> PatternConstraint:
        if weight < 0:
            raise ChartError("pattern weight must be >= 0")
        records = resolve_pattern(ds, spec, sel)
        pattern = PatternConstraint(
            id=f"P{self._next_id}",
            pattern_type=PATTERN_FOR_CHART[spec.chart_type],
            chart_id=spec.id,
            selection=sel,
            weight=float(weight),
            records=tuple(int(i) for i in records),
        )
        self._patterns[pattern.id] = pattern
        self._next_id += 1
        return pattern

    def set_weight(self, pattern_id: str, weight: float) -> PatternConstraint:
        if weight < 0:
            raise ChartError("pattern weight must be >= 0")
        updated = replace(self.get(pattern_id), weight=float(weight))
        self._patterns[pattern_id] = updated
        return updated

    def remove(self, pattern_id: str) -> None:
        self.get(pattern_id)
        del self._patterns[pattern_id]

    def get(self, pattern_id: str) -> PatternConstraint:
        try:
            return self._patterns[pattern_id]
        except KeyError:
            raise ChartError(f"unknown pattern {pattern_id!r}") from None

    def list(self) -> list[PatternConstraint]:
        return list(self._patterns.values())

    def __len__(self) -> int:
        return len(self._patterns)
