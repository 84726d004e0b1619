"""Tabular data model: typed attributes, immutable datasets, filtering, discretization."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

CATEGORICAL = "categorical"
NUMERICAL = "numerical"

DEFAULT_MAX_BINS = 8
_KMEANS_MAX_ITER = 100


class DataError(ValueError):
    """Malformed input data or a schema/domain violation."""


@dataclass(frozen=True)
class Attribute:
    """One column: a name, a kind, and its value domain.

    Categorical domains are ordered, duplicate-free value lists; numerical
    domains are closed intervals (min, max).
    """

    name: str
    kind: str
    domain: tuple

    def __post_init__(self) -> None:
        if self.kind == CATEGORICAL:
            if len(self.domain) == 0:
                raise DataError(f"categorical attribute {self.name!r} has an empty domain")
            if len(set(self.domain)) != len(self.domain):
                raise DataError(f"categorical attribute {self.name!r} has duplicate domain values")
        elif self.kind == NUMERICAL:
            if len(self.domain) != 2:
                raise DataError(f"numerical attribute {self.name!r} needs a (min, max) domain")
            lo, hi = self.domain
            if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
                raise DataError(f"numerical attribute {self.name!r} needs finite min <= max")
        else:
            raise DataError(f"unknown attribute kind {self.kind!r}")

    @property
    def width(self) -> float:
        """Domain width for numerical attributes (0 for a point domain)."""
        if self.kind != NUMERICAL:
            raise DataError(f"{self.name!r} is not numerical")
        return float(self.domain[1] - self.domain[0])

    def to_json(self) -> dict:
        return {"name": self.name, "type": self.kind, "domain": list(self.domain)}

    @classmethod
    def from_json(cls, obj: Mapping) -> "Attribute":
        return cls(name=obj["name"], kind=obj["type"], domain=tuple(obj["domain"]))


class Dataset:
    """Immutable multidimensional table: an ordered schema plus n rows.

    Columns are held as numpy arrays (float64 for numerical, object for
    categorical); every cell is validated against its attribute's domain at
    construction time. Instances are safe to share across threads.
    """

    def __init__(self, schema: Sequence[Attribute], records: Iterable[Sequence]) -> None:
        schema = tuple(schema)
        if len(schema) == 0:
            raise DataError("a dataset needs at least one attribute")
        names = [a.name for a in schema]
        if len(set(names)) != len(names):
            raise DataError("duplicate attribute names in schema")
        rows = [tuple(r) for r in records]
        for i, row in enumerate(rows):
            if len(row) != len(schema):
                raise DataError(f"row {i} has {len(row)} values, schema has {len(schema)}")
        columns = []
        for j, attr in enumerate(schema):
            cells = [row[j] for row in rows]
            columns.append(_validate_column(attr, cells))
        self._schema = schema
        self._columns = tuple(columns)
        self._index = {a.name: j for j, a in enumerate(schema)}

    @classmethod
    def from_columns(cls, schema: Sequence[Attribute], columns: Sequence[np.ndarray]) -> "Dataset":
        ds = cls.__new__(cls)
        schema = tuple(schema)
        cols = []
        for attr, col in zip(schema, columns):
            cols.append(_validate_column(attr, list(col)))
        ds._schema = schema
        ds._columns = tuple(cols)
        ds._index = {a.name: j for j, a in enumerate(schema)}
        return ds

    @property
    def schema(self) -> tuple[Attribute, ...]:
        return self._schema

    @property
    def n(self) -> int:
        return len(self._columns[0]) if self._columns else 0

    @property
    def d(self) -> int:
        return len(self._schema)

    @property
    def records(self) -> list[tuple]:
        cols = [c.tolist() for c in self._columns]
        return list(zip(*cols)) if self.n else []

    def attribute(self, name: str) -> Attribute:
        try:
            return self._schema[self._index[name]]
        except KeyError:
            raise DataError(f"unknown attribute {name!r}") from None

    def column(self, name: str) -> np.ndarray:
        try:
            return self._columns[self._index[name]]
        except KeyError:
            raise DataError(f"unknown attribute {name!r}") from None

    def take(self, indices: np.ndarray) -> "Dataset":
        """Row subset with the same schema (used by filtering)."""
        ds = Dataset.__new__(Dataset)
        ds._schema = self._schema
        ds._columns = tuple(c[indices] for c in self._columns)
        for c in ds._columns:
            c.setflags(write=False)
        ds._index = self._index
        return ds

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self._schema == other._schema and all(
            np.array_equal(a, b) for a, b in zip(self._columns, other._columns)
        )


def _validate_column(attr: Attribute, cells: list) -> np.ndarray:
    if attr.kind == NUMERICAL:
        try:
            arr = np.asarray(cells, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise DataError(f"non-numeric value in numerical column {attr.name!r}: {exc}") from None
        if arr.size and not np.all(np.isfinite(arr)):
            raise DataError(f"non-finite value in numerical column {attr.name!r}")
        lo, hi = attr.domain
        if arr.size and (arr.min() < lo or arr.max() > hi):
            raise DataError(f"value outside domain [{lo}, {hi}] in column {attr.name!r}")
    else:
        arr = np.asarray(cells, dtype=object)
        allowed = set(attr.domain)
        for v in cells:
            if v not in allowed:
                raise DataError(f"value {v!r} outside domain of column {attr.name!r}")
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------


def infer_schema(header: Sequence[str], rows: Sequence[Sequence[str]]) -> list[Attribute]:
    """Infer per-column types from raw string cells.

    A column is numerical iff every non-empty cell parses as a finite real;
    its domain is [observed min, observed max]. Anything else is categorical
    with a sorted distinct-value domain (the empty string is a legal value).
    """
    if len(header) == 0:
        raise DataError("zero columns")
    schema = []
    for j, name in enumerate(header):
        cells = [row[j] for row in rows]
        non_empty = [c for c in cells if c != ""]
        parsed = _try_parse_floats(non_empty)
        if parsed is not None and non_empty:
            schema.append(Attribute(name, NUMERICAL, (float(min(parsed)), float(max(parsed)))))
        else:
            values = tuple(sorted(set(cells))) if cells else ("",)
            schema.append(Attribute(name, CATEGORICAL, values if values else ("",)))
    return schema


def _try_parse_floats(cells: list[str]) -> list[float] | None:
    out = []
    for c in cells:
        try:
            v = float(c)
        except ValueError:
            return None
        if not np.isfinite(v):
            return None
        out.append(v)
    return out


def load_csv(data: bytes | str, schema: Sequence[Attribute | Mapping] | None = None) -> Dataset:
    """Parse UTF-8 CSV text (header row mandatory) into a Dataset.

    With no schema, types are inferred via infer_schema. Schema entries may
    be Attribute objects or JSON-style descriptors {name, type, domain?};
    a descriptor without a domain gets the observed one. Malformed rows and
    out-of-domain values raise DataError with a 1-based line number (the
    header is line 1). Missing numerical cells are rejected, not imputed.
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty input: header row is mandatory") from None
    if len(header) == 0:
        raise DataError("zero columns")
    raw_rows = []
    for lineno, row in enumerate(reader, start=2):
        if len(row) == 0:
            continue  # ignore blank trailing lines
        if len(row) != len(header):
            raise DataError(f"line {lineno}: expected {len(header)} values, got {len(row)}")
        raw_rows.append(row)

    if schema is None:
        schema = infer_schema(header, raw_rows)
    else:
        schema = [_resolve_descriptor(entry, header, raw_rows) for entry in schema]
        by_name = {a.name: a for a in schema}
        if set(by_name) != set(header) or len(schema) != len(header):
            raise DataError("schema does not match CSV header")
        schema = [by_name[h] for h in header]

    records = []
    for lineno, row in enumerate(raw_rows, start=2):
        parsed_row = []
        for attr, cell in zip(schema, row):
            if attr.kind == NUMERICAL:
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(
                        f"line {lineno}: {cell!r} is not a number for column {attr.name!r}"
                    ) from None
                parsed_row.append(v)
            else:
                parsed_row.append(cell)
        records.append(tuple(parsed_row))
    try:
        return Dataset(schema, records)
    except DataError as exc:
        raise DataError(str(exc)) from None


def _resolve_descriptor(entry, header: Sequence[str], rows: Sequence[Sequence[str]]) -> Attribute:
    """An Attribute as-is, or a {name, type, domain?} descriptor with the
    domain filled in from the observed data when omitted."""
    if isinstance(entry, Attribute):
        return entry
    name = entry["name"]
    kind = entry["type"]
    if entry.get("domain") is not None:
        return Attribute(name, kind, tuple(entry["domain"]))
    if name not in header:
        raise DataError(f"schema names unknown column {name!r}")
    cells = [row[header.index(name)] for row in rows]
    if kind == NUMERICAL:
        parsed = _try_parse_floats(cells)
        if parsed is None:
            raise DataError(f"column {name!r} declared numerical but has non-numeric cells")
        if not parsed:
            raise DataError(f"cannot infer a numerical domain for empty column {name!r}")
        return Attribute(name, NUMERICAL, (float(min(parsed)), float(max(parsed))))
    return Attribute(name, CATEGORICAL, tuple(sorted(set(cells))) if cells else ("",))


def to_csv(ds: Dataset) -> str:
    """Serialize a Dataset to CSV text that round-trips through load_csv."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([a.name for a in ds.schema])
    kinds = [a.kind for a in ds.schema]
    for row in ds.records:
        writer.writerow(
            [repr(v) if kind == NUMERICAL else v for v, kind in zip(row, kinds)]
        )
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Filtering
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FilterSpec:
    """Per-attribute row predicates: value subsets for categorical columns,
    closed sub-intervals for numerical ones. Empty spec = keep everything."""

    values: Mapping[str, frozenset] = field(default_factory=dict)
    intervals: Mapping[str, tuple[float, float]] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "values": {k: sorted(v) for k, v in self.values.items()},
            "intervals": {k: list(v) for k, v in self.intervals.items()},
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "FilterSpec":
        return cls(
            values={k: frozenset(v) for k, v in obj.get("values", {}).items()},
            intervals={k: (float(v[0]), float(v[1])) for k, v in obj.get("intervals", {}).items()},
        )


def apply_filter(ds: Dataset, spec: FilterSpec) -> Dataset:
    """Keep rows satisfying all predicates; schema is unchanged."""
    mask = np.ones(ds.n, dtype=bool)
    for name, allowed in spec.values.items():
        attr = ds.attribute(name)
        if attr.kind != CATEGORICAL:
            raise DataError(f"value filter on non-categorical attribute {name!r}")
        col = ds.column(name)
        mask &= np.array([v in allowed for v in col], dtype=bool)
    for name, (lo, hi) in spec.intervals.items():
        attr = ds.attribute(name)
        if attr.kind != NUMERICAL:
            raise DataError(f"interval filter on non-numerical attribute {name!r}")
        col = ds.column(name)
        mask &= (col >= lo) & (col <= hi)
    return ds.take(np.flatnonzero(mask))


# ---------------------------------------------------------------------------
# Discretization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Discretization:
    """Bins for one attribute.

    Numerical: m+1 strictly increasing edges covering the domain exactly
    (outer edges are the domain bounds). Categorical: the identity mapping
    of the attribute's domain values.
    """

    attribute: str
    kind: str
    edges: tuple[float, ...] = ()
    values: tuple = ()

    def __post_init__(self) -> None:
        if self.kind == NUMERICAL:
            e = np.asarray(self.edges, dtype=float)
            if e.size < 2 or np.any(np.diff(e) <= 0):
                raise DataError(f"edges for {self.attribute!r} must be strictly increasing")
        elif self.kind == CATEGORICAL:
            if len(self.values) == 0:
                raise DataError(f"no bin values for {self.attribute!r}")
        else:
            raise DataError(f"unknown kind {self.kind!r}")

    @property
    def n_bins(self) -> int:
        return len(self.edges) - 1 if self.kind == NUMERICAL else len(self.values)

    def codes(self, column: np.ndarray) -> np.ndarray:
        """Map raw values to bin indices; every domain value maps to exactly one bin."""
        if self.kind == NUMERICAL:
            inner = np.asarray(self.edges[1:-1], dtype=float)
            idx = np.searchsorted(inner, column, side="right")
            return np.clip(idx, 0, self.n_bins - 1).astype(np.int64)
        lookup = {v: i for i, v in enumerate(self.values)}
        return np.array([lookup[v] for v in column], dtype=np.int64)

    def bin_bounds(self, i: int) -> tuple[float, float]:
        if self.kind != NUMERICAL:
            raise DataError(f"{self.attribute!r} has categorical bins")
        return (self.edges[i], self.edges[i + 1])

    def bin_label(self, i: int):
        if self.kind == NUMERICAL:
            lo, hi = self.bin_bounds(i)
            return f"[{lo:g}, {hi:g}{']' if i == self.n_bins - 1 else ')'}"
        return self.values[i]

    def to_json(self) -> dict:
        if self.kind == NUMERICAL:
            return {"attribute": self.attribute, "kind": self.kind, "edges": list(self.edges)}
        return {"attribute": self.attribute, "kind": self.kind, "values": list(self.values)}

    @classmethod
    def from_json(cls, obj: Mapping) -> "Discretization":
        if obj["kind"] == NUMERICAL:
            return cls(obj["attribute"], NUMERICAL, edges=tuple(obj["edges"]))
        return cls(obj["attribute"], CATEGORICAL, values=tuple(obj["values"]))


def _kmeans_1d(values: np.ndarray, k: int) -> tuple[np.ndarray, float]:
    """Deterministic 1-D k-means: centroid i seeded at quantile (i+0.5)/k.

    Returns (sorted centroids, within-cluster SSE). Empty clusters keep their
    previous centroid so the run stays deterministic.
    """
    centroids = np.quantile(values, [(i + 0.5) / k for i in range(k)])
    for _ in range(_KMEANS_MAX_ITER):
        assign = np.argmin(np.abs(values[:, None] - centroids[None, :]), axis=1)
        new = centroids.copy()
        for i in range(k):
            members = values[assign == i]
            if members.size:
                new[i] = members.mean()
        new = np.sort(new)
        if np.allclose(new, centroids, rtol=0, atol=1e-12):
            centroids = new
            break
        centroids = new
    assign = np.argmin(np.abs(values[:, None] - centroids[None, :]), axis=1)
    sse = float(np.sum((values - centroids[assign]) ** 2))
    return centroids, sse


def kmeans_sse_curve(values: np.ndarray, max_k: int) -> list[float]:
    """Within-cluster SSE for k = 1..min(max_k, #distinct values)."""
    kmax = min(max_k, len(np.unique(values)))
    return [_kmeans_1d(values, k)[1] for k in range(1, kmax + 1)]


def choose_elbow_k(sse: Sequence[float], distinct: int) -> int:
    """Pick k by the elbow rule: argmax of the SSE second difference.

    Candidates are k in [2, len(sse)-1] (second differences need both
    neighbours); ties go to the smaller k. If no candidate exists or every
    second difference is <= 0, fall back to min(2, distinct).
    """
    best_k, best_curv = None, 0.0
    for k in range(2, len(sse)):
        curv = sse[k - 2] - 2.0 * sse[k - 1] + sse[k]
        if curv > best_curv:
            best_k, best_curv = k, curv
    if best_k is None:
        return min(2, distinct)
    return best_k


def discretize(ds: Dataset, attr: str, max_k: int = DEFAULT_MAX_BINS) -> Discretization:
    """Bin one attribute: categorical identity bins, or numerical k-means
    bins with k chosen by the elbow rule over the SSE curve.

    Numerical bin edges are midpoints between adjacent cluster centroids;
    the outer edges are the attribute's domain bounds.
    """
    attribute = ds.attribute(attr)
    if max_k < 1:
        raise DataError("max_k must be >= 1")
    if attribute.kind == CATEGORICAL:
        return Discretization(attr, CATEGORICAL, values=tuple(attribute.domain))
    values = ds.column(attr)
    if values.size == 0:
        raise DataError(f"cannot discretize {attr!r}: no rows")
    lo, hi = attribute.domain
    distinct = len(np.unique(values))
    if distinct == 1 or max_k == 1:
        edge_hi = hi if hi > lo else lo + 1.0  # degenerate point domain still needs a bin
        return Discretization(attr, NUMERICAL, edges=(float(lo), float(edge_hi)))
    sse = kmeans_sse_curve(values, max_k)
    k = choose_elbow_k(sse, distinct)
    centroids, _ = _kmeans_1d(values, k)
    centroids = np.unique(centroids)
    if centroids.size == 1:
        return Discretization(attr, NUMERICAL, edges=(float(lo), float(hi if hi > lo else lo + 1.0)))
    mids = (centroids[:-1] + centroids[1:]) / 2.0
    edges = [float(lo)] + [float(m) for m in mids if lo < m < hi] + [float(hi)]
    edges = sorted(set(edges))
    if len(edges) < 2:
        edges = [float(lo), float(hi)]
    return Discretization(attr, NUMERICAL, edges=tuple(edges))


def discretize_all(
    ds: Dataset, max_k: int = DEFAULT_MAX_BINS
) -> dict[str, Discretization]:
    """Discretization map for every attribute in the schema."""
    return {a.name: discretize(ds, a.name, max_k) for a in ds.schema}
