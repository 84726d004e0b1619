"""Pattern-retention and statistical-fidelity metrics between original and
synthetic data, plus whole-scheme evaluation reports."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import stats as _stats

from .charts import BAR, CLUSTER, CORRELATION, LINE, ORDER, SCATTER, ChartSpec, render_chart_data
from .data import CATEGORICAL, NUMERICAL, Dataset


class MetricError(ValueError):
    """Inputs a metric cannot be computed on."""


def wasserstein_1d(a, b) -> float:
    """W1 between the empirical distributions of two samples via the quantile
    coupling: integrate |F_a^-1 - F_b^-1| over the merged quantile breaks."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise MetricError("wasserstein_1d needs non-empty samples")
    if a.size == b.size:
        return float(np.mean(np.abs(a - b)))
    qs = np.union1d(np.arange(1, a.size) / a.size, np.arange(1, b.size) / b.size)
    qs = np.concatenate([[0.0], qs, [1.0]])
    widths = np.diff(qs)
    mids = (qs[:-1] + qs[1:]) / 2.0
    qa = a[np.minimum((mids * a.size).astype(int), a.size - 1)]
    qb = b[np.minimum((mids * b.size).astype(int), b.size - 1)]
    return float(np.sum(widths * np.abs(qa - qb)))


def cluster_metric(before, after, x_width: float, y_width: float) -> float:
    """Scatter drift: per-axis W1 between all chart points, each axis first
    normalized by its attribute's domain width, then summed."""
    for cd in (before, after):
        if cd.xs is None or cd.xs.size == 0:
            raise MetricError("cluster_metric needs non-empty scatter data")
    if x_width <= 0 or y_width <= 0:
        raise MetricError("cluster_metric needs positive domain widths")
    wx = wasserstein_1d(before.xs / x_width, after.xs / x_width)
    wy = wasserstein_1d(before.ys / y_width, after.ys / y_width)
    return wx + wy


def pearson_correlation(xs, ys) -> float:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 2:
        raise MetricError("undefined correlation: fewer than 2 points")
    sx, sy = xs.std(), ys.std()
    if sx == 0 or sy == 0:
        raise MetricError("undefined correlation: zero variance")
    return float(np.mean((xs - xs.mean()) * (ys - ys.mean())) / (sx * sy))


def pearson_diff(before_xy: tuple, after_xy: tuple) -> float:
    """|rho_before - rho_after| in [0, 2] over the points in the selected interval."""
    rho_b = pearson_correlation(*before_xy)
    rho_a = pearson_correlation(*after_xy)
    return abs(rho_b - rho_a)


def dtw(a, b) -> float:
    """Classic dynamic-time-warping distance: |a_i - b_j| local cost, no
    window, boundary-matched path."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise MetricError("dtw needs non-empty series")
    n, m = a.size, b.size
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    cost = np.abs(a[:, None] - b[None, :])
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            acc[i, j] = cost[i - 1, j - 1] + min(acc[i - 1, j], acc[i, j - 1], acc[i - 1, j - 1])
    return float(acc[n, m])


def ndcg(original: Mapping, synthetic: Mapping) -> float:
    """Rank quality of the synthetic bar ordering against original values.

    Relevance = original values (shifted so the minimum is 0 when negatives
    are present); predicted order = synthetic values descending, ties broken
    by bar key; discount 1/log2(rank+1) over the full list. Directional: the
    original is the reference.
    """
    if set(original) != set(synthetic):
        raise MetricError("ndcg needs the same bar key set on both sides")
    if len(original) == 0:
        raise MetricError("ndcg needs at least one bar")
    keys = sorted(original)
    rel = np.array([float(original[k]) for k in keys])
    if rel.min() < 0:
        rel = rel - rel.min()
    if len(keys) == 1:
        return 1.0
    synth = np.array([float(synthetic[k]) for k in keys])
    predicted = sorted(range(len(keys)), key=lambda i: (-synth[i], keys[i]))
    discounts = 1.0 / np.log2(np.arange(2, len(keys) + 2))
    dcg = float(np.sum(rel[predicted] * discounts))
    ideal = np.sort(rel)[::-1]
    idcg = float(np.sum(ideal * discounts))
    return dcg / idcg if idcg > 0 else 1.0


def euclidean_bars(before: Mapping, after: Mapping) -> float:
    """L2 distance between bar-value vectors aligned on their shared key order."""
    if set(before) != set(after):
        raise MetricError("euclidean_bars needs the same bar key set on both sides")
    keys = sorted(before)
    a = np.array([float(before[k]) for k in keys])
    b = np.array([float(after[k]) for k in keys])
    return float(np.linalg.norm(a - b))


def ks_statistic(before, after) -> float:
    """Kolmogorov-Smirnov D: sup distance between the two empirical CDFs."""
    a = np.sort(np.asarray(before, dtype=float))
    b = np.sort(np.asarray(after, dtype=float))
    if a.size == 0 or b.size == 0:
        raise MetricError("ks_statistic needs non-empty samples")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def cs_pvalue(before, after) -> float:
    """Chi-square goodness-of-fit p-value of the synthetic category counts
    against expected counts scaled from the original frequencies. Categories
    the original never saw are merged into an "other" bucket; fewer than two
    categories after merging yields p = 1.
    """
    before = list(before)
    after = list(after)
    if len(before) == 0 or len(after) == 0:
        raise MetricError("cs_pvalue needs non-empty columns")
    base_counts: dict = {}
    for v in before:
        base_counts[v] = base_counts.get(v, 0) + 1
    observed: dict = {}
    other = 0
    for v in after:
        if v in base_counts:
            observed[v] = observed.get(v, 0) + 1
        else:
            other += 1
    cats = sorted(base_counts, key=lambda c: str(c))
    n_after = len(after)
    expected = np.array([base_counts[c] / len(before) * n_after for c in cats])
    obs = np.array([observed.get(c, 0) for c in cats], dtype=float)
    if other:
        # synthetic-only values have expected count 0; fold them into "other"
        expected = np.append(expected, 0.0)
        obs = np.append(obs, float(other))
    keep = expected > 0
    dropped = float(obs[~keep].sum())
    expected, obs = expected[keep], obs[keep]
    if dropped:
        obs = np.append(obs, dropped)  # compare the impossible mass against ~0
        expected = np.append(expected, 1e-9)
    if expected.size < 2:
        return 1.0
    chi2 = float(np.sum((obs - expected) ** 2 / expected))
    dof = expected.size - 1
    return float(_stats.chi2.sf(chi2, dof))


# ---------------------------------------------------------------------------
# Scheme evaluation
# ---------------------------------------------------------------------------


@dataclass
class MetricsReport:
    """Per-attribute fidelity and per-pattern retention for one scheme.

    ks_convention flags that attribute fidelity stores both the raw KS D and
    1 - D (shown so that higher is uniformly better in ranking lists).
    """

    scheme_id: str
    attributes: list = field(default_factory=list)
    patterns: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    ks_convention: str = "both raw D and fidelity 1-D are stored"

    def to_json(self) -> dict:
        return {
            "v": 1,
            "scheme": self.scheme_id,
            "ks_convention": self.ks_convention,
            "attributes": self.attributes,
            "patterns": self.patterns,
            "summary": self.summary,
        }

    def to_csv_rows(self) -> list[dict]:
        rows = []
        for a in self.attributes:
            rows.append(
                {
                    "scheme": self.scheme_id,
                    "kind": "attribute",
                    "target": a["attribute"],
                    "metric": a["metric"],
                    "value": a["value"],
                }
            )
        for p in self.patterns:
            for m in p.get("metrics", []):
                rows.append(
                    {
                        "scheme": self.scheme_id,
                        "kind": "pattern",
                        "target": p["pattern"],
                        "metric": m["metric"],
                        "value": m["after"],
                    }
                )
        return rows


def _grouped_values(cd) -> dict:
    return {k: float(v) for k, v in zip(cd.keys, cd.values)}


def _aligned_after(before: Mapping, after: Mapping) -> tuple[dict, bool]:
    """Align the synthetic series to the original keys; absent groups -> 0."""
    filled = {k: float(after.get(k, 0.0)) for k in before}
    return filled, any(k not in after for k in before)


def evaluate_scheme(
    ds: Dataset,
    scheme,
    patterns: Sequence,
    chart_specs: Sequence[ChartSpec],
) -> MetricsReport:
    """Score a scheme's synthetic data against the source.

    Numerical attributes get the KS statistic (and 1-D fidelity), categorical
    ones the chi-square p-value. Each pattern gets its type's metrics:
    cluster -> per-axis W1 over ALL chart points; correlation -> Pearson
    difference and DTW over the aggregated series inside the selected
    interval; order -> NDCG and Euclidean distance over the selected bars.
    """
    synthetic = scheme.synthetic
    report = MetricsReport(scheme_id=scheme.id)
    for attr in ds.schema:
        col_b, col_a = ds.column(attr.name), synthetic.column(attr.name)
        if attr.kind == NUMERICAL:
            d_stat = ks_statistic(col_b, col_a)
            report.attributes.append(
                {
                    "attribute": attr.name,
                    "metric": "ks",
                    "value": d_stat,
                    "fidelity": 1.0 - d_stat,
                }
            )
        else:
            p = cs_pvalue(col_b, col_a)
            report.attributes.append(
                {"attribute": attr.name, "metric": "cs_pvalue", "value": p, "fidelity": p}
            )

    specs = {c.id: c for c in chart_specs}
    for pattern in patterns:
        entry: dict = {"pattern": pattern.id, "pattern_type": pattern.pattern_type, "metrics": []}
        spec = specs.get(pattern.chart_id)
        if spec is None:
            entry["error"] = f"chart {pattern.chart_id!r} missing"
            report.patterns.append(entry)
            continue
        try:
            entry["metrics"] = _pattern_metrics(ds, synthetic, pattern, spec)
        except MetricError as exc:
            entry["error"] = str(exc)
        report.patterns.append(entry)

    fidelities = [a["fidelity"] for a in report.attributes]
    deltas = [
        m["delta"] for p in report.patterns for m in p.get("metrics", []) if "delta" in m
    ]
    report.summary = {
        "mean_attribute_fidelity": float(np.mean(fidelities)) if fidelities else None,
        "mean_pattern_delta": float(np.mean(np.abs(deltas))) if deltas else None,
        "n_patterns": len(report.patterns),
    }
    return report


def _pattern_metrics(ds, synthetic, pattern, spec) -> list[dict]:
    out = []
    if pattern.pattern_type == CLUSTER:
        before = render_chart_data(ds, spec)
        after = render_chart_data(synthetic, spec)
        value = cluster_metric(
            before, after, ds.attribute(spec.x).width, ds.attribute(spec.y).width
        )
        out.append({"metric": "cluster_w1", "before": 0.0, "after": value, "delta": value})
        return out
    if pattern.pattern_type == CORRELATION:
        lo, hi = pattern.selection.interval
        series_b = _interval_series(ds, spec, lo, hi)
        series_a_raw = _interval_series(synthetic, spec, lo, hi)
        if not series_b:
            raise MetricError("no original data in the selected interval")
        series_a, filled = _aligned_after(series_b, series_a_raw)
        keys = sorted(series_b)
        xb = np.array(keys, dtype=float)
        yb = np.array([series_b[k] for k in keys])
        ya = np.array([series_a[k] for k in keys])
        entry_extra = {"filled_groups": True} if filled else {}
        try:
            rho_b = pearson_correlation(xb, yb)
            rho_a = pearson_correlation(xb, ya)
            out.append(
                {
                    "metric": "pearson_diff",
                    "before": rho_b,
                    "after": rho_a,
                    "delta": abs(rho_b - rho_a),
                    **entry_extra,
                }
            )
        except MetricError as exc:
            out.append({"metric": "pearson_diff", "error": str(exc)})
        d = dtw(yb, ya)
        out.append({"metric": "dtw", "before": 0.0, "after": d, "delta": d, **entry_extra})
        return out
    # order
    before_all = _grouped_values(render_chart_data(ds, spec))
    after_all = _grouped_values(render_chart_data(synthetic, spec))
    bars = [b for b in pattern.selection.bars if b in before_all]
    if not bars:
        raise MetricError("selected bars have no original data")
    before = {k: before_all[k] for k in bars}
    after, filled = _aligned_after(before, after_all)
    extra = {"filled_groups": True} if filled else {}
    score = ndcg(before, after)
    out.append({"metric": "ndcg", "before": 1.0, "after": score, "delta": 1.0 - score, **extra})
    dist = euclidean_bars(before, after)
    out.append({"metric": "euclidean", "before": 0.0, "after": dist, "delta": dist, **extra})
    return out


def _interval_series(ds, spec, lo, hi) -> dict:
    cd = render_chart_data(ds, spec)
    return {float(k): float(v) for k, v in zip(cd.keys, cd.values) if lo <= float(k) <= hi}
