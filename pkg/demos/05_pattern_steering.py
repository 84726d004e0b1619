"""The weight-vs-utility experiment: paired runs at weight 0 and weight 4.

This is the desk-scale version of the acceptance experiment; it prints the
mean pattern metric for each arm and the paired win rate.

Run:  python3 demos/05_pattern_steering.py   (about a minute)
"""

import numpy as np

from privcharts import generate_scheme, split_budget
from privcharts.charts import PatternCatalog, render_chart_data
from privcharts.data import discretize_all
from privcharts.fixtures import adult_like, adult_like_charts, adult_like_selections
from privcharts.metrics import cluster_metric, dtw, ndcg

ds = adult_like(n=1000)
disc = discretize_all(ds)
charts = adult_like_charts()
sels = adult_like_selections()
budget = split_budget(2.0, 0.5)
seeds = range(777, 802)


def order_metric(scheme):
    before = dict(zip(*(lambda c: (c.keys, c.values))(render_chart_data(ds, charts["order"]))))
    after = dict(zip(*(lambda c: (c.keys, c.values))(render_chart_data(scheme.synthetic, charts["order"]))))
    bars = [b for b in sels["order"].bars if b in before]
    return ndcg({k: before[k] for k in bars}, {k: after.get(k, 0.0) for k in bars})


def corr_metric(scheme):
    lo, hi = sels["correlation"].interval

    def series(d):
        cd = render_chart_data(d, charts["correlation"])
        return {float(k): float(v) for k, v in zip(cd.keys, cd.values) if lo <= float(k) <= hi}

    sb, sa = series(ds), series(scheme.synthetic)
    keys = sorted(sb)
    return dtw(np.array([sb[k] for k in keys]), np.array([sa.get(k, 0.0) for k in keys]))


def cluster_m(scheme):
    return cluster_metric(
        render_chart_data(ds, charts["cluster"]),
        render_chart_data(scheme.synthetic, charts["cluster"]),
        ds.attribute("bmi").width,
        ds.attribute("charges").width,
    )


experiments = {
    "order (NDCG, higher better)": ("order", order_metric, True),
    "correlation (DTW, lower better)": ("correlation", corr_metric, False),
    "cluster (per-axis W1, lower better)": ("cluster", cluster_m, False),
}

for label, (ptype, metric, higher_better) in experiments.items():
    catalog = PatternCatalog()
    pattern = catalog.add(ds, charts[ptype], sels[ptype], 0.0)
    m0, m4 = [], []
    for seed in seeds:
        s0 = generate_scheme(ds, [pattern], {pattern.id: 0.0}, budget, k=1, seed=seed, disc=disc, n_out=2000)
        s4 = generate_scheme(ds, [pattern], {pattern.id: 4.0}, budget, k=1, seed=seed, disc=disc, n_out=2000)
        m0.append(metric(s0))
        m4.append(metric(s4))
    m0, m4 = np.array(m0), np.array(m4)
    wins = np.mean(m4 > m0) if higher_better else np.mean(m4 < m0)
    print(f"{label}")
    print(f"  weight 0: mean={m0.mean():.4f}   weight 4: mean={m4.mean():.4f}   "
          f"weighted wins {wins:.0%} of paired seeds")
