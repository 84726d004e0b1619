"""Private greedy network search, and how per-record weights steer it.

Run:  python3 demos/03_structure_learning.py
"""

import numpy as np

from privcharts import NoiseSource, learn_structure
from privcharts.charts import PatternCatalog
from privcharts.data import discretize_all
from privcharts.engine import mixture_weights
from privcharts.fixtures import adult_like, adult_like_charts, adult_like_selections

ds = adult_like(n=1000)
disc = discretize_all(ds)

# noise-free argmax structure (test-only; NOT differentially private)
net = learn_structure(ds, disc, k=1)
print("oracle-mode tree:")
for pair in net.pairs:
    print(f"  {pair.child:11s} <- {pair.parents}")

# save a pattern (the line-chart interval) and boost it
charts = adult_like_charts()
sels = adult_like_selections()
catalog = PatternCatalog()
pattern = catalog.add(ds, charts["correlation"], sels["correlation"], weight=4.0)
print(f"\npattern {pattern.id}: {len(pattern.records)} records, weight {pattern.weight}")

target = ("age", "spending")
for weight in (0.0, 4.0):
    mw = mixture_weights(ds, [catalog.set_weight(pattern.id, weight)])
    hits = 0
    runs = 40
    for seed in range(777, 777 + runs):
        net = learn_structure(
            ds, disc, weights=mw.values, k=1, epsilon1=1.5,
            src=NoiseSource(seed).substream("structure"), weight_ceiling=mw.ceiling,
        )
        hits += target in net.edges or tuple(reversed(target)) in net.edges
    print(f"weight {weight:>4}: age-spending linked in {hits}/{runs} private runs")
