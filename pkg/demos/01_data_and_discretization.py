"""Load a table, filter it, and inspect the k-means/elbow discretization.

Run:  python3 demos/01_data_and_discretization.py
"""

import numpy as np

from privcharts import FilterSpec, apply_filter, discretize_all, load_csv, to_csv
from privcharts.fixtures import adult_like

ds = adult_like(n=1000)
print(f"fixture: {ds.n} rows x {ds.d} attributes")
for attr in ds.schema:
    print(f"  {attr.name:11s} {attr.kind:11s} domain={attr.domain}")

# CSV round trip
again = load_csv(to_csv(ds), schema=ds.schema)
print("csv round-trip identical:", again == ds)

# range filtering
working = apply_filter(ds, FilterSpec(intervals={"age": (30.0, 60.0)}))
print(f"rows with age in [30, 60]: {working.n}")

# every attribute gets bins: k-means + elbow for numericals, identity for categoricals
disc = discretize_all(ds)
for name, d in disc.items():
    if d.kind == "numerical":
        edges = ", ".join(f"{e:.1f}" for e in d.edges)
        print(f"  {name:11s} {d.n_bins} bins  edges=[{edges}]")
    else:
        print(f"  {name:11s} {d.n_bins} bins  values={d.values}")
