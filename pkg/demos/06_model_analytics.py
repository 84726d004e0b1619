"""Model-view payloads: pattern relationships, attribute flows, network layout,
and before/after distributions.

Run:  python3 demos/06_model_analytics.py
"""

import json

from privcharts import generate_scheme, split_budget
from privcharts.analytics import (
    network_layout,
    node_distributions,
    relationship_graph,
    sankey_flow,
)
from privcharts.charts import PatternCatalog
from privcharts.data import discretize_all
from privcharts.fixtures import adult_like, adult_like_charts, adult_like_selections

ds = adult_like(n=600)
disc = discretize_all(ds)
charts = adult_like_charts()
sels = adult_like_selections()
catalog = PatternCatalog()
patterns = [catalog.add(ds, charts[t], sels[t], 1.0) for t in ("cluster", "correlation", "order")]

graph = relationship_graph(ds, patterns, k=1, disc=disc)
print("pattern relationship (MDS positions + signed influence):")
for node in graph.nodes:
    print(f"  {node['id']} {node['pattern_type']:11s} at ({node['x']:+.3f}, {node['y']:+.3f}), "
          f"{node['records']} records")
for edge in graph.edges:
    print(f"  {edge['source']}-{edge['target']}: {edge['sign']} (magnitude {edge['magnitude']})")

flow = sankey_flow(ds, disc, ["education", "occupation", "income"], highlight=patterns[2])
first = flow.links[0]
print(f"\nflow education->occupation: {len(first)} links, counts sum to {sum(l['count'] for l in first)}")
print(f"highlighted sub-flows sum to {sum(l.get('sub', 0) for l in first)} "
      f"(= pattern size {len(patterns[2].records)})")

scheme = generate_scheme(ds, patterns, None, split_budget(2.0, 0.5), k=1, seed=9, disc=disc)
layout = network_layout(scheme.network)
print("\nlayered network layout:")
for node in layout.nodes:
    print(f"  layer {node['layer']}: {node['attribute']} (slot {node['slot']})")

dist = node_distributions(ds, scheme.synthetic, "income", disc)
peak = max(range(len(dist["grid"])), key=lambda i: dist["before"][i])
print(f"\nincome KDE grid: {len(dist['grid'])} points, original peak near {dist['grid'][peak]:.1f}")
