"""The two randomized primitives and exact budget bookkeeping.

Run:  python3 demos/02_dp_mechanisms.py
"""

import numpy as np

from privcharts import (
    NoiseSource,
    exponential_probabilities,
    exponential_select,
    laplace_noise,
    split_budget,
)

src = NoiseSource(seed=42)

# Laplace: E|x| = b, Var = 2 b^2
draws = laplace_noise(1.0, src, size=100_000)
print(f"laplace b=1: mean|x|={np.abs(draws).mean():.4f} (expect 1), var={draws.var():.4f} (expect 2)")

# exponential mechanism: empirical frequencies vs the closed-form softmax
scores = [0.0, 0.4, 0.9]
sens, eps = 0.5, 1.0
expected = exponential_probabilities(scores, sens, eps)
counts = np.zeros(3)
for _ in range(50_000):
    counts[exponential_select(scores, sens, eps, src)] += 1
print("exponential mechanism frequencies:")
for i, (e, f) in enumerate(zip(expected, counts / counts.sum())):
    print(f"  candidate {i}: expected {e:.4f}  empirical {f:.4f}")

# budgets split exactly
budget = split_budget(2.0, structure_fraction=0.5)
print(f"budget: total={budget.epsilon_total}, structure={budget.epsilon_structure}, "
      f"marginals={budget.epsilon_marginals}, sum exact: "
      f"{budget.epsilon_structure + budget.epsilon_marginals == budget.epsilon_total}")

# substreams: reproducible, independent stages
a = NoiseSource(7).substream("structure").random(3)
b = NoiseSource(7).substream("structure").random(3)
print("substream reproducibility:", np.array_equal(a, b))
