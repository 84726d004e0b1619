"""Deterministic bundled fixtures.

adult_like() generates a census-flavoured table whose dependence structure
gives each pattern type headroom to steer: a spanning tree of strong
"backbone" dependencies (education-occupation, occupation-income,
occupation-charges, region-spending, age-bmi, education-age) anchors the
unweighted structure search, while each chart pattern rides a weaker chord
(region/occupation exclusives for the order chart's bar ordering, an
old-age spending hump for the correlation chart, a high-bmi/high-charges
blob for the cluster chart) that concentrates in the pattern's record
subset.
"""

from __future__ import annotations

import numpy as np

from .charts import ChartSpec, Selection
from .data import CATEGORICAL, NUMERICAL, Attribute, Dataset

ADULT_SEED = 20240501

REGIONS = ("coast", "north", "plains", "south", "east", "west")
OCCUPATIONS = ("tech", "trade", "agri", "finance", "service", "retail")
EDUCATIONS = ("highschool", "college", "graduate")

# selected-region -> pinned occupation (the order pattern's dependence)
_EXCLUSIVE_OCC = {"coast": "tech", "north": "trade", "plains": "agri"}
# elsewhere education drives the occupation choice
_EDU_OCC = {"highschool": "retail", "college": "service", "graduate": "finance"}


def adult_like(n: int = 1000, seed: int = ADULT_SEED) -> Dataset:
    """The bundled desk-scale fixture: 8 attributes, n rows."""
    rng = np.random.default_rng(seed)
    band = rng.choice(3, n, p=[0.28, 0.52, 0.20])  # young / mid / old
    age = np.where(
        band == 0,
        rng.uniform(20, 28, n),
        np.where(band == 1, rng.uniform(40, 52, n), rng.uniform(64, 78, n)),
    )
    old = band == 2
    young = band == 0

    education = np.empty(n, dtype=object)
    for i in range(n):
        if young[i] and rng.random() < 0.85:
            education[i] = "college"
        else:
            education[i] = EDUCATIONS[int(rng.choice(3, p=[0.52, 0.22, 0.26]))]

    region = rng.choice(REGIONS, n, p=[0.1, 0.1, 0.1, 0.1, 0.2, 0.4])
    occupation = np.empty(n, dtype=object)
    for i in range(n):
        r = region[i]
        if r in _EXCLUSIVE_OCC:
            occupation[i] = (
                _EXCLUSIVE_OCC[r] if rng.random() < 0.34 else OCCUPATIONS[int(rng.random() * 6)]
            )
        else:
            occupation[i] = (
                _EDU_OCC[education[i]] if rng.random() < 0.85 else OCCUPATIONS[int(rng.random() * 6)]
            )

    # income: three salary levels; education is the dominant driver, the
    # occupation groups shift the odds (the order pattern's dependence)
    p_lo = np.clip(
        np.array([{"highschool": 0.38, "college": 0.05, "graduate": 0.02}[e] for e in education])
        + 0.18 * np.isin(occupation, ("agri", "retail"))
        - 0.18 * np.isin(occupation, ("tech", "finance")),
        0.01,
        0.97,
    )
    p_hi = np.clip(
        np.array([{"highschool": 0.02, "college": 0.08, "graduate": 0.65}[e] for e in education])
        + 0.18 * np.isin(occupation, ("tech", "finance"))
        - 0.18 * np.isin(occupation, ("agri", "retail")),
        0.01,
        0.97,
    )
    u_inc = rng.random(n)
    inc_lvl = np.where(u_inc < p_lo, 0, np.where(u_inc < np.minimum(p_lo + p_hi, 0.99), 2, 1))
    income = np.where(
        inc_lvl == 2, rng.normal(98, 3, n), np.where(inc_lvl == 0, rng.normal(22, 3, n), rng.normal(60, 3, n))
    )

    # spending: high tier concentrates in the old band (correlation pattern),
    # low tier in the south/east regions (its unweighted anchor)
    sp_hi = rng.random(n) < np.where(old, 0.75, 0.05)
    sp_lo = (rng.random(n) < np.where(np.isin(region, ("south", "east")), 0.92, 0.02)) & ~sp_hi
    spending = np.where(
        sp_hi, rng.normal(75, 2.2, n), np.where(sp_lo, rng.normal(15, 2.2, n), rng.normal(45, 2.2, n))
    )

    # bmi/charges: a joint high-high blob over ~15% of rows (cluster pattern),
    # low bmi tied to the young band, low charges to retail occupations
    isblob = rng.random(n) < 0.15
    bmi_lo = (rng.random(n) < np.where(young, 0.97, 0.015)) & ~isblob
    bmi_fill = (rng.random(n) < 0.05) & ~isblob & ~bmi_lo
    bmi = np.where(
        isblob | bmi_fill,
        rng.normal(46, 1.9, n),
        np.where(bmi_lo, rng.normal(20, 1.9, n), rng.normal(33, 1.9, n)),
    )
    ch_lo = (rng.random(n) < np.where(occupation == "retail", 0.90, 0.015)) & ~isblob
    ch_fill = (rng.random(n) < 0.05) & ~isblob & ~ch_lo
    charges = np.where(
        isblob | ch_fill,
        rng.normal(40, 2, n),
        np.where(ch_lo, rng.normal(10, 2, n), rng.normal(25, 2, n)),
    )

    schema = [
        Attribute("age", NUMERICAL, (18.0, 80.0)),
        Attribute("education", CATEGORICAL, tuple(sorted(EDUCATIONS))),
        Attribute("region", CATEGORICAL, tuple(sorted(REGIONS))),
        Attribute("occupation", CATEGORICAL, tuple(sorted(OCCUPATIONS))),
        Attribute("income", NUMERICAL, (5.0, 120.0)),
        Attribute("spending", NUMERICAL, (0.0, 100.0)),
        Attribute("bmi", NUMERICAL, (15.0, 50.0)),
        Attribute("charges", NUMERICAL, (0.0, 50.0)),
    ]
    columns = [
        np.clip(age, 18, 80),
        education,
        region,
        occupation,
        np.clip(income, 5, 120),
        np.clip(spending, 0, 100),
        np.clip(bmi, 15, 50),
        np.clip(charges, 0, 50),
    ]
    return Dataset.from_columns(schema, columns)


def adult_like_charts() -> dict[str, ChartSpec]:
    """The three canonical charts over the fixture, one per pattern type."""
    return {
        "cluster": ChartSpec(id="c_cluster", chart_type="scatter", x="bmi", y="charges"),
        "correlation": ChartSpec(
            id="c_corr", chart_type="line", x="age", y="spending", x_step=6.0, aggregate="mean"
        ),
        "order": ChartSpec(
            id="c_order", chart_type="bar", x="occupation", y="income", aggregate="mean"
        ),
    }


def adult_like_selections() -> dict[str, Selection]:
    """Selections matched to the fixture's pattern-bearing subsets."""
    return {
        "cluster": Selection(kind="region", rect=(40.0, 32.0, 50.0, 50.0)),
        "correlation": Selection(kind="interval", interval=(60.0, 80.0)),
        "order": Selection(kind="bars", bars=("tech", "trade", "agri")),
    }


def steering_pair(n: int = 600, seed: int = 11) -> tuple[Dataset, np.ndarray]:
    """Small fixture for monotone-steering checks.

    Returns (dataset, pattern_rows). Attributes u and v agree exactly on the
    pattern rows (the first third) and v tracks the decoy attribute a
    elsewhere, so v's preferred parent flips from a to u as the pattern's
    weight grows. a-b is a strong always-on pair.
    """
    rng = np.random.default_rng(seed)
    levels = ("l0", "l1", "l2", "l3")
    a = rng.integers(0, 4, n)
    b = np.where(rng.random(n) < 0.9, a, rng.integers(0, 4, n))
    u = rng.integers(0, 4, n)
    p_rows = np.arange(n // 3)
    in_p = np.zeros(n, dtype=bool)
    in_p[p_rows] = True
    v_decoy = np.where(rng.random(n) < 0.55, a, rng.integers(0, 4, n))
    v = np.where(in_p, u, v_decoy)
    cols = [a, b, u, v]
    schema = [Attribute(name, CATEGORICAL, levels) for name in ("a", "b", "u", "v")]
    columns = [np.array([levels[i] for i in col], dtype=object) for col in cols]
    return Dataset.from_columns(schema, columns), p_rows
