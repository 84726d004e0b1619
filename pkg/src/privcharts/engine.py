"""End-to-end private synthesis: pattern constraints -> per-record weights ->
steered network -> noised marginals -> conditionals -> synthetic data, bundled
with exact budget accounting as a Scheme."""

from __future__ import annotations

import datetime as _dt
import json
import math
import os
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import data as _data
from .bayesnet import (
    APPair,
    BayesianNetwork,
    BinnedData,
    NetworkError,
    joint_table,
    learn_structure,
    topological_order,
)
from .data import CATEGORICAL, Dataset, Discretization, load_csv, to_csv
from .mechanisms import (
    ORACLE,
    BudgetLedger,
    BudgetSpec,
    NoiseSource,
    laplace_noise,
)


class EngineError(ValueError):
    """Unusable synthesis inputs."""


@dataclass(frozen=True)
class MixtureWeights:
    """Per-record weights: 1 plus the summed weights of every pattern the
    record belongs to. ceiling is the public upper bound 1 + Σ w_k used for
    sensitivity scaling."""

    values: np.ndarray
    ceiling: float

    def __post_init__(self) -> None:
        if np.any(self.values < 1.0):
            raise EngineError("mixture weights must be >= 1")
        self.values.setflags(write=False)


def mixture_weights(ds: Dataset, patterns: Sequence) -> MixtureWeights:
    """Evaluate MW(r) = 1 + Σ_k w_k * [r in P_k] for every record."""
    values = np.ones(ds.n)
    ceiling = 1.0
    for p in patterns:
        ceiling += p.weight
        if len(p.records) == 0:
            continue
        idx = np.asarray(p.records, dtype=np.int64)
        if idx.min() < 0 or idx.max() >= ds.n:
            raise EngineError(f"pattern {p.id} references rows outside [0, {ds.n})")
        values[idx] += p.weight
    return MixtureWeights(values=values, ceiling=ceiling)


@dataclass(frozen=True)
class NoisyMarginal:
    """A privatized AP-pair joint: clipped, renormalized cell masses (child on
    axis 0) plus the Laplace scale that produced them. derived=True marks
    tables obtained by marginalizing the first fully-parented noisy joint
    rather than by direct noising."""

    pair: APPair
    probs: np.ndarray
    noise_scale: float
    derived: bool = False
    uniform_fallback: bool = False

    def __post_init__(self) -> None:
        p = self.probs
        if np.any(p < 0) or abs(float(p.sum()) - 1.0) > 1e-9:
            raise EngineError("noisy marginal must be a distribution")
        p.setflags(write=False)


@dataclass(frozen=True)
class ConditionalTable:
    """Pr(child | parents): child axis last, each parent-tuple row sums to 1."""

    pair: APPair
    rows: np.ndarray

    def __post_init__(self) -> None:
        r = self.rows
        if np.any(r < 0) or not np.allclose(r.sum(axis=-1), 1.0, rtol=0, atol=1e-9):
            raise EngineError("every conditional row must be a distribution")
        r.setflags(write=False)


def noisy_marginals(
    ds: Dataset,
    net: BayesianNetwork,
    epsilon2: float | None,
    disc: Mapping[str, Discretization],
    src: NoiseSource | None,
    ledger: BudgetLedger | None = None,
) -> list[NoisyMarginal]:
    """Privatize the network's AP-pair joints.

    The d - k_eff fully-parented pairs (k_eff = min(k, d-1)) each get Laplace
    noise of scale 2*(d-k_eff)/(n*epsilon2) per cell mass, then negatives are
    clipped and the table renormalized. The first k_eff pairs are derived by
    marginalizing the (k_eff+1)-th noisy joint. An all-zero table after
    clipping falls back to uniform and is flagged. epsilon2=ORACLE skips the
    noise entirely.
    """
    if ds.n == 0:
        raise EngineError("cannot build marginals from zero rows")
    oracle = epsilon2 is ORACLE
    if not oracle and (epsilon2 is None or epsilon2 <= 0):
        raise EngineError("epsilon2 must be > 0")
    binned = BinnedData(ds, disc)
    d = ds.d
    k_eff = min(net.k, d - 1)
    noised_count = d - k_eff
    scale = 0.0 if oracle else 2.0 * noised_count / (ds.n * epsilon2)

    noisy: list[NoisyMarginal | None] = [None] * d
    for i in range(k_eff, d):
        pair = net.pairs[i]
        exact = joint_table(ds, pair, disc, binned=binned).probs
        if oracle:
            probs, fallback = exact.copy(), False
        else:
            noised = exact + laplace_noise(scale, src, size=exact.shape)
            probs, fallback = _clip_renormalize(noised)
            if ledger is not None:
                ledger.record_draw("marginals", "laplace", epsilon2 / noised_count)
        noisy[i] = NoisyMarginal(pair, probs, scale, uniform_fallback=fallback)

    if k_eff > 0:
        base = noisy[k_eff]
        base_vars = list(base.pair.variables)
        for i in range(k_eff):
            pair = net.pairs[i]
            missing = set(pair.variables) - set(base_vars)
            if missing:
                raise EngineError(
                    f"pair {pair.child!r} cannot be derived: {sorted(missing)} not in the "
                    f"(k+1)-th marginal (network parents are not maximal)"
                )
            probs = _marginalize(base.probs, base_vars, pair)
            noisy[i] = NoisyMarginal(pair, probs, base.noise_scale, derived=True)
    return list(noisy)


def _clip_renormalize(table: np.ndarray) -> tuple[np.ndarray, bool]:
    clipped = np.maximum(table, 0.0)
    total = float(clipped.sum())
    if total <= 0.0:
        return np.full(table.shape, 1.0 / table.size), True
    return clipped / total, False


def _marginalize(probs: np.ndarray, variables: list[str], pair: APPair) -> np.ndarray:
    """Sum out the variables not in `pair`, then arrange axes child-first."""
    keep = [variables.index(v) for v in pair.variables]
    drop = tuple(i for i in range(len(variables)) if i not in keep)
    reduced = probs.sum(axis=drop) if drop else probs.copy()
    kept_order = sorted(keep)
    perm = [kept_order.index(i) for i in keep]
    return np.ascontiguousarray(np.transpose(reduced, perm))


def derive_conditionals(marginals: Sequence[NoisyMarginal]) -> list[ConditionalTable]:
    """Row-normalize each joint over child bins per parent tuple; parent
    tuples with zero total mass get the uniform child distribution."""
    out = []
    for m in marginals:
        child_last = np.moveaxis(m.probs, 0, -1)
        totals = child_last.sum(axis=-1, keepdims=True)
        m_child = child_last.shape[-1]
        rows = np.divide(
            child_last,
            totals,
            out=np.full_like(child_last, 1.0 / m_child),
            where=totals > 0,
        )
        out.append(ConditionalTable(m.pair, rows))
    return out


def sample_synthetic(
    net: BayesianNetwork,
    conditionals: Sequence[ConditionalTable],
    n_out: int,
    disc: Mapping[str, Discretization],
    src: NoiseSource,
    schema: Sequence[_data.Attribute],
) -> Dataset:
    """Ancestral sampling in topological order, then realization: numerical
    bins draw uniformly within their edges, categorical bins emit the value."""
    if n_out < 0:
        raise EngineError("n_out must be >= 0")
    order = topological_order(net)
    by_child = {c.pair.child: c for c in conditionals}
    if set(by_child) != set(order):
        raise EngineError("conditionals must cover every AP pair")
    codes: dict[str, np.ndarray] = {}
    for name in order:
        cond = by_child[name]
        rows = cond.rows.reshape(-1, cond.rows.shape[-1])
        if cond.pair.parents:
            dims = tuple(disc[p].n_bins for p in cond.pair.parents)
            key = np.zeros(n_out, dtype=np.int64)
            for p, dim in zip(cond.pair.parents, dims):
                key = key * dim + codes[p]
            probs = rows[key]
        else:
            probs = np.broadcast_to(rows[0], (n_out, rows.shape[-1]))
        codes[name] = _sample_rows(probs, src)

    columns = []
    for attr in schema:
        dz = disc[attr.name]
        c = codes[attr.name]
        if attr.kind == CATEGORICAL:
            values = np.array(dz.values, dtype=object)[c]
        else:
            edges = np.asarray(dz.edges)
            left, right = edges[c], edges[c + 1]
            values = left + (right - left) * src.random(n_out)
        columns.append(values)
    return Dataset.from_columns(schema, columns)


def _sample_rows(probs: np.ndarray, src: NoiseSource) -> np.ndarray:
    """One categorical draw per row of a (n, m) probability matrix."""
    n = probs.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    cdf = np.cumsum(probs, axis=1)
    u = src.random(n)
    return (cdf >= u[:, None]).argmax(axis=1).astype(np.int64)


# ---------------------------------------------------------------------------
# Scheme assembly
# ---------------------------------------------------------------------------


@dataclass
class Scheme:
    """One privacy-protection run: budget, weights, learned network, noisy
    marginals, synthetic dataset, and (once evaluated) its metrics report."""

    id: str
    budget: BudgetSpec
    weights: dict
    network: BayesianNetwork
    marginals: list
    synthetic: Dataset
    seed: int
    created_at: str
    k: int
    n_out: int
    private: bool
    flags: list = field(default_factory=list)
    ledger: BudgetLedger | None = None
    metrics: object | None = None

    def to_json(self) -> dict:
        return {
            "v": 1,
            "id": self.id,
            "budget": self.budget.to_json(),
            "weights": dict(self.weights),
            "seed": self.seed,
            "created_at": self.created_at,
            "k": self.k,
            "n_out": self.n_out,
            "private": self.private,
            "flags": list(self.flags),
            "consumption": self.ledger.to_json() if self.ledger else None,
        }


def generate_scheme(
    ds: Dataset,
    patterns: Sequence,
    weights: Mapping[str, float] | None,
    budget: BudgetSpec,
    k: int = 2,
    n_out: int | None = None,
    seed: int = 0,
    *,
    disc: Mapping[str, Discretization] | None = None,
    max_bins: int = _data.DEFAULT_MAX_BINS,
    oracle: bool = False,
    scheme_id: str = "scheme",
) -> Scheme:
    """Run the full pipeline deterministically for a seed.

    `weights` optionally overrides the stored pattern weights by id. With all
    weights zero (or no patterns) the run is exactly the unweighted baseline.
    oracle=True disables every mechanism and marks the scheme non-private.
    """
    if ds.n == 0:
        raise EngineError("cannot synthesize from an empty dataset")
    if disc is None:
        disc = _data.discretize_all(ds, max_bins)
    effective = []
    weight_map = {}
    for p in patterns:
        w = float(weights[p.id]) if weights and p.id in weights else float(p.weight)
        if w < 0:
            raise EngineError(f"negative weight for pattern {p.id}")
        weight_map[p.id] = w
        effective.append(_WeightedPattern(p.id, tuple(p.records), w))
    mw = mixture_weights(ds, effective)

    src = NoiseSource(seed)
    ledger = BudgetLedger(budget.epsilon_total)
    flags = []

    net = learn_structure(
        ds,
        disc,
        weights=mw.values,
        k=k,
        epsilon1=ORACLE if oracle else budget.epsilon_structure,
        src=src.substream("structure"),
        weight_ceiling=mw.ceiling,
        ledger=ledger,
    )
    if not oracle:
        ledger.charge_stage("structure", budget.epsilon_structure)

    marginals = noisy_marginals(
        ds,
        net,
        ORACLE if oracle else budget.epsilon_marginals,
        disc,
        src.substream("marginals"),
        ledger=ledger,
    )
    if not oracle:
        ledger.charge_stage("marginals", budget.epsilon_marginals)
    if any(m.uniform_fallback for m in marginals):
        flags.append("uniform_fallback")
    if oracle:
        flags.append("oracle: NOT differentially private")

    conditionals = derive_conditionals(marginals)
    out_n = ds.n if n_out is None else n_out
    synthetic = sample_synthetic(net, conditionals, out_n, disc, src.substream("sampling"), ds.schema)

    return Scheme(
        id=scheme_id,
        budget=budget,
        weights=weight_map,
        network=net,
        marginals=marginals,
        synthetic=synthetic,
        seed=seed,
        created_at=_dt.datetime.now(_dt.timezone.utc).isoformat(),
        k=k,
        n_out=out_n,
        private=not oracle,
        flags=flags,
        ledger=ledger,
    )


@dataclass(frozen=True)
class _WeightedPattern:
    id: str
    records: tuple
    weight: float


# ---------------------------------------------------------------------------
# Scheme persistence
# ---------------------------------------------------------------------------


def save_scheme(scheme: Scheme, directory: str) -> None:
    """Write scheme.json, network.json, marginals.json, synthetic.csv (and
    metrics.json when present) under `directory`."""
    os.makedirs(directory, exist_ok=True)
    _dump_json(os.path.join(directory, "scheme.json"), scheme.to_json())
    _dump_json(os.path.join(directory, "network.json"), scheme.network.to_json())
    _dump_json(
        os.path.join(directory, "marginals.json"),
        {
            "v": 1,
            "marginals": [
                {
                    "child": m.pair.child,
                    "parents": list(m.pair.parents),
                    "shape": list(m.probs.shape),
                    "cells": m.probs.ravel().tolist(),
                    "noise_scale": m.noise_scale,
                    "derived": m.derived,
                    "uniform_fallback": m.uniform_fallback,
                }
                for m in scheme.marginals
            ],
        },
    )
    with open(os.path.join(directory, "synthetic.csv"), "w", encoding="utf-8") as fh:
        fh.write(to_csv(scheme.synthetic))
    if scheme.metrics is not None:
        _dump_json(os.path.join(directory, "metrics.json"), scheme.metrics.to_json())


def load_scheme(directory: str, schema: Sequence[_data.Attribute]) -> Scheme:
    """Rebuild a Scheme from a save_scheme directory (metrics reattached by
    the caller if metrics.json exists)."""
    with open(os.path.join(directory, "scheme.json"), encoding="utf-8") as fh:
        meta = json.load(fh)
    with open(os.path.join(directory, "network.json"), encoding="utf-8") as fh:
        net = BayesianNetwork.from_json(json.load(fh))
    with open(os.path.join(directory, "marginals.json"), encoding="utf-8") as fh:
        raw = json.load(fh)
    marginals = [
        NoisyMarginal(
            APPair(m["child"], tuple(m["parents"])),
            np.array(m["cells"]).reshape(m["shape"]),
            m["noise_scale"],
            derived=m["derived"],
            uniform_fallback=m["uniform_fallback"],
        )
        for m in raw["marginals"]
    ]
    with open(os.path.join(directory, "synthetic.csv"), encoding="utf-8") as fh:
        synthetic = load_csv(fh.read(), schema=schema)
    ledger = BudgetLedger(meta["budget"]["epsilon_total"])
    if meta.get("consumption"):
        for stage, eps in meta["consumption"]["stages"].items():
            ledger.charge_stage(stage, eps)
        for ev in meta["consumption"]["draws"]:
            ledger.record_draw(ev["stage"], ev["mechanism"], ev["epsilon"])
    return Scheme(
        id=meta["id"],
        budget=BudgetSpec.from_json(meta["budget"]),
        weights=meta["weights"],
        network=net,
        marginals=marginals,
        synthetic=synthetic,
        seed=meta["seed"],
        created_at=meta["created_at"],
        k=meta["k"],
        n_out=meta["n_out"],
        private=meta["private"],
        flags=meta["flags"],
        ledger=ledger,
    )


def _dump_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
