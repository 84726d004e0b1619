"""Bayesian networks over discretized attributes: information measures and
private greedy structure search steered by per-record weights."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .data import Dataset, Discretization
from .mechanisms import ORACLE, BudgetLedger, NoiseSource, exponential_select

MAX_JOINT_CELLS = 10**6


class NetworkError(ValueError):
    """Invalid network structure or unusable inputs."""


@dataclass(frozen=True)
class APPair:
    """One attribute-parent pair: a child and its (possibly empty) parent set.

    Parents are stored sorted so pairs compare and hash structurally.
    """

    child: str
    parents: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "parents", tuple(sorted(self.parents)))
        if self.child in self.parents:
            raise NetworkError(f"{self.child!r} cannot be its own parent")

    @property
    def variables(self) -> tuple[str, ...]:
        return (self.child, *self.parents)


@dataclass(frozen=True)
class BayesianNetwork:
    """A DAG of AP pairs in topological order: each attribute is a child
    exactly once, the first pair is parentless, and every parent appears as
    an earlier child."""

    pairs: tuple[APPair, ...]
    k: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", tuple(self.pairs))
        if self.k < 0:
            raise NetworkError("degree bound k must be >= 0")
        if not self.pairs:
            raise NetworkError("network needs at least one pair")
        seen: set[str] = set()
        for i, pair in enumerate(self.pairs):
            if pair.child in seen:
                raise NetworkError(f"{pair.child!r} is a child twice")
            if len(pair.parents) > self.k:
                raise NetworkError(f"{pair.child!r} exceeds the degree bound {self.k}")
            if i == 0 and pair.parents:
                raise NetworkError("the first pair must be parentless")
            missing = set(pair.parents) - seen
            if missing:
                raise NetworkError(
                    f"parents {sorted(missing)} of {pair.child!r} do not precede it"
                )
            seen.add(pair.child)

    @property
    def order(self) -> tuple[str, ...]:
        return tuple(p.child for p in self.pairs)

    @property
    def edges(self) -> frozenset[tuple[str, str]]:
        """(child, parent) ordered pairs — the AP-edge set used by analytics."""
        return frozenset((p.child, parent) for p in self.pairs for parent in p.parents)

    def to_json(self) -> dict:
        return {
            "v": 1,
            "order": list(self.order),
            "pairs": [{"child": p.child, "parents": list(p.parents)} for p in self.pairs],
            "k": self.k,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "BayesianNetwork":
        pairs = tuple(APPair(p["child"], tuple(p["parents"])) for p in obj["pairs"])
        return cls(pairs=pairs, k=int(obj["k"]))


def topological_order(net: BayesianNetwork) -> tuple[str, ...]:
    """Return the stored order after re-verifying that parents precede children."""
    seen: set[str] = set()
    for pair in net.pairs:
        if not set(pair.parents) <= seen:
            raise NetworkError(f"cycle or forward reference at {pair.child!r}")
        seen.add(pair.child)
    return net.order


# ---------------------------------------------------------------------------
# Binned views and joint tables
# ---------------------------------------------------------------------------


class BinnedData:
    """Per-attribute bin codes for one dataset under one discretization map."""

    def __init__(self, ds: Dataset, disc: Mapping[str, Discretization]) -> None:
        self.n = ds.n
        self.codes: dict[str, np.ndarray] = {}
        self.dims: dict[str, int] = {}
        for attr in ds.schema:
            d = disc[attr.name]
            self.codes[attr.name] = d.codes(ds.column(attr.name))
            self.dims[attr.name] = d.n_bins

    def counts(self, variables: Sequence[str], weights: np.ndarray | None = None):
        """Joint histogram over `variables` (C-order raveled), plus the
        matching per-cell weight sums when weights are given."""
        dims = tuple(self.dims[v] for v in variables)
        if math.prod(dims) > MAX_JOINT_CELLS:
            raise NetworkError(f"joint over {variables} exceeds {MAX_JOINT_CELLS} cells")
        key = np.zeros(self.n, dtype=np.int64)
        for v in variables:
            key = key * self.dims[v] + self.codes[v]
        size = math.prod(dims)
        counts = np.bincount(key, minlength=size).astype(float).reshape(dims)
        if weights is None:
            return counts, None
        wsums = np.bincount(key, weights=weights, minlength=size).reshape(dims)
        return counts, wsums


@dataclass(frozen=True)
class JointTable:
    """Empirical joint distribution of an AP pair.

    probs has the child on axis 0 and the (sorted) parents on the remaining
    axes; masses are non-negative and sum to 1.
    """

    pair: APPair
    probs: np.ndarray

    def __post_init__(self) -> None:
        p = self.probs
        if np.any(p < 0) or abs(float(p.sum()) - 1.0) > 1e-9:
            raise NetworkError("joint masses must be >= 0 and sum to 1")
        p.setflags(write=False)

    def mass(self, child_bin: int, parent_bins: tuple[int, ...] = ()) -> float:
        return float(self.probs[(child_bin, *parent_bins)])


def joint_table(
    ds: Dataset, pair: APPair, disc: Mapping[str, Discretization], binned: BinnedData | None = None
) -> JointTable:
    """Empirical Pr(child, parents): cell mass = row count / n."""
    if ds.n == 0:
        raise NetworkError("cannot build a joint table from zero rows")
    binned = binned or BinnedData(ds, disc)
    counts, _ = binned.counts(pair.variables)
    return JointTable(pair, counts / binned.n)


def entropy(table) -> float:
    """Shannon entropy -Σ p ln p (natural log), with 0 ln 0 = 0."""
    p = np.asarray(table.probs if isinstance(table, JointTable) else table, dtype=float).ravel()
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


def _mi_from_arrays(p: np.ndarray, factor: np.ndarray | None = None) -> float:
    """Σ factor * p * ln(p / (p_child * p_parents)) over non-empty cells."""
    if p.ndim == 1:
        return 0.0  # no parents: I(X; ∅) = 0
    parent_axes = tuple(range(1, p.ndim))
    px = p.sum(axis=parent_axes, keepdims=True)
    ppi = p.sum(axis=0, keepdims=True)
    mask = p > 0
    ratio = np.ones_like(p)
    denom = px * ppi
    np.divide(p, denom, out=ratio, where=mask)
    terms = np.zeros_like(p)
    np.multiply(p, np.log(ratio, where=mask, out=np.zeros_like(p)), out=terms, where=mask)
    if factor is not None:
        terms = terms * factor
    return float(terms.sum())


def mutual_information(table: JointTable | np.ndarray) -> float:
    """I(child; parents) in nats; rounding negatives below 1e-12 clip to 0."""
    p = table.probs if isinstance(table, JointTable) else np.asarray(table, dtype=float)
    value = _mi_from_arrays(p)
    if -1e-12 < value < 0:
        return 0.0
    return value


def weighted_mutual_information(
    ds: Dataset,
    weights: np.ndarray,
    pair: APPair,
    disc: Mapping[str, Discretization],
    binned: BinnedData | None = None,
) -> float:
    """Mutual information with each cell's term scaled by the mean per-record
    weight of the rows falling in that cell (empty cells count as factor 1,
    which is moot since their mass is 0)."""
    if ds.n == 0:
        raise NetworkError("cannot score an empty dataset")
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (ds.n,):
        raise NetworkError("weights must supply one value per row")
    binned = binned or BinnedData(ds, disc)
    counts, wsums = binned.counts(pair.variables, weights=weights)
    factor = np.ones_like(counts)
    np.divide(wsums, counts, out=factor, where=counts > 0)
    return _mi_from_arrays(counts / binned.n, factor)


def mi_sensitivity(n: int) -> float:
    """Conservative L1 sensitivity of mutual information on an n-row table."""
    if n < 2:
        return math.log(2.0)
    return (2.0 / n) * math.log((n + 1) / 2.0) + ((n - 1) / n) * math.log((n + 1) / (n - 1))


# ---------------------------------------------------------------------------
# Greedy private structure search
# ---------------------------------------------------------------------------


def learn_structure(
    ds: Dataset,
    disc: Mapping[str, Discretization],
    weights: np.ndarray | None = None,
    k: int = 2,
    epsilon1: float | None = ORACLE,
    src: NoiseSource | None = None,
    *,
    weight_ceiling: float | None = None,
    ledger: BudgetLedger | None = None,
) -> BayesianNetwork:
    """Greedily build a network, one attribute per round, scoring candidate
    AP pairs by weighted mutual information and selecting via the
    exponential mechanism with per-round budget epsilon1/(d-1).

    The first attribute consumes no budget: it is drawn uniformly at random,
    or, in oracle mode (epsilon1=ORACLE), fixed to the lexicographically
    smallest name so oracle networks are deterministic. Candidate parent
    sets are maximal: |parents| = min(k, #visited). weight_ceiling is the
    public upper bound on the per-record weights (1 + sum of pattern
    weights); the exponential mechanism's sensitivity is the standard MI
    bound scaled by it.
    """
    if ds.d == 0:
        raise NetworkError("dataset has no attributes")
    if k < 0:
        raise NetworkError("degree bound k must be >= 0")
    if ds.n == 0:
        raise NetworkError("cannot learn from zero rows")
    names = [a.name for a in ds.schema]
    oracle = epsilon1 is ORACLE
    if not oracle:
        if epsilon1 <= 0:
            raise NetworkError("epsilon1 must be > 0")
        if src is None:
            raise NetworkError("a NoiseSource is required outside oracle mode")

    if weights is None:
        weights = np.ones(ds.n)
    weights = np.asarray(weights, dtype=float)
    if weight_ceiling is None:
        weight_ceiling = max(1.0, float(weights.max())) if weights.size else 1.0

    binned = BinnedData(ds, disc)
    d = ds.d
    if oracle:
        root = min(names)
    else:
        root = names[src.integers(d)]
    pairs = [APPair(root, ())]
    visited = [root]
    remaining = sorted(set(names) - {root})

    eps_round = None if oracle else epsilon1 / (d - 1) if d > 1 else None
    sensitivity = mi_sensitivity(ds.n) * weight_ceiling

    while remaining:
        width = min(k, len(visited))
        candidates = []
        for child in remaining:
            for parents in itertools.combinations(sorted(visited), width):
                candidates.append(APPair(child, parents))
        candidates.sort(key=lambda p: (p.child, p.parents))
        scores = np.array(
            [
                weighted_mutual_information(ds, weights, cand, disc, binned=binned)
                for cand in candidates
            ]
        )
        idx = exponential_select(scores, sensitivity, None if oracle else eps_round, src)
        if not oracle and ledger is not None:
            ledger.record_draw("structure", "exponential", eps_round)
        chosen = candidates[idx]
        pairs.append(chosen)
        visited.append(chosen.child)
        remaining.remove(chosen.child)

    return BayesianNetwork(pairs=tuple(pairs), k=k)


# ---------------------------------------------------------------------------
# KL decomposition identity
# ---------------------------------------------------------------------------


def kl_decomposition_check(
    ds: Dataset, net: BayesianNetwork, disc: Mapping[str, Discretization]
) -> tuple[float, float]:
    """Compare D_KL(Pr(A) || Pr_N(A)) computed directly from the full joint
    (lhs) against -Σ I(X_i, Π_i) + Σ H(X_i) - H(A) (rhs), with Pr_N built
    from exact conditionals. Only feasible on small instances; refuses full
    joints above 1e6 cells.
    """
    binned = BinnedData(ds, disc)
    order = list(topological_order(net))
    dims = [binned.dims[v] for v in order]
    if math.prod(dims) > MAX_JOINT_CELLS:
        raise NetworkError("full joint too large for a direct KL check")
    axis = {v: i for i, v in enumerate(order)}

    counts, _ = binned.counts(order)
    p_full = counts / binned.n

    # Pr_N as the product of exact conditionals, broadcast onto the full grid.
    p_model = np.ones_like(p_full)
    rhs = 0.0
    for pair in net.pairs:
        jt = joint_table(ds, pair, disc, binned=binned)
        rhs -= mutual_information(jt)
        joint = jt.probs
        parent_mass = joint.sum(axis=0, keepdims=True)
        cond = np.divide(joint, parent_mass, out=np.zeros_like(joint), where=parent_mass > 0)
        axes = [axis[pair.child]] + [axis[par] for par in pair.parents]
        arranged = np.transpose(cond, np.argsort(axes))
        shape = [1] * len(order)
        for a in axes:
            shape[a] = dims[a]
        p_model = p_model * arranged.reshape(shape)

    marg_entropy = 0.0
    for v in order:
        c, _ = binned.counts([v])
        marg_entropy += entropy(c / binned.n)
    rhs += marg_entropy - entropy(p_full)

    mask = p_full > 0
    lhs = float(
        np.sum(p_full[mask] * (np.log(p_full[mask]) - np.log(np.maximum(p_model[mask], 1e-300))))
    )
    return lhs, rhs
