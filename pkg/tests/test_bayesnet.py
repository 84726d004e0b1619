import itertools
import math

import numpy as np
import pytest

from privcharts.bayesnet import (
    APPair,
    BayesianNetwork,
    BinnedData,
    NetworkError,
    entropy,
    joint_table,
    kl_decomposition_check,
    learn_structure,
    mi_sensitivity,
    mutual_information,
    topological_order,
    weighted_mutual_information,
)
from privcharts.data import CATEGORICAL, NUMERICAL, Attribute, Dataset, discretize_all
from privcharts.fixtures import steering_pair
from privcharts.mechanisms import NoiseSource


def cat(name, values):
    return Attribute(name, CATEGORICAL, tuple(values))


def make_ds(cols: dict):
    names = list(cols)
    schema = [cat(n, sorted(set(cols[n]))) for n in names]
    rows = list(zip(*[cols[n] for n in names]))
    return Dataset(schema, rows)


def brute_force_weighted_mi(ds, weights, child, parents, disc):
    """Independent oracle: explicit double loop over cells and rows."""
    child_codes = disc[child].codes(ds.column(child))
    parent_codes = [disc[p].codes(ds.column(p)) for p in parents]
    n = ds.n
    total = 0.0
    child_bins = disc[child].n_bins
    parent_bins = [disc[p].n_bins for p in parents]
    for x in range(child_bins):
        for combo in itertools.product(*[range(b) for b in parent_bins]):
            members = [
                i
                for i in range(n)
                if child_codes[i] == x and all(pc[i] == cv for pc, cv in zip(parent_codes, combo))
            ]
            if not members:
                continue
            p_joint = len(members) / n
            p_x = np.mean(child_codes == x)
            p_pi = np.mean(
                np.all([pc == cv for pc, cv in zip(parent_codes, combo)], axis=0)
            ) if parents else 1.0
            factor = sum(weights[i] for i in members) / len(members)
            total += factor * p_joint * math.log(p_joint / (p_x * p_pi))
    return total


def test_appair_rejects_self_parent():
    with pytest.raises(NetworkError):
        APPair("x", ("x",))


def test_network_invariants():
    good = BayesianNetwork(pairs=(APPair("a"), APPair("b", ("a",))), k=1)
    assert good.order == ("a", "b")
    with pytest.raises(NetworkError):
        BayesianNetwork(pairs=(APPair("a", ("b",)), APPair("b")), k=1)  # forward ref
    with pytest.raises(NetworkError):
        BayesianNetwork(pairs=(APPair("a"), APPair("a")), k=1)  # duplicate child
    with pytest.raises(NetworkError):
        BayesianNetwork(pairs=(APPair("a"), APPair("b", ("a",))), k=0)  # degree bound


def test_topological_order_chain():
    net = BayesianNetwork(
        pairs=(APPair("a"), APPair("b", ("a",)), APPair("c", ("b",))), k=1
    )
    assert topological_order(net) == ("a", "b", "c")


def test_joint_table_counting():
    ds = make_ds({"x": ["0", "0", "1"]})
    disc = discretize_all(ds)
    jt = joint_table(ds, APPair("x"), disc)
    assert np.allclose(jt.probs, [2 / 3, 1 / 3])


def test_joint_table_uniform_2x2():
    ds = make_ds({"x": ["0", "0", "1", "1"], "y": ["0", "1", "0", "1"]})
    disc = discretize_all(ds)
    jt = joint_table(ds, APPair("x", ("y",)), disc)
    assert np.allclose(jt.probs, 0.25)


def test_joint_table_hand_count():
    # 5-row fixture counted by hand
    ds = make_ds(
        {"attack": ["yes", "no", "no", "yes", "yes"], "ageband": ["young", "old", "young", "mid", "old"]}
    )
    disc = discretize_all(ds)
    jt = joint_table(ds, APPair("attack", ("ageband",)), disc)
    # domains sorted: attack in (no, yes); ageband in (mid, old, young)
    assert jt.mass(0, (1,)) == pytest.approx(1 / 5)  # no, old
    assert jt.mass(1, (1,)) == pytest.approx(1 / 5)  # yes, old
    assert jt.mass(1, (0,)) == pytest.approx(1 / 5)  # yes, mid
    assert jt.mass(0, (2,)) == pytest.approx(1 / 5)  # no, young
    assert jt.mass(1, (2,)) == pytest.approx(1 / 5)  # yes, young


def test_entropy_values():
    assert entropy(np.array([1.0])) == 0.0
    assert entropy(np.array([0.5, 0.5])) == pytest.approx(math.log(2), abs=1e-12)
    assert entropy(np.array([0.4, 0.6])) == pytest.approx(
        -(0.4 * math.log(0.4) + 0.6 * math.log(0.6)), abs=1e-12
    )
    assert entropy(np.array([0.4, 0.6])) == pytest.approx(0.6730, abs=1e-4)


def test_mutual_information_independent():
    assert mutual_information(np.full((2, 2), 0.25)) == 0.0


def test_mutual_information_diagonal():
    assert mutual_information(np.diag([0.5, 0.5])) == pytest.approx(math.log(2), abs=1e-12)


def test_mutual_information_direct_sum():
    joint = np.array([[0.4, 0.1], [0.1, 0.4]])
    # oracle: direct summation
    expected = sum(
        joint[i, j] * math.log(joint[i, j] / (joint[i].sum() * joint[:, j].sum()))
        for i in range(2)
        for j in range(2)
    )
    assert mutual_information(joint) == pytest.approx(expected, abs=1e-12)
    assert mutual_information(joint) == pytest.approx(0.1927, abs=1e-4)


def test_weighted_mi_unit_weights_equals_mi():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = 60
        ds = make_ds(
            {
                "x": [str(v) for v in rng.integers(0, 3, n)],
                "y": [str(v) for v in rng.integers(0, 2, n)],
            }
        )
        disc = discretize_all(ds)
        pair = APPair("x", ("y",))
        jt = joint_table(ds, pair, disc)
        iw = weighted_mutual_information(ds, np.ones(n), pair, disc)
        assert iw == pytest.approx(mutual_information(jt), abs=1e-12)


def test_weighted_mi_constant_weights_scale():
    rng = np.random.default_rng(1)
    n = 50
    ds = make_ds(
        {
            "x": [str(v) for v in rng.integers(0, 2, n)],
            "y": [str(v) for v in rng.integers(0, 2, n)],
        }
    )
    disc = discretize_all(ds)
    pair = APPair("x", ("y",))
    base = weighted_mutual_information(ds, np.ones(n), pair, disc)
    scaled = weighted_mutual_information(ds, np.full(n, 3.0), pair, disc)
    assert scaled == pytest.approx(3.0 * base, abs=1e-12)


def test_weighted_mi_matches_brute_force():
    rng = np.random.default_rng(2)
    n = 40
    ds = make_ds(
        {
            "x": [str(v) for v in rng.integers(0, 3, n)],
            "y": [str(v) for v in rng.integers(0, 2, n)],
        }
    )
    disc = discretize_all(ds)
    weights = np.ones(n)
    weights[:8] = 5.0
    got = weighted_mutual_information(ds, weights, APPair("x", ("y",)), disc)
    expected = brute_force_weighted_mi(ds, weights, "x", ("y",), disc)
    assert got == pytest.approx(expected, abs=1e-9)


def test_learn_structure_single_attribute():
    ds = make_ds({"x": ["0", "1"]})
    disc = discretize_all(ds)
    net = learn_structure(ds, disc, k=2, epsilon1=1.0, src=NoiseSource(0))
    assert net.order == ("x",)
    assert net.pairs[0].parents == ()


def test_learn_structure_k0_product():
    ds = make_ds({"x": ["0", "1"], "y": ["0", "1"]})
    disc = discretize_all(ds)
    net = learn_structure(ds, disc, k=0, epsilon1=1.0, src=NoiseSource(0))
    assert all(p.parents == () for p in net.pairs)


def test_learn_structure_oracle_copy_pair():
    # y and x are copies; z is independent noise
    rng = np.random.default_rng(3)
    y = [str(v) for v in rng.integers(0, 2, 200)]
    z = [str(v) for v in rng.integers(0, 2, 200)]
    ds = make_ds({"y": y, "x": list(y), "z": z})
    disc = discretize_all(ds)
    net = learn_structure(ds, disc, k=1)  # oracle mode
    # oracle root: lexicographically smallest = "x"; then y <- x; z ties x/y -> x
    assert net.order[0] == "x"
    by_child = {p.child: p.parents for p in net.pairs}
    assert by_child["y"] == ("x",)
    assert by_child["z"] == ("x",)


def test_learn_structure_oracle_matches_argmax_enumerator():
    rng = np.random.default_rng(4)
    n = 80
    ds = make_ds(
        {name: [str(v) for v in rng.integers(0, 2, n)] for name in ("a", "b", "c", "d")}
    )
    disc = discretize_all(ds)
    net = learn_structure(ds, disc, k=2)
    # oracle replay: greedy argmax with lexicographic ties, scored independently
    ones = np.ones(n)
    visited = ["a"]  # lexicographic root
    remaining = ["b", "c", "d"]
    for pair in net.pairs[1:]:
        width = min(2, len(visited))
        best, best_score = None, -np.inf
        for child in sorted(remaining):
            for parents in itertools.combinations(sorted(visited), width):
                score = brute_force_weighted_mi(ds, ones, child, parents, disc)
                if score > best_score + 1e-12:
                    best, best_score = (child, tuple(sorted(parents))), score
        assert (pair.child, pair.parents) == best
        visited.append(pair.child)
        remaining.remove(pair.child)


def test_learn_structure_validity_over_seeds():
    rng = np.random.default_rng(5)
    n = 60
    ds = make_ds(
        {name: [str(v) for v in rng.integers(0, 2, n)] for name in ("a", "b", "c", "d")}
    )
    disc = discretize_all(ds)
    for seed in range(50):
        net = learn_structure(ds, disc, k=2, epsilon1=1.0, src=NoiseSource(seed))
        topological_order(net)  # raises if invalid
        assert all(len(p.parents) <= 2 for p in net.pairs)
        assert sorted(net.order) == ["a", "b", "c", "d"]


def test_learn_structure_budget_draws():
    from privcharts.mechanisms import BudgetLedger

    rng = np.random.default_rng(6)
    n = 50
    ds = make_ds(
        {name: [str(v) for v in rng.integers(0, 2, n)] for name in ("a", "b", "c", "d", "e")}
    )
    disc = discretize_all(ds)
    ledger = BudgetLedger(1.0)
    learn_structure(ds, disc, k=1, epsilon1=1.0, src=NoiseSource(0), ledger=ledger)
    events = [e for e in ledger.events if e.stage == "structure"]
    assert len(events) == ds.d - 1
    assert all(e.epsilon == pytest.approx(1.0 / (ds.d - 1)) for e in events)


def test_monotone_steering():
    ds, p_rows = steering_pair()
    disc = discretize_all(ds)
    fractions = []
    for w in (0.0, 1.0, 4.0, 16.0):
        weights = np.ones(ds.n)
        weights[p_rows] += w
        count = 0
        for seed in range(100):
            net = learn_structure(
                ds, disc, weights=weights, k=1, epsilon1=1.0,
                src=NoiseSource(5000 + seed), weight_ceiling=1.0 + w,
            )
            count += ("u", "v") in net.edges or ("v", "u") in net.edges
        fractions.append(count / 100)
    assert all(a <= b for a, b in zip(fractions, fractions[1:])), fractions


def test_mi_sensitivity_value():
    n = 1000
    expected = (2 / n) * math.log((n + 1) / 2) + ((n - 1) / n) * math.log((n + 1) / (n - 1))
    assert mi_sensitivity(n) == pytest.approx(expected, abs=1e-15)


# ---------------------------------------------------------------------------
# KL decomposition
# ---------------------------------------------------------------------------


def full_joint_kl(ds, net, disc):
    """Oracle: enumerate the full joint and the factored model cell by cell."""
    binned = BinnedData(ds, disc)
    order = list(net.order)
    dims = [binned.dims[v] for v in order]
    counts, _ = binned.counts(order)
    p = counts / ds.n
    conds = {}
    for pair in net.pairs:
        jt = joint_table(ds, pair, disc)
        parent_mass = jt.probs.sum(axis=0, keepdims=True)
        conds[pair.child] = (pair, np.divide(jt.probs, parent_mass, out=np.zeros_like(jt.probs), where=parent_mass > 0))
    kl = 0.0
    idx = {v: i for i, v in enumerate(order)}
    for cell in itertools.product(*[range(d) for d in dims]):
        mass = p[cell]
        if mass == 0:
            continue
        model = 1.0
        for pair, cond in conds.values():
            coords = (cell[idx[pair.child]], *[cell[idx[par]] for par in pair.parents])
            model *= cond[coords]
        kl += mass * math.log(mass / model)
    return kl


def test_kl_identity_independent_product():
    ds = make_ds({"x": ["0", "0", "1", "1"], "y": ["0", "1", "0", "1"]})
    disc = discretize_all(ds)
    net = BayesianNetwork(pairs=(APPair("x"), APPair("y")), k=0)
    lhs, rhs = kl_decomposition_check(ds, net, disc)
    assert lhs == pytest.approx(0.0, abs=1e-12)
    assert rhs == pytest.approx(0.0, abs=1e-12)


def test_kl_identity_chain_matches_oracle():
    rng = np.random.default_rng(7)
    n = 200
    ds = make_ds(
        {
            "a": [str(v) for v in rng.integers(0, 3, n)],
            "b": [str(v) for v in rng.integers(0, 2, n)],
            "c": [str(v) for v in rng.integers(0, 2, n)],
        }
    )
    disc = discretize_all(ds)
    net = BayesianNetwork(
        pairs=(APPair("a"), APPair("b", ("a",)), APPair("c", ("b",))), k=1
    )
    lhs, rhs = kl_decomposition_check(ds, net, disc)
    assert abs(lhs - rhs) <= 1e-9
    assert lhs == pytest.approx(full_joint_kl(ds, net, disc), abs=1e-9)


def test_kl_full_conditioning_zero():
    rng = np.random.default_rng(8)
    n = 100
    ds = make_ds(
        {
            "a": [str(v) for v in rng.integers(0, 2, n)],
            "b": [str(v) for v in rng.integers(0, 2, n)],
            "c": [str(v) for v in rng.integers(0, 2, n)],
        }
    )
    disc = discretize_all(ds)
    net = BayesianNetwork(
        pairs=(APPair("a"), APPair("b", ("a",)), APPair("c", ("a", "b"))), k=2
    )
    lhs, rhs = kl_decomposition_check(ds, net, disc)
    assert lhs == pytest.approx(0.0, abs=1e-9)
    assert abs(lhs - rhs) <= 1e-9
