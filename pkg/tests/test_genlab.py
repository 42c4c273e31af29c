import io

import numpy as np
import pytest

from attractor_control.errors import NoFixedPoint
from attractor_control.formats import serialize_network
from attractor_control.genlab import (
    COLUMNS,
    GenSpec,
    bootstrap_fraction,
    cell_seed,
    generate,
    matched_er,
    pick_attractor,
    random_network,
    random_threshold_ruleset_network,
    run_trend_experiment,
    scale_free_edges,
)
from attractor_control.network import RegulatoryNetwork, Threshold, step_synchronous
from attractor_control.reduction import signed_classes


def test_edgeless_er():
    net = generate(GenSpec("erdos_renyi", n=5, p=0.0, seed=1))
    assert net.edges() == []


def test_scale_free_tree_is_deterministic():
    a = generate(GenSpec("scale_free", n=5, m=1, seed=7))
    b = generate(GenSpec("scale_free", n=5, m=1, seed=7))
    assert len(a.edges()) == 4
    assert serialize_network(a) == serialize_network(b)


def test_hierarchical_size_and_symmetry():
    net = generate(GenSpec("hierarchical", k=3, depth=2))
    assert net.n == 16
    edges = set(net.edges())
    assert all((i, j) in edges for j, i in edges)


def test_block_cactus_size():
    assert generate(GenSpec("block_cactus", block_sizes=(3, 2, 4), seed=0)).n == 9


def test_spec_validation():
    with pytest.raises(ValueError):
        GenSpec("small_world")
    with pytest.raises(ValueError):
        GenSpec("erdos_renyi", p=1.5)
    with pytest.raises(ValueError):
        GenSpec("erdos_renyi", n=0)


def test_generated_networks_are_purely_signed():
    for family in ("erdos_renyi", "scale_free", "hierarchical", "block_cactus"):
        for seed in range(5):
            signed_classes(generate(GenSpec(family, n=12, seed=seed, block_sizes=(3, 4))))


def test_scale_free_max_degree_grows():
    def max_degree(n):
        degs = []
        for seed in range(10):
            deg = np.zeros(n)
            for u, v in scale_free_edges(n, 1, np.random.default_rng(seed)):
                deg[u] += 1
                deg[v] += 1
            degs.append(deg.max())
        return np.mean(degs)
    assert max_degree(200) > max_degree(20)


def test_pick_attractor_examples():
    exc = RegulatoryNetwork([Threshold((1,), (1,), 0), Threshold((0,), (1,), 0)])
    assert pick_attractor(exc) == (1, 1)
    edgeless = RegulatoryNetwork([Threshold((), (), 1)] * 3)
    assert pick_attractor(edgeless) == (0, 0, 0)
    net = generate(GenSpec("scale_free", n=12, m=2, seed=5))
    x = pick_attractor(net)
    assert step_synchronous(net, x) == x
    with pytest.raises(NoFixedPoint):
        pick_attractor(RegulatoryNetwork([Threshold((0,), (-1,), 0)]))


def test_planted_fixed_points():
    rng = np.random.default_rng(0)
    for kind in ("truth_table", "threshold", "nested_canalyzing"):
        x = tuple(int(b) for b in rng.integers(0, 2, 6))
        net = random_network(rng, 6, kind, x_star=x)
        assert step_synchronous(net, x) == x
    net, x = random_threshold_ruleset_network(rng, 6, 3)
    for xi in range(3):
        assert tuple(r.alternatives[xi].evaluate(x) for r in net.rules) == x


def test_matched_er_edge_count():
    assert matched_er(1, 2) == 0.0
    n, m = 20, 2
    edges = sum(len(generate(GenSpec("scale_free", n=n, m=m, seed=s)).edges()) for s in range(5)) / 5
    assert matched_er(n, m) * n * (n - 1) == pytest.approx(edges)


def test_cell_seed_is_stable():
    assert cell_seed(1, 2, 3) == cell_seed(1, 2, 3)
    assert cell_seed(1, 2, 3) != cell_seed(1, 3, 2)


def test_trend_experiment_rows_are_verified_and_deterministic():
    specs = [GenSpec("scale_free", n=8, m=2), GenSpec("erdos_renyi", n=8, p=matched_er(8, 2))]
    a = run_trend_experiment(specs, trials=4, solvers=("tss_greedy", "tss_exact", "cycle_baseline"), seed=3)
    b = run_trend_experiment(specs, trials=4, solvers=("tss_greedy", "tss_exact", "cycle_baseline"), seed=3)
    assert not a.errors
    assert len(a.rows) == 24
    assert all(r["verified"] and r["input_count"] <= r["n"] for r in a.rows)
    strip = lambda res: [{k: v for k, v in r.items() if k != "runtime_ms"} for r in res.rows]  # noqa: E731
    assert strip(a) == strip(b)
    exact = a.counts(solver="tss_exact")
    assert (exact <= a.counts(solver="tss_greedy")).all()
    buf = io.StringIO()
    a.write_csv(buf)
    assert buf.getvalue().splitlines()[0] == ",".join(COLUMNS)
    buf = io.StringIO()
    a.write_aggregate_csv(buf)
    assert len(buf.getvalue().splitlines()) == 1 + 6
    assert a.metadata["er_p_default"] == 0.3 and a.metadata["trials_default"] == 20


def test_bootstrap_fraction():
    assert bootstrap_fraction([0, 0, 0], [1, 1, 1], strict=True) == 1.0
    assert bootstrap_fraction([1, 1, 1], [0, 0, 0]) == 0.0
    assert bootstrap_fraction([-1, -2, -1]) == 1.0
