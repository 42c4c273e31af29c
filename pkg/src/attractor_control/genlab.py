"""Random network generators and the input-count experiment harness."""
from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ControlError, NoFixedPoint, SearchBudgetExceeded
from .network import (
    NestedCanalyzing,
    RegulatoryNetwork,
    RuleSet,
    Threshold,
    TruthTable,
    find_fixed_points,
)
from .reduction import build_threshold_tss
from .structured import solve_cycle_baseline
from .tss import solve_exact, solve_greedy
from .verify import verify_exhaustive, verify_monte_carlo

log = logging.getLogger(__name__)

FAMILIES = ("erdos_renyi", "scale_free", "hierarchical", "block_cactus")
DEFAULT_ER_P = 0.3
DEFAULT_TRIALS = 20
MAX_REGENERATE = 10


@dataclass(frozen=True)
class GenSpec:
    """Parameters of one random signed threshold network.

    ``sign_prob`` is the chance that a node is excitatory; ``tau`` is a
    common threshold or one value per node.
    """

    family: str
    n: int = 10
    seed: int = 0
    p: float = DEFAULT_ER_P
    m: int = 2
    k: int = 3
    depth: int = 2
    block_sizes: tuple = ()
    sign_prob: float = 0.5
    tau: object = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if not 0.0 <= self.p <= 1.0 or not 0.0 <= self.sign_prob <= 1.0:
            raise ValueError("probabilities must lie in [0, 1]")
        if self.family == "hierarchical":
            object.__setattr__(self, "n", (self.k + 1) ** self.depth)
        if self.family == "block_cactus":
            sizes = tuple(int(s) for s in self.block_sizes) or (self.n,)
            if any(s < 1 for s in sizes):
                raise ValueError("block sizes must be positive")
            object.__setattr__(self, "block_sizes", sizes)
            object.__setattr__(self, "n", sum(sizes))
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.family == "scale_free" and self.m < 1:
            raise ValueError("scale-free attachment needs m >= 1")

    @property
    def param(self):
        return {
            "erdos_renyi": self.p,
            "scale_free": self.m,
            "hierarchical": f"{self.k}x{self.depth}",
            "block_cactus": "-".join(map(str, self.block_sizes)),
        }[self.family]


# ---------------------------------------------------------------------------
# topologies
# ---------------------------------------------------------------------------

def er_edges(n, p, rng):
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    return [(int(j), int(i)) for j, i in zip(*np.nonzero(mask))]


def scale_free_edges(n, m, rng):
    """Preferential attachment with weight degree + 1; each edge gets a random direction."""
    deg = np.zeros(n)
    edges = []
    for t in range(1, n):
        w = deg[:t] + 1.0
        picks = rng.choice(t, size=min(m, t), replace=False, p=w / w.sum())
        for u in sorted(int(u) for u in picks):
            edges.append((t, u) if rng.random() < 0.5 else (u, t))
            deg[t] += 1
            deg[u] += 1
    return edges


def hierarchical_edges(k, depth):
    """Symmetric hub-and-copies graph with the hub at node 0."""
    edges = {(u, v) for u in range(k + 1) for v in range(k + 1) if u != v}
    size = k + 1
    for _ in range(2, depth + 1):
        base = sorted(edges)
        for c in range(1, k + 1):
            off = c * size
            edges |= {(u + off, v + off) for u, v in base}
            edges |= {(0, off), (off, 0)}
        size *= k + 1
    return sorted(edges)


def block_cactus_edges(sizes, rng):
    """Complete symmetric blocks joined in a random tree by single directed arcs."""
    offs = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    edges = []
    for b, s in enumerate(sizes):
        nodes = range(offs[b], offs[b] + s)
        edges += [(u, v) for u in nodes for v in nodes if u != v]
    for b in range(1, len(sizes)):
        a = int(rng.integers(b))
        u = int(offs[a] + rng.integers(sizes[a]))
        v = int(offs[b] + rng.integers(sizes[b]))
        edges.append((u, v) if rng.random() < 0.5 else (v, u))
    return edges


def blocks_of(spec: GenSpec) -> list:
    offs = np.concatenate([[0], np.cumsum(spec.block_sizes)]).astype(int)
    return [list(range(offs[b], offs[b + 1])) for b in range(len(spec.block_sizes))]


def signed_threshold_network(n, edges, signs, tau) -> RegulatoryNetwork:
    ins = [[] for _ in range(n)]
    for j, i in sorted(set(edges)):
        ins[i].append(j)
    taus = [tau] * n if np.isscalar(tau) else list(tau)
    rules = [Threshold(tuple(r), tuple(int(signs[j]) for j in r), taus[i]) for i, r in enumerate(ins)]
    return RegulatoryNetwork(rules)


def generate(spec: GenSpec) -> RegulatoryNetwork:
    """Signed threshold network for ``spec``; node signs are drawn once per node."""
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    signs = np.where(rng.random(n) < spec.sign_prob, 1, -1)
    if spec.family == "erdos_renyi":
        edges = er_edges(n, spec.p, rng)
    elif spec.family == "scale_free":
        edges = scale_free_edges(n, spec.m, rng)
    elif spec.family == "hierarchical":
        edges = hierarchical_edges(spec.k, spec.depth)
    else:
        edges = block_cactus_edges(spec.block_sizes, rng)
    return signed_threshold_network(n, edges, signs, spec.tau)


def pick_attractor(net: RegulatoryNetwork) -> tuple:
    """Lexicographically smallest fixed point."""
    found = find_fixed_points(net, limit=1)
    if not found:
        raise NoFixedPoint("network has no fixed point")
    return found[0]


# ---------------------------------------------------------------------------
# random rules with a planted fixed point (test corpora)
# ---------------------------------------------------------------------------

def _random_inputs(rng, n, max_fan_in, exclude=None):
    pool = [j for j in range(n) if j != exclude]
    d = int(rng.integers(0, min(max_fan_in, len(pool)) + 1))
    return tuple(sorted(int(j) for j in rng.choice(pool, size=d, replace=False)))


def random_truth_table(rng, inputs, x_star=None, value=None):
    table = rng.integers(0, 2, size=1 << len(inputs))
    if x_star is not None:
        idx = 0
        for j in inputs:
            idx = (idx << 1) | x_star[j]
        table[idx] = value
    return TruthTable(inputs, tuple(int(b) for b in table))


def random_threshold(rng, inputs, x_star=None, value=None, signs=None):
    ws = tuple(int(signs[j]) if signs is not None else int(rng.choice((-1, 1))) for j in inputs)
    tau = int(rng.integers(-1, len(inputs) + 1))
    if x_star is not None:
        s = sum(w for j, w in zip(inputs, ws) if x_star[j])
        tau = min(tau, s) if value == 1 else max(tau, s + 1)
    return Threshold(inputs, ws, tau)


def random_nested_canalyzing(rng, inputs, x_star=None, value=None):
    while True:
        order = tuple(int(j) for j in rng.permutation(list(inputs)))
        d = len(order)
        rule = NestedCanalyzing(order, tuple(rng.integers(0, 2, d)), tuple(rng.integers(0, 2, d)),
                                int(rng.integers(0, 2)))
        if x_star is None or rule.evaluate(x_star) == value:
            return rule


def random_network(rng, n, kind="truth_table", max_fan_in=3, x_star=None, signed=True):
    """Random network of one rule class, fixing ``x_star`` when given.

    ``kind`` is ``truth_table``, ``threshold`` (purely signed when
    ``signed``) or ``nested_canalyzing``.
    """
    signs = rng.choice((-1, 1), size=n) if kind == "threshold" and signed else None
    rules = []
    for i in range(n):
        inputs = _random_inputs(rng, n, max_fan_in)
        value = None if x_star is None else x_star[i]
        if kind == "truth_table":
            rules.append(random_truth_table(rng, inputs, x_star, value))
        elif kind == "threshold":
            rules.append(random_threshold(rng, inputs, x_star, value, signs))
        elif kind == "nested_canalyzing":
            if not inputs:
                inputs = (int(rng.integers(n)),)
            rules.append(random_nested_canalyzing(rng, inputs, x_star, value))
        else:
            raise ValueError(f"unknown rule kind {kind!r}")
    return RegulatoryNetwork(rules)


def random_threshold_ruleset_network(rng, n, alternatives=2, max_fan_in=3, x_star=None,
                                     self_loops=True):
    """Signed threshold network whose nodes choose among thresholds each step.

    Alternatives share inputs and weights and differ only in tau; every
    alternative fixes ``x_star``.
    """
    if x_star is None:
        x_star = tuple(int(b) for b in rng.integers(0, 2, n))
    signs = rng.choice((-1, 1), size=n)
    rules = []
    for i in range(n):
        inputs = _random_inputs(rng, n, max_fan_in, None if self_loops else i)
        ws = tuple(int(signs[j]) for j in inputs)
        s = sum(w for j, w in zip(inputs, ws) if x_star[j])
        if x_star[i]:
            taus = [s - int(rng.integers(0, 3)) for _ in range(alternatives)]
        else:
            taus = [s + 1 + int(rng.integers(0, 3)) for _ in range(alternatives)]
        rules.append(RuleSet(tuple(Threshold(inputs, ws, t) for t in taus)))
    return RegulatoryNetwork(rules), x_star


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

COLUMNS = ("family", "n", "param", "solver", "trial", "input_count", "runtime_ms", "verified")
SOLVERS = ("tss_greedy", "tss_exact", "cycle_baseline")


@dataclass
class ExperimentResult:
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)

    def write_csv(self, sink) -> None:
        w = csv.writer(sink, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow([r[c] for c in COLUMNS])

    def aggregate(self) -> list:
        """Mean and standard deviation of input counts per (family, n, param, solver)."""
        cells = {}
        for r in self.rows:
            cells.setdefault((r["family"], r["n"], r["param"], r["solver"]), []).append(r["input_count"])
        out = []
        for key, vals in cells.items():
            a = np.asarray(vals, dtype=float)
            out.append(dict(zip(("family", "n", "param", "solver"), key),
                            mean=float(a.mean()), std=float(a.std(ddof=1)) if len(a) > 1 else 0.0,
                            count=len(a)))
        return out

    def write_aggregate_csv(self, sink) -> None:
        w = csv.writer(sink, lineterminator="\n")
        cols = ("family", "n", "param", "solver", "mean", "std", "count")
        w.writerow(cols)
        for r in self.aggregate():
            w.writerow([r[c] if not isinstance(r[c], float) else f"{r[c]:.6g}" for c in cols])

    def counts(self, **match) -> np.ndarray:
        return np.asarray([r["input_count"] for r in self.rows
                           if all(r[k] == v for k, v in match.items())], dtype=float)


def cell_seed(master: int, *path) -> int:
    return int(np.random.SeedSequence([int(master), *map(int, path)]).generate_state(1)[0])


def _certify(net, x_star, members, mc_trials, seed):
    pins = {i: x_star[i] for i in members}
    if net.n - len(pins) <= 16:
        return verify_exhaustive(net, x_star, pins).ok
    return verify_monte_carlo(net, x_star, pins, "sync", mc_trials, seed).ok


def run_trend_experiment(specs, trials: int = DEFAULT_TRIALS, solvers=("tss_greedy",),
                         seed: int = 0, mc_trials: int = 100, verify: bool = True) -> ExperimentResult:
    """Input counts for every (spec, trial, solver).

    Each trial regenerates the network from a seed derived from
    ``(seed, cell, trial, attempt)``, retrying up to ten times when it has
    no fixed point. The target is the smallest fixed point. TSS solvers
    work on the signed threshold instance; the baseline works on the
    regulatory graph. Every recorded set is verified; failures are recorded
    rather than raised.
    """
    res = ExperimentResult(metadata={
        "trials": trials, "seed": seed, "solvers": list(solvers),
        "er_p_default": DEFAULT_ER_P, "trials_default": DEFAULT_TRIALS,
        "regenerated": 0,
    })
    for cell, spec in enumerate(specs):
        for t in range(trials):
            net = x_star = None
            for attempt in range(MAX_REGENERATE):
                net = generate(replace(spec, seed=cell_seed(seed, cell, t, attempt)))
                try:
                    x_star = pick_attractor(net)
                    break
                except (NoFixedPoint, SearchBudgetExceeded):
                    res.metadata["regenerated"] += 1
            if x_star is None:
                res.errors.append({"cell": cell, "trial": t, "error": "no fixed point"})
                continue
            inst = build_threshold_tss(net, x_star)
            for solver in solvers:
                start = time.perf_counter()
                try:
                    if solver == "tss_greedy":
                        S = solve_greedy(inst)
                    elif solver == "tss_exact":
                        S = solve_exact(inst)
                    elif solver == "cycle_baseline":
                        S = solve_cycle_baseline(net)
                    else:
                        raise ValueError(f"unknown solver {solver!r}")
                except ControlError as exc:
                    res.errors.append({"cell": cell, "trial": t, "solver": solver, "error": str(exc)})
                    continue
                ms = (time.perf_counter() - start) * 1000.0
                ok = _certify(net, x_star, S.members, mc_trials, cell_seed(seed, cell, t)) if verify else False
                if verify and not ok:
                    log.warning("unverified set for cell %d trial %d solver %s", cell, t, solver)
                res.rows.append({
                    "family": spec.family, "n": spec.n, "param": spec.param, "solver": solver,
                    "trial": t, "input_count": len(S), "runtime_ms": round(ms, 3), "verified": ok,
                })
    return res


def matched_er(n: int, m: int) -> float:
    """ER edge probability giving the scale-free model's edge count."""
    if n < 2:
        return 0.0
    edges = sum(min(m, t) for t in range(1, n))
    return min(1.0, edges / (n * (n - 1)))


# ---------------------------------------------------------------------------
# bootstrap
# ---------------------------------------------------------------------------

def bootstrap_fraction(a, b=None, n_boot: int = 2000, seed: int = 0, strict: bool = False) -> float:
    """Fraction of bootstrap resamples with mean(a) <= mean(b) (< when ``strict``).

    With ``b`` None, ``a`` holds paired differences and the comparison is
    against zero.
    """
    rng = np.random.default_rng(seed)
    a = np.asarray(a, dtype=float)
    ia = rng.integers(0, len(a), size=(n_boot, len(a)))
    ma = a[ia].mean(axis=1)
    if b is None:
        mb = np.zeros(n_boot)
    else:
        b = np.asarray(b, dtype=float)
        mb = b[rng.integers(0, len(b), size=(n_boot, len(b)))].mean(axis=1)
    hit = ma < mb if strict else ma <= mb
    return float(hit.mean())
