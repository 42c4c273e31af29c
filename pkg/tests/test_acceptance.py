"""Acceptance criteria 1 to 9, one test each.

Every test prints a ``PASS criterion N`` or ``FAIL criterion N`` line with
the measured figures before asserting, so a single ``pytest -s -m
acceptance`` run (or a plain ``pytest -v`` run, via the summary hook in
conftest) shows the whole scorecard.
"""

import itertools
import math
import time

import numpy as np
import pytest

from attractor_control.formats import parse_network_document, parse_tss, serialize_network, serialize_tss
from attractor_control.genlab import (
    GenSpec,
    bootstrap_fraction,
    generate,
    matched_er,
    random_network,
    random_nested_canalyzing,
    random_threshold,
    random_threshold_ruleset_network,
    random_truth_table,
    run_trend_experiment,
)
from attractor_control.network import (
    Attractor,
    RuleSet,
    Threshold,
    all_attractors,
    evaluate_rule,
    find_fixed_points,
)
from attractor_control.reduction import (
    build_augmented,
    build_cyclic,
    build_nc_full,
    build_nc_unanimous,
    build_threshold_tss,
    merge_probabilistic,
    merged_network,
    rule_to_cnf,
)
from attractor_control.structured import (
    CliquePartition,
    HierarchySpec,
    unanimous_conditions,
    solve_block_cactus,
    solve_clique,
    solve_cycle_baseline,
    solve_hierarchical,
    solve_unanimous_fvs,
)
from attractor_control.tss import TssInstance, closure, is_target_set, solve_exact, solve_greedy
from attractor_control.verify import verify_cyclic, verify_exhaustive, verify_monte_carlo

pytestmark = pytest.mark.acceptance

KINDS = ("truth_table", "threshold", "nested_canalyzing")
RESULTS = {}


def report(number, ok, detail, elapsed=None, budget=None):
    """Record and print one scorecard line; the runtime target counts toward ok."""
    if budget is not None and elapsed > budget:
        ok = False
        detail += f"; runtime {elapsed:.0f}s over the {budget}s target"
    elif elapsed is not None:
        detail += f"; {elapsed:.1f}s"
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    RESULTS[number] = line
    print(line)
    return ok


def planted(rng, n):
    return tuple(int(b) for b in rng.integers(0, 2, n))


def pins_of(x_star, members):
    return {i: x_star[i] for i in members}


# ---------------------------------------------------------------------------
# 1. every solver-produced set converges from every pin-consistent start
# ---------------------------------------------------------------------------

def _deterministic_cases(rng, kind, count):
    for _ in range(count):
        n = int(rng.integers(1, 11))
        x = planted(rng, n)
        net = random_network(rng, n, kind, x_star=x)
        sets = {}
        aug = build_augmented(net, x)
        sets["augmented/exact"] = aug.genes(solve_exact(aug).members)
        sets["augmented/greedy"] = aug.genes(solve_greedy(aug).members)
        sets["augmented/minimized"] = aug.genes(solve_exact(build_augmented(net, x, minimize=True)).members)
        sets["cycle_baseline"] = solve_cycle_baseline(net).members
        if kind == "threshold":
            thr = build_threshold_tss(net, x)
            sets["threshold/exact"] = solve_exact(thr).members
            sets["threshold/greedy"] = solve_greedy(thr).members
        if kind == "nested_canalyzing":
            full = build_nc_full(net, x)
            sets["nc_full/exact"] = full.genes(solve_exact(full).members)
            una = build_nc_unanimous(net, x)
            sets["nc_unanimous/exact"] = una.genes(solve_exact(una).members)
            sets["nc_unanimous/fvs"] = una.genes(solve_unanimous_fvs(una).members)
        yield kind, net, x, sets


def _structured_cases(rng, count):
    made = 0
    while made < count:
        choice = made % 3
        tau = [int(t) for t in rng.integers(-1, 3, 10)]
        if choice == 0:
            spec = GenSpec("block_cactus", block_sizes=(int(rng.integers(1, 11)),), seed=int(rng.integers(1 << 30)))
        elif choice == 1:
            sizes = tuple(int(s) for s in rng.integers(1, 5, int(rng.integers(2, 4))))
            spec = GenSpec("block_cactus", block_sizes=sizes, seed=int(rng.integers(1 << 30)))
        else:
            k, depth = ((1, 2), (2, 2), (1, 3))[int(rng.integers(3))]
            spec = GenSpec("hierarchical", k=k, depth=depth, seed=int(rng.integers(1 << 30)))
        net = generate(GenSpec(**{**spec.__dict__, "tau": tuple(tau[:spec.n])}))
        fps = find_fixed_points(net)
        if not fps:
            continue
        x = fps[int(rng.integers(len(fps)))]
        inst = build_threshold_tss(net, x)
        sets = {"threshold/exact": solve_exact(inst).members}
        if choice == 0:
            sets["clique"] = solve_clique(inst).members
        elif choice == 1:
            offsets = np.cumsum((0,) + spec.block_sizes)
            blocks = [range(offsets[b], offsets[b + 1]) for b in range(len(spec.block_sizes))]
            sets["block_cactus"] = solve_block_cactus(inst, CliquePartition.from_blocks(inst, blocks)).members
        else:
            sets["hierarchical"] = solve_hierarchical(inst, HierarchySpec(spec.k, spec.depth)).members
        made += 1
        yield spec.family, net, x, sets


def test_criterion_1_sufficiency():
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    nets = checks = 0
    failures = []

    def record(label, ok):
        nonlocal checks
        checks += 1
        if not ok:
            failures.append(label)

    cases = itertools.chain(*(_deterministic_cases(rng, kind, 50) for kind in KINDS),
                            _structured_cases(rng, 30))
    for kind, net, x, sets in cases:
        nets += 1
        for name, members in sets.items():
            pins = pins_of(x, members)
            record(f"{kind} {name} sync", verify_exhaustive(net, x, pins).ok)
            record(f"{kind} {name} async", verify_exhaustive(net, x, pins, schedule="async").ok)

    made = 0
    while made < 40:
        n = int(rng.integers(1, 8))
        net = random_network(rng, n, "truth_table")
        cycles = [a for a in all_attractors(net) if len(a) > 1]
        if not cycles:
            continue
        made += 1
        nets += 1
        att = cycles[int(rng.integers(len(cycles)))]
        inst = build_cyclic(net, att)
        for name, S in (("exact", solve_exact(inst)), ("greedy", solve_greedy(inst))):
            record(f"cyclic {name}", verify_cyclic(net, att, inst.genes(S.members)).ok)

    for _ in range(40):
        n = int(rng.integers(1, 9))
        net, x = random_threshold_ruleset_network(rng, n, alternatives=int(rng.integers(2, 4)))
        nets += 1
        for pathway in ("general", "threshold"):
            inst = merge_probabilistic(net, x, pathway)
            for name, S in (("exact", solve_exact(inst)), ("greedy", solve_greedy(inst))):
                pins = pins_of(x, inst.genes(S.members))
                record(f"probabilistic {pathway} {name}",
                       verify_exhaustive(net, x, pins, schedule="stochastic").ok)

    elapsed = time.perf_counter() - start
    ok = report(1, not failures and nets >= 200,
                f"{nets} networks, {checks} exhaustive checks, {len(failures)} counterexamples"
                + (f" (first: {failures[0]})" if failures else ""), elapsed, 300)
    assert ok, RESULTS[1]


# ---------------------------------------------------------------------------
# 2. exact solver against whole-subset enumeration
# ---------------------------------------------------------------------------

def random_tss(rng, m):
    p = float(rng.uniform(0.1, 0.6))
    edges = [(u, v) for u in range(m) for v in range(m) if u != v and rng.random() < p]
    edges += [(u, v) for u, v in edges if rng.random() < 0.15]
    indeg = [0] * m
    for _, v in edges:
        indeg[v] += 1
    tau = [int(rng.integers(-1, indeg[v] + 2)) for v in range(m)]
    return TssInstance.from_edges(m, edges, tau)


def brute_force_size(inst):
    for size in range(inst.m + 1):
        for combo in itertools.combinations(range(inst.m), size):
            if len(closure(inst, combo)) == inst.m:
                return size


def test_criterion_2_exact_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(202)
    mismatches = []
    count = 150
    for t in range(count):
        inst = random_tss(rng, 1 + t % 12)
        got, want = len(solve_exact(inst, restrict_to_original=False)), brute_force_size(inst)
        if got != want:
            mismatches.append((t, got, want))
    elapsed = time.perf_counter() - start
    ok = report(2, not mismatches, f"{count} instances (m 1..12), {len(mismatches)} mismatches", elapsed, 120)
    assert ok, RESULTS[2]


# ---------------------------------------------------------------------------
# 3. clique and block-cactus solvers are exact
# ---------------------------------------------------------------------------

def _signed_instance(rng, spec):
    net = generate(spec)
    fps = find_fixed_points(net)
    if not fps:
        return None
    return build_threshold_tss(net, fps[int(rng.integers(len(fps)))])


def test_criterion_3_clique_and_cactus():
    start = time.perf_counter()
    rng = np.random.default_rng(303)
    cliques = cacti = 0
    mismatches = []
    while cliques < 120:
        n = int(rng.integers(1, 11))
        tau = tuple(int(t) for t in rng.integers(-2, n + 1, n))
        spec = GenSpec("block_cactus", block_sizes=(n,), seed=int(rng.integers(1 << 30)),
                       sign_prob=float(rng.uniform()), tau=tau)
        inst = _signed_instance(rng, spec)
        if inst is None:
            continue
        cliques += 1
        got, want = len(solve_clique(inst)), len(solve_exact(inst))
        if got != want:
            mismatches.append(("clique", spec, got, want))
    while cacti < 60:
        sizes = []
        while sum(sizes) < int(rng.integers(2, 13)):
            sizes.append(int(rng.integers(1, 5)))
        if sum(sizes) > 12:
            continue
        n = sum(sizes)
        tau = tuple(int(t) for t in rng.integers(-1, 4, n))
        spec = GenSpec("block_cactus", block_sizes=tuple(sizes), seed=int(rng.integers(1 << 30)),
                       sign_prob=float(rng.uniform()), tau=tau)
        inst = _signed_instance(rng, spec)
        if inst is None:
            continue
        cacti += 1
        offsets = np.cumsum([0] + sizes)
        blocks = [range(offsets[b], offsets[b + 1]) for b in range(len(sizes))]
        got = len(solve_block_cactus(inst, CliquePartition.from_blocks(inst, blocks)))
        want = len(solve_exact(inst))
        if got != want:
            mismatches.append(("cactus", spec, got, want))
    elapsed = time.perf_counter() - start
    ok = report(3, not mismatches,
                f"{cliques} signed cliques, {cacti} block cacti, {len(mismatches)} mismatches", elapsed, 180)
    assert ok, RESULTS[3]


# ---------------------------------------------------------------------------
# 4. unanimous-threshold characterization
# ---------------------------------------------------------------------------

def digraph_classes(n, loops):
    """One labelled representative per isomorphism class of digraphs on n nodes.

    Graphs are bit codes over the allowed (u, v) positions; the canonical
    code is the minimum over all node relabellings. The property checked
    below is invariant under relabelling, so one graph per class with every
    seed subset covers every labelled pair.
    """
    pos = [(u, v) for u in range(n) for v in range(n) if loops or u != v]
    bit = {p: k for k, p in enumerate(pos)}
    codes = np.arange(1 << len(pos), dtype=np.uint32)
    canon = codes.copy()
    for perm in itertools.permutations(range(n)):
        moved = np.zeros_like(codes)
        for k, (u, v) in enumerate(pos):
            moved |= ((codes >> k) & 1) << bit[(perm[u], perm[v])]
        np.minimum(canon, moved, out=canon)
    for code in np.unique(canon).tolist():
        yield [p for k, p in enumerate(pos) if code >> k & 1]


def unanimous(n, edges):
    indeg = [0] * n
    for _, v in edges:
        indeg[v] += 1
    return TssInstance.from_edges(n, edges, indeg)


def _prop6_agrees(inst):
    bad = 0
    for size in range(inst.m + 1):
        for S in itertools.combinations(range(inst.m), size):
            if is_target_set(inst, S) != all(unanimous_conditions(inst, S)):
                bad += 1
    return bad


def test_criterion_4_unanimous_characterization():
    start = time.perf_counter()
    graphs = pairs = bad = 0
    for n, loops in ((1, True), (2, True), (3, True), (4, True), (5, False)):
        for edges in digraph_classes(n, loops):
            graphs += 1
            pairs += 1 << n
            bad += _prop6_agrees(unanimous(n, edges))
    exhaustive = graphs
    rng = np.random.default_rng(404)
    for _ in range(300):
        n = int(rng.integers(1, 9))
        p, q = rng.uniform(0.05, 0.6), rng.uniform(0, 0.3)
        edges = [(u, v) for u in range(n) for v in range(n) if rng.random() < (q if u == v else p)]
        graphs += 1
        pairs += 1 << n
        bad += _prop6_agrees(unanimous(n, edges))
    elapsed = time.perf_counter() - start
    ok = report(4, bad == 0,
                f"{exhaustive} isomorphism classes (all digraphs n<=4 with loops, loop-free n=5) "
                f"plus {graphs - exhaustive} random digraphs n<=8; {pairs} (graph, seed) pairs, "
                f"{bad} disagreements", elapsed)
    assert ok, RESULTS[4]


# ---------------------------------------------------------------------------
# 5. the cycle baseline is dominated
# ---------------------------------------------------------------------------

def test_criterion_5_baseline_dominance():
    start = time.perf_counter()
    rng = np.random.default_rng(505)
    invalid = 0
    diffs = []
    for t in range(150):
        n = int(rng.integers(3, 9))
        x = planted(rng, n)
        net = random_network(rng, n, KINDS[t % 3], x_star=x)
        inst = build_augmented(net, x)
        base = solve_cycle_baseline(net).members
        if not is_target_set(inst, base):
            invalid += 1
        diffs.append(len(solve_exact(inst)) - len(base))
    diffs = np.array(diffs)
    conf = bootstrap_fraction(diffs, strict=True)
    elapsed = time.perf_counter() - start
    ok = report(5, invalid == 0 and diffs.max() <= 0 and conf >= 0.95,
                f"{len(diffs)} networks, {invalid} invalid baseline sets, mean |S| TSS "
                f"minus baseline {diffs.mean():+.3f}, P(mean TSS < mean baseline) {conf:.3f}",
                elapsed, 300)
    assert ok, RESULTS[5]


# ---------------------------------------------------------------------------
# 6. hierarchical approximation ratio
# ---------------------------------------------------------------------------

HIERARCHIES = [(k, 1) for k in range(1, 16)] + [(1, 2), (2, 2), (3, 2), (1, 3), (1, 4)]


def test_criterion_6_hierarchical_bound():
    start = time.perf_counter()
    rng = np.random.default_rng(606)
    count = worst = 0
    violations = []
    for k, depth in HIERARCHIES:
        n = (k + 1) ** depth
        for seed in range(8):
            for tau in (-1, 0, 1, 2, "random"):
                tv = tuple(int(t) for t in rng.integers(-1, 4, n)) if tau == "random" else float(tau)
                net = generate(GenSpec("hierarchical", k=k, depth=depth, seed=seed, tau=tv))
                fps = find_fixed_points(net, limit=1)
                if not fps:
                    continue
                inst = build_threshold_tss(net, fps[0])
                alg = solve_hierarchical(inst, HierarchySpec(k, depth))
                opt = len(solve_exact(inst))
                count += 1
                bound = math.ceil(math.log2(n)) * opt
                valid = is_target_set(inst, alg.members)
                if opt:
                    worst = max(worst, len(alg) / opt)
                if not valid or len(alg) > bound:
                    violations.append((k, depth, seed, tau, len(alg), opt, valid))
    elapsed = time.perf_counter() - start
    ok = report(6, not violations and count > 0,
                f"{count} hierarchical instances (n<=16), worst ratio {worst:.2f}, "
                f"{len(violations)} bound or validity violations", elapsed)
    assert ok, RESULTS[6]


# ---------------------------------------------------------------------------
# 7. merged instances and asynchronous/stochastic convergence
# ---------------------------------------------------------------------------

def extreme_threshold_network(net, x_star):
    """Max threshold on nodes fixed at 1, min threshold on nodes fixed at 0."""
    rules = []
    for i, rule in enumerate(net.rules):
        alts = rule.alternatives if isinstance(rule, RuleSet) else (rule,)
        pick = max if x_star[i] else min
        tau = pick(a.tau for a in alts)
        rules.append(Threshold(alts[0].inputs, alts[0].weights, tau))
    return net.with_rules(rules)


def same_function(a, b, n):
    return all(evaluate_rule(a, x) == evaluate_rule(b, x) for x in itertools.product((0, 1), repeat=n))


def test_criterion_7_probabilistic_and_async():
    start = time.perf_counter()
    rng = np.random.default_rng(707)
    cases = unequal = 0
    worst = {"async_uniform": 1.0, "stochastic_uniform": 1.0}
    trials = 1000
    for case in range(60):
        n = int(rng.integers(2, 9))
        net, x = random_threshold_ruleset_network(rng, n, alternatives=int(rng.integers(2, 4)),
                                                  self_loops=False)
        cases += 1
        extreme = extreme_threshold_network(net, x)
        general = merged_network(net, x)
        if not (merge_probabilistic(net, x, "threshold") == build_threshold_tss(extreme, x)
                and all(same_function(a, b, n) for a, b in zip(general.rules, extreme.rules))):
            unequal += 1
        inst = merge_probabilistic(net, x)
        pins = pins_of(x, inst.genes(solve_exact(inst).members))
        for schedule in worst:
            rep = verify_monte_carlo(net, x, pins, schedule, trials=trials, seed=case, horizon=64 * n)
            worst[schedule] = min(worst[schedule], rep.converged / rep.trials)
    elapsed = time.perf_counter() - start
    ok = report(7, unequal == 0 and all(v == 1.0 for v in worst.values()),
                f"{cases} rule-set networks, {unequal} instance mismatches, {trials} trials per schedule, "
                f"worst convergence async {worst['async_uniform']:.3f} stochastic "
                f"{worst['stochastic_uniform']:.3f}", elapsed)
    assert ok, RESULTS[7]


# ---------------------------------------------------------------------------
# 8. trends over the random families
# ---------------------------------------------------------------------------

SIZES = (10, 20, 40)
ATTACH = (1, 2, 4)


def test_criterion_8_trends():
    start = time.perf_counter()
    specs = []
    for n in SIZES:
        for m in ATTACH:
            specs.append(GenSpec("scale_free", n=n, m=m))
            specs.append(GenSpec("erdos_renyi", n=n, m=m, p=matched_er(n, m)))
    res = run_trend_experiment(specs, seed=0)
    unverified = sum(not r["verified"] for r in res.rows)

    def counts(family, n, m):
        cell = specs.index(GenSpec(family, n=n, m=m, p=matched_er(n, m)) if family == "erdos_renyi"
                           else GenSpec(family, n=n, m=m))
        rows = [r for r in res.rows if (r["family"], r["n"]) == (family, n)
                and r["param"] == specs[cell].param]
        return np.array([r["input_count"] for r in rows])

    failed, lines = [], []
    for n in SIZES:
        for m in ATTACH:
            sf, er = counts("scale_free", n, m), counts("erdos_renyi", n, m)
            conf = bootstrap_fraction(sf, er)
            lines.append(f"n={n} m={m} SF {sf.mean():.2f} ER {er.mean():.2f} ({conf:.2f})")
            if conf < 0.95:
                failed.append(f"SF<=ER n={n} m={m} ({conf:.2f})")
        means = [round(float(counts("scale_free", n, m).mean()), 3) for m in ATTACH]
        for lo, hi in zip(ATTACH, ATTACH[1:]):
            conf = bootstrap_fraction(counts("scale_free", n, hi), counts("scale_free", n, lo))
            if conf < 0.95:
                failed.append(f"non-increasing n={n} m={lo}->{hi} ({conf:.2f})")
        lines.append(f"n={n} SF means over m={ATTACH}: {means}")
    elapsed = time.perf_counter() - start
    for line in lines:
        print("  " + line)
    ok = report(8, not failed and unverified == 0 and not res.errors,
                f"{len(res.rows)} runs, {unverified} unverified, {len(res.errors)} errors, "
                f"failed checks: {', '.join(failed) or 'none'}", elapsed, 900)
    assert ok, RESULTS[8]


# ---------------------------------------------------------------------------
# 9. CNF fidelity and format round-trips
# ---------------------------------------------------------------------------

RULE_MAKERS = (random_truth_table, random_threshold, random_nested_canalyzing)


def test_criterion_9_cnf_and_formats():
    start = time.perf_counter()
    rng = np.random.default_rng(909)
    rules = wrong = 0
    for d in range(11):
        inputs = tuple(range(d))
        rows = list(itertools.product((0, 1), repeat=d))
        for maker in RULE_MAKERS:
            if maker is random_nested_canalyzing and d == 0:
                continue
            for _ in range(4 if d <= 8 else 2):
                rule = maker(rng, inputs)
                for minimize in (False, True):
                    cnf = rule_to_cnf(rule, minimize=minimize)
                    rules += 1
                    wrong += any(cnf.evaluate(x) != evaluate_rule(rule, x) for x in rows)

    bn = tss = broken = 0
    for t in range(80):
        n = int(rng.integers(1, 9))
        if t % 4 == 3:
            net, x = random_threshold_ruleset_network(rng, n)
        else:
            x = planted(rng, n)
            net = random_network(rng, n, KINDS[t % 3], x_star=x)
        text = serialize_network(net, Attractor([x]))
        doc = parse_network_document(text)
        bn += 1
        broken += serialize_network(doc.net, doc.attractor) != text or doc.net.rules != net.rules
        if t % 4 != 3:
            inst = build_augmented(net, x)
            ttext = serialize_tss(inst)
            tss += 1
            broken += serialize_tss(parse_tss(ttext)) != ttext or parse_tss(ttext) != inst
    elapsed = time.perf_counter() - start
    ok = report(9, wrong == 0 and broken == 0 and bn >= 50 and tss >= 50,
                f"{rules} CNF conversions (d 0..10, both forms), {wrong} disagreeing; "
                f"{bn} .bn and {tss} .tss round-trips, {broken} not byte-identical", elapsed)
    assert ok, RESULTS[9]
