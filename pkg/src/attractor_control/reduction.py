"""Reductions from attractor control problems to target set selection.

Every builder returns a ``TssInstance`` whose first ``n`` nodes (per phase,
for cyclic products) are the genes; a set of genes whose seeding activates
the whole instance is sufficient for convergence to the chosen attractor.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import networkx as nx

from .errors import (
    AttractorNotCommonFixedPoint,
    FanInTooLarge,
    InvalidAttractor,
    MixedSignNode,
    NoCanalyzingRank,
    NotAFixedPoint,
)
from .network import (
    Attractor,
    NestedCanalyzing,
    RegulatoryNetwork,
    RuleSet,
    Threshold,
    TruthTable,
    evaluate_rule,
    step_synchronous,
)
from .tss import Auxiliary, Original, TssInstance

MAX_FAN_IN = 16


# ---------------------------------------------------------------------------
# CNF
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CnfForm:
    """Conjunction of clauses; a literal is ``(node, positive)``."""

    variables: tuple
    clauses: tuple

    def evaluate(self, x) -> int:
        for clause in self.clauses:
            if not any((x[j] == 1) == pos for j, pos in clause):
                return 0
        return 1


def _single(rule):
    if isinstance(rule, RuleSet):
        if len(rule.alternatives) != 1:
            raise TypeError("rule sets must be merged before CNF conversion")
        return rule.alternatives[0]
    return rule


def rule_to_cnf(rule, in_neighbors=None, minimize: bool = False,
                max_fan_in: int = MAX_FAN_IN) -> CnfForm:
    """Product-of-maxterms CNF of ``rule``, one clause per falsifying input row.

    With ``minimize`` the clauses are prime implicates chosen by a greedy
    irredundant cover instead. Either form agrees with the rule on every
    input assignment.
    """
    rule = _single(rule)
    inputs = tuple(sorted(set(rule.variables)))
    if in_neighbors is not None and not set(inputs) <= set(in_neighbors):
        raise ValueError("rule reads nodes outside the given in-neighbors")
    d = len(inputs)
    if d > max_fan_in:
        raise FanInTooLarge(f"fan-in {d} exceeds {max_fan_in}")
    zeros = []
    for row, bits in enumerate(itertools.product((0, 1), repeat=d)):
        if not evaluate_rule(rule, dict(zip(inputs, bits))):
            zeros.append(row)
    if minimize:
        cubes = _cover(_prime_cubes(zeros, d), zeros, d)
    else:
        full = (1 << d) - 1
        cubes = [(full, row) for row in zeros]
    clauses = []
    for mask, value in cubes:
        clause = []
        for k, j in enumerate(inputs):
            bit = 1 << (d - 1 - k)
            if mask & bit:
                # the clause is false exactly on the cube
                clause.append((j, not (value & bit)))
        clauses.append(tuple(clause))
    return CnfForm(inputs, tuple(clauses))


def _prime_cubes(minterms, d):
    """Prime implicants (mask, value) of the function true on ``minterms``."""
    full = (1 << d) - 1
    current = {(full, m) for m in minterms}
    primes = set()
    while current:
        merged = set()
        used = set()
        by_mask = {}
        for mask, value in current:
            by_mask.setdefault(mask, []).append(value)
        for mask, values in by_mask.items():
            vs = set(values)
            for v in values:
                for k in range(d):
                    bit = 1 << k
                    if mask & bit and not v & bit and (v | bit) in vs:
                        merged.add((mask & ~bit, v))
                        used.add((mask, v))
                        used.add((mask, v | bit))
        primes |= current - used
        current = merged
    return sorted(primes, key=lambda c: (-bin(c[0]).count("0"), c))


def _covers(cube, m):
    mask, value = cube
    return m & mask == value


def _cover(primes, minterms, d):
    left = set(minterms)
    chosen = []
    for m in sorted(minterms):
        hits = [c for c in primes if _covers(c, m)]
        if len(hits) == 1 and hits[0] not in chosen:
            chosen.append(hits[0])
    for c in chosen:
        left -= {m for m in left if _covers(c, m)}
    while left:
        best = max(primes, key=lambda c: (sum(1 for m in left if _covers(c, m)), -primes.index(c)))
        chosen.append(best)
        left -= {m for m in left if _covers(best, m)}
    return sorted(chosen, key=lambda c: (c[0], c[1]))


# ---------------------------------------------------------------------------
# general augmented graph
# ---------------------------------------------------------------------------

def _require_fixed_point(net, x_star):
    x_star = tuple(x_star)
    if len(x_star) != net.n:
        raise NotAFixedPoint(f"state has {len(x_star)} entries for {net.n} nodes")
    if any(isinstance(r, RuleSet) and len(r.alternatives) > 1 for r in net.rules):
        raise TypeError("network has rule sets; use merge_probabilistic")
    if step_synchronous(net, x_star) != x_star:
        raise NotAFixedPoint("requested state is not a fixed point of the network")
    return x_star


def _clause_edges(clause, src_state, target_value):
    """Sources of a clause node: literal x_j when x_j matches the target,
    literal not-x_j when x_j differs from it."""
    return [j for j, pos in clause if (src_state[j] == target_value) == pos]


def _add_clause_nodes(rows, tau, prov, owner_index, gene, phase, cnf, src_state,
                      src_offset, target_value):
    """Append the live clause nodes of one gene copy; return how many were added."""
    added = 0
    for s, clause in enumerate(cnf.clauses):
        sources = [src_offset + j for j in _clause_edges(clause, src_state, target_value)]
        t = len(clause) if target_value == 0 else 1
        if t > len(sources):
            # clause already true at the attractor: it can never fire
            continue
        aux = len(rows)
        rows.append(sources)
        tau.append(t)
        prov.append(Auxiliary(gene, s, phase))
        rows[owner_index].append(aux)
        added += 1
    return added


def build_augmented(net: RegulatoryNetwork, x_star, minimize: bool = False) -> TssInstance:
    """Clause-augmented instance for steering ``net`` to fixed point ``x_star``.

    Gene i keeps index i. Each clause of f_i gets a node feeding i. Its
    sources are the clause variables whose settled value agrees with the
    clause's polarity as described in ``_clause_edges``. A clause node needs
    one active source when x*_i = 1 and all of them when x*_i = 0; gene i
    needs all its clause nodes when x*_i = 1 and one when x*_i = 0.
    Clause nodes that could never fire (clauses satisfied at x* while
    x*_i = 0) are omitted.
    """
    x_star = _require_fixed_point(net, x_star)
    n = net.n
    rows = [[] for _ in range(n)]
    tau = [0] * n
    prov = [Original(i) for i in range(n)]
    for i, rule in enumerate(net.rules):
        cnf = rule_to_cnf(rule, net.in_neighbors[i], minimize)
        added = _add_clause_nodes(rows, tau, prov, i, i, 0, cnf, x_star, 0, x_star[i])
        tau[i] = added if x_star[i] == 1 else 1
    return TssInstance(tuple(tuple(r) for r in rows), tuple(tau), tuple(prov))


# ---------------------------------------------------------------------------
# signed threshold networks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SignedThresholdNet:
    """Threshold network whose nodes act with one sign on all their targets."""

    net: RegulatoryNetwork
    classes: tuple  # 'E' or 'I' per node

    @classmethod
    def from_network(cls, net: RegulatoryNetwork) -> "SignedThresholdNet":
        return cls(net, signed_classes(net))

    def partition(self, x_star) -> dict:
        parts = {"E1": [], "E0": [], "I1": [], "I0": []}
        for i, c in enumerate(self.classes):
            parts[f"{c}{x_star[i]}"].append(i)
        return parts


def signed_classes(net: RegulatoryNetwork) -> tuple:
    """'E' for purely excitatory nodes, 'I' for purely inhibitory ones.

    Nodes without targets count as excitatory. Raises ``MixedSignNode`` for
    a node with both signs and ``ValueError`` for weights other than +-1.
    """
    signs = [set() for _ in range(net.n)]
    for i, rule in enumerate(net.rules):
        if not isinstance(rule, Threshold):
            raise TypeError(f"node {i} does not have a threshold rule")
        for j, w in zip(rule.inputs, rule.weights):
            if w not in (1, -1):
                raise ValueError(f"weight {w} on edge {j}->{i} is not +-1")
            signs[j].add(w)
    out = []
    for j, s in enumerate(signs):
        if len(s) > 1:
            raise MixedSignNode(f"node {j} ({net.names[j]}) has both excitatory and inhibitory targets")
        out.append("I" if s == {-1} else "E")
    return tuple(out)


def threshold_hat(rule: Threshold, x_value: int, classes) -> int:
    """Instance threshold of a signed threshold node.

    x* = 1: ceil(tau) + |inhibitory in-neighbours|.
    x* = 0: ceil(tau) + |excitatory in-neighbours|, raised to
    |excitatory| - ceil(tau) + 1 when tau <= 0. The raised value is the
    count of settled neighbours that keeps the weighted sum below tau
    whatever the rest do; the plain one falls short of it for tau <= 0.
    """
    n_inh = sum(1 for j in rule.inputs if classes[j] == "I")
    n_exc = len(rule.inputs) - n_inh
    if x_value == 1:
        return math.ceil(rule.tau) + n_inh
    t = math.ceil(rule.tau)
    return max(t + n_exc, n_exc - t + 1)


def build_threshold_tss(snet, x_star) -> TssInstance:
    """Same-node-set instance for a signed threshold network.

    Edge j->i survives when x*_j = x*_i and j is excitatory, or when
    x*_j != x*_i and j is inhibitory.
    """
    if isinstance(snet, RegulatoryNetwork):
        snet = SignedThresholdNet.from_network(snet)
    net, classes = snet.net, snet.classes
    x_star = _require_fixed_point(net, x_star)
    rows = []
    tau = []
    for i, rule in enumerate(net.rules):
        rows.append(tuple(
            j for j in rule.inputs
            if (x_star[j] == x_star[i]) == (classes[j] == "E")
        ))
        tau.append(threshold_hat(rule, x_star[i], classes))
    return TssInstance(tuple(rows), tuple(tau))


# ---------------------------------------------------------------------------
# nested canalyzing networks
# ---------------------------------------------------------------------------

def _require_nc(net):
    for i, rule in enumerate(net.rules):
        if not isinstance(rule, NestedCanalyzing):
            raise TypeError(f"node {i} does not have a nested canalyzing rule")


def build_nc_full(net: RegulatoryNetwork, x_star, include_default: bool = False) -> TssInstance:
    """Term-node instance for nested canalyzing networks.

    For each rank s whose output equals x*_i there is a term node fed by
    j_s and by every earlier j_l whose output differs from x*_i; it needs
    all of them and gene i needs one term node. Terms that are false at x*
    cannot certify anything and are omitted. Genes left without term nodes
    must be seeded. ``include_default`` adds a term for the default branch
    (every rank with a different output fails to match).
    """
    _require_nc(net)
    x_star = _require_fixed_point(net, x_star)
    n = net.n
    rows = [[] for _ in range(n)]
    tau = [1] * n
    prov = [Original(i) for i in range(n)]
    for i, rule in enumerate(net.rules):
        target = x_star[i]
        terms = []
        for s, a in enumerate(rule.canalyzed):
            if a != target:
                continue
            lits = [(rule.order[l], rule.canalyzing[l], False)
                    for l in range(s) if rule.canalyzed[l] != target]
            lits.append((rule.order[s], rule.canalyzing[s], True))
            terms.append((s, lits))
        if include_default and rule.default == target:
            lits = [(rule.order[l], rule.canalyzing[l], False)
                    for l in range(len(rule.order)) if rule.canalyzed[l] != target]
            terms.append((len(rule.order), lits))
        for s, lits in terms:
            if not all((x_star[j] == b) == match for j, b, match in lits):
                continue
            aux = len(rows)
            rows.append([j for j, _, _ in lits])
            tau.append(len(lits))
            prov.append(Auxiliary(i, s))
            rows[i].append(aux)
    return TssInstance(tuple(tuple(r) for r in rows), tuple(tau), tuple(prov))


def build_nc_unanimous(net: RegulatoryNetwork, x_star, strict: bool = False) -> TssInstance:
    """Unanimous-threshold instance on the genes alone.

    Gene i listens to its ranked inputs j_1..j_s, where s is the rank that
    decides f_i at x*, and needs all of them. When x* falls through to the
    default branch, gene i instead listens to every rank whose output
    differs from x*_i (or ``NoCanalyzingRank`` is raised if ``strict``).
    """
    _require_nc(net)
    x_star = _require_fixed_point(net, x_star)
    rows = []
    for i, rule in enumerate(net.rules):
        s = rule.deciding_rank(x_star)
        if s is not None:
            rows.append(tuple(rule.order[: s + 1]))
        elif strict:
            raise NoCanalyzingRank(f"node {i} reaches x*_i only through its default output")
        else:
            rows.append(tuple(rule.order[l] for l in range(len(rule.order))
                              if rule.canalyzed[l] != x_star[i]))
    return TssInstance(tuple(rows), tuple(len(r) for r in rows))


# ---------------------------------------------------------------------------
# cyclic attractors
# ---------------------------------------------------------------------------

def build_cyclic(net: RegulatoryNetwork, attractor, minimize: bool = False) -> TssInstance:
    """Phase-product instance for a cyclic attractor x^1 -> ... -> x^p -> x^1.

    Copy a of gene i (instance node a*n + i) certifies that x_i takes its
    value in x^a at every step in phase a. Its clause nodes read the copies
    of phase a-1 (cyclically).
    """
    states = attractor.states if isinstance(attractor, Attractor) else tuple(map(tuple, attractor))
    p = len(states)
    if p < 2:
        raise InvalidAttractor("cyclic construction needs an attractor of length >= 2")
    if len(set(states)) != p:
        raise InvalidAttractor("attractor repeats a state")
    for a in range(p):
        if len(states[a]) != net.n or step_synchronous(net, states[a]) != states[(a + 1) % p]:
            raise InvalidAttractor(f"state {a} of the attractor does not step to state {(a + 1) % p}")
    n = net.n
    cnfs = [rule_to_cnf(r, net.in_neighbors[i], minimize) for i, r in enumerate(net.rules)]
    rows = [[] for _ in range(n * p)]
    tau = [0] * (n * p)
    prov = [Original(i, a) for a in range(p) for i in range(n)]
    for a in range(p):
        prev = (a - 1) % p
        for i in range(n):
            target = states[a][i]
            added = _add_clause_nodes(rows, tau, prov, a * n + i, i, a, cnfs[i],
                                      states[prev], prev * n, target)
            tau[a * n + i] = added if target == 1 else 1
    return TssInstance(tuple(tuple(r) for r in rows), tuple(tau), tuple(prov))


# ---------------------------------------------------------------------------
# probabilistic networks
# ---------------------------------------------------------------------------

def _alternatives(rule):
    return rule.alternatives if isinstance(rule, RuleSet) else (rule,)


def _require_common_fixed_point(net, x_star):
    x_star = tuple(x_star)
    if len(x_star) != net.n:
        raise AttractorNotCommonFixedPoint("state length does not match the network")
    for i, rule in enumerate(net.rules):
        for k, alt in enumerate(_alternatives(rule)):
            if alt.evaluate(x_star) != x_star[i]:
                raise AttractorNotCommonFixedPoint(
                    f"alternative {k} of node {i} does not fix the requested state"
                )
    return x_star


def merged_rule(rule, i: int, x_value: int):
    """Deterministic stand-in for a probabilistic node.

    For x* = 1: some alternative outputs 1, and every alternative keeps the
    node at 1 once it is there. For x* = 0 the dual. Single rules are
    returned unchanged.
    """
    alts = _alternatives(rule)
    if len(alts) == 1:
        return alts[0]
    inputs = sorted({j for r in alts for j in r.variables})

    def f(bits):
        x = dict(zip(inputs, bits))
        pinned = dict(x)
        pinned[i] = x_value
        now = [r.evaluate(x) for r in alts]
        held = [r.evaluate(pinned) for r in alts]
        if x_value == 1:
            return any(now) and all(held)
        return all(now) or any(held)

    return TruthTable.from_function(inputs, f)


def merged_network(net: RegulatoryNetwork, x_star) -> RegulatoryNetwork:
    x_star = _require_common_fixed_point(net, x_star)
    return net.with_rules(merged_rule(r, i, x_star[i]) for i, r in enumerate(net.rules))


def merge_threshold_ruleset(net: RegulatoryNetwork, x_star) -> RegulatoryNetwork:
    """Collapse threshold rule sets that differ only in tau.

    x*_i = 1 keeps the largest threshold and x*_i = 0 the smallest, the
    strictest choice in each direction.
    """
    x_star = _require_common_fixed_point(net, x_star)
    rules = []
    for i, rule in enumerate(net.rules):
        alts = _alternatives(rule)
        first = alts[0]
        if not all(isinstance(r, Threshold) for r in alts):
            raise TypeError(f"node {i} has non-threshold alternatives")
        if any(r.inputs != first.inputs or r.weights != first.weights for r in alts):
            raise TypeError(f"alternatives of node {i} differ in more than the threshold")
        taus = [r.tau for r in alts]
        rules.append(Threshold(first.inputs, first.weights, max(taus) if x_star[i] else min(taus)))
    return net.with_rules(rules)


def merge_probabilistic(net: RegulatoryNetwork, x_star, pathway: str = "general",
                        minimize: bool = False) -> TssInstance:
    """Instance whose target sets steer a probabilistic network to ``x_star``.

    ``pathway="general"`` merges each rule set into one truth table and
    builds the clause-augmented instance; ``"threshold"`` collapses signed
    threshold rule sets and builds the same-node-set instance.
    """
    if pathway == "general":
        return build_augmented(merged_network(net, x_star), x_star, minimize)
    if pathway == "threshold":
        return build_threshold_tss(merge_threshold_ruleset(net, x_star), x_star)
    raise ValueError(f"unknown pathway {pathway!r}")


# ---------------------------------------------------------------------------
# cycle-breaking baseline condition
# ---------------------------------------------------------------------------

def network_digraph(net: RegulatoryNetwork) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(range(net.n))
    g.add_edges_from(net.edges())
    return g


def baseline_conditions(g: nx.DiGraph, S) -> tuple:
    """(every cycle meets S, every node is reachable from S)."""
    S = set(S)
    rest = g.subgraph([v for v in g if v not in S])
    cycles_hit = nx.is_directed_acyclic_graph(rest)
    reach = set(S)
    for s in S:
        reach |= nx.descendants(g, s)
    return cycles_hit, len(reach) == g.number_of_nodes()


def baseline_implies_target(net: RegulatoryNetwork, S) -> bool:
    """Whether ``S`` meets every cycle of the network graph and reaches every node."""
    hit, connected = baseline_conditions(network_digraph(net), S)
    return hit and connected
