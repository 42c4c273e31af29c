"""Minimum-input solvers that exploit graph structure.

Cliques of a signed threshold instance, trees of cliques, hierarchical
(hub and copies) networks, unanimous-threshold instances and the
cycle-breaking baseline on the original regulatory graph.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import networkx as nx

from .errors import (
    Infeasible,
    NotACliqueInstance,
    NotACliquePartition,
    NotATree,
    NotHierarchical,
)
from .network import RegulatoryNetwork
from .reduction import network_digraph
from .tss import TargetSet, TssInstance, closure, is_target_set, mandatory_seeds, solve_exact

MAX_CLIQUE_CLASSES = 4


def instance_digraph(inst: TssInstance) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(range(inst.m))
    g.add_edges_from(inst.edges())
    return g


# ---------------------------------------------------------------------------
# cliques
# ---------------------------------------------------------------------------

def _is_twin(inst, u, v):
    """u and v see the same neighbours apart from each other, symmetrically."""
    ins_u = [w for w in inst.in_edges[u] if w != v]
    ins_v = [w for w in inst.in_edges[v] if w != u]
    if ins_u != ins_v:
        return False
    outs_u = sorted(w for w in inst.out_edges[u] if w != v)
    outs_v = sorted(w for w in inst.out_edges[v] if w != u)
    if outs_u != outs_v:
        return False
    return inst.in_edges[u].count(v) == inst.in_edges[v].count(u)


def twin_classes(inst: TssInstance) -> list:
    """Groups of interchangeable nodes, each listed in ascending order."""
    parent = list(range(inst.m))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in itertools.combinations(range(inst.m), 2):
        if find(u) != find(v) and _is_twin(inst, u, v):
            parent[find(v)] = find(u)
    groups = {}
    for v in range(inst.m):
        groups.setdefault(find(v), []).append(v)
    out = sorted(groups.values())
    for g in out:
        if not all(_is_twin(inst, u, v) for u, v in itertools.combinations(g, 2)):
            raise NotACliqueInstance("twin relation is not transitive on this instance")
    return out


def solve_clique(inst: TssInstance, classes=None) -> TargetSet:
    """Exact minimum target set for a signed clique instance.

    Within a class of interchangeable nodes an optimal set may be taken to
    be a prefix of the class sorted by decreasing threshold, so only one
    count per class has to be searched. ``classes`` defaults to the twin
    classes of the instance; more than four raises ``NotACliqueInstance``.
    """
    classes = twin_classes(inst) if classes is None else [sorted(c) for c in classes]
    if len(classes) > MAX_CLIQUE_CLASSES:
        raise NotACliqueInstance(f"{len(classes)} node classes, a signed clique has at most 4")
    ranked = [sorted(c, key=lambda v: (-inst.tau[v], v)) for c in classes]
    counts = sorted(
        itertools.product(*(range(len(c) + 1) for c in ranked)),
        key=lambda t: (sum(t), t),
    )
    for t in counts:
        seed = [v for c, k in zip(ranked, t) for v in c[:k]]
        if is_target_set(inst, seed):
            return TargetSet(seed, "clique")
    raise Infeasible("no prefix combination activates the clique")


# ---------------------------------------------------------------------------
# trees of cliques
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CliquePartition:
    """Disjoint node blocks covering the instance, with the arcs between blocks."""

    blocks: tuple
    cross_arcs: tuple = ()

    @classmethod
    def from_blocks(cls, inst: TssInstance, blocks) -> "CliquePartition":
        blocks = tuple(tuple(sorted(b)) for b in blocks)
        seen = [v for b in blocks for v in b]
        if sorted(seen) != list(range(inst.m)):
            raise NotACliquePartition("blocks must cover every node exactly once")
        where = {v: k for k, b in enumerate(blocks) for v in b}
        arcs = tuple(sorted((u, v) for u, v in inst.edges() if where[u] != where[v]))
        return cls(blocks, arcs)

    def block_of(self) -> dict:
        return {v: k for k, b in enumerate(self.blocks) for v in b}

    def contracted(self) -> nx.MultiGraph:
        """Undirected multigraph over blocks, one edge per cross arc."""
        where = self.block_of()
        g = nx.MultiGraph()
        g.add_nodes_from(range(len(self.blocks)))
        for u, v in self.cross_arcs:
            g.add_edge(where[u], where[v], arc=(u, v))
        return g


def _check_tree(part: CliquePartition):
    g = part.contracted()
    simple = nx.Graph(g)
    if simple.number_of_edges() != g.number_of_edges():
        raise NotATree("two blocks are joined by more than one arc")
    if not nx.is_forest(simple):
        raise NotATree("block contraction has a cycle")
    return g


def _solve_block(inst, block, tau):
    sub, nodes = inst.with_tau(tau).induced(block)
    try:
        local = solve_clique(sub)
    except NotACliqueInstance:
        local = solve_exact(sub, restrict_to_original=False)
    return [nodes[v] for v in local]


def solve_block_cactus(inst: TssInstance, partition) -> TargetSet:
    """Leaf elimination over a tree of cliques.

    The lowest-index leaf block is solved on its own. If its single cross
    arc points out of the leaf, the receiving node's threshold drops by one
    for the rest of the run; if it points in, the leaf is solved with its
    receiving node's threshold lowered instead, since the sender is
    activated by the remainder in any case.
    """
    if not isinstance(partition, CliquePartition):
        partition = CliquePartition.from_blocks(inst, partition)
    g = _check_tree(partition)
    blocks = partition.blocks
    tau = list(inst.tau)
    alive = set(range(len(blocks)))
    chosen = []
    while alive:
        leaf = min(b for b in alive if sum(1 for nb in g.neighbors(b) if nb in alive) <= 1)
        links = [(nb, data["arc"]) for nb, data in g[leaf].items() if nb in alive
                 for data in data.values()]
        local_tau = list(tau)
        pending = None
        if links:
            _, (u, v) = links[0]
            if v in blocks[leaf]:
                local_tau[v] -= 1
            else:
                pending = v
        chosen += _solve_block(inst, blocks[leaf], local_tau)
        if pending is not None:
            tau[pending] -= 1
        alive.remove(leaf)
    return TargetSet(chosen, "cactus")


def greedy_clusters(inst: TssInstance) -> list:
    """Greedy clique cover of the mutual-edge graph, lowest index first."""
    mutual = {v: set() for v in range(inst.m)}
    for u, v in inst.edges():
        if u != v and u in inst.in_edges[v] and v in inst.in_edges[u]:
            mutual[u].add(v)
    left = set(range(inst.m))
    clusters = []
    while left:
        seed = min(left)
        block = [seed]
        for w in sorted(left - {seed}):
            if all(w in mutual[b] for b in block):
                block.append(w)
        clusters.append(block)
        left -= set(block)
    return clusters


def cactusify(inst: TssInstance, clusters) -> tuple:
    """Force a tree-of-cliques shape; returns (instance, partition, removed arcs).

    Missing arcs inside a cluster are added and their heads' thresholds
    raised by one each. Cross arcs outside a spanning forest of the block
    graph are dropped, higher-index arcs kept first so the lowest-index arc
    of any cycle is the one removed. Both changes only make activation
    harder, so any target set of the result works for the input.
    """
    blocks = [tuple(sorted(c)) for c in clusters]
    CliquePartition.from_blocks(inst, blocks)
    rows = [list(r) for r in inst.in_edges]
    tau = list(inst.tau)
    for b in blocks:
        for u, v in itertools.permutations(b, 2):
            if u not in rows[v]:
                rows[v].append(u)
                tau[v] += 1
    where = {v: k for k, b in enumerate(blocks) for v in b}
    cross = sorted({(u, v) for v, row in enumerate(rows) for u in row if where[u] != where[v]},
                   reverse=True)
    forest = nx.utils.UnionFind(range(len(blocks)))
    removed = []
    for u, v in cross:
        a, b = where[u], where[v]
        if forest[a] != forest[b]:
            forest.union(a, b)
        else:
            removed.append((u, v))
    for u, v in removed:
        rows[v] = [w for w in rows[v] if w != u]
    out = TssInstance(tuple(tuple(r) for r in rows), tuple(tau), inst.provenance)
    return out, CliquePartition.from_blocks(out, blocks), tuple(sorted(removed))


# ---------------------------------------------------------------------------
# hierarchical networks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HierarchySpec:
    """Hub-and-copies layout: level 1 is a (k+1)-clique around ``hub``; each
    later level adds k copies of the previous graph whose hubs link to ``hub``.
    """

    k: int
    depth: int
    hub: int = 0

    def __post_init__(self):
        if self.k < 1 or self.depth < 1:
            raise ValueError("k and depth must be at least 1")

    @property
    def n(self) -> int:
        return (self.k + 1) ** self.depth

    def copies(self) -> list:
        """(offset, size) of every copy attached to the top-level hub."""
        out = []
        for level in range(2, self.depth + 1):
            size = (self.k + 1) ** (level - 1)
            out += [(c * size, size) for c in range(1, self.k + 1)]
        return out


def _check_hierarchy(inst, spec):
    if spec.hub != 0:
        raise NotHierarchical("the generator layout places the hub at node 0")
    if inst.m != spec.n:
        raise NotHierarchical(f"expected {spec.n} nodes for k={spec.k}, depth={spec.depth}")
    part = [-1] * inst.m
    hubs = {}
    for idx, (off, size) in enumerate(spec.copies()):
        hubs[idx] = off
        for v in range(off, off + size):
            part[v] = idx
    for u, v in inst.edges():
        pu, pv = part[u], part[v]
        if pu == pv:
            continue
        if -1 in (pu, pv) and {u, v} == {0, hubs[max(pu, pv)]}:
            continue
        raise NotHierarchical(f"edge {u}->{v} crosses parts away from the hubs")


def _solve_part(inst, nodes, tau, spec_or_none):
    sub, idx = inst.with_tau(tau).induced(nodes)
    if spec_or_none is None:
        try:
            local = solve_clique(sub)
        except NotACliqueInstance:
            local = solve_exact(sub, restrict_to_original=False)
    else:
        local = solve_hierarchical(sub, spec_or_none)
    return [idx[v] for v in local]


def solve_hierarchical(inst: TssInstance, spec: HierarchySpec) -> TargetSet:
    """Hub-aware recursion over the copies of a hierarchical instance.

    Each copy is solved twice, as is and with the hub assumed active (its
    out-arcs into the copy lower the heads' thresholds). Copies that gain
    nothing from the hub commit their plain solution. The hub is seeded
    unless those commitments already activate it, and the remaining copies
    commit their hub-assisted solutions. The level-one clique around the
    hub is finally solved with the hub active.
    """
    _check_hierarchy(inst, spec)
    hub = spec.hub
    if spec.depth == 1:
        return TargetSet(_solve_part(inst, range(inst.m), inst.tau, None), "hierarchy")
    hub_help = [0] * inst.m
    for v in inst.out_edges[hub]:
        hub_help[v] += 1
    low_tau = [t - h for t, h in zip(inst.tau, hub_help)]
    chosen = []
    waiting = []
    for off, size in spec.copies():
        nodes = range(off, off + size)
        sub = None if size == spec.k + 1 else HierarchySpec(spec.k, _depth_of(size, spec.k))
        s_bar = _solve_part(inst, nodes, inst.tau, sub)
        s_low = _solve_part(inst, nodes, low_tau, sub)
        if len(s_bar) == len(s_low):
            chosen += s_bar
        else:
            waiting.append(s_low)
    if hub not in closure(inst, chosen):
        chosen.append(hub)
    for s_low in waiting:
        chosen += s_low
    core = [v for v in range(spec.k + 1) if v != hub]
    chosen += _solve_part(inst, core, low_tau, None)
    return TargetSet(chosen, "hierarchy")


def _depth_of(size, k):
    d = 0
    while size > 1:
        size //= k + 1
        d += 1
    return d


# ---------------------------------------------------------------------------
# unanimous thresholds and feedback vertex sets
# ---------------------------------------------------------------------------

def _cyclic_nodes(g):
    out = []
    for comp in nx.strongly_connected_components(g):
        if len(comp) > 1:
            out += comp
        else:
            (v,) = comp
            if g.has_edge(v, v):
                out.append(v)
    return out


def _acyclic_without(g, removed):
    rest = g.subgraph([v for v in g if v not in removed])
    return nx.is_directed_acyclic_graph(rest)


def heuristic_fvs(g: nx.DiGraph) -> list:
    """Feedback vertex set: repeatedly drop the highest-degree node that lies
    on a cycle (lowest index on ties), then discard members in reverse order
    of addition while the rest still breaks every cycle."""
    h = g.copy()
    picked = []
    while True:
        cand = _cyclic_nodes(h)
        if not cand:
            break
        v = min(cand, key=lambda u: (-h.degree(u), u))
        picked.append(v)
        h.remove_node(v)
    for v in reversed(list(picked)):
        rest = [u for u in picked if u != v]
        if _acyclic_without(g, set(rest)):
            picked = rest
    return sorted(picked)


def is_unanimous(inst: TssInstance) -> bool:
    return all(t == d for t, d in zip(inst.tau, inst.in_degree))


def unanimous_conditions(inst: TssInstance, S) -> tuple:
    """(every cycle meets S, every node is reachable from S or a zero-threshold node)."""
    S = set(S)
    out = inst.out_edges
    left = {v: sum(1 for u in inst.in_edges[v] if u not in S) for v in range(inst.m) if v not in S}
    queue = [v for v, d in left.items() if d == 0]
    peeled = 0
    while queue:
        u = queue.pop()
        peeled += 1
        for v in out[u]:
            if v in left:
                left[v] -= 1
                if left[v] == 0:
                    queue.append(v)
    cycles_hit = peeled == len(left)
    reach = S | {v for v in range(inst.m) if inst.tau[v] <= 0}
    stack = list(reach)
    while stack:
        for v in out[stack.pop()]:
            if v not in reach:
                reach.add(v)
                stack.append(v)
    return cycles_hit, len(reach) == inst.m


def solve_unanimous_fvs(inst: TssInstance) -> TargetSet:
    """Cycle cover of each strongly connected component, plus nodes that
    can never be activated from their in-neighbours."""
    if not is_unanimous(inst):
        raise ValueError("every threshold must equal the node's in-degree")
    g = instance_digraph(inst)
    chosen = set(mandatory_seeds(inst))
    comps = sorted(nx.strongly_connected_components(g), key=min)
    for comp in comps:
        sub = g.subgraph(comp)
        if len(comp) > 1 or any(sub.has_edge(v, v) for v in comp):
            chosen.update(heuristic_fvs(sub))
    return TargetSet(chosen, "nc_fvs")


def solve_cycle_baseline(net: RegulatoryNetwork) -> TargetSet:
    """Cycle-hitting set of the regulatory graph plus every node without
    regulators (the only way to reach them)."""
    g = network_digraph(net)
    chosen = set(heuristic_fvs(g))
    chosen |= {v for v in g if g.in_degree(v) == 0}
    return TargetSet(chosen, "cycle_baseline")
