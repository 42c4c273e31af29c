"""Target set selection: instances, the threshold cascade, and generic solvers."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

from .errors import BudgetExceeded, Infeasible, NotATargetSet


@dataclass(frozen=True)
class Original:
    """Instance node standing for gene ``node`` (``phase`` > 0 only in cyclic products)."""

    node: int
    phase: int = 0


@dataclass(frozen=True)
class Auxiliary:
    """Clause node ``clause`` feeding ``owner``."""

    owner: int
    clause: int
    phase: int = 0


@dataclass(frozen=True)
class TssInstance:
    """Directed graph with integer thresholds.

    ``in_edges[v]`` is the sorted tuple of sources of edges into ``v``; a
    source repeated k times is a k-fold parallel edge and counts k times
    toward activation.
    """

    in_edges: tuple
    tau: tuple
    provenance: tuple = None

    def __post_init__(self):
        in_edges = tuple(tuple(sorted(int(u) for u in row)) for row in self.in_edges)
        object.__setattr__(self, "in_edges", in_edges)
        m = len(in_edges)
        tau = tuple(int(t) for t in self.tau)
        if len(tau) != m:
            raise ValueError("need one threshold per node")
        object.__setattr__(self, "tau", tau)
        for v, row in enumerate(in_edges):
            for u in row:
                if not 0 <= u < m:
                    raise IndexError(f"edge {u}->{v} leaves the node range")
        if self.provenance is None:
            prov = tuple(Original(v) for v in range(m))
        else:
            prov = tuple(self.provenance)
            if len(prov) != m:
                raise ValueError("need one provenance tag per node")
        object.__setattr__(self, "provenance", prov)

    @classmethod
    def from_edges(cls, m: int, edges: Iterable, tau, provenance=None) -> "TssInstance":
        rows = [[] for _ in range(m)]
        for u, v in edges:
            rows[v].append(u)
        return cls(tuple(tuple(r) for r in rows), tuple(tau), provenance)

    @property
    def m(self) -> int:
        return len(self.in_edges)

    @cached_property
    def out_edges(self) -> tuple:
        out = [[] for _ in range(self.m)]
        for v, row in enumerate(self.in_edges):
            for u in row:
                out[u].append(v)
        return tuple(tuple(o) for o in out)

    @cached_property
    def in_degree(self) -> tuple:
        return tuple(len(row) for row in self.in_edges)

    def edges(self) -> list:
        """Edges as (source, target) pairs, repeated by multiplicity."""
        return [(u, v) for v, row in enumerate(self.in_edges) for u in row]

    def edge_counts(self) -> dict:
        counts = {}
        for e in self.edges():
            counts[e] = counts.get(e, 0) + 1
        return counts

    def original_nodes(self) -> list:
        return [v for v, tag in enumerate(self.provenance) if isinstance(tag, Original)]

    def units(self, restrict_to_original: bool = True) -> list:
        """Pinnable groups of instance nodes.

        Pinning gene g seeds every node tagged ``Original(g)`` (one per
        phase in a cyclic product). Without the restriction every node is
        its own unit.
        """
        if not restrict_to_original:
            return [(v,) for v in range(self.m)]
        groups = {}
        for v, tag in enumerate(self.provenance):
            if isinstance(tag, Original):
                groups.setdefault(tag.node, []).append(v)
        return sorted((tuple(g) for g in groups.values()), key=lambda g: g[0])

    def genes(self, members: Iterable[int]) -> tuple:
        """Gene ids behind ``members`` (auxiliary nodes are skipped)."""
        out = set()
        for v in members:
            tag = self.provenance[v]
            if isinstance(tag, Original):
                out.add(tag.node)
        return tuple(sorted(out))

    def with_tau(self, tau) -> "TssInstance":
        return TssInstance(self.in_edges, tuple(tau), self.provenance)

    def induced(self, nodes) -> tuple:
        """Sub-instance on ``nodes`` (edges from outside dropped) and the index map."""
        nodes = sorted(nodes)
        pos = {v: k for k, v in enumerate(nodes)}
        rows = tuple(tuple(pos[u] for u in self.in_edges[v] if u in pos) for v in nodes)
        sub = TssInstance(rows, tuple(self.tau[v] for v in nodes),
                          tuple(self.provenance[v] for v in nodes))
        return sub, nodes


@dataclass(frozen=True)
class CascadeTrace:
    layers: tuple  # X[0] ⊆ X[1] ⊆ ... as frozensets

    @property
    def fixpoint(self) -> frozenset:
        return self.layers[-1]

    @property
    def seed(self) -> frozenset:
        return self.layers[0]

    def activation_round(self) -> dict:
        rounds = {}
        for k, layer in enumerate(self.layers):
            for v in layer:
                rounds.setdefault(v, k)
        return rounds


@dataclass(frozen=True)
class TargetSet:
    members: tuple
    method: str = ""

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(sorted(set(self.members))))

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def cascade(inst: TssInstance, seed: Iterable[int]) -> CascadeTrace:
    """Run the threshold process from ``seed`` until no node joins.

    Layer k adds every inactive node whose count of active in-edges at
    layer k-1 (parallel edges counted) reaches its threshold.
    """
    active = set(seed)
    for v in active:
        if not 0 <= v < inst.m:
            raise IndexError(f"seed node {v} outside [0, {inst.m})")
    layers = [frozenset(active)]
    count = [0] * inst.m
    out = inst.out_edges
    tau = inst.tau
    for u in active:
        for v in out[u]:
            count[v] += 1
    joining = [v for v in range(inst.m) if v not in active and count[v] >= tau[v]]
    while joining:
        active.update(joining)
        layers.append(frozenset(active))
        touched = set()
        for u in joining:
            for v in out[u]:
                count[v] += 1
                touched.add(v)
        joining = sorted(v for v in touched if v not in active and count[v] >= tau[v])
    return CascadeTrace(tuple(layers))


def closure(inst: TssInstance, seed: Iterable[int]) -> set:
    """Cascade fixpoint only (queue order, no layer bookkeeping)."""
    active = set(seed)
    count = [0] * inst.m
    out = inst.out_edges
    tau = inst.tau
    queue = list(active)
    for v in range(inst.m):
        if v not in active and tau[v] <= 0:
            active.add(v)
            queue.append(v)
    while queue:
        u = queue.pop()
        for v in out[u]:
            count[v] += 1
            if v not in active and count[v] >= tau[v]:
                active.add(v)
                queue.append(v)
    return active


def is_target_set(inst: TssInstance, seed: Iterable[int]) -> bool:
    return len(closure(inst, seed)) == inst.m


def mandatory_seeds(inst: TssInstance) -> set:
    """Nodes whose threshold exceeds their in-degree from other nodes.

    Such a node can never be activated by the cascade, so it belongs to
    every target set.
    """
    out = set()
    for v, row in enumerate(inst.in_edges):
        if inst.tau[v] > sum(1 for u in row if u != v):
            out.add(v)
    return out


def minimal_certificate(inst: TssInstance, seed) -> CascadeTrace:
    trace = cascade(inst, seed)
    if len(trace.fixpoint) != inst.m:
        missing = sorted(set(range(inst.m)) - trace.fixpoint)
        raise NotATargetSet(f"seed leaves {len(missing)} nodes inactive, e.g. {missing[:5]}")
    return trace


def _forced_units(inst, units):
    mand = mandatory_seeds(inst)
    where = {v: k for k, unit in enumerate(units) for v in unit}
    forced = set()
    for v in mand:
        if v not in where:
            raise Infeasible(f"node {v} can only be seeded, but it is not a candidate")
        forced.add(where[v])
    return sorted(forced)


def solve_exact(inst: TssInstance, budget: int = 25, restrict_to_original: bool = True) -> TargetSet:
    """Minimum target set over candidate units by increasing cardinality.

    Among minimum sets the lexicographically smallest is returned. Units
    that are mandatory are fixed first; units already activated by them are
    dropped. ``budget`` caps the number of remaining free units.
    """
    units = inst.units(restrict_to_original)
    forced = _forced_units(inst, units)
    base_seed = [v for k in forced for v in units[k]]
    everything = [v for unit in units for v in unit]
    if not is_target_set(inst, everything):
        raise Infeasible("seeding every candidate still leaves nodes inactive")
    base = closure(inst, base_seed)
    free = [k for k in range(len(units)) if k not in forced and not set(units[k]) <= base]
    if len(free) > budget:
        raise BudgetExceeded(f"{len(free)} candidate units exceed the budget of {budget}")
    for size in range(len(free) + 1):
        for combo in itertools.combinations(free, size):
            seed = set(base)
            for k in combo:
                seed.update(units[k])
            if len(closure(inst, seed)) == inst.m:
                chosen = sorted(forced + list(combo))
                return TargetSet([v for k in chosen for v in units[k]], "exact")
    raise Infeasible("no candidate subset is a target set")  # unreachable after the check above


def solve_greedy(inst: TssInstance, restrict_to_original: bool = True) -> TargetSet:
    """Coverage-greedy target set with a redundancy-pruning pass.

    Mandatory units are taken first. Each round adds the unit whose seeding
    activates the most nodes (lowest index on ties). Afterwards members are
    dropped in reverse order of addition whenever the rest still works.
    """
    units = inst.units(restrict_to_original)
    chosen = _forced_units(inst, units)
    active = closure(inst, [v for k in chosen for v in units[k]])
    while len(active) < inst.m:
        best, best_size = None, -1
        for k, unit in enumerate(units):
            if k in chosen or set(unit) <= active:
                continue
            size = len(closure(inst, active | set(unit)))
            if size > best_size:
                best, best_size = k, size
        if best is None:
            raise Infeasible("candidates exhausted before every node was activated")
        chosen.append(best)
        active = closure(inst, active | set(units[best]))
    for k in reversed(list(chosen)):
        rest = [c for c in chosen if c != k]
        if is_target_set(inst, [v for c in rest for v in units[c]]):
            chosen = rest
    return TargetSet([v for k in chosen for v in units[k]], "greedy")


def export_ilp(inst: TssInstance, sink, restrict_to_original: bool = True) -> None:
    """Write the ordering-based integer program for ``inst`` in CPLEX LP format.

    Rows: ``thr_i`` (out-edge ordering count against the threshold),
    ``ord_i_j`` (one orientation per pair) and ``tri_i_j_l`` (no 3-cycles,
    one row per ordered triple). Self-loops have no ordering variable and
    are left out of the sums. With ``restrict_to_original`` the seeding
    variables of auxiliary nodes are fixed to zero.
    """
    m = inst.m
    counts = inst.edge_counts()
    originals = inst.original_nodes() if restrict_to_original else list(range(m))
    w = sink.write
    w(f"\\ target set selection, {m} nodes\n")
    w("Minimize\n")
    w(" obj: " + (" + ".join(f"s_{i}" for i in originals) if originals else "0") + "\n")
    w("Subject To\n")
    for i in range(m):
        terms = []
        for j in range(m):
            c = counts.get((i, j), 0)
            if c and j != i:
                terms.append(f"e_{i}_{j}" if c == 1 else f"{c} e_{i}_{j}")
        t = inst.tau[i]
        terms.append(f"{t} s_{i}")
        w(f" thr_{i}: " + " + ".join(terms).replace("+ -", "- ") + f" >= {t}\n")
    for i, j in itertools.combinations(range(m), 2):
        w(f" ord_{i}_{j}: e_{i}_{j} + e_{j}_{i} = 1\n")
    for i, j, l in itertools.permutations(range(m), 3):
        w(f" tri_{i}_{j}_{l}: e_{i}_{j} + e_{j}_{l} + e_{l}_{i} <= 2\n")
    fixed = [i for i in range(m) if i not in set(originals)]
    if fixed:
        w("Bounds\n")
        for i in fixed:
            w(f" s_{i} = 0\n")
    if m:
        w("Binaries\n")
        names = [f"s_{i}" for i in range(m)]
        names += [f"e_{i}_{j}" for i, j in itertools.permutations(range(m), 2)]
        for k in range(0, len(names), 10):
            w(" " + " ".join(names[k:k + 10]) + "\n")
    w("End\n")
