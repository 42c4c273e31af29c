"""Boolean regulatory networks: update rules, pinned dynamics, attractors.

States are tuples of 0/1 ints indexed by node. Node 0 is the most
significant position when a state is read as a binary number, so numeric
order of encoded states equals lexicographic order of the tuples.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidAlternative,
    PinMismatch,
    SearchBudgetExceeded,
)

State = tuple

BRUTE_FORCE_BOUND = 22
_CHUNK = 1 << 16


# ---------------------------------------------------------------------------
# update rules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TruthTable:
    """Arbitrary Boolean function given by its output column.

    ``inputs`` are ascending node ids; the first input is the most
    significant bit of the table index.
    """

    inputs: tuple
    table: tuple

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(int(j) for j in self.inputs))
        object.__setattr__(self, "table", tuple(int(b) for b in self.table))
        if list(self.inputs) != sorted(set(self.inputs)):
            raise ValueError("truth table inputs must be strictly ascending")
        if len(self.table) != 1 << len(self.inputs):
            raise ValueError(
                f"truth table over {len(self.inputs)} inputs needs "
                f"{1 << len(self.inputs)} entries, got {len(self.table)}"
            )
        if any(b not in (0, 1) for b in self.table):
            raise ValueError("truth table entries must be 0 or 1")

    @property
    def variables(self):
        return self.inputs

    @classmethod
    def from_function(cls, inputs: Iterable[int], fn) -> "TruthTable":
        """Tabulate ``fn(bits)`` where ``bits`` follows ascending ``inputs``."""
        inputs = tuple(sorted(set(inputs)))
        table = tuple(
            int(bool(fn(bits))) for bits in itertools.product((0, 1), repeat=len(inputs))
        )
        return cls(inputs, table)

    @classmethod
    def constant(cls, value: int) -> "TruthTable":
        return cls((), (int(value),))

    def evaluate(self, x) -> int:
        idx = 0
        for j in self.inputs:
            idx = (idx << 1) | x[j]
        return self.table[idx]


@dataclass(frozen=True)
class Threshold:
    """``1`` iff ``sum(w_j * x_j) >= tau``."""

    inputs: tuple
    weights: tuple
    tau: float

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(int(j) for j in self.inputs))
        object.__setattr__(self, "weights", tuple(self.weights))
        if len(self.inputs) != len(self.weights):
            raise ValueError("threshold rule needs one weight per input")
        if len(set(self.inputs)) != len(self.inputs):
            raise ValueError("threshold inputs must be distinct")

    @property
    def variables(self):
        return self.inputs

    def evaluate(self, x) -> int:
        s = 0
        for j, w in zip(self.inputs, self.weights):
            if x[j]:
                s += w
        return int(s >= self.tau)


@dataclass(frozen=True)
class NestedCanalyzing:
    """Ranked canalyzing inputs.

    The output is ``canalyzed[l]`` for the first rank ``l`` whose input
    equals ``canalyzing[l]``; ``default`` when no rank matches.
    """

    order: tuple
    canalyzing: tuple
    canalyzed: tuple
    default: int

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(int(j) for j in self.order))
        object.__setattr__(self, "canalyzing", tuple(int(b) for b in self.canalyzing))
        object.__setattr__(self, "canalyzed", tuple(int(b) for b in self.canalyzed))
        object.__setattr__(self, "default", int(self.default))
        d = len(self.order)
        if len(self.canalyzing) != d or len(self.canalyzed) != d:
            raise ValueError("nested canalyzing lists must share one length")
        if len(set(self.order)) != d:
            raise ValueError("nested canalyzing order must not repeat inputs")
        bits = self.canalyzing + self.canalyzed + (self.default,)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("canalyzing values must be 0 or 1")

    @property
    def variables(self):
        return self.order

    def evaluate(self, x) -> int:
        for j, b, a in zip(self.order, self.canalyzing, self.canalyzed):
            if x[j] == b:
                return a
        return self.default

    def deciding_rank(self, x):
        """0-based rank that decides the output at ``x``, or ``None`` for the default."""
        for l, (j, b) in enumerate(zip(self.order, self.canalyzing)):
            if x[j] == b:
                return l
        return None


@dataclass(frozen=True)
class RuleSet:
    """Alternatives of a probabilistic node; ``xi`` selects one per step."""

    alternatives: tuple

    def __post_init__(self):
        object.__setattr__(self, "alternatives", tuple(self.alternatives))
        if not self.alternatives:
            raise ValueError("rule set needs at least one alternative")
        if any(isinstance(r, RuleSet) for r in self.alternatives):
            raise ValueError("rule sets cannot nest")

    @property
    def variables(self):
        return tuple(sorted({j for r in self.alternatives for j in r.variables}))

    def evaluate(self, x, which=0) -> int:
        if which is None or not 0 <= which < len(self.alternatives):
            raise InvalidAlternative(
                f"alternative {which} out of range for {len(self.alternatives)} alternatives"
            )
        return self.alternatives[which].evaluate(x)


Rule = Union[TruthTable, Threshold, NestedCanalyzing, RuleSet]


def evaluate_rule(rule: Rule, state, which=None) -> int:
    """Value of ``rule`` at ``state``.

    ``which`` picks a RuleSet alternative; plain rules and single-alternative
    rule sets ignore it. A larger RuleSet evaluated with ``which=None``
    raises ``InvalidAlternative``.
    """
    if isinstance(rule, RuleSet):
        if len(rule.alternatives) == 1:
            return rule.alternatives[0].evaluate(state)
        return rule.evaluate(state, which)
    return rule.evaluate(state)


# ---------------------------------------------------------------------------
# network, pins, attractors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegulatoryNetwork:
    rules: tuple
    in_neighbors: tuple = None
    names: tuple = None

    def __post_init__(self):
        rules = tuple(self.rules)
        object.__setattr__(self, "rules", rules)
        n = len(rules)
        if self.in_neighbors is None:
            nbrs = tuple(tuple(sorted(set(r.variables))) for r in rules)
        else:
            nbrs = tuple(tuple(int(j) for j in row) for row in self.in_neighbors)
        if len(nbrs) != n:
            raise DimensionMismatch("need one in-neighbor list per node")
        for i, row in enumerate(nbrs):
            if len(set(row)) != len(row):
                raise ValueError(f"duplicate in-neighbors for node {i}")
            for j in row:
                if not 0 <= j < n:
                    raise IndexError(f"node {i} lists in-neighbor {j} outside [0, {n})")
            missing = set(rules[i].variables) - set(row)
            if missing:
                raise ValueError(
                    f"rule of node {i} reads {sorted(missing)} which are not in-neighbors"
                )
        object.__setattr__(self, "in_neighbors", nbrs)
        if self.names is None:
            names = tuple(f"x{i + 1}" for i in range(n))
        else:
            names = tuple(str(s) for s in self.names)
            if len(names) != n:
                raise DimensionMismatch("need one name per node")
            if len(set(names)) != n:
                raise ValueError("node names must be unique")
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return len(self.rules)

    def edges(self):
        return [(j, i) for i, row in enumerate(self.in_neighbors) for j in row]

    def out_neighbors(self):
        out = [[] for _ in range(self.n)]
        for j, i in self.edges():
            out[j].append(i)
        return [tuple(sorted(o)) for o in out]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown node {name!r}") from None

    @property
    def alternatives(self) -> int:
        """Number of stochastic alternatives (1 for deterministic networks)."""
        ks = {len(r.alternatives) for r in self.rules if isinstance(r, RuleSet)}
        ks.discard(1)
        if len(ks) > 1:
            raise InvalidAlternative(f"rule sets disagree on alternative count: {sorted(ks)}")
        return ks.pop() if ks else 1

    def with_rules(self, rules) -> "RegulatoryNetwork":
        return RegulatoryNetwork(tuple(rules), self.in_neighbors, self.names)


@dataclass(frozen=True)
class InputSet:
    """Control nodes and the values they are pinned to."""

    pinned: tuple = ()

    def __post_init__(self):
        items = self.pinned.items() if isinstance(self.pinned, Mapping) else self.pinned
        pairs = tuple(sorted((int(i), int(b)) for i, b in items))
        if len({i for i, _ in pairs}) != len(pairs):
            raise ValueError("node pinned twice")
        object.__setattr__(self, "pinned", pairs)

    @classmethod
    def from_state(cls, nodes: Iterable[int], x_star) -> "InputSet":
        return cls(tuple((i, x_star[i]) for i in nodes))

    @property
    def nodes(self) -> tuple:
        return tuple(i for i, _ in self.pinned)

    def as_dict(self) -> dict:
        return dict(self.pinned)

    def __len__(self):
        return len(self.pinned)


def _pins(pins) -> dict:
    if pins is None:
        return {}
    if isinstance(pins, InputSet):
        return pins.as_dict()
    return {int(i): int(b) for i, b in dict(pins).items()}


@dataclass(frozen=True)
class Attractor:
    states: tuple

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(tuple(s) for s in self.states))
        if not self.states:
            raise ValueError("attractor needs at least one state")

    def __len__(self):
        return len(self.states)

    @property
    def is_fixed_point(self) -> bool:
        return len(self.states) == 1

    def rotation_of(self, other) -> bool:
        """True when ``other`` lists the same cycle, possibly starting elsewhere."""
        other = tuple(tuple(s) for s in (other.states if isinstance(other, Attractor) else other))
        if len(other) != len(self.states):
            return False
        p = len(other)
        return any(other[k:] + other[:k] == self.states for k in range(p))

    def check(self, net: RegulatoryNetwork) -> bool:
        p = len(self.states)
        return all(
            step_synchronous(net, self.states[l]) == self.states[(l + 1) % p] for l in range(p)
        )


def parse_state(text: str, n: int | None = None) -> State:
    text = text.strip()
    if not text or any(c not in "01" for c in text):
        raise ValueError(f"state must be a 0/1 string, got {text!r}")
    if n is not None and len(text) != n:
        raise DimensionMismatch(f"state has {len(text)} bits, network has {n} nodes")
    return tuple(int(c) for c in text)


def format_state(state) -> str:
    return "".join(str(int(b)) for b in state)


def _check_state(net, state):
    if len(state) != net.n:
        raise DimensionMismatch(f"state has {len(state)} entries, network has {net.n} nodes")


# ---------------------------------------------------------------------------
# dynamics
# ---------------------------------------------------------------------------

def step_synchronous(net: RegulatoryNetwork, state, pins=None, which=None) -> State:
    _check_state(net, state)
    p = _pins(pins)
    out = []
    for i, rule in enumerate(net.rules):
        out.append(p[i] if i in p else evaluate_rule(rule, state, which))
    return tuple(out)


def step_asynchronous(net: RegulatoryNetwork, state, pins, active: int, which=None) -> State:
    """Only ``active`` is recomputed (under alternative ``which`` for rule sets);
    pinned nodes never move."""
    _check_state(net, state)
    if not 0 <= active < net.n:
        raise IndexError(f"active node {active} outside [0, {net.n})")
    p = _pins(pins)
    out = list(state)
    if active not in p:
        out[active] = evaluate_rule(net.rules[active], state, which)
    return tuple(out)


def step_stochastic(net: RegulatoryNetwork, state, pins, xi: int) -> State:
    """Synchronous step under alternative ``xi`` (0-based)."""
    k = net.alternatives
    if not 0 <= xi < k:
        raise InvalidAlternative(f"alternative {xi} out of range for {k} alternatives")
    _check_state(net, state)
    p = _pins(pins)
    out = []
    for i, rule in enumerate(net.rules):
        out.append(p[i] if i in p else evaluate_rule(rule, state, xi))
    return tuple(out)


def _check_pins_agree(state, pins: dict):
    bad = [i for i, b in pins.items() if state[i] != b]
    if bad:
        raise PinMismatch(f"initial state disagrees with pinned nodes {bad}")


@dataclass
class SimulationResult:
    final: State
    steps: int  # first time index at which ``final`` was visited
    fixed: bool  # final state is a fixed point of the pinned dynamics
    cycle: Attractor | None = None  # set when a repeated state was seen
    trajectory: list = field(default_factory=list)

    @property
    def repeated(self) -> bool:
        return self.cycle is not None


def simulate_pinned(net, initial, pins=None, max_steps: int = 1000, keep_trajectory=False):
    """Iterate the pinned synchronous map from ``initial``.

    Stops at the first repeated state or after ``max_steps`` steps.
    ``initial`` must agree with the pins.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    _check_state(net, initial)
    p = _pins(pins)
    _check_pins_agree(initial, p)
    seen = {tuple(initial): 0}
    traj = [tuple(initial)]
    x = tuple(initial)
    for t in range(1, max_steps + 1):
        x = step_synchronous(net, x, p)
        if x in seen:
            start = seen[x]
            cyc = Attractor(traj[start:])
            final = traj[start] if len(cyc) == 1 else traj[-1]
            steps = start if len(cyc) == 1 else t - 1
            return SimulationResult(final, steps, len(cyc) == 1, cyc, traj if keep_trajectory else [])
        seen[x] = t
        traj.append(x)
    fixed = step_synchronous(net, x, p) == x
    return SimulationResult(x, max_steps, fixed, None, traj if keep_trajectory else [])


def find_attractor_from(net, initial, pins=None) -> Attractor:
    """Cycle reached from ``initial``, listed from its first visited state."""
    _check_state(net, initial)
    p = _pins(pins)
    seen = {}
    traj = []
    x = tuple(initial)
    while x not in seen:
        seen[x] = len(traj)
        traj.append(x)
        x = step_synchronous(net, x, p)
    return Attractor(traj[seen[x]:])


# ---------------------------------------------------------------------------
# vectorised evaluation over many states
# ---------------------------------------------------------------------------

def eval_rule_columns(rule: Rule, cols, which=None):
    """Evaluate ``rule`` on column arrays (``cols[j]`` holds node j's bits)."""
    if isinstance(rule, RuleSet):
        if len(rule.alternatives) == 1:
            which = 0
        if which is None or not 0 <= which < len(rule.alternatives):
            raise InvalidAlternative(f"alternative {which} out of range")
        return eval_rule_columns(rule.alternatives[which], cols)
    size = len(cols[0]) if len(cols) else 1
    if isinstance(rule, TruthTable):
        idx = np.zeros(size, dtype=np.int64)
        for j in rule.inputs:
            idx = (idx << 1) | cols[j]
        return np.asarray(rule.table, dtype=np.int8)[idx]
    if isinstance(rule, Threshold):
        s = np.zeros(size, dtype=float)
        for j, w in zip(rule.inputs, rule.weights):
            s += w * cols[j]
        return (s >= rule.tau).astype(np.int8)
    if isinstance(rule, NestedCanalyzing):
        out = np.full(size, rule.default, dtype=np.int8)
        open_ = np.ones(size, dtype=bool)
        for j, b, a in zip(rule.order, rule.canalyzing, rule.canalyzed):
            hit = open_ & (cols[j] == b)
            out[hit] = a
            open_ &= ~hit
        return out
    raise TypeError(f"unknown rule type {type(rule).__name__}")


def state_columns(n: int, idx, free=None, fixed=None):
    """Bit columns for encoded states ``idx``.

    ``free`` lists the nodes encoded by ``idx`` (ascending, first is MSB);
    nodes in ``fixed`` get constant columns.
    """
    idx = np.asarray(idx, dtype=np.int64)
    free = list(range(n)) if free is None else list(free)
    fixed = fixed or {}
    k = len(free)
    cols = [None] * n
    for pos, j in enumerate(free):
        cols[j] = ((idx >> (k - 1 - pos)) & 1).astype(np.int64)
    for j, b in fixed.items():
        cols[j] = np.full(len(idx), int(b), dtype=np.int64)
    return cols


def encode_state(state, free=None) -> int:
    free = range(len(state)) if free is None else free
    v = 0
    for j in free:
        v = (v << 1) | int(state[j])
    return v


def decode_state(v: int, n: int, free=None, fixed=None) -> State:
    free = list(range(n)) if free is None else list(free)
    out = [0] * n
    k = len(free)
    for pos, j in enumerate(free):
        out[j] = (v >> (k - 1 - pos)) & 1
    for j, b in (fixed or {}).items():
        out[j] = int(b)
    return tuple(out)


# ---------------------------------------------------------------------------
# fixed points
# ---------------------------------------------------------------------------

def _is_threshold_net(net) -> bool:
    return all(isinstance(r, Threshold) for r in net.rules)


def find_fixed_points(net: RegulatoryNetwork, limit: int | None = None,
                      brute_force_bound: int = BRUTE_FORCE_BOUND) -> list:
    """States with ``f(x) = x`` in lexicographic order, at most ``limit`` of them.

    Rule sets count a state only when every alternative fixes it.
    Exhaustive up to ``brute_force_bound`` nodes; beyond that only
    all-threshold networks are searched (by backtracking).
    """
    if limit is not None and limit <= 0:
        return []
    if net.n <= brute_force_bound:
        return _fixed_points_brute(net, limit)
    if _is_threshold_net(net):
        return threshold_fixed_points(net, limit)
    raise SearchBudgetExceeded(
        f"{net.n} nodes exceeds the brute-force bound {brute_force_bound} "
        "and the network is not all-threshold"
    )


def _fixed_points_brute(net, limit):
    n = net.n
    found = []
    total = 1 << n
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        cols = state_columns(n, idx)
        ok = np.ones(len(idx), dtype=bool)
        for i, rule in enumerate(net.rules):
            if isinstance(rule, RuleSet):
                for alt in rule.alternatives:
                    ok &= eval_rule_columns(alt, cols) == cols[i]
            else:
                ok &= eval_rule_columns(rule, cols) == cols[i]
            if not ok.any():
                break
        for v in idx[ok]:
            found.append(decode_state(int(v), n))
            if limit is not None and len(found) >= limit:
                return found
    return found


def threshold_fixed_points(net: RegulatoryNetwork, limit: int | None = None) -> list:
    """Backtracking fixed-point search for all-threshold networks.

    Nodes are assigned in index order, 0 before 1, so solutions come out in
    lexicographic order. Each node keeps interval bounds on its weighted
    input sum; a partial assignment is abandoned as soon as an assigned
    node's bounds rule out its own value.
    """
    if not _is_threshold_net(net):
        raise TypeError("threshold_fixed_points needs Threshold rules only")
    n = net.n
    out_w = [[] for _ in range(n)]  # j -> [(i, w)]
    lo = [0.0] * n
    hi = [0.0] * n
    taus = [r.tau for r in net.rules]
    for i, r in enumerate(net.rules):
        for j, w in zip(r.inputs, r.weights):
            out_w[j].append((i, w))
            lo[i] += min(0.0, w)
            hi[i] += max(0.0, w)
    x = [None] * n
    found = []

    def consistent(i):
        if x[i] == 1:
            return hi[i] >= taus[i]
        return lo[i] < taus[i]

    def assign(j, v):
        for i, w in out_w[j]:
            lo[i] += w * v - min(0.0, w)
            hi[i] += w * v - max(0.0, w)

    def unassign(j, v):
        for i, w in out_w[j]:
            lo[i] -= w * v - min(0.0, w)
            hi[i] -= w * v - max(0.0, w)

    def rec(p):
        if p == n:
            found.append(tuple(x))
            return limit is not None and len(found) >= limit
        for v in (0, 1):
            x[p] = v
            if consistent(p):
                assign(p, v)
                ok = all(consistent(i) for i, _ in out_w[p] if x[i] is not None)
                if ok and rec(p + 1):
                    unassign(p, v)
                    x[p] = None
                    return True
                unassign(p, v)
            x[p] = None
        return False

    rec(0)
    return found


def all_attractors(net: RegulatoryNetwork, pins=None) -> list:
    """Every attractor of the pinned synchronous map (exhaustive, small n)."""
    p = _pins(pins)
    free = [i for i in range(net.n) if i not in p]
    if len(free) > BRUTE_FORCE_BOUND:
        raise SearchBudgetExceeded(f"{len(free)} free nodes is too many for enumeration")
    succ = successor_table(net, p, free)
    cycles = []
    color = np.zeros(len(succ), dtype=np.int8)  # 0 new, 1 on stack, 2 done
    for s in range(len(succ)):
        if color[s]:
            continue
        path = []
        v = s
        while color[v] == 0:
            color[v] = 1
            path.append(v)
            v = int(succ[v])
        if color[v] == 1:
            k = path.index(v)
            cycles.append(Attractor([decode_state(u, net.n, free, p) for u in path[k:]]))
        for u in path:
            color[u] = 2
    return cycles


def successor_table(net, pins=None, free=None, which=None, active=None):
    """Encoded successor of every encoded free-bit state.

    ``active`` selects an asynchronous update of one node; ``which`` a
    stochastic alternative. Pinned nodes are not encoded.
    """
    p = _pins(pins)
    free = [i for i in range(net.n) if i not in p] if free is None else list(free)
    k = len(free)
    total = 1 << k
    out = np.empty(total, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        cols = state_columns(net.n, idx, free, p)
        nxt = np.zeros(len(idx), dtype=np.int64)
        for pos, j in enumerate(free):
            if active is None or active == j:
                bits = eval_rule_columns(net.rules[j], cols, which).astype(np.int64)
            else:
                bits = cols[j]
            nxt |= bits << (k - 1 - pos)
        out[start:start + len(idx)] = nxt
    return out
