"""Check that pinned inputs really drive a network to its target attractor.

Exhaustive checks build successor tables over the free (unpinned) bits and
answer convergence questions by reverse reachability, so every initial state
is covered at once. Monte Carlo runs reproduce trajectories from a seed.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import TooLarge
from .network import (
    Attractor,
    RegulatoryNetwork,
    _pins,
    decode_state,
    encode_state,
    step_asynchronous,
    step_stochastic,
    step_synchronous,
    successor_table,
)

MAX_FREE = 20
SCHEDULES = ("sync", "async_uniform", "round_robin", "stochastic_uniform")


@dataclass
class VerificationReport:
    mode: str
    trials: int
    converged: int
    max_steps_observed: int
    counterexample: dict | None = None
    schedule: str = "sync"
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.converged == self.trials

    def summary(self) -> str:
        return f"{self.converged}/{self.trials} converged"

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "schedule": self.schedule,
            "trials": self.trials,
            "converged": self.converged,
            "max_steps_observed": self.max_steps_observed,
            "counterexample": self.counterexample,
        }


def _target_states(target) -> tuple:
    if isinstance(target, Attractor):
        return target.states
    target = tuple(target)
    if target and isinstance(target[0], (tuple, list)):
        return tuple(tuple(s) for s in target)
    return (target,)


# ---------------------------------------------------------------------------
# graph helpers over encoded states
# ---------------------------------------------------------------------------

def _reverse_csr(succs, size):
    src = np.concatenate([np.arange(size, dtype=np.int64)] * len(succs))
    dst = np.concatenate(succs)
    order = np.argsort(dst, kind="stable")
    starts = np.zeros(size + 1, dtype=np.int64)
    np.cumsum(np.bincount(dst, minlength=size), out=starts[1:])
    return src[order], starts


def _backward_bfs(preds, starts, seeds):
    """Shortest distance (over any successor) from each state to ``seeds``; -1 if none."""
    dist = np.full(len(starts) - 1, -1, dtype=np.int64)
    queue = deque()
    for s in seeds:
        if dist[s] < 0:
            dist[s] = 0
            queue.append(int(s))
    while queue:
        v = queue.popleft()
        d = dist[v] + 1
        for u in preds[starts[v]:starts[v + 1]]:
            if dist[u] < 0:
                dist[u] = d
                queue.append(int(u))
    return dist


def _almost_sure(succs, target_idx):
    """States from which a fair random choice among ``succs`` surely ends at target.

    The target must be absorbing under every successor; then convergence
    with probability one means no reachable state is cut off from it.
    """
    size = len(succs[0])
    if any(int(s[target_idx]) != target_idx for s in succs):
        return np.zeros(size, dtype=bool), np.full(size, -1)
    preds, starts = _reverse_csr(succs, size)
    dist = _backward_bfs(preds, starts, [target_idx])
    bad = np.flatnonzero(dist < 0)
    doomed = _backward_bfs(preds, starts, bad) >= 0
    return ~doomed, dist


def _surely(succs, target_idx):
    """States from which every sequence of successors ends at the target."""
    size = len(succs[0])
    if any(int(s[target_idx]) != target_idx for s in succs):
        return np.zeros(size, dtype=bool)
    preds, starts = _reverse_csr(succs, size)
    pending = np.full(size, len(succs), dtype=np.int64)
    good = np.zeros(size, dtype=bool)
    good[target_idx] = True
    queue = deque([target_idx])
    while queue:
        v = queue.popleft()
        for u in preds[starts[v]:starts[v + 1]]:
            if good[u]:
                continue
            pending[u] -= 1
            if pending[u] == 0:
                good[u] = True
                queue.append(int(u))
    return good


# ---------------------------------------------------------------------------
# exhaustive verification
# ---------------------------------------------------------------------------

def _free_nodes(net, pins):
    free = [i for i in range(net.n) if i not in pins]
    if len(free) > MAX_FREE:
        raise TooLarge(f"{len(free)} free nodes exceeds the exhaustive limit of {MAX_FREE}")
    return free


def _report(mode, schedule, ok, dist, decode, horizon):
    ok = ok & (dist >= 0) & (dist <= horizon)
    trials = len(ok)
    conv = int(ok.sum())
    max_steps = int(dist[ok].max()) if conv else 0
    cex = None
    if conv < trials:
        first = int(np.flatnonzero(~ok)[0])
        cex = {"initial": decode(first), "schedule": schedule}
    return VerificationReport(mode, trials, conv, max_steps, cex, schedule)


def verify_exhaustive(net: RegulatoryNetwork, target, pins=None, horizon: int | None = None,
                      schedule: str = "sync", consistent_only: bool = True,
                      adversarial: bool = False) -> VerificationReport:
    """Check every initial state agreeing with the pins.

    ``sync`` demands that the synchronous trajectory enters the target
    attractor within ``horizon`` steps (default: state count plus period).
    ``async`` and ``stochastic`` demand convergence with probability one
    under uniformly random node choice (with a random alternative for rule
    sets) or alternative choice; with ``adversarial`` either check requires
    convergence for every sequence of choices. ``consistent_only=False`` also starts from
    states that disagree with the pins, which are overwritten at the first
    step.
    """
    p = _pins(pins)
    states = _target_states(target)
    free = _free_nodes(net, p)
    k = len(free)
    if horizon is None:
        horizon = (1 << k) + len(states)
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if any(any(s[i] != b for i, b in p.items()) for s in states):
        size = 1 << k
        dist = np.full(size, -1)
        return _report("exhaustive", schedule, np.zeros(size, bool), dist,
                       lambda v: decode_state(v, net.n, free, p), horizon)

    if schedule == "sync":
        succ = successor_table(net, p, free)
        tgt = [encode_state(s, free) for s in states]
        closed = all(int(succ[tgt[a]]) == tgt[(a + 1) % len(tgt)] for a in range(len(tgt)))
        if closed:
            preds, starts = _reverse_csr([succ], len(succ))
            dist = _backward_bfs(preds, starts, tgt)
        else:
            dist = np.full(len(succ), -1)
        ok = dist >= 0
        succs = [succ]
    else:
        if len(states) != 1:
            raise ValueError("asynchronous and stochastic checks need a fixed-point target")
        tgt = encode_state(states[0], free)
        if schedule == "async":
            succs = [successor_table(net, p, free, which=xi, active=j)
                     for j in free for xi in range(net.alternatives)] or [np.zeros(1, np.int64)]
        elif schedule == "stochastic":
            succs = [successor_table(net, p, free, which=xi) for xi in range(net.alternatives)]
        else:
            raise ValueError(f"unknown schedule {schedule!r}")
        if adversarial:
            ok = _surely(succs, tgt)
            _, dist = _almost_sure(succs, tgt)
        else:
            ok, dist = _almost_sure(succs, tgt)
        horizon = max(horizon, len(succs[0]))

    decode = lambda v: decode_state(v, net.n, free, p)  # noqa: E731
    if consistent_only:
        return _report("exhaustive", schedule, ok, dist, decode, horizon)

    # every state of the full space: pins overwrite disagreeing bits at t=1
    if schedule == "sync":
        full_succ = [_full_successor(net, p)]
    elif schedule == "async":
        full_succ = [_full_successor(net, p, which=xi, active=j)
                     for j in range(net.n) for xi in range(net.alternatives)]
    else:
        full_succ = [_full_successor(net, p, which=xi) for xi in range(net.alternatives)]
    size = 1 << net.n
    idx = np.arange(size, dtype=np.int64)
    consistent = np.ones(size, dtype=bool)
    for i, b in p.items():
        consistent &= ((idx >> (net.n - 1 - i)) & 1) == b
    to_free = _project(idx, net.n, free)
    ok_full = np.zeros(size, dtype=bool)
    dist_full = np.full(size, -1, dtype=np.int64)
    ok_full[consistent] = ok[to_free[consistent]]
    dist_full[consistent] = dist[to_free[consistent]]
    bad = ~consistent
    # a disagreeing state converges when all of its possible successors do
    step_ok = np.ones(int(bad.sum()), dtype=bool)
    step_dist = np.zeros(int(bad.sum()), dtype=np.int64)
    for s in full_succ:
        nxt = to_free[s[bad]]
        step_ok &= ok[nxt]
        step_dist = np.maximum(step_dist, dist[nxt] + 1)
    ok_full[bad] = step_ok
    dist_full[bad] = np.where(step_ok, step_dist, -1)
    return _report("exhaustive", schedule, ok_full, dist_full,
                   lambda v: decode_state(v, net.n), horizon)


def _full_successor(net, pins, which=None, active=None):
    """Successor over all n bits with pinned bits forced to their values."""
    succ = successor_table(net, None, list(range(net.n)), which=which, active=active)
    for i, b in pins.items():
        bit = 1 << (net.n - 1 - i)
        succ = (succ & ~bit) | (bit if b else 0)
    return succ


def _project(idx, n, free):
    out = np.zeros(len(idx), dtype=np.int64)
    k = len(free)
    for pos, j in enumerate(free):
        out |= ((idx >> (n - 1 - j)) & 1) << (k - 1 - pos)
    return out


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(trial)])


def _random_start(rng, net, pins):
    x = rng.integers(0, 2, size=net.n)
    for i, b in pins.items():
        x[i] = b
    return tuple(int(v) for v in x)


def verify_monte_carlo(net: RegulatoryNetwork, target, pins=None, schedule: str = "sync",
                       trials: int = 1000, seed: int = 0,
                       horizon: int | None = None) -> VerificationReport:
    """Simulate ``trials`` random pin-consistent starts for ``horizon`` steps.

    Trial t draws its start and its schedule from a generator seeded by
    ``(seed, t)``. A trial converges when its state lies on the target
    attractor at the horizon. ``async_uniform`` updates one uniformly chosen
    node per step, ``round_robin`` cycles through the nodes and
    ``stochastic_uniform`` draws the alternative uniformly each step. The
    asynchronous schedules also draw an alternative for the updated node
    when the network has rule sets.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if schedule not in SCHEDULES:
        raise ValueError(f"unknown schedule {schedule!r}")
    p = _pins(pins)
    states = _target_states(target)
    on_target = set(states)
    horizon = 64 * net.n if horizon is None else horizon
    k = net.alternatives
    closed = _target_closed(net, states, p, schedule)
    conv = 0
    max_steps = 0
    cex = None
    for t in range(trials):
        rng = trial_rng(seed, t)
        x = _random_start(rng, net, p)
        first = 0 if x in on_target else None
        for step in range(1, horizon + 1):
            if closed and first is not None:
                break  # the target is absorbing
            if schedule == "sync":
                x = step_synchronous(net, x, p)
            elif schedule == "async_uniform":
                j = int(rng.integers(net.n))
                x = step_asynchronous(net, x, p, j, int(rng.integers(k)) if k > 1 else None)
            elif schedule == "round_robin":
                x = step_asynchronous(net, x, p, (step - 1) % net.n,
                                      int(rng.integers(k)) if k > 1 else None)
            else:
                x = step_stochastic(net, x, p, int(rng.integers(k)))
            if x in on_target:
                if first is None:
                    first = step
            else:
                first = None
        if closed and first is not None:
            conv += 1
            max_steps = max(max_steps, first)
        elif cex is None:
            cex = {"trial": t, "initial": _random_start(trial_rng(seed, t), net, p),
                   "schedule": f"{schedule} seed={seed} trial={t}"}
    return VerificationReport("monte_carlo", trials, conv, max_steps, cex, schedule)


def _target_closed(net, states, pins, schedule) -> bool:
    """Whether the target is an attractor of the pinned dynamics under ``schedule``."""
    if any(s[i] != b for s in states for i, b in pins.items()):
        return False
    if schedule == "sync":
        p = len(states)
        return all(step_synchronous(net, states[a], pins) == states[(a + 1) % p] for a in range(p))
    if len(states) != 1:
        return False
    x = states[0]
    return all(step_stochastic(net, x, pins, xi) == x for xi in range(net.alternatives))


# ---------------------------------------------------------------------------
# cyclic targets with replayed pins
# ---------------------------------------------------------------------------

def verify_cyclic(net: RegulatoryNetwork, attractor, pins, trials: int | None = None,
                  seed: int | None = None, horizon: int | None = None) -> VerificationReport:
    """Convergence to a cycle while pinned nodes replay it.

    A pinned node takes its value in the attractor state of the current
    phase, the phase advancing by one each step. The run converges when the
    free nodes eventually follow the attractor in step with the phase up to
    a fixed rotation. Exhaustive over every phase and free assignment when
    ``trials`` is None, otherwise Monte Carlo.
    """
    states = attractor.states if isinstance(attractor, Attractor) else tuple(map(tuple, attractor))
    period = len(states)
    nodes = sorted(pins.nodes if hasattr(pins, "nodes") else (pins.keys() if isinstance(pins, dict) else pins))
    free = _free_nodes(net, set(nodes))
    k = len(free)
    replay = [{i: states[a][i] for i in nodes} for a in range(period)]
    good = set()
    for c in range(period):
        if all(states[(a + c) % period][i] == states[a][i] for a in range(period) for i in nodes):
            good |= {(a, states[(a + c) % period]) for a in range(period)}
    if trials is None:
        size = 1 << k
        succs = [successor_table(net, replay[a], free) for a in range(period)]
        prod = np.concatenate([((a + 1) % period) * size + succs[a] for a in range(period)])
        seeds = [a * size + encode_state(x, free) for a, x in good]
        preds, starts = _reverse_csr([prod], period * size)
        dist = _backward_bfs(preds, starts, seeds)
        ok = dist >= 0
        horizon = period * size if horizon is None else horizon
        decode = lambda v: {"phase": v // size,  # noqa: E731
                            "initial": decode_state(v % size, net.n, free, replay[v // size])}
        report = _report("exhaustive", "sync-replay", ok, dist, decode, horizon)
        report.details["period"] = period
        return report
    if seed is None:
        raise ValueError("Monte Carlo verification needs a seed")
    horizon = 64 * net.n + period if horizon is None else horizon
    conv, max_steps, cex = 0, 0, None
    for t in range(trials):
        rng = trial_rng(seed, t)
        a = int(rng.integers(period))
        x = _random_start(rng, net, replay[a])
        first = 0 if (a, x) in good else None
        for step in range(1, horizon + 1):
            x = step_synchronous(net, x, replay[(a + 1) % period])
            x = tuple(x)
            # step_synchronous writes the next phase's pins into the output
            a = (a + 1) % period
            if (a, x) in good:
                first = step if first is None else first
            else:
                first = None
        if first is not None:
            conv += 1
            max_steps = max(max_steps, first)
        elif cex is None:
            cex = {"trial": t, "schedule": f"sync-replay seed={seed} trial={t}"}
    return VerificationReport("monte_carlo", trials, conv, max_steps, cex, "sync-replay")
