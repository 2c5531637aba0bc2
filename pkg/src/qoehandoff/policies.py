"""Handoff decision policies.

Covers the learned tabular Q-policy, the load-metric baseline (argmin of
the smoothed RTT+jitter load), the weighted-QoS naive baseline, an offline
minimal-handoff oracle, and a value-iteration solver used as the exact
reference for Q-learning convergence checks.

Actions are interface indices; selecting the current interface means
staying. Joint agent states are indexed row-major over
(state_if0, ..., state_if{n-1}, current_interface).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class InterfaceId:
    index: int
    label: str


@dataclass(frozen=True)
class RewardConfig:
    """Weights and clamp ranges for the blended QoE/cost reward."""

    w_qoe: float = 1.0
    qoe_min: float = 1.0
    qoe_max: float = 5.0
    cost_min: float = 0.0
    cost_max: float = 1.0
    handoff_cost: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.w_qoe <= 1.0:
            raise DomainError("w_qoe must be in [0, 1]")
        if self.qoe_min >= self.qoe_max or self.cost_min >= self.cost_max:
            raise DomainError("min bounds must be below max bounds")
        if self.handoff_cost < 0:
            raise DomainError("handoff_cost must be >= 0")


@dataclass(frozen=True)
class QLearningConfig:
    alpha: float = 0.80
    gamma: float = 0.95
    epsilon: float = 0.2
    epsilon_decay: float = 0.99
    epsilon_floor: float = 0.01
    alpha_decay: str = "constant"  # or "inverse_visit"

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise DomainError("alpha must be in (0, 1]")
        if not 0.0 <= self.gamma < 1.0:
            raise DomainError("gamma must be in [0, 1)")
        if not 0.0 <= self.epsilon <= 1.0:
            raise DomainError("epsilon must be in [0, 1]")
        if self.alpha_decay not in ("constant", "inverse_visit"):
            raise DomainError(f"unknown alpha_decay {self.alpha_decay!r}")


@dataclass(frozen=True)
class HysteresisConfig:
    margin: float = 0.1
    dwell_epochs: int = 2

    def __post_init__(self):
        if self.margin < 0 or self.dwell_epochs < 0:
            raise DomainError("margin and dwell_epochs must be >= 0")


@dataclass(frozen=True)
class JointState:
    """Per-interface QoE states (1-based) plus the attached interface."""

    per_interface_state: tuple[int, ...]
    current_interface: int

    def index(self, n_states: int) -> int:
        idx = 0
        for s in self.per_interface_state:
            if not 1 <= s <= n_states:
                raise DomainError("state out of range for the scheme")
            idx = idx * n_states + (s - 1)
        n_if = len(self.per_interface_state)
        if not 0 <= self.current_interface < n_if:
            raise DomainError("current_interface out of range")
        return idx * n_if + self.current_interface


class QTable:
    """Action-value table over the joint state space."""

    def __init__(self, n_states: int, n_interfaces: int):
        self.n_states = n_states
        self.n_interfaces = n_interfaces
        n_joint = n_states ** n_interfaces * n_interfaces
        self.values = np.zeros((n_joint, n_interfaces))
        self.visit_counts = np.zeros((n_joint, n_interfaces), dtype=int)

    def row(self, s: JointState) -> np.ndarray:
        return self.values[s.index(self.n_states)]

    def to_text(self) -> str:
        doc = {
            "format": "qoehandoff-qtable/1",
            "n_states": self.n_states,
            "n_interfaces": self.n_interfaces,
            "values": self.values.tolist(),
            "visit_counts": self.visit_counts.tolist(),
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "QTable":
        doc = json.loads(text)
        if doc.get("format") != "qoehandoff-qtable/1":
            raise DomainError("not a recognized Q-table document")
        table = cls(doc["n_states"], doc["n_interfaces"])
        table.values = np.array(doc["values"], dtype=float)
        table.visit_counts = np.array(doc["visit_counts"], dtype=int)
        return table


def reward(qoe_value: float, cost: float, cfg: RewardConfig) -> float:
    """Blended reward in [0, 1]: w*f(QoE) + (1-w)*f(Cost).

    f(QoE) ramps linearly from 0 at qoe_min to 1 at qoe_max; f(Cost) ramps
    from 1 at cost_min down to 0 at cost_max.
    """
    if qoe_value >= cfg.qoe_max:
        f_qoe = 1.0
    elif qoe_value <= cfg.qoe_min:
        f_qoe = 0.0
    else:
        f_qoe = (qoe_value - cfg.qoe_min) / (cfg.qoe_max - cfg.qoe_min)
    if cost <= cfg.cost_min:
        f_cost = 1.0
    elif cost >= cfg.cost_max:
        f_cost = 0.0
    else:
        f_cost = (cfg.cost_max - cost) / (cfg.cost_max - cfg.cost_min)
    return cfg.w_qoe * f_qoe + (1.0 - cfg.w_qoe) * f_cost


def q_update(q: QTable, s: JointState, a: int, r: float, s_next: JointState,
             cfg: QLearningConfig) -> QTable:
    """One temporal-difference backup; increments the (s, a) visit count."""
    si = s.index(q.n_states)
    ni = s_next.index(q.n_states)
    if cfg.alpha_decay == "inverse_visit":
        alpha = 1.0 / (1.0 + q.visit_counts[si, a])
    else:
        alpha = cfg.alpha
    target = r + cfg.gamma * q.values[ni].max()
    q.values[si, a] += alpha * (target - q.values[si, a])
    q.visit_counts[si, a] += 1
    return q


def exploit_action(q: QTable, s: JointState) -> int:
    """Greedy action; ties prefer staying on the current interface, then the
    lowest index (anti ping-pong)."""
    row = q.row(s)
    best = row.max()
    candidates = [a for a in range(q.n_interfaces) if row[a] == best]
    if s.current_interface in candidates:
        return s.current_interface
    return candidates[0]


def select_action(q: QTable, s: JointState, cfg: QLearningConfig, mode: str,
                  rng: np.random.Generator) -> int:
    if mode == "explore":
        return int(rng.integers(q.n_interfaces))
    if mode == "exploit":
        return exploit_action(q, s)
    raise DomainError(f"unknown mode {mode!r}")


def epsilon_greedy_action(q: QTable, s: JointState, cfg: QLearningConfig,
                          epsilon: float, rng: np.random.Generator) -> int:
    mode = "explore" if rng.random() < epsilon else "exploit"
    return select_action(q, s, cfg, mode, rng)


def decide_handoff(proposed: int, current: int, expected_gain: float,
                   hys: HysteresisConfig, epochs_since_handoff: int) -> int:
    """Gate a proposed switch behind the hysteresis margin and dwell time."""
    if proposed == current:
        return current
    if expected_gain < hys.margin or epochs_since_handoff < hys.dwell_epochs:
        return current
    return proposed


def m4_policy_step(rnl_per_interface, current: int, hys: HysteresisConfig) -> int:
    """Move to the lowest-load interface when its advantage beats the margin
    (in seconds). Stays put while any estimator is still warming up."""
    if any(v is None for v in rnl_per_interface):
        return current
    target = int(np.argmin(rnl_per_interface))
    if target == current:
        return current
    if rnl_per_interface[current] - rnl_per_interface[target] > hys.margin:
        return target
    return current


def naive_policy_step(qos_inputs, weights, current: int) -> int:
    """Weighted-QoS scoring: bandwidth counts directly, delay/jitter/loss as
    reciprocals; pick the argmax, ties stay on the current interface.

    `qos_inputs` is one mapping per interface with keys among
    bandwidth/delay/jitter/loss; `weights` maps the same keys to weights
    summing to 1.
    """
    total_w = sum(weights.values())
    if abs(total_w - 1.0) > 1e-9:
        raise DomainError("weights must sum to 1")
    scores = []
    for qos in qos_inputs:
        score = 0.0
        score += weights.get("bandwidth", 0.0) * qos.get("bandwidth", 0.0)
        for key in ("delay", "jitter", "loss"):
            w = weights.get(key, 0.0)
            if w == 0.0:
                continue
            value = qos.get(key, 0.0)
            if value <= 0.0:
                raise DomainError(f"{key} must be > 0 when weighted")
            score += w / value
        scores.append(score)
    best = max(scores)
    if scores[current] == best:
        return current
    return int(np.argmax(scores))


def oracle_policy(per_interface_states, start: int | None = None) -> list[int]:
    """Offline minimal-handoff interface sequence that sits on a best-state
    interface at every epoch.

    `per_interface_states` holds one QoE-state sequence per interface.
    With `start` given, the first epoch counts a handoff if it forces a
    move off that interface; otherwise the starting interface is free.
    """
    states = [list(s) for s in per_interface_states]
    n_if = len(states)
    horizon = len(states[0])
    if any(len(s) != horizon for s in states):
        raise DomainError("per-interface state sequences must share a length")
    best_sets = []
    for t in range(horizon):
        top = max(states[i][t] for i in range(n_if))
        best_sets.append([i for i in range(n_if) if states[i][t] == top])

    INF = float("inf")
    cost = [INF] * n_if
    choice: list[list[int | None]] = []
    for i in best_sets[0]:
        cost[i] = 0 if (start is None or i == start) else 1
    choice.append([None] * n_if)
    for t in range(1, horizon):
        nxt = [INF] * n_if
        back: list[int | None] = [None] * n_if
        for i in best_sets[t]:
            for j in best_sets[t - 1]:
                c = cost[j] + (0 if i == j else 1)
                if c < nxt[i] or (c == nxt[i] and j == i):
                    nxt[i] = c
                    back[i] = j
        cost = nxt
        choice.append(back)

    end = min(best_sets[-1], key=lambda i: (cost[i], i))
    path = [end]
    for t in range(horizon - 1, 0, -1):
        path.append(choice[t][path[-1]])
    path.reverse()
    return path


def count_handoffs(path, start: int | None = None) -> int:
    switches = sum(1 for a, b in zip(path, path[1:]) if a != b)
    if start is not None and path and path[0] != start:
        switches += 1
    return switches


def exhaustive_min_handoffs(per_interface_states, start: int | None = None) -> int:
    """Brute-force reference for `oracle_policy` on short traces."""
    states = [list(s) for s in per_interface_states]
    n_if = len(states)
    horizon = len(states[0])
    best_sets = [
        [i for i in range(n_if)
         if states[i][t] == max(states[j][t] for j in range(n_if))]
        for t in range(horizon)
    ]
    best = None
    for combo in itertools.product(*best_sets):
        c = count_handoffs(combo, start)
        if best is None or c < best:
            best = c
    return best


def value_iteration(tm_per_action: np.ndarray, rewards: np.ndarray, gamma: float,
                    tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Solve U(s) = R(s) + gamma * max_a sum_s' TM[a, s, s'] U(s').

    Returns the utilities and the greedy policy (argmax over actions of the
    expected next-state utility).
    """
    tm = np.asarray(tm_per_action, dtype=float)
    r = np.asarray(rewards, dtype=float)
    if tm.ndim != 3 or tm.shape[1] != tm.shape[2] or tm.shape[1] != r.size:
        raise DomainError("tm_per_action must have shape (A, S, S) matching rewards")
    if not 0.0 <= gamma < 1.0:
        raise DomainError("gamma must be in [0, 1)")
    if np.abs(tm.sum(axis=2) - 1.0).max() > 1e-9 or (tm < 0).any():
        raise DomainError("transition rows must be stochastic")
    u = np.zeros(r.size)
    while True:
        q = tm @ u  # (A, S)
        u_next = r + gamma * q.max(axis=0)
        delta = np.abs(u_next - u).max()
        u = u_next
        if delta <= tol:
            break
    policy = (tm @ u).argmax(axis=0)
    return u, policy


def q_star(tm_per_action: np.ndarray, rewards: np.ndarray, gamma: float,
           tol: float = 1e-10) -> np.ndarray:
    """Optimal action values consistent with `value_iteration` (Q*[s, a])."""
    u, _ = value_iteration(tm_per_action, rewards, gamma, tol)
    tm = np.asarray(tm_per_action, dtype=float)
    r = np.asarray(rewards, dtype=float)
    return r[:, None] + gamma * (tm @ u).T
