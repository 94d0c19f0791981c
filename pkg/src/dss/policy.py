"""Expert policy over the discretized task, solved by exact value iteration.

The decision state is (bomb level, distance bin, time bin, bombs remaining).
Transition probabilities are derived in closed form from the generator:
bomb levels and teammate cells are drawn i.i.d. per round, so only the time
bin couples consecutive rounds. Within a bin the exact clock value is not
part of the state; the kernel is taken under the uniform distribution over
the integer clock values in the bin (and over the teammate cells consistent
with the distance bin). That same refinement is what the Monte-Carlo checks
sample from, so the kernel is exact rather than approximate.

The construction therefore requires every time quantity (limit, cuts, all
costs) to land on integers; the default configuration does.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ACTIONS, BOMB_LEVELS, ActionKind, PayoffSpec
from .env import RoundState
from .errors import ConfigError, SolverError

TERMINAL = "terminal"

StateKey = tuple[int, int, int, int]


@dataclass(frozen=True)
class DiscreteMdp:
    states: tuple[StateKey, ...]
    index: dict[StateKey, int]
    transitions: np.ndarray  # [n_states, n_actions, n_states + 1]; last column is terminal
    rewards: np.ndarray  # [n_states, n_actions]
    gamma: float
    spec_hash: str


@dataclass
class Policy:
    actions: dict[StateKey, ActionKind]
    values: dict[StateKey, float]
    gamma: float
    tol: float
    spec_hash: str

    def to_json(self) -> str:
        entries = {
            ",".join(map(str, key)): {
                "action": self.actions[key].value,
                "value": self.values[key],
            }
            for key in sorted(self.actions)
        }
        payload = {
            "meta": {"gamma": self.gamma, "tol": self.tol, "spec_hash": self.spec_hash},
            "entries": entries,
        }
        return json.dumps(payload, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Policy":
        payload = json.loads(text)
        actions: dict[StateKey, ActionKind] = {}
        values: dict[StateKey, float] = {}
        for raw_key, entry in payload["entries"].items():
            key = tuple(int(part) for part in raw_key.split(","))
            actions[key] = ActionKind(entry["action"])
            values[key] = float(entry["value"])
        meta = payload["meta"]
        return cls(
            actions=actions,
            values=values,
            gamma=float(meta["gamma"]),
            tol=float(meta["tol"]),
            spec_hash=meta["spec_hash"],
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "Policy":
        return cls.from_json(Path(path).read_text())


# --- generator distributions under the integer-clock refinement -----------


def _as_int(value: float, what: str) -> int:
    if abs(value - round(value)) > 1e-12:
        raise ConfigError(
            f"{what} must be an integer for the closed-form transition build (got {value})"
        )
    return int(round(value))


def time_bin_support(spec: PayoffSpec) -> list[range]:
    """Integer clock values belonging to each time bin (terminal 0 excluded)."""
    c1 = _as_int(spec.time_cuts[0], "time cut")
    c2 = _as_int(spec.time_cuts[1], "time cut")
    limit = _as_int(spec.episode_time_limit, "episode_time_limit")
    if not 0 < c1 < c2 < limit:
        raise ConfigError("time cuts must lie strictly inside (0, episode_time_limit)")
    return [range(1, c1 + 1), range(c1 + 1, c2 + 1), range(c2 + 1, limit + 1)]


def distance_bin_cells(spec: PayoffSpec) -> list[list[tuple[int, int]]]:
    """Teammate cells grouped by the distance bin they induce."""
    groups: list[list[tuple[int, int]]] = [[], [], []]
    for cell in spec.team_cells():
        groups[spec.bin_distance(spec.distance_from_agent(cell))].append(cell)
    return groups


def _cost_distributions(spec: PayoffSpec) -> dict[tuple[ActionKind, int, int], list[tuple[int, float]]]:
    """Map (action, bomb level, distance bin) to a distribution over integer costs."""
    cells = distance_bin_cells(spec)
    for d_bin, group in enumerate(cells):
        if not group:
            raise ConfigError(f"distance bin {d_bin} has no supporting grid cells")
    out: dict[tuple[ActionKind, int, int], list[tuple[int, float]]] = {}
    for level in BOMB_LEVELS:
        solo = _as_int(spec.solo_cost(level), "solo time cost")
        for d_bin in range(3):
            out[(ActionKind.SOLO, level, d_bin)] = [(solo, 1.0)]
    for d_bin, group in enumerate(cells):
        counts: dict[int, int] = {}
        for cell in group:
            cost = _as_int(spec.call_cost(spec.distance_from_agent(cell)), "call time cost")
            counts[cost] = counts.get(cost, 0) + 1
        total = len(group)
        dist = [(cost, n / total) for cost, n in sorted(counts.items())]
        for level in BOMB_LEVELS:
            out[(ActionKind.CALL, level, d_bin)] = dist
    return out


def _time_step_kernel(
    spec: PayoffSpec, cost: int, supports: list[range]
) -> tuple[np.ndarray, float]:
    """P(next time bin | current bin, fixed cost) plus the run-out-of-time mass.

    Returns (kernel[3, 3], term[3] folded in): kernel rows sum with the
    terminal mass to 1 for each current bin.
    """
    kernel = np.zeros((3, 3))
    term = np.zeros(3)
    for t_bin, support in enumerate(supports):
        weight = 1.0 / len(support)
        for t in support:
            left = t - cost
            if left <= 0:
                term[t_bin] += weight
            else:
                kernel[t_bin, spec.bin_time(left)] += weight
    return kernel, term


def fresh_round_distribution(spec: PayoffSpec) -> tuple[np.ndarray, np.ndarray]:
    """Marginals of the next round's bomb level and distance bin."""
    p_bomb = np.full(3, 1.0 / 3.0)
    cells = distance_bin_cells(spec)
    total = sum(len(group) for group in cells)
    p_dist = np.array([len(group) / total for group in cells])
    return p_bomb, p_dist


def build_mdp(spec: PayoffSpec, gamma: float = 1.0, max_states: int = 100_000) -> DiscreteMdp:
    """Assemble the exact transition and reward tables for the discretized task."""
    states: list[StateKey] = [
        (b, d, t, k)
        for k in range(1, spec.n_bombs + 1)
        for b in BOMB_LEVELS
        for d in range(3)
        for t in range(3)
    ]
    if len(states) > max_states:
        raise ConfigError(f"state space of {len(states)} exceeds cap {max_states}")
    index = {s: i for i, s in enumerate(states)}
    n = len(states)

    supports = time_bin_support(spec)
    costs = _cost_distributions(spec)
    p_bomb, p_dist = fresh_round_distribution(spec)

    # Cache the time kernel per distinct integer cost.
    kernels: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for dist in costs.values():
        for cost, _ in dist:
            if cost not in kernels:
                kernels[cost] = _time_step_kernel(spec, cost, supports)

    T = np.zeros((n, len(ACTIONS), n + 1))
    R = np.zeros((n, len(ACTIONS)))
    for i, (b, d, t, k) in enumerate(states):
        for ai, action in enumerate(ACTIONS):
            R[i, ai] = spec.reward[b][action]
            if k == 1:
                T[i, ai, n] = 1.0
                continue
            time_term = 0.0
            next_tbin = np.zeros(3)
            for cost, p_cost in costs[(action, b, d)]:
                kernel, term = kernels[cost]
                time_term += p_cost * term[t]
                next_tbin += p_cost * kernel[t]
            T[i, ai, n] = time_term
            for nb in BOMB_LEVELS:
                for nd in range(3):
                    for nt in range(3):
                        mass = p_bomb[nb - 1] * p_dist[nd] * next_tbin[nt]
                        if mass > 0.0:
                            T[i, ai, index[(nb, nd, nt, k - 1)]] = mass
    return DiscreteMdp(
        states=tuple(states),
        index=index,
        transitions=T,
        rewards=R,
        gamma=gamma,
        spec_hash=spec.spec_hash(),
    )


def value_iteration(mdp: DiscreteMdp, tol: float = 1e-9, max_iter: int = 100_000) -> Policy:
    """Solve the table to a sup-norm Bellman residual of at most `tol`."""
    n = len(mdp.states)
    values = np.zeros(n + 1)  # trailing slot: terminal, pinned to 0
    flat_t = mdp.transitions.reshape(n * len(ACTIONS), n + 1)
    for _ in range(max_iter):
        q = mdp.rewards + mdp.gamma * (flat_t @ values).reshape(n, len(ACTIONS))
        new_values = q.max(axis=1)
        residual = float(np.max(np.abs(new_values - values[:n]))) if n else 0.0
        values = np.concatenate([new_values, [0.0]])
        if residual <= tol:
            break
    else:
        raise SolverError(f"value iteration did not converge within {max_iter} sweeps")
    q = mdp.rewards + mdp.gamma * (flat_t @ values).reshape(n, len(ACTIONS))
    greedy = q.argmax(axis=1)  # first max wins, so ties resolve to Solo
    return Policy(
        actions={s: ACTIONS[greedy[i]] for i, s in enumerate(mdp.states)},
        values={s: float(values[i]) for i, s in enumerate(mdp.states)},
        gamma=mdp.gamma,
        tol=tol,
        spec_hash=mdp.spec_hash,
    )


def recommend(policy: Policy, state: RoundState) -> ActionKind:
    """Look up the expert action for a live round state."""
    key = (state.bomb_type, state.distance_bin, state.time_bin, state.bombs_remaining)
    try:
        return policy.actions[key]
    except KeyError:
        raise LookupError(f"state {key} is not indexed by this policy") from None


def train_policy(spec: PayoffSpec, gamma: float = 1.0, tol: float = 1e-9) -> Policy:
    return value_iteration(build_mdp(spec, gamma=gamma), tol=tol)
