"""Task configuration: payoffs, time costs, binning cut points, model knobs.

All gameplay numbers live here so the engine stays free of magic constants.
Default values give a task where calling for help pays more points on hard
bombs but burns time proportional to teammate distance, which makes the
optimal action depend on all three observed variables.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from .errors import ConfigError


class ActionKind(str, Enum):
    # Solo first: ties in argmax resolution always fall to Solo.
    SOLO = "Solo"
    CALL = "Call"


ACTIONS = (ActionKind.SOLO, ActionKind.CALL)
BOMB_LEVELS = (1, 2, 3)

# Canonical order of the observed features; every ranking tie-break uses it.
FEATURES = ("bomb_type", "distance", "time")

DISTANCE_BIN_NAMES = ("near", "medium", "far")
TIME_BIN_NAMES = ("low", "medium", "high")


@dataclass(frozen=True)
class PayoffSpec:
    """Rewards, time costs and discretization for one task configuration.

    Points are awarded per (bomb level, action). Solo costs a fixed time per
    bomb level; calling costs a base amount plus a per-grid-unit surcharge on
    the Manhattan distance to the teammates. Distances and times are binned
    with "value exactly on a cut point goes to the lower bin" semantics.
    """

    reward: dict[int, dict[ActionKind, float]] = field(
        default_factory=lambda: {
            1: {ActionKind.SOLO: 20.0, ActionKind.CALL: 10.0},
            2: {ActionKind.SOLO: 15.0, ActionKind.CALL: 20.0},
            3: {ActionKind.SOLO: 10.0, ActionKind.CALL: 30.0},
        }
    )
    solo_time_cost: dict[int, float] = field(
        default_factory=lambda: {1: 10.0, 2: 15.0, 3: 20.0}
    )
    call_time_base: float = 10.0
    call_time_per_distance: float = 2.0
    episode_time_limit: float = 240.0
    n_bombs: int = 12
    distance_cuts: tuple[float, float] = (3.0, 7.0)
    time_cuts: tuple[float, float] = (80.0, 160.0)
    grid_size: int = 14
    agent_pos: tuple[int, int] = (0, 0)

    def __post_init__(self) -> None:
        if self.n_bombs < 1:
            raise ConfigError("n_bombs must be at least 1")
        if self.episode_time_limit <= 0:
            raise ConfigError("episode_time_limit must be positive")
        for level in BOMB_LEVELS:
            if level not in self.reward or level not in self.solo_time_cost:
                raise ConfigError(f"missing payoff entries for bomb level {level}")
            for action in ACTIONS:
                if self.reward[level].get(action) is None:
                    raise ConfigError(f"missing reward for ({level}, {action.value})")
                if self.reward[level][action] < 0:
                    raise ConfigError("rewards must be nonnegative")
            if self.solo_time_cost[level] <= 0:
                raise ConfigError("solo time costs must be positive")
        if self.call_time_base <= 0 or self.call_time_per_distance < 0:
            raise ConfigError("call time parameters must be positive")
        if not self.reward[3][ActionKind.CALL] > self.reward[3][ActionKind.SOLO]:
            raise ConfigError("calling must out-score soloing on level-3 bombs")
        for cuts in (self.distance_cuts, self.time_cuts):
            if len(cuts) != 2 or not cuts[0] < cuts[1]:
                raise ConfigError("cut points must be two increasing values")
        if self.grid_size < 2:
            raise ConfigError("grid_size must be at least 2")
        ax, ay = self.agent_pos
        if not (0 <= ax < self.grid_size and 0 <= ay < self.grid_size):
            raise ConfigError("agent_pos outside the grid")

    # --- binning ------------------------------------------------------

    def bin_distance(self, distance_raw: float) -> int:
        if distance_raw <= self.distance_cuts[0]:
            return 0
        if distance_raw <= self.distance_cuts[1]:
            return 1
        return 2

    def bin_time(self, time_remaining: float) -> int:
        if time_remaining <= self.time_cuts[0]:
            return 0
        if time_remaining <= self.time_cuts[1]:
            return 1
        return 2

    # --- costs --------------------------------------------------------

    def solo_cost(self, bomb_type: int) -> float:
        return self.solo_time_cost[bomb_type]

    def call_cost(self, distance_raw: float) -> float:
        return self.call_time_base + self.call_time_per_distance * distance_raw

    def time_cost(self, bomb_type: int, action: ActionKind, distance_raw: float) -> float:
        if action is ActionKind.SOLO:
            return self.solo_cost(bomb_type)
        return self.call_cost(distance_raw)

    # --- geometry -----------------------------------------------------

    def team_cells(self) -> list[tuple[int, int]]:
        g = self.grid_size
        return [(x, y) for x in range(g) for y in range(g)]

    def distance_from_agent(self, team_pos: tuple[int, int]) -> float:
        ax, ay = self.agent_pos
        return float(abs(team_pos[0] - ax) + abs(team_pos[1] - ay))

    # --- serialization ------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "reward": {
                str(level): {a.value: self.reward[level][a] for a in ACTIONS}
                for level in BOMB_LEVELS
            },
            "solo_time_cost": {str(level): self.solo_time_cost[level] for level in BOMB_LEVELS},
            "call_time_base": self.call_time_base,
            "call_time_per_distance": self.call_time_per_distance,
            "episode_time_limit": self.episode_time_limit,
            "n_bombs": self.n_bombs,
            "distance_cuts": list(self.distance_cuts),
            "time_cuts": list(self.time_cuts),
            "grid_size": self.grid_size,
            "agent_pos": list(self.agent_pos),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "PayoffSpec":
        base = cls().to_dict()
        unknown = set(raw) - set(base)
        if unknown:
            raise ConfigError(f"unknown payoff fields: {sorted(unknown)}")
        base.update(raw)
        try:
            reward = {
                int(level): {ActionKind(a): float(v) for a, v in row.items()}
                for level, row in base["reward"].items()
            }
            solo = {int(level): float(v) for level, v in base["solo_time_cost"].items()}
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"malformed payoff table: {exc}") from exc
        return cls(
            reward=reward,
            solo_time_cost=solo,
            call_time_base=float(base["call_time_base"]),
            call_time_per_distance=float(base["call_time_per_distance"]),
            episode_time_limit=float(base["episode_time_limit"]),
            n_bombs=int(base["n_bombs"]),
            distance_cuts=tuple(float(c) for c in base["distance_cuts"]),
            time_cuts=tuple(float(c) for c in base["time_cuts"]),
            grid_size=int(base["grid_size"]),
            agent_pos=tuple(int(c) for c in base["agent_pos"]),
        )

    @classmethod
    def from_json_file(cls, path: str | Path) -> "PayoffSpec":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def spec_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def scaled_rewards(self, factor: float) -> "PayoffSpec":
        scaled = {
            level: {a: v * factor for a, v in row.items()}
            for level, row in self.reward.items()
        }
        return replace(self, reward=scaled)


@dataclass(frozen=True)
class TomConfig:
    """Knobs of the online belief model of the human player."""

    window: int = 12
    ess: float = 10.0
    prior_ess: float = 1.0
    threshold_grid: tuple[float, ...] = tuple(round(0.50 + 0.05 * i, 2) for i in range(10))
    initial_threshold: float = 0.6

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ConfigError("window must be at least 1")
        if self.ess <= 0 or self.prior_ess <= 0:
            raise ConfigError("ess and prior_ess must be positive")
        if not self.threshold_grid:
            raise ConfigError("threshold grid must be nonempty")

    @classmethod
    def from_dict(cls, raw: dict) -> "TomConfig":
        kwargs = dict(raw)
        if "threshold_grid" in kwargs:
            kwargs["threshold_grid"] = tuple(float(t) for t in kwargs["threshold_grid"])
        return cls(**kwargs)


def load_config(path: str | Path) -> dict:
    """Read a combined JSON config; missing sections fall back to defaults."""
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return raw


def payoff_from_config(cfg: dict) -> PayoffSpec:
    return PayoffSpec.from_dict(cfg.get("payoff", {}))


def tom_from_config(cfg: dict) -> TomConfig:
    return TomConfig.from_dict(cfg.get("tom", {}))
