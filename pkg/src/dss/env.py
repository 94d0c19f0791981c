"""Bomb-defusal episode dynamics.

One episode is a sequence of rounds. Each round presents a bomb of some
level, teammates at some grid position, and a clock. The player either
defuses the bomb alone or calls the teammates in; both resolve the bomb,
award points, and consume time. The episode ends when every bomb has been
handled or the clock runs out.

Everything here is a pure function of (state, action, spec, rng); there is
no hidden mutable state, so episodes are trivially parallelizable and
bit-reproducible for a fixed seed.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .config import BOMB_LEVELS, ActionKind, PayoffSpec
from .errors import ConfigError


@dataclass(frozen=True)
class RoundState:
    """Observable state at the start of a round.

    The bins are always the deterministic image of the raw fields under the
    spec's cut points; construct states through :func:`make_state` to keep
    that invariant.
    """

    bomb_type: int
    distance_raw: float
    distance_bin: int
    time_remaining: float
    time_bin: int
    bombs_remaining: int
    agent_pos: tuple[int, int]
    team_pos: tuple[int, int]


@dataclass(frozen=True)
class StepOutcome:
    reward: float
    time_cost: float
    next: RoundState | None
    done: bool


def make_state(
    spec: PayoffSpec,
    bomb_type: int,
    time_remaining: float,
    bombs_remaining: int,
    team_pos: tuple[int, int],
) -> RoundState:
    if bomb_type not in BOMB_LEVELS:
        raise ValueError(f"bomb_type must be one of {BOMB_LEVELS}")
    distance_raw = spec.distance_from_agent(team_pos)
    return RoundState(
        bomb_type=bomb_type,
        distance_raw=distance_raw,
        distance_bin=spec.bin_distance(distance_raw),
        time_remaining=time_remaining,
        time_bin=spec.bin_time(time_remaining),
        bombs_remaining=bombs_remaining,
        agent_pos=spec.agent_pos,
        team_pos=team_pos,
    )


def _draw_round(
    spec: PayoffSpec, rng: random.Random, time_remaining: float, bombs_remaining: int
) -> RoundState:
    bomb_type = rng.choice(BOMB_LEVELS)
    team_pos = rng.choice(spec.team_cells())
    return make_state(spec, bomb_type, time_remaining, bombs_remaining, team_pos)


def new_episode(
    spec: PayoffSpec, seed: int | None = None, rng: random.Random | None = None
) -> RoundState:
    """Draw the first round of a fresh episode.

    Either a seed or an already-positioned rng may be supplied; callers that
    run whole episodes should create one rng and pass it to both this and
    :func:`step` so the trace stays a single reproducible stream.
    """
    if spec.n_bombs < 1:
        raise ConfigError("cannot start an episode with zero bombs")
    if rng is None:
        rng = random.Random(seed)
    return _draw_round(spec, rng, spec.episode_time_limit, spec.n_bombs)


def step(
    state: RoundState, action: ActionKind, spec: PayoffSpec, rng: random.Random
) -> StepOutcome:
    """Resolve the current bomb with `action` and draw the next round."""
    if state.bombs_remaining < 1 or state.time_remaining <= 0:
        raise ValueError("step called on a terminal state")
    action = ActionKind(action)
    reward = spec.reward[state.bomb_type][action]
    time_cost = spec.time_cost(state.bomb_type, action, state.distance_raw)
    time_left = state.time_remaining - time_cost
    bombs_left = state.bombs_remaining - 1
    done = bombs_left == 0 or time_left <= 0
    nxt = None if done else _draw_round(spec, rng, time_left, bombs_left)
    return StepOutcome(reward=reward, time_cost=time_cost, next=nxt, done=done)


def discretize(state: RoundState, spec: PayoffSpec) -> tuple[int, int, int, int]:
    """Map a round state to the (bomb, distance bin, time bin, bombs) tuple."""
    return (
        state.bomb_type,
        spec.bin_distance(state.distance_raw),
        spec.bin_time(state.time_remaining),
        state.bombs_remaining,
    )
