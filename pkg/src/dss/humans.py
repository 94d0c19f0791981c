"""Simulated players with limited feature attention and partial compliance.

Each profile owns a deterministic decision rule over the features it
attends to, blurred by uniform noise. A pending recommendation is followed
with probability p_short; an explained recommendation permanently adds its
emphasized feature to the attention set with probability p_long, after
which the rule is re-derived over the enlarged set. Attention never
shrinks.

Three rule families cover the default library:

* "payoff": grabs the action with the most immediate points for the bomb
  level, unless an attended clock or distance reading vetoes the call
  (low clock: always solo; far teammates: solo mid-level bombs).
* "clock": calls while the clock is comfortable and solos once it is not,
  ignoring everything it does not attend to; attended bomb or distance
  readings veto the obviously wasteful calls.
* "expert": looks the action up in the expert policy after substituting
  fixed defaults (medium distance, high clock, level-2 bomb) for any
  feature the player does not attend to.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .config import ACTIONS, ActionKind, PayoffSpec
from .env import RoundState
from .errors import ConfigError
from .intervention import Intervention
from .policy import Policy

DEFAULT_PROFILE_CONFIGS: dict = {
    "time_blind_myopic": {
        "kind": "payoff",
        "attended": ["bomb_type"],
        "p_short": 0.87,
        "p_long": 0.48,
        "epsilon": 0.03,
    },
    "distance_blind": {
        "kind": "clock",
        "attended": ["time"],
        "p_short": 0.87,
        "p_long": 0.48,
        "epsilon": 0.03,
    },
    "noisy_expert": {
        "kind": "expert",
        "attended": ["bomb_type", "distance", "time"],
        "p_short": 0.87,
        "p_long": 0.48,
        "epsilon": 0.01,
    },
}

# Stand-in feature values for the "expert" family when a feature is ignored.
_EXPERT_DEFAULTS = {"bomb_type": 2, "distance": 1, "time": 2}


@dataclass
class HumanProfile:
    name: str
    kind: str
    attended: set[str]
    p_short: float
    p_long: float
    epsilon: float
    spec: PayoffSpec
    policy: Policy | None = None
    absorbed: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.kind not in ("payoff", "clock", "expert"):
            raise ConfigError(f"unknown profile kind {self.kind!r}")
        for p in (self.p_short, self.p_long, self.epsilon):
            if not 0.0 <= p <= 1.0:
                raise ConfigError("profile probabilities must lie in [0, 1]")
        if self.kind == "expert" and self.policy is None:
            raise ConfigError("expert profiles need a policy to imitate")
        if self.kind == "payoff" and "bomb_type" not in self.attended:
            raise ConfigError("payoff profiles must attend to bomb_type")
        if self.kind == "clock" and "time" not in self.attended:
            raise ConfigError("clock profiles must attend to time")

    # --- decision rule -------------------------------------------------

    def rule_action(self, state: RoundState) -> ActionKind:
        if self.kind == "payoff":
            rewards = self.spec.reward[state.bomb_type]
            best = max(ACTIONS, key=lambda a: (rewards[a], -ACTIONS.index(a)))
            if "time" in self.attended and state.time_bin == 0:
                best = ActionKind.SOLO
            if (
                "distance" in self.attended
                and state.distance_bin == 2
                and best is ActionKind.CALL
                and state.bomb_type < 3
            ):
                best = ActionKind.SOLO
            return best
        if self.kind == "clock":
            best = ActionKind.CALL if state.time_bin == 2 else ActionKind.SOLO
            if "bomb_type" in self.attended and state.bomb_type == 1:
                best = ActionKind.SOLO
            if (
                "distance" in self.attended
                and state.distance_bin == 2
                and best is ActionKind.CALL
            ):
                best = ActionKind.SOLO
            return best
        key = (
            state.bomb_type if "bomb_type" in self.attended else _EXPERT_DEFAULTS["bomb_type"],
            state.distance_bin if "distance" in self.attended else _EXPERT_DEFAULTS["distance"],
            state.time_bin if "time" in self.attended else _EXPERT_DEFAULTS["time"],
            state.bombs_remaining,
        )
        return self.policy.actions[key]

    def action_probs(self, state: RoundState) -> dict[ActionKind, float]:
        ruled = self.rule_action(state)
        noise = self.epsilon / len(ACTIONS)
        return {a: (1.0 - self.epsilon) * (a is ruled) + noise for a in ACTIONS}


def act(
    profile: HumanProfile,
    state: RoundState,
    pending: Intervention | None,
    rng: random.Random,
) -> ActionKind:
    """Choose this round's action, possibly deferring to a recommendation."""
    if pending is not None and rng.random() < profile.p_short:
        return pending.recommended
    probs = profile.action_probs(state)
    draw = rng.random()
    cumulative = 0.0
    for action in ACTIONS:
        cumulative += probs[action]
        if draw < cumulative:
            return action
    return ACTIONS[-1]


def absorb(
    profile: HumanProfile, intervention: Intervention, rng: random.Random
) -> HumanProfile:
    """Maybe adopt the emphasized feature into the attention set for good."""
    feature = intervention.feature
    if feature in profile.attended:
        return profile
    if rng.random() < profile.p_long:
        profile.attended.add(feature)
        profile.absorbed.append(feature)
    return profile


def make_profile(
    name: str,
    spec: PayoffSpec,
    policy: Policy | None = None,
    configs: dict | None = None,
    **overrides,
) -> HumanProfile:
    """Instantiate a fresh profile (attention state is per-participant)."""
    configs = configs if configs is not None else DEFAULT_PROFILE_CONFIGS
    if name not in configs:
        raise ConfigError(f"unknown profile {name!r}")
    cfg = dict(configs[name])
    cfg.update(overrides)
    return HumanProfile(
        name=name,
        kind=cfg["kind"],
        attended=set(cfg["attended"]),
        p_short=float(cfg["p_short"]),
        p_long=float(cfg["p_long"]),
        epsilon=float(cfg["epsilon"]),
        spec=spec,
        policy=policy,
    )
