"""Counterfactual probes of the expert policy's local decisions.

For one round state, each observed feature is nudged through its ordered
domain, one feature at a time and in both directions, until the recommended
action flips. The smallest number of steps that flips the action measures
how much that feature drives the decision here: fewer steps, more important.
Bombs-remaining is bookkeeping, not an observation, and is never perturbed.
"""
from __future__ import annotations

from dataclasses import dataclass

from .config import FEATURES, ActionKind
from .env import RoundState
from .policy import Policy, recommend

# Ordered value domains per feature; bomb levels are 1-based, bins 0-based.
FEATURE_DOMAINS: dict[str, tuple[int, ...]] = {
    "bomb_type": (1, 2, 3),
    "distance": (0, 1, 2),
    "time": (0, 1, 2),
}

# State-key slot occupied by each feature.
_FEATURE_SLOT = {"bomb_type": 0, "distance": 1, "time": 2}


@dataclass(frozen=True)
class FeatureFlip:
    """Outcome of perturbing a single feature; steps is None when no
    perturbation inside the domain flips the action ("unreachable")."""

    steps: int | None
    direction: int | None  # -1 or +1 for the winning scan direction
    action: ActionKind | None

    @property
    def unreachable(self) -> bool:
        return self.steps is None

    def to_dict(self) -> dict:
        return {
            "steps": self.steps,
            "direction": self.direction,
            "action": self.action.value if self.action else None,
        }


@dataclass(frozen=True)
class CounterfactualResult:
    base_action: ActionKind
    flips: dict[str, FeatureFlip]

    def to_dict(self) -> dict:
        return {
            "base_action": self.base_action.value,
            "flips": {feature: flip.to_dict() for feature, flip in self.flips.items()},
        }


ImportanceRanking = list[tuple[str, int | None]]


def _scan_direction(
    policy: Policy,
    key: tuple[int, int, int, int],
    base: ActionKind,
    slot: int,
    domain: tuple[int, ...],
    direction: int,
) -> tuple[int, ActionKind] | None:
    value = key[slot]
    for steps in range(1, len(domain)):
        candidate = value + direction * steps
        if candidate < domain[0] or candidate > domain[-1]:
            return None
        probe = list(key)
        probe[slot] = candidate
        action = policy.actions[tuple(probe)]
        if action != base:
            return steps, action
    return None


def counterfactual_search(policy: Policy, state: RoundState) -> CounterfactualResult:
    base = recommend(policy, state)
    key = (state.bomb_type, state.distance_bin, state.time_bin, state.bombs_remaining)
    flips: dict[str, FeatureFlip] = {}
    for feature in FEATURES:
        slot = _FEATURE_SLOT[feature]
        domain = FEATURE_DOMAINS[feature]
        down = _scan_direction(policy, key, base, slot, domain, -1)
        up = _scan_direction(policy, key, base, slot, domain, +1)
        # Take the direction needing fewer steps; exact ties go downward.
        best: tuple[int, int, ActionKind] | None = None
        if down is not None:
            best = (down[0], -1, down[1])
        if up is not None and (best is None or up[0] < best[0]):
            best = (up[0], +1, up[1])
        if best is None:
            flips[feature] = FeatureFlip(steps=None, direction=None, action=None)
        else:
            flips[feature] = FeatureFlip(steps=best[0], direction=best[1], action=best[2])
    return CounterfactualResult(base_action=base, flips=flips)


def feature_importance(cf: CounterfactualResult) -> ImportanceRanking:
    """Features ordered most-important first: ascending flip distance,
    unreachable features last, ties in the canonical feature order."""

    def sort_key(feature: str) -> tuple[float, int]:
        flip = cf.flips[feature]
        distance = float("inf") if flip.unreachable else float(flip.steps)
        return (distance, FEATURES.index(feature))

    ordered = sorted(FEATURES, key=sort_key)
    return [(feature, cf.flips[feature].steps) for feature in ordered]
