"""Per-player game loop shared by the experiment harness and the service.

One engine owns everything a single player's run needs: the episode state,
the expert policy handle, the online belief model, and the condition's
issuing rule. The HTTP service drives it with real players, the harness
with simulated ones; both paths execute the identical code, which is what
makes scripted API replays byte-identical to headless runs.

Condition issuing rules:

* "ToM+XRL"  - gated: confident predicted deviation from the expert action.
* "XRL-only" - an independent Bernoulli(rho) coin per round; when it hits,
               the expert action plus the top flip feature goes out ungated.
* "ToM-only" - the same Bernoulli coin, but only a generic tip keyed to the
               previous action; no recommendation is attached.
* "None"     - nothing is ever issued.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from .bn import TomModel, dag_hash, predict
from .config import ACTIONS, ActionKind, PayoffSpec, TomConfig
from .env import RoundState, new_episode, step
from .errors import ConfigError, SessionFinished
from .intervention import Intervention, decide, frequency_filtered, render_tip
from .policy import Policy

CONDITIONS = ("ToM+XRL", "XRL-only", "ToM-only", "None")


@dataclass
class EpisodeLog:
    """Append-only record of one player's full run."""

    condition: str
    participant: int | None = None
    rounds: list[dict] = field(default_factory=list)
    trial_scores: list[float] = field(default_factory=list)

    def append(self, record: dict) -> None:
        if self.rounds and record["round"] <= self.rounds[-1]["round"]:
            raise ValueError("round indices must be strictly increasing")
        self.rounds.append(record)

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "participant": self.participant,
            "rounds": self.rounds,
            "trial_scores": self.trial_scores,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, raw: dict) -> "EpisodeLog":
        log = cls(condition=raw["condition"], participant=raw.get("participant"))
        log.rounds = list(raw["rounds"])
        log.trial_scores = list(raw["trial_scores"])
        return log


def _state_dict(state: RoundState) -> dict:
    return {
        "bomb_type": state.bomb_type,
        "distance_raw": state.distance_raw,
        "distance_bin": state.distance_bin,
        "time_remaining": state.time_remaining,
        "time_bin": state.time_bin,
        "bombs_remaining": state.bombs_remaining,
        "agent_pos": list(state.agent_pos),
        "team_pos": list(state.team_pos),
    }


class SessionEngine:
    """Turn-based state machine for one player under one condition."""

    def __init__(
        self,
        condition: str,
        spec: PayoffSpec,
        policy: Policy,
        tom_config: TomConfig | None = None,
        templates: dict | None = None,
        rho: float = 0.095,
        seed: int = 0,
        trials: int = 12,
        training_trials: int = 3,
        participant: int | None = None,
    ) -> None:
        if condition not in CONDITIONS:
            raise ConfigError(f"unknown condition {condition!r}")
        if not 0.0 <= rho <= 1.0:
            raise ConfigError("rho must lie in [0, 1]")
        if trials < 1:
            raise ConfigError("trials must be at least 1")
        self.condition = condition
        self.spec = spec
        self.policy = policy
        self.templates = templates
        self.rho = rho
        self.trials = trials
        self.training_trials = training_trials
        base = random.Random(seed)
        self._env_rng = random.Random(base.getrandbits(48))
        self._filter_rng = random.Random(base.getrandbits(48))
        self.tom = TomModel(config=tom_config or TomConfig())
        self.trial = 1
        self.round_index = 0
        self.score = 0.0
        self.finished = False
        self.state: RoundState | None = new_episode(spec, rng=self._env_rng)
        self.pending: Intervention | None = None
        self.pending_tip: str | None = None
        self.last_action: ActionKind | None = None
        self.log = EpisodeLog(condition=condition, participant=participant)
        self._refresh_pending()

    # --- issuing -------------------------------------------------------

    def _refresh_pending(self) -> None:
        self.pending = None
        self.pending_tip = None
        upcoming = self.round_index + 1
        if self.condition == "ToM+XRL":
            self.pending = decide(
                self.state, self.tom, self.policy, upcoming, self.templates
            )
        elif self.condition == "XRL-only":
            if self._filter_rng.random() < self.rho:
                self.pending = frequency_filtered(
                    self.state, self.policy, upcoming, self.templates
                )
        elif self.condition == "ToM-only":
            hit = self._filter_rng.random() < self.rho
            if hit and self.last_action is not None:
                self.pending_tip = render_tip(self.last_action, self.templates)

    # --- round resolution ------------------------------------------------

    def apply_action(self, action: ActionKind) -> dict:
        """Resolve one round; returns the reveal the player is shown."""
        if self.finished:
            raise SessionFinished("all trials are complete")
        action = ActionKind(action)
        state = self.state
        if self.tom.initialized:
            a_pred, confidence = predict(self.tom, state)
        else:
            a_pred, confidence = None, None

        record = {
            "round": self.round_index + 1,
            "trial": self.trial,
            "training": self.trial <= self.training_trials,
            "state": _state_dict(state),
            "a_pred": a_pred.value if a_pred else None,
            "confidence": confidence,
            "threshold": self.tom.threshold,
            "tom_initialized": self.tom.initialized,
            "dag_edges": [list(edge) for edge in self.tom.dag.sorted_edges()],
            "dag_hash": dag_hash(self.tom.dag),
            "intervention": self.pending.to_dict() if self.pending else None,
            "tip": self.pending_tip,
            "action": action.value,
        }

        outcome = step(state, action, self.spec, self._env_rng)
        self.score += outcome.reward
        self.tom.observe(state, action)
        record["maintenance"] = not self.tom.memory  # window flushes only on a pass
        record["reward"] = outcome.reward
        record["time_cost"] = outcome.time_cost
        record["done"] = outcome.done
        self.log.append(record)
        self.round_index += 1
        self.last_action = action

        if outcome.done:
            self.log.trial_scores.append(self.score)
            if self.trial == self.trials:
                self.finished = True
                self.state = None
            else:
                self.trial += 1
                self.score = 0.0
                self.state = new_episode(self.spec, rng=self._env_rng)
        else:
            self.state = outcome.next

        if not self.finished:
            self._refresh_pending()
        else:
            self.pending = None
            self.pending_tip = None
        return {
            "reward": outcome.reward,
            "time_cost": outcome.time_cost,
            "done": outcome.done,
            "session_done": self.finished,
        }

    # --- player-facing view ----------------------------------------------

    def view(self) -> dict:
        """What the player may see: no time costs, no model internals."""
        if self.finished:
            return {
                "trial": self.trials,
                "training": False,
                "score": self.log.trial_scores[-1] if self.log.trial_scores else 0.0,
                "bombs_remaining": 0,
                "bombs_handled": self.spec.n_bombs,
                "time_remaining": 0.0,
                "bomb_type": None,
                "distance_bin": None,
                "positions": None,
                "payoff": None,
                "intervention": None,
                "tip": None,
                "grid_size": self.spec.grid_size,
                "done": True,
            }
        state = self.state
        payoff = {a.value: self.spec.reward[state.bomb_type][a] for a in ACTIONS}
        intervention = None
        if self.pending is not None:
            intervention = {
                "recommended": self.pending.recommended.value,
                "feature": self.pending.feature,
                "text": self.pending.text,
            }
        return {
            "trial": self.trial,
            "training": self.trial <= self.training_trials,
            "score": self.score,
            "bombs_remaining": state.bombs_remaining,
            "bombs_handled": self.spec.n_bombs - state.bombs_remaining,
            "time_remaining": state.time_remaining,
            "bomb_type": state.bomb_type,
            "distance_bin": state.distance_bin,
            "positions": {"agent": list(state.agent_pos), "team": list(state.team_pos)},
            "payoff": payoff,
            "intervention": intervention,
            "tip": self.pending_tip,
            "grid_size": self.spec.grid_size,
            "done": False,
        }


def headless_replay(
    condition: str,
    spec: PayoffSpec,
    policy: Policy,
    actions: list[ActionKind],
    seed: int,
    tom_config: TomConfig | None = None,
    templates: dict | None = None,
    rho: float = 0.095,
    trials: int = 12,
) -> EpisodeLog:
    """Drive an engine with a fixed action script; the reference for parity
    checks against the HTTP service."""
    engine = SessionEngine(
        condition,
        spec,
        policy,
        tom_config=tom_config,
        templates=templates,
        rho=rho,
        seed=seed,
        trials=trials,
    )
    for action in actions:
        if engine.finished:
            break
        engine.apply_action(action)
    return engine.log
