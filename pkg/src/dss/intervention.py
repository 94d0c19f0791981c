"""Gating and wording of recommendations shown to the player.

A recommendation goes out only when the belief model confidently predicts
the player will do something other than what the expert policy advises.
The wording pairs the expert action with the overlooked driver of the
decision: the highest-ranked flip feature whose arc into the action node is
missing from the player's learned structure.
"""
from __future__ import annotations

from dataclasses import dataclass

from .bn import Dag, TomModel, predict
from .config import FEATURES, ActionKind
from .env import RoundState
from .errors import ConfigError
from .explain import ImportanceRanking, counterfactual_search, feature_importance
from .policy import Policy, recommend

DEFAULT_TEMPLATES: dict = {
    "Solo": {
        "bomb_type": (
            "Consider soloing this round. "
            "A bomb of this type can be handled alone for more points than a call would earn."
        ),
        "distance": (
            "Consider soloing this round. "
            "Your teammates are far away, and calling them in costs extra time for every step they travel."
        ),
        "time": (
            "Consider soloing this round. "
            "Calling for help may cost too much time and reduce the number of bombs you can attend to."
        ),
    },
    "Call": {
        "bomb_type": (
            "Consider calling for help this round. "
            "Bombs of this type are worth far more points when handled with teammates."
        ),
        "distance": (
            "Consider calling for help this round. "
            "Your teammates are close by, so calling them in costs very little extra time."
        ),
        "time": (
            "Consider calling for help this round. "
            "There is enough time left for teammates to reach you, and the extra points outweigh the delay."
        ),
    },
    "recommendation_only": {
        "Solo": "Consider soloing this round.",
        "Call": "Consider calling for help this round.",
    },
    "tips": {
        "Solo": (
            "Tip: soloing a bomb costs time that depends on its type; "
            "the toughest bombs take the longest to handle alone."
        ),
        "Call": (
            "Tip: calling for help costs extra time proportional to how far away "
            "your teammates are."
        ),
    },
}


@dataclass(frozen=True)
class Intervention:
    """One issued recommendation plus its wording and gate provenance."""

    recommended: ActionKind
    feature: str
    text: str
    round_index: int = 0
    a_pred: ActionKind | None = None  # None for ungated (frequency-filtered) issues
    confidence: float | None = None
    threshold: float | None = None

    @property
    def gated(self) -> bool:
        return self.a_pred is not None

    def to_dict(self) -> dict:
        return {
            "recommended": self.recommended.value,
            "feature": self.feature,
            "text": self.text,
            "round": self.round_index,
            "a_pred": self.a_pred.value if self.a_pred else None,
            "confidence": self.confidence,
            "threshold": self.threshold,
            "gated": self.gated,
        }


def render(
    recommended: ActionKind, feature: str | None, templates: dict | None = None
) -> str:
    """Look up the template for (action, feature); a None feature yields the
    bare recommendation sentence (used when no flip feature exists)."""
    templates = templates if templates is not None else DEFAULT_TEMPLATES
    try:
        if feature is None:
            return templates["recommendation_only"][recommended.value]
        return templates[recommended.value][feature]
    except KeyError as exc:
        raise ConfigError(f"no template for ({recommended.value}, {feature})") from exc


def render_tip(last_action: ActionKind, templates: dict | None = None) -> str:
    templates = templates if templates is not None else DEFAULT_TEMPLATES
    try:
        return templates["tips"][last_action.value]
    except KeyError as exc:
        raise ConfigError(f"no tip template for {last_action.value}") from exc


def select_emphasis(ranking: ImportanceRanking, human_dag: Dag) -> str:
    """Most important flip feature missing an arc into the action node.

    Falls back to the most important feature overall when the player already
    credits every flip feature, and to the canonical feature order when no
    feature flips the decision at all.
    """
    if not ranking:
        raise ValueError("ranking must be nonempty")
    finite = [feature for feature, steps in ranking if steps is not None]
    if not finite:
        return FEATURES[0]
    for feature in finite:
        if not human_dag.has_edge(feature, "action"):
            return feature
    return finite[0]


def decide(
    state: RoundState,
    tom: TomModel,
    policy: Policy,
    round_index: int = 0,
    templates: dict | None = None,
) -> Intervention | None:
    """Issue an intervention iff the model is live, confident, and disagreeing.

    Both gates are strict: a prediction exactly at the threshold stays quiet,
    and agreement with the expert stays quiet regardless of confidence.
    """
    if not tom.initialized:
        return None
    a_pred, confidence = predict(tom, state)
    a_expert = recommend(policy, state)
    if not (confidence > tom.threshold and a_pred != a_expert):
        return None
    cf = counterfactual_search(policy, state)
    ranking = feature_importance(cf)
    feature = select_emphasis(ranking, tom.dag)
    any_flip = any(steps is not None for _, steps in ranking)
    text = render(a_expert, feature if any_flip else None, templates)
    return Intervention(
        recommended=a_expert,
        feature=feature,
        text=text,
        round_index=round_index,
        a_pred=a_pred,
        confidence=confidence,
        threshold=tom.threshold,
    )


def frequency_filtered(
    state: RoundState,
    policy: Policy,
    round_index: int = 0,
    templates: dict | None = None,
) -> Intervention:
    """Ungated issue used by the frequency-matched control arm: expert action
    plus the top-ranked flip feature, with no belief-model involvement."""
    a_expert = recommend(policy, state)
    ranking = feature_importance(counterfactual_search(policy, state))
    feature, steps = ranking[0]
    text = render(a_expert, feature if steps is not None else None, templates)
    return Intervention(
        recommended=a_expert,
        feature=feature,
        text=text,
        round_index=round_index,
    )
