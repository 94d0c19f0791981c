from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dss.bn import Dag, TomModel, fit_mle, uniform_cpds
from dss.config import ActionKind, TomConfig
from dss.env import make_state
from dss.errors import ConfigError
from dss.intervention import (
    DEFAULT_TEMPLATES,
    decide,
    frequency_filtered,
    render,
    render_tip,
    select_emphasis,
)
from tests.oracles import emphasis_by_rule

SOLO_TIME_ADVICE = (
    "Consider soloing this round. Calling for help may cost too much time "
    "and reduce the number of bombs you can attend to."
)


def myopic_trained_model(spec, rounds=40, window=12) -> TomModel:
    """Model fitted online to a player who always grabs the most points."""
    rng = random.Random(17)
    model = TomModel(config=TomConfig(window=window))
    for _ in range(rounds):
        b = rng.randrange(1, 4)
        d, t = rng.randrange(3), rng.randrange(3)
        action = max(
            (ActionKind.SOLO, ActionKind.CALL), key=lambda a: spec.reward[b][a]
        )
        model.observe((b, d, t), action)
    assert model.initialized
    return model


# --- rendering ----------------------------------------------------------------


def test_solo_time_template_wording():
    assert render(ActionKind.SOLO, "time") == SOLO_TIME_ADVICE


def test_render_is_pure():
    assert render(ActionKind.CALL, "distance") == render(ActionKind.CALL, "distance")


def test_render_uses_configured_text():
    templates = {"Call": {"bomb_type": "custom call text"}}
    assert render(ActionKind.CALL, "bomb_type", templates) == "custom call text"
    assert (
        render(ActionKind.CALL, "bomb_type")
        == DEFAULT_TEMPLATES["Call"]["bomb_type"]
    )


def test_missing_template_is_config_error():
    with pytest.raises(ConfigError):
        render(ActionKind.SOLO, "time", templates={"Solo": {}})
    with pytest.raises(ConfigError):
        render_tip(ActionKind.SOLO, templates={"tips": {}})


def test_recommendation_only_text():
    assert render(ActionKind.SOLO, None) == "Consider soloing this round."


# --- emphasis selection ----------------------------------------------------------


def test_overlooked_feature_wins():
    ranking = [("time", 1), ("distance", 2), ("bomb_type", None)]
    human = Dag(edges=frozenset({("bomb_type", "action"), ("distance", "action")}))
    assert select_emphasis(ranking, human) == "time"


def test_fallback_when_all_flips_credited():
    ranking = [("time", 1), ("distance", 2), ("bomb_type", 3)]
    human = Dag(
        edges=frozenset(
            {("bomb_type", "action"), ("distance", "action"), ("time", "action")}
        )
    )
    assert select_emphasis(ranking, human) == "time"


def test_all_unreachable_falls_back_to_feature_order():
    ranking = [("bomb_type", None), ("distance", None), ("time", None)]
    assert select_emphasis(ranking, Dag()) == "bomb_type"


@given(
    steps=st.lists(
        st.one_of(st.none(), st.integers(min_value=1, max_value=2)),
        min_size=3,
        max_size=3,
    ),
    parent_mask=st.lists(st.booleans(), min_size=3, max_size=3),
)
def test_emphasis_matches_rule_oracle(steps, parent_mask):
    features = ("bomb_type", "distance", "time")
    entries = sorted(
        zip(features, steps),
        key=lambda e: (float("inf") if e[1] is None else e[1], features.index(e[0])),
    )
    ranking = list(entries)
    parents = {f for f, on in zip(features, parent_mask) if on}
    dag = Dag(edges=frozenset((f, "action") for f in parents))
    assert select_emphasis(ranking, dag) == emphasis_by_rule(ranking, parents)


# --- gating ------------------------------------------------------------------------


def test_uninitialized_model_stays_quiet(default_spec, default_policy):
    state = make_state(default_spec, 2, 30.0, 12, (2, 2))
    assert decide(state, TomModel(), default_policy) is None


def test_agreement_stays_quiet(default_spec, default_policy):
    model = myopic_trained_model(default_spec)
    # level 3 with ample time: expert calls and the myopic player calls too
    state = make_state(default_spec, 3, 200.0, 12, (2, 2))
    assert decide(state, model, default_policy) is None


def test_confidence_exactly_at_threshold_stays_quiet(default_spec, default_policy):
    dag = Dag(edges=frozenset({("bomb_type", "action")}))
    cpds = fit_mle(dag, [(1, 0, 0, 1)] * 3 + [(1, 0, 0, 0)] * 1)  # P(Call|b=2) = 0.75
    model = TomModel(dag=dag, cpds=cpds)
    model.initialized = True
    model.threshold = 0.75
    state = make_state(default_spec, 2, 30.0, 12, (3, 3))
    assert default_policy.actions[(2, 1, 0, 12)] is ActionKind.SOLO
    assert decide(state, model, default_policy) is None
    model.threshold = 0.7499999
    assert decide(state, model, default_policy) is not None


def test_confident_deviation_triggers_intervention(default_spec, default_policy):
    model = myopic_trained_model(default_spec)
    # medium distance, low clock: the expert solos a level-2 bomb, the myopic
    # player is confidently predicted to call
    state = make_state(default_spec, 2, 30.0, 12, (3, 3))
    assert state.distance_bin == 1 and state.time_bin == 0
    intervention = decide(state, model, default_policy, round_index=41)
    assert intervention is not None
    assert intervention.recommended is ActionKind.SOLO
    assert intervention.a_pred is ActionKind.CALL
    assert intervention.confidence > model.threshold
    assert intervention.gated
    assert intervention.round_index == 41
    # the player's structure credits the bomb level, so the emphasis falls on
    # the most important uncredited feature
    assert intervention.feature in ("distance", "time")
    assert intervention.text == render(ActionKind.SOLO, intervention.feature)


def test_frequency_filtered_issue_is_ungated(default_spec, default_policy):
    state = make_state(default_spec, 2, 30.0, 12, (3, 3))
    issue = frequency_filtered(state, default_policy, round_index=7)
    assert not issue.gated
    assert issue.recommended is ActionKind.SOLO
    assert issue.confidence is None
    assert issue.text == render(issue.recommended, issue.feature)
