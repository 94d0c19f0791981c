"""Decision support for a timed bomb-defusal teaming task.

The engine pairs an exactly-solved expert policy with an online Bayesian
belief model of the player, and speaks up only when the player is
confidently predicted to deviate from the expert's advice, explaining the
nudge through the feature whose change would flip the decision.
"""

from .config import ACTIONS, ActionKind, PayoffSpec, TomConfig
from .env import RoundState, StepOutcome, discretize, new_episode, step
from .policy import DiscreteMdp, Policy, build_mdp, recommend, train_policy, value_iteration

__all__ = [
    "ACTIONS",
    "ActionKind",
    "PayoffSpec",
    "TomConfig",
    "RoundState",
    "StepOutcome",
    "discretize",
    "new_episode",
    "step",
    "DiscreteMdp",
    "Policy",
    "build_mdp",
    "recommend",
    "train_policy",
    "value_iteration",
]
