"""Exception types shared across the engine."""


class ConfigError(ValueError):
    """Invalid configuration: payoffs, cut points, condition names, templates."""


class SolverError(RuntimeError):
    """The policy solver failed to converge within its iteration cap."""


class SessionFinished(RuntimeError):
    """An action was submitted to a session whose trials are all complete."""
