"""Command-line front door; every command is a thin wrapper over the package."""
from __future__ import annotations

import json
import os
from pathlib import Path

import click

from .config import ActionKind, PayoffSpec, load_config, payoff_from_config, tom_from_config
from .engine import CONDITIONS, headless_replay
from .env import RoundState, make_state
from .experiment import run_experiment
from .explain import counterfactual_search, feature_importance
from .policy import Policy, train_policy


def _load(config_path: str | None) -> dict:
    return load_config(config_path) if config_path else {}


def _state_from_json(spec: PayoffSpec, raw: dict) -> RoundState:
    """Accept either binned fields directly or raw distance/time readings."""
    bombs = int(raw.get("bombs_remaining", spec.n_bombs))
    if "team_pos" in raw:
        return make_state(
            spec,
            int(raw["bomb_type"]),
            float(raw.get("time_remaining", spec.episode_time_limit)),
            bombs,
            tuple(raw["team_pos"]),
        )
    if "distance_bin" in raw:
        # Synthesize raw readings consistent with the requested bins.
        cuts = spec.distance_cuts
        distance = [cuts[0], (cuts[0] + cuts[1]) / 2 + 0.5, cuts[1] + 1][int(raw["distance_bin"])]
    else:
        distance = float(raw["distance_raw"])
    if "time_bin" in raw:
        cuts = spec.time_cuts
        time_remaining = [cuts[0], cuts[1], spec.episode_time_limit][int(raw["time_bin"])]
    else:
        time_remaining = float(raw["time_remaining"])
    bomb_type = int(raw["bomb_type"])
    return RoundState(
        bomb_type=bomb_type,
        distance_raw=distance,
        distance_bin=spec.bin_distance(distance),
        time_remaining=time_remaining,
        time_bin=spec.bin_time(time_remaining),
        bombs_remaining=bombs,
        agent_pos=spec.agent_pos,
        team_pos=spec.agent_pos,
    )


@click.group()
def main() -> None:
    """Decision support engine for the bomb-defusal teaming task."""


@main.command("train-policy")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--gamma", type=float, default=1.0, show_default=True)
@click.option("--tol", type=float, default=1e-9, show_default=True)
def train_policy_cmd(config_path: str | None, out_path: str, gamma: float, tol: float) -> None:
    """Solve the expert policy and write it to a JSON file."""
    spec = payoff_from_config(_load(config_path))
    policy = train_policy(spec, gamma=gamma, tol=tol)
    policy.save(out_path)
    click.echo(f"policy over {len(policy.actions)} states written to {out_path}")


@main.command("explain")
@click.option("--policy", "policy_path", type=click.Path(exists=True), required=True)
@click.option("--state", "state_json", type=str, required=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def explain_cmd(policy_path: str, state_json: str, config_path: str | None) -> None:
    """Print the per-feature flip distances and the importance ranking."""
    spec = payoff_from_config(_load(config_path))
    policy = Policy.load(policy_path)
    state = _state_from_json(spec, json.loads(state_json))
    cf = counterfactual_search(policy, state)
    ranking = feature_importance(cf)
    click.echo(
        json.dumps(
            {"counterfactuals": cf.to_dict(), "ranking": [[f, s] for f, s in ranking]},
            indent=2,
        )
    )


@main.command("run-experiment")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
def run_experiment_cmd(config_path: str, out_dir: str, seed: int) -> None:
    """Simulate the configured conditions and write metrics CSVs and logs."""
    summary = run_experiment(load_config(config_path), out_dir, seed=seed)
    click.echo(json.dumps(summary, indent=2))
    click.echo(f"metrics written under {out_dir}")


@main.command("serve")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--port", type=int, default=None, help="overrides DSS_PORT and the default 8000")
@click.option("--host", type=str, default="127.0.0.1", show_default=True)
def serve_cmd(config_path: str | None, port: int | None, host: str) -> None:
    """Run the live-play HTTP service."""
    import uvicorn

    from .service.app import create_app

    if port is None:
        port = int(os.environ.get("DSS_PORT", "8000"))
    uvicorn.run(create_app(_load(config_path)), host=host, port=port)


@main.command("replay")
@click.option("--condition", type=click.Choice(CONDITIONS), default="ToM+XRL", show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--actions", type=str, required=True, help="comma-separated Solo/Call script")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--trials", type=int, default=12, show_default=True)
@click.option("--rho", type=float, default=0.095, show_default=True)
def replay_cmd(
    condition: str, seed: int, actions: str, config_path: str | None, trials: int, rho: float
) -> None:
    """Headless scripted run; prints the canonical log JSON.

    The service must reproduce this byte for byte for the same seed and
    script, which makes this the reference side of parity checks.
    """
    cfg = _load(config_path)
    spec = payoff_from_config(cfg)
    policy = train_policy(spec)
    script = [ActionKind(a.strip()) for a in actions.split(",") if a.strip()]
    log = headless_replay(
        condition,
        spec,
        policy,
        script,
        seed=seed,
        tom_config=tom_from_config(cfg),
        templates=cfg.get("templates"),
        rho=rho,
        trials=trials,
    )
    click.echo(json.dumps(log.to_dict(), sort_keys=True))


if __name__ == "__main__":
    main()
