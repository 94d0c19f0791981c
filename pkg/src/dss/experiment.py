"""Condition runner and analysis-ready metrics over simulated populations.

Every metric here is a pure function of the persisted logs: reloading the
JSONL files and recomputing reproduces the CSV outputs byte for byte.
Statistical testing is left to the consumer; this module only emits the raw
per-trial and per-intervention tables.
"""
from __future__ import annotations

import csv
import io
import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ACTIONS, ActionKind, PayoffSpec, TomConfig, payoff_from_config, tom_from_config
from .engine import CONDITIONS, EpisodeLog, SessionEngine
from .errors import ConfigError
from .humans import DEFAULT_PROFILE_CONFIGS, absorb, act, make_profile
from .policy import Policy, train_policy


@dataclass(frozen=True)
class ConditionSpec:
    kind: str
    participants: int
    profile: str = "time_blind_myopic"
    rho: float = 0.095
    trials: int = 12
    training_trials: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in CONDITIONS:
            raise ConfigError(f"unknown condition {self.kind!r}")
        if not 0.0 <= self.rho <= 1.0:
            raise ConfigError("rho must lie in [0, 1]")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.participants < 1:
            raise ConfigError("participants must be at least 1")


def run_condition(
    cond: ConditionSpec,
    spec: PayoffSpec,
    policy: Policy,
    tom_config: TomConfig | None = None,
    templates: dict | None = None,
    profile_configs: dict | None = None,
) -> list[EpisodeLog]:
    """Simulate one experimental arm; one log per participant."""
    configs = profile_configs if profile_configs is not None else DEFAULT_PROFILE_CONFIGS
    if cond.profile not in configs:
        raise ConfigError(f"unknown profile {cond.profile!r}")
    master = random.Random(cond.seed)
    seeds = [(master.getrandbits(48), master.getrandbits(48)) for _ in range(cond.participants)]
    logs = []
    for i, (engine_seed, human_seed) in enumerate(seeds):
        profile = make_profile(cond.profile, spec, policy, configs=configs)
        human_rng = random.Random(human_seed)
        engine = SessionEngine(
            cond.kind,
            spec,
            policy,
            tom_config=tom_config,
            templates=templates,
            rho=cond.rho,
            seed=engine_seed,
            trials=cond.trials,
            training_trials=cond.training_trials,
            participant=i,
        )
        while not engine.finished:
            pending = engine.pending
            action = act(profile, engine.state, pending, human_rng)
            if pending is not None:
                absorb(profile, pending, human_rng)
            engine.apply_action(action)
        logs.append(engine.log)
    return logs


# --- learning curves --------------------------------------------------------


def learning_curves(logs: list[EpisodeLog]) -> list[dict]:
    """Per-condition, per-trial mean score with its standard error.

    A cell with a single participant gets an undefined (None) standard error
    rather than a fabricated zero.
    """
    training_by_trial: dict[tuple[str, int], bool] = {}
    scores: dict[tuple[str, int], list[float]] = {}
    for log in logs:
        for trial, score in enumerate(log.trial_scores, start=1):
            scores.setdefault((log.condition, trial), []).append(score)
        for record in log.rounds:
            training_by_trial[(log.condition, record["trial"])] = record["training"]
    rows = []
    for (condition, trial) in sorted(scores):
        cell = scores[(condition, trial)]
        n = len(cell)
        mean = sum(cell) / n
        if n > 1:
            var = sum((x - mean) ** 2 for x in cell) / (n - 1)
            se = math.sqrt(var / n)
        else:
            se = None
        rows.append(
            {
                "condition": condition,
                "trial": trial,
                "mean": mean,
                "se": se,
                "n": n,
                "training": training_by_trial.get((condition, trial), False),
            }
        )
    return rows


# --- compliance ---------------------------------------------------------------


def compliance_metrics(logs: list[EpisodeLog]) -> dict:
    """Short-term: the recommended action was taken in the same round.
    Long-term: the emphasized feature's arc into the action node, absent at
    issue time, shows up right after the next structure-learning pass."""
    followed = 0
    issued = 0
    adopted = 0
    eligible = 0
    for log in logs:
        rounds = log.rounds
        for idx, record in enumerate(rounds):
            issue = record.get("intervention")
            if issue is None:
                continue
            issued += 1
            if record["action"] == issue["recommended"]:
                followed += 1
            edge = [issue["feature"], "action"]
            if edge in record["dag_edges"]:
                continue  # already credited; adoption is unmeasurable
            pass_idx = next(
                (j for j in range(idx, len(rounds)) if rounds[j]["maintenance"]), None
            )
            if pass_idx is None or pass_idx + 1 >= len(rounds):
                continue  # no post-pass snapshot to inspect
            eligible += 1
            if edge in rounds[pass_idx + 1]["dag_edges"]:
                adopted += 1
    return {
        "short_term": followed / issued if issued else None,
        "long_term": adopted / eligible if eligible else None,
        "n_interventions": issued,
        "n_long_eligible": eligible,
    }


def intervention_rate(logs: list[EpisodeLog]) -> float:
    rounds = sum(len(log.rounds) for log in logs)
    issued = sum(1 for log in logs for r in log.rounds if r.get("intervention"))
    return issued / rounds if rounds else 0.0


# --- prediction accuracy -----------------------------------------------------


def _one_hot(record: dict) -> np.ndarray:
    state = record["state"]
    x = np.zeros(9)
    x[state["bomb_type"] - 1] = 1.0
    x[3 + state["distance_bin"]] = 1.0
    x[6 + state["time_bin"]] = 1.0
    return x


def logreg_fit(
    X: np.ndarray, y: np.ndarray, lr: float = 0.5, iters: int = 500
) -> tuple[np.ndarray, list[float]]:
    """Batch gradient descent on the cross-entropy of a logistic model.

    Deterministic (zero init); returns the loss trace so callers can check
    the descent actually descends.
    """
    Xb = np.hstack([X, np.ones((len(X), 1))])
    w = np.zeros(Xb.shape[1])
    losses = []
    for _ in range(iters):
        z = Xb @ w
        p = 1.0 / (1.0 + np.exp(-z))
        eps = 1e-12
        losses.append(float(-np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps))))
        w -= lr * (Xb.T @ (p - y)) / len(y)
    return w, losses


def logreg_predict(w: np.ndarray, X: np.ndarray) -> np.ndarray:
    Xb = np.hstack([X, np.ones((len(X), 1))])
    return (Xb @ w > 0.0).astype(int)


def prediction_eval(logs: list[EpisodeLog], k: int = 10) -> dict:
    """Online model accuracy next to majority-class and logistic baselines.

    Baselines are cross-validated over participants (train on k-1 folds'
    pooled rounds, test on the held-out players); the online accuracy needs
    no folds because the model never sees a player's future.
    """
    if not logs:
        raise ValueError("prediction evaluation needs at least one log")
    if len(logs) < k:
        raise ConfigError(f"{len(logs)} participants cannot fill {k} folds")

    predicted = 0
    correct = 0
    for log in logs:
        for record in log.rounds:
            if record["a_pred"] is not None:
                predicted += 1
                correct += record["a_pred"] == record["action"]
    tom_accuracy = correct / predicted if predicted else None

    features = [
        (i, _one_hot(record), ACTIONS.index(ActionKind(record["action"])))
        for i, log in enumerate(logs)
        for record in log.rounds
    ]
    folds = {f: [i for i in range(len(logs)) if i % k == f] for f in range(k)}
    majority_acc = []
    logreg_acc = []
    for f, test_ids in folds.items():
        test_set = set(test_ids)
        train = [(x, y) for i, x, y in features if i not in test_set]
        test = [(x, y) for i, x, y in features if i in test_set]
        if not train or not test:
            continue
        y_train = np.array([y for _, y in train])
        y_test = np.array([y for _, y in test])
        mode = int(np.bincount(y_train, minlength=2).argmax())
        majority_acc.append(float(np.mean(y_test == mode)))
        X_train = np.array([x for x, _ in train])
        X_test = np.array([x for x, _ in test])
        w, _ = logreg_fit(X_train, y_train)
        logreg_acc.append(float(np.mean(logreg_predict(w, X_test) == y_test)))
    return {
        "tom_online": tom_accuracy,
        "majority_class": {
            "folds": majority_acc,
            "mean": sum(majority_acc) / len(majority_acc) if majority_acc else None,
        },
        "logistic_regression": {
            "folds": logreg_acc,
            "mean": sum(logreg_acc) / len(logreg_acc) if logreg_acc else None,
        },
    }


# --- file outputs -------------------------------------------------------------


def _csv_bytes(header: list[str], rows: list[list]) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])
    return buffer.getvalue().encode()


def curves_csv(logs: list[EpisodeLog]) -> bytes:
    rows = [
        [r["condition"], r["trial"], r["mean"], r["se"], r["n"], int(r["training"])]
        for r in learning_curves(logs)
    ]
    return _csv_bytes(["condition", "trial", "mean", "se", "n", "training"], rows)


def compliance_csv(logs_by_condition: dict[str, list[EpisodeLog]]) -> bytes:
    rows = []
    for condition in sorted(logs_by_condition):
        m = compliance_metrics(logs_by_condition[condition])
        rows.append(
            [
                condition,
                m["short_term"],
                m["long_term"],
                m["n_interventions"],
                m["n_long_eligible"],
            ]
        )
    return _csv_bytes(
        ["condition", "short_term", "long_term", "n_interventions", "n_long_eligible"], rows
    )


def predictions_csv(result: dict) -> bytes:
    rows = [["tom_online", "", result["tom_online"], ""]]
    for method in ("majority_class", "logistic_regression"):
        for fold, acc in enumerate(result[method]["folds"]):
            rows.append([method, fold, acc, ""])
        rows.append([method, "", result[method]["mean"], "mean"])
    return _csv_bytes(["method", "fold", "accuracy", "note"], rows)


def run_experiment(config: dict, out_dir: str | Path, seed: int = 0) -> dict:
    """Run every configured condition and write the metrics files."""
    out = Path(out_dir)
    (out / "logs").mkdir(parents=True, exist_ok=True)
    spec = payoff_from_config(config)
    tom_config = tom_from_config(config)
    templates = config.get("templates")
    profile_configs = {**DEFAULT_PROFILE_CONFIGS, **config.get("profiles", {})}
    policy = train_policy(spec)

    master = random.Random(seed)
    logs_by_condition: dict[str, list[EpisodeLog]] = {}
    all_logs: list[EpisodeLog] = []
    for raw in config.get("conditions", []):
        cond = ConditionSpec(
            kind=raw["kind"],
            participants=int(raw.get("participants", 20)),
            profile=raw.get("profile", "time_blind_myopic"),
            rho=float(raw.get("rho", 0.095)),
            trials=int(raw.get("trials", 12)),
            training_trials=int(raw.get("training_trials", 3)),
            seed=master.getrandbits(48),
        )
        logs = run_condition(cond, spec, policy, tom_config, templates, profile_configs)
        logs_by_condition.setdefault(cond.kind, []).extend(logs)
        all_logs.extend(logs)
        safe = cond.kind.replace("+", "_")
        with open(out / "logs" / f"{safe}.jsonl", "w") as fh:
            for log in logs:
                fh.write(log.to_json() + "\n")

    (out / "curves.csv").write_bytes(curves_csv(all_logs))
    (out / "compliance.csv").write_bytes(compliance_csv(logs_by_condition))
    summary = {"conditions": {k: len(v) for k, v in logs_by_condition.items()}}
    control = logs_by_condition.get("None", [])
    folds = int(config.get("cv_folds", 10))
    if len(control) >= folds:
        result = prediction_eval(control, k=folds)
        (out / "predictions.csv").write_bytes(predictions_csv(result))
        summary["prediction_eval"] = result
    return summary


def load_logs(path: str | Path) -> list[EpisodeLog]:
    logs = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                logs.append(EpisodeLog.from_dict(json.loads(line)))
    return logs


# --- small statistics helpers --------------------------------------------------


def bootstrap_diff_ci(
    sample_a: list[float],
    sample_b: list[float],
    n_boot: int = 2000,
    seed: int = 0,
    level: float = 0.95,
) -> tuple[float, float]:
    """Percentile bootstrap interval for mean(sample_a) - mean(sample_b)."""
    rng = np.random.default_rng(seed)
    a = np.asarray(sample_a)
    b = np.asarray(sample_b)
    diffs = [
        float(np.mean(rng.choice(a, size=len(a))) - np.mean(rng.choice(b, size=len(b))))
        for _ in range(n_boot)
    ]
    tail = (1.0 - level) / 2.0
    return (
        float(np.quantile(diffs, tail)),
        float(np.quantile(diffs, 1.0 - tail)),
    )


def final_trial_scores(logs: list[EpisodeLog]) -> list[float]:
    return [log.trial_scores[-1] for log in logs if log.trial_scores]
