"""Independent reference implementations the engine is checked against.

Everything here deliberately avoids the production code paths: values are
recomputed from first principles (tree recursion, exhaustive enumeration,
high-precision special functions) so a bug in the engine cannot hide in its
own oracle.
"""
from __future__ import annotations

import itertools

import mpmath as mp

from dss.bn import CARDS, NODES, Cpds, Dag
from dss.config import ACTIONS
from dss.explain import FEATURE_DOMAINS
from dss.policy import DiscreteMdp


# --- episode-tree optimum ----------------------------------------------------


def expectimax_value(mdp: DiscreteMdp, key: tuple[int, int, int, int]) -> float:
    """Optimal expected return by direct recursion over the episode tree.

    No memoization and no fixed-point iteration: every reachable branch of
    the tree is expanded, terminating because the bomb count strictly drops.
    """
    n = len(mdp.states)
    i = mdp.index[key]
    best = None
    for ai in range(mdp.rewards.shape[1]):
        value = mdp.rewards[i, ai]
        row = mdp.transitions[i, ai]
        for j in range(n):  # trailing terminal column contributes nothing
            p = row[j]
            if p > 0.0:
                value += mdp.gamma * p * expectimax_value(mdp, mdp.states[j])
        if best is None or value > best:
            best = value
    return best


def greedy_action_by_tree(mdp: DiscreteMdp, key) -> int:
    """Index of the action optimal at `key` per the tree recursion."""
    n = len(mdp.states)
    i = mdp.index[key]
    best_ai, best_q = 0, None
    for ai in range(mdp.rewards.shape[1]):
        q = mdp.rewards[i, ai]
        row = mdp.transitions[i, ai]
        for j in range(n):
            if row[j] > 0.0:
                q += mdp.gamma * row[j] * expectimax_value(mdp, mdp.states[j])
        if best_q is None or q > best_q:
            best_ai, best_q = ai, q
    return best_ai


# --- counterfactual flip search ----------------------------------------------


def exhaustive_flips(policy_actions: dict, key: tuple[int, int, int, int]) -> dict:
    """Minimal flip per feature by scanning the whole feature domain.

    Returns {feature: (steps, direction, action) | None}; ties between the
    two directions resolve downward.
    """
    slots = {"bomb_type": 0, "distance": 1, "time": 2}
    base = policy_actions[key]
    result = {}
    for feature, domain in FEATURE_DOMAINS.items():
        slot = slots[feature]
        current = key[slot]
        candidates = []
        for value in domain:
            if value == current:
                continue
            probe = list(key)
            probe[slot] = value
            action = policy_actions[tuple(probe)]
            if action != base:
                steps = abs(value - current)
                direction = 1 if value > current else -1
                candidates.append((steps, direction, action))
        if not candidates:
            result[feature] = None
            continue
        best_steps = min(c[0] for c in candidates)
        at_best = [c for c in candidates if c[0] == best_steps]
        down = [c for c in at_best if c[1] == -1]
        result[feature] = down[0] if down else at_best[0]
    return result


def exhaustive_ranking(flips: dict) -> list[tuple[str, int | None]]:
    order = ("bomb_type", "distance", "time")

    def sort_key(feature):
        entry = flips[feature]
        return (float("inf") if entry is None else entry[0], order.index(feature))

    return [
        (f, None if flips[f] is None else flips[f][0]) for f in sorted(order, key=sort_key)
    ]


# --- Dirichlet marginal likelihood -------------------------------------------


def bdeu_highprec(
    edges: set[tuple[str, str]], rows: list[tuple[int, ...]], ess: float, dps: int = 50
) -> float:
    """Full-formula score via arbitrary-precision log-gamma, summing over
    every parent configuration (observed or not)."""
    mp.mp.dps = dps
    total = mp.mpf(0)
    for node in NODES:
        parents = tuple(n for n in NODES if (n, node) in edges)
        q = 1
        for p in parents:
            q *= CARDS[p]
        r = CARDS[node]
        alpha_row = mp.mpf(ess) / q
        alpha_cell = mp.mpf(ess) / (q * r)
        parent_slots = [NODES.index(p) for p in parents]
        node_slot = NODES.index(node)
        for config in itertools.product(*[range(CARDS[p]) for p in parents]):
            matching = [
                row for row in rows if tuple(row[s] for s in parent_slots) == config
            ]
            total += mp.loggamma(alpha_row) - mp.loggamma(alpha_row + len(matching))
            for k in range(r):
                n_k = sum(1 for row in matching if row[node_slot] == k)
                total += mp.loggamma(alpha_cell + n_k) - mp.loggamma(alpha_cell)
    return float(total)


# --- joint-enumeration posterior ---------------------------------------------


def posterior_by_enumeration(cpds: Cpds, dag: Dag, state_codes: tuple[int, int, int]) -> list[float]:
    """P(action | features) from the full joint, brute force."""
    weights = []
    for action_code in range(len(ACTIONS)):
        assignment = {
            "bomb_type": state_codes[0],
            "distance": state_codes[1],
            "time": state_codes[2],
            "action": action_code,
        }
        weight = 1.0
        for node in NODES:
            table = cpds.tables[node]
            idx = 0
            for parent in table.parents:
                idx = idx * CARDS[parent] + assignment[parent]
            weight *= table.probs[idx][assignment[node]]
        weights.append(weight)
    total = sum(weights)
    return [w / total for w in weights]


# --- selection-rule reimplementation ------------------------------------------


def emphasis_by_rule(ranking: list[tuple[str, int | None]], parent_features: set[str]) -> str:
    """Literal restatement of the emphasis rule for cross-checking."""
    finite = [(f, s) for f, s in ranking if s is not None]
    if not finite:
        return "bomb_type"
    missing = [f for f, _ in finite if f not in parent_features]
    if missing:
        return missing[0]
    return finite[0][0]


# --- threshold grid search ------------------------------------------------------


def threshold_by_direct_eval(records: list[tuple[bool, float]], grid) -> float:
    best, best_acc = None, -1.0
    for t in sorted(grid):
        covered = [c for c, conf in records if conf >= t]
        acc = (sum(covered) / len(covered)) if covered else 0.0
        if acc > best_acc:
            best, best_acc = t, acc
    return best
