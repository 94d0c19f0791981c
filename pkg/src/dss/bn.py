"""Online Bayesian-network model of how the player chooses actions.

Four categorical variables: the three observed features plus the player's
action. Structure is re-learned periodically by hill climbing on a Bayesian
Dirichlet (equivalent uniform) score over the most recent observation
window; between passes the conditional tables absorb each observation as a
conjugate pseudo-count update. Task knowledge constrains the search space:
features are generated by the environment, so feature-to-feature and
action-to-feature arcs are excluded, leaving the eight possible parent sets
of the action node.

A confidence threshold is re-tuned at every structure pass by grid search
for the cutoff with the best prediction accuracy on the window.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .config import ACTIONS, FEATURES, ActionKind, TomConfig
from .env import RoundState
from .errors import ConfigError

NODES = ("bomb_type", "distance", "time", "action")
CARDS = {"bomb_type": 3, "distance": 3, "time": 3, "action": 2}

Row = tuple[int, int, int, int]


def encode_state(state: RoundState | tuple) -> tuple[int, int, int]:
    """Reduce a round state to 0-based codes for (bomb_type, distance, time)."""
    if isinstance(state, RoundState):
        return (state.bomb_type - 1, state.distance_bin, state.time_bin)
    b, d, t = state[0], state[1], state[2]
    return (b - 1, d, t)


def encode_row(state: RoundState | tuple, action: ActionKind) -> Row:
    return (*encode_state(state), ACTIONS.index(ActionKind(action)))


def _check_rows(rows: list[Row]) -> None:
    for row in rows:
        if len(row) != len(NODES):
            raise ValueError(f"observation row {row} has wrong arity")
        for value, node in zip(row, NODES):
            if not 0 <= value < CARDS[node]:
                raise ValueError(f"value {value} out of range for {node}")


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph over the fixed node set."""

    edges: frozenset[tuple[str, str]] = frozenset()

    def __post_init__(self) -> None:
        for u, v in self.edges:
            if u not in NODES or v not in NODES or u == v:
                raise ValueError(f"bad edge ({u}, {v})")
        if self._has_cycle():
            raise ValueError("edge set contains a cycle")

    def _has_cycle(self) -> bool:
        adjacency = {node: [] for node in NODES}
        for u, v in self.edges:
            adjacency[u].append(v)
        seen: dict[str, int] = {}

        def visit(node: str) -> bool:
            state = seen.get(node, 0)
            if state == 1:
                return True
            if state == 2:
                return False
            seen[node] = 1
            if any(visit(child) for child in adjacency[node]):
                return True
            seen[node] = 2
            return False

        return any(visit(node) for node in NODES)

    def parents(self, node: str) -> tuple[str, ...]:
        return tuple(n for n in NODES if (n, node) in self.edges)

    def has_edge(self, u: str, v: str) -> bool:
        return (u, v) in self.edges

    def sorted_edges(self) -> list[tuple[str, str]]:
        return sorted(self.edges)


def dag_hash(dag: Dag) -> str:
    blob = json.dumps(dag.sorted_edges()).encode()
    return hashlib.sha1(blob).hexdigest()[:12]


def dag_to_dot(dag: Dag) -> str:
    lines = ["digraph belief {"]
    for node in NODES:
        lines.append(f'  "{node}";')
    for u, v in dag.sorted_edges():
        lines.append(f'  "{u}" -> "{v}";')
    lines.append("}")
    return "\n".join(lines)


@dataclass(frozen=True)
class ConstraintSet:
    """Edges the structure search may use."""

    allowed: frozenset[tuple[str, str]]

    @classmethod
    def exogenous_features(cls) -> "ConstraintSet":
        """Only feature-to-action arcs: features come from the environment,
        so the admissible space is the 8 parent subsets of the action node."""
        return cls(allowed=frozenset((f, "action") for f in FEATURES))

    def permits(self, u: str, v: str) -> bool:
        return (u, v) in self.allowed


DEFAULT_CONSTRAINTS = ConstraintSet.exogenous_features()


# --- scoring ---------------------------------------------------------------


def family_score(node: str, parents: tuple[str, ...], rows: list[Row], ess: float) -> float:
    """Dirichlet-marginal-likelihood term of one node given its parents."""
    r = CARDS[node]
    q = 1
    for parent in parents:
        q *= CARDS[parent]
    alpha_row = ess / q
    alpha_cell = ess / (q * r)
    node_slot = NODES.index(node)
    parent_slots = [NODES.index(p) for p in parents]

    counts: dict[tuple[int, ...], list[int]] = {}
    for row in rows:
        config = tuple(row[slot] for slot in parent_slots)
        bucket = counts.get(config)
        if bucket is None:
            bucket = [0] * r
            counts[config] = bucket
        bucket[row[node_slot]] += 1

    score = 0.0
    for config in sorted(counts):
        bucket = counts[config]
        total = sum(bucket)
        score += math.lgamma(alpha_row) - math.lgamma(alpha_row + total)
        for n_cell in bucket:
            if n_cell:
                score += math.lgamma(alpha_cell + n_cell) - math.lgamma(alpha_cell)
    return score


def bdeu_score(dag: Dag, rows: list[Row], ess: float) -> float:
    """Log marginal likelihood of the data under `dag` (uniform structure prior).

    Unobserved parent configurations contribute exactly zero, so the empty
    dataset scores 0.0 for every structure, and the score depends on the data
    only through its counts (row order never matters).
    """
    if ess <= 0:
        raise ConfigError("ess must be positive")
    _check_rows(rows)
    return sum(family_score(node, dag.parents(node), rows, ess) for node in NODES)


def _candidate_ops(dag: Dag, constraints: ConstraintSet):
    for u in NODES:
        for v in NODES:
            if u == v:
                continue
            if dag.has_edge(u, v):
                yield ("remove", u, v)
                if constraints.permits(v, u):
                    try:
                        Dag(edges=dag.edges - {(u, v)} | {(v, u)})
                    except ValueError:
                        continue
                    yield ("reverse", u, v)
            elif constraints.permits(u, v):
                try:
                    Dag(edges=dag.edges | {(u, v)})
                except ValueError:
                    continue
                yield ("add", u, v)


def hill_climb(
    rows: list[Row],
    constraints: ConstraintSet = DEFAULT_CONSTRAINTS,
    ess: float = 10.0,
) -> Dag:
    """Best-improvement local search over add/remove/reverse moves.

    Only strictly score-improving moves are taken, so score ties resolve
    toward fewer edges; equal-gain candidates resolve by resulting edge
    count and then lexicographic edge order, which makes runs deterministic.
    """
    if not rows:
        raise ValueError("structure search requires at least one observation")
    _check_rows(rows)

    cache: dict[tuple[str, tuple[str, ...]], float] = {}

    def fam(node: str, parents: tuple[str, ...]) -> float:
        key = (node, parents)
        if key not in cache:
            cache[key] = family_score(node, parents, rows, ess)
        return cache[key]

    current = Dag()
    while True:
        best: tuple[float, int, tuple[str, str], str] | None = None
        for op, u, v in _candidate_ops(current, constraints):
            if op == "add":
                edges = current.edges | {(u, v)}
                gain = fam(v, Dag(edges=edges).parents(v)) - fam(v, current.parents(v))
            elif op == "remove":
                edges = current.edges - {(u, v)}
                gain = fam(v, Dag(edges=edges).parents(v)) - fam(v, current.parents(v))
            else:  # reverse
                edges = current.edges - {(u, v)} | {(v, u)}
                nxt = Dag(edges=edges)
                gain = (
                    fam(v, nxt.parents(v))
                    + fam(u, nxt.parents(u))
                    - fam(v, current.parents(v))
                    - fam(u, current.parents(u))
                )
            rank = (-gain, len(edges), (u, v), op)
            if best is None or rank < (-best[0], best[1], best[2], best[3]):
                best = (gain, len(edges), (u, v), op)
                best_edges = edges
        if best is None or best[0] <= 0.0:
            return current
        current = Dag(edges=frozenset(best_edges))


def exhaustive_search(
    rows: list[Row],
    constraints: ConstraintSet = DEFAULT_CONSTRAINTS,
    ess: float = 10.0,
) -> Dag:
    """Score every admissible structure and take the argmax (ties: fewer
    edges, then lexicographic). Feasible because the constrained space is
    tiny; used as the reference the local search is checked against."""
    allowed = sorted(constraints.allowed)
    structures: list[Dag] = []
    for mask in range(1 << len(allowed)):
        edges = frozenset(e for i, e in enumerate(allowed) if mask >> i & 1)
        try:
            structures.append(Dag(edges=edges))
        except ValueError:
            continue
    structures.sort(key=lambda d: (len(d.edges), d.sorted_edges()))
    best_dag = structures[0]
    best_score = -math.inf
    for dag in structures:
        score = bdeu_score(dag, rows, ess)
        if score > best_score:
            best_dag, best_score = dag, score
    return best_dag


# --- conditional probability tables ----------------------------------------


@dataclass
class CpdTable:
    node: str
    parents: tuple[str, ...]
    counts: np.ndarray  # [n_parent_configs, n_states] Dirichlet pseudo-counts
    probs: np.ndarray  # row-normalized

    def row_index(self, row_codes: tuple[int, ...]) -> int:
        idx = 0
        for parent in self.parents:
            idx = idx * CARDS[parent] + row_codes[NODES.index(parent)]
        return idx

    def copy(self) -> "CpdTable":
        return CpdTable(self.node, self.parents, self.counts.copy(), self.probs.copy())


@dataclass
class Cpds:
    tables: dict[str, CpdTable]

    def copy(self) -> "Cpds":
        return Cpds({node: table.copy() for node, table in self.tables.items()})

    def prob_row(self, node: str, row_codes: tuple[int, ...]) -> np.ndarray:
        table = self.tables[node]
        return table.probs[table.row_index(row_codes)]


def uniform_cpds(dag: Dag, prior_ess: float = 1.0) -> Cpds:
    tables = {}
    for node in NODES:
        parents = dag.parents(node)
        q = 1
        for parent in parents:
            q *= CARDS[parent]
        r = CARDS[node]
        counts = np.full((q, r), prior_ess, dtype=float)
        probs = np.full((q, r), 1.0 / r)
        tables[node] = CpdTable(node, parents, counts, probs)
    return Cpds(tables)


def fit_mle(dag: Dag, rows: list[Row], prior_ess: float = 1.0) -> Cpds:
    """Relative-frequency tables; parent configurations never seen in the
    data fall back to a uniform row carrying `prior_ess` pseudo-counts."""
    _check_rows(rows)
    cpds = uniform_cpds(dag, prior_ess)
    for node, table in cpds.tables.items():
        q, r = table.counts.shape
        raw = np.zeros((q, r))
        node_slot = NODES.index(node)
        for row in rows:
            raw[table.row_index(row), row[node_slot]] += 1
        totals = raw.sum(axis=1)
        seen = totals > 0
        table.counts[seen] = raw[seen]
        table.probs[seen] = raw[seen] / totals[seen, None]
    return cpds


def bayesian_update(cpds: Cpds, row: Row) -> Cpds:
    """Conjugate step: add one pseudo-count to the matched cell of every
    node's table and renormalize only that row."""
    _check_rows([row])
    for node, table in cpds.tables.items():
        j = table.row_index(row)
        table.counts[j, row[NODES.index(node)]] += 1.0
        table.probs[j] = table.counts[j] / table.counts[j].sum()
    return cpds


def action_posterior(cpds: Cpds, state_codes: tuple[int, int, int]) -> np.ndarray:
    """P(action | observed features): features not parenting the action are
    exogenous roots here, so the matched table row already is the posterior."""
    row_codes = (*state_codes, 0)  # action slot unused for the lookup
    return cpds.prob_row("action", row_codes)


# --- threshold tuning -------------------------------------------------------


def update_threshold(records: list[tuple[bool, float]], grid: tuple[float, ...]) -> float:
    """Pick the confidence cutoff with the best accuracy among covered rounds.

    Coverage-zero cutoffs score 0. Ties go to the smallest cutoff so coverage
    stays as wide as possible.
    """
    if not grid:
        raise ConfigError("threshold grid must be nonempty")
    best_t = None
    best_acc = -1.0
    for t in sorted(grid):
        covered = [correct for correct, confidence in records if confidence >= t]
        acc = sum(covered) / len(covered) if covered else 0.0
        if acc > best_acc:
            best_acc = acc
            best_t = t
    return float(best_t)


# --- the online model -------------------------------------------------------


@dataclass
class TomModel:
    """Per-player belief model; single-owner and mutable."""

    config: TomConfig = field(default_factory=TomConfig)
    constraints: ConstraintSet = DEFAULT_CONSTRAINTS
    dag: Dag = field(default_factory=Dag)
    cpds: Cpds | None = None
    memory: list[Row] = field(default_factory=list)
    threshold: float | None = None
    initialized: bool = False

    def __post_init__(self) -> None:
        if self.cpds is None:
            self.cpds = uniform_cpds(self.dag, self.config.prior_ess)
        if self.threshold is None:
            self.threshold = self.config.initial_threshold

    def observe(self, state: RoundState | tuple, action: ActionKind) -> "TomModel":
        row = encode_row(state, action)
        self.memory.append(row)
        if len(self.memory) <= self.config.window:
            bayesian_update(self.cpds, row)
            return self
        # Window overflow: re-learn structure, refit tables only if the
        # structure changed, retune the confidence cutoff, flush the window.
        new_dag = hill_climb(self.memory, self.constraints, self.config.ess)
        if new_dag != self.dag:
            self.dag = new_dag
            self.cpds = fit_mle(new_dag, self.memory, self.config.prior_ess)
        records = []
        for b, d, t, actual in self.memory:
            posterior = action_posterior(self.cpds, (b, d, t))
            records.append((int(posterior.argmax()) == actual, float(posterior.max())))
        self.threshold = update_threshold(records, self.config.threshold_grid)
        self.memory.clear()
        self.initialized = True
        return self

    def snapshot(self) -> dict:
        return {
            "edges": self.dag.sorted_edges(),
            "dag_hash": dag_hash(self.dag),
            "threshold": self.threshold,
            "initialized": self.initialized,
            "window": self.config.window,
            "tables": {
                node: {
                    "parents": list(table.parents),
                    "counts": table.counts.tolist(),
                }
                for node, table in self.cpds.tables.items()
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.snapshot(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str, config: TomConfig | None = None) -> "TomModel":
        raw = json.loads(text)
        dag = Dag(edges=frozenset(tuple(edge) for edge in raw["edges"]))
        model = cls(config=config or TomConfig(), dag=dag)
        for node, entry in raw["tables"].items():
            table = model.cpds.tables[node]
            if tuple(entry["parents"]) != table.parents:
                raise ValueError(f"table parents for {node} disagree with the dag")
            table.counts = np.asarray(entry["counts"], dtype=float)
            table.probs = table.counts / table.counts.sum(axis=1, keepdims=True)
        model.threshold = float(raw["threshold"])
        model.initialized = bool(raw["initialized"])
        return model


def tom_step(model: TomModel, obs: tuple) -> TomModel:
    """Feed one (state, action) pair through the online update loop."""
    state, action = obs
    return model.observe(state, action)


def predict(model: TomModel, state: RoundState | tuple) -> tuple[ActionKind, float]:
    """Most likely next action and its posterior probability.

    An exact posterior tie (a never-seen parent configuration still holding
    its uniform prior) resolves toward the action with the larger total
    pseudo-count mass, i.e. the player's empirically dominant action.
    """
    if not model.initialized:
        raise RuntimeError("belief model is not initialized yet")
    posterior = action_posterior(model.cpds, encode_state(state))
    top = float(posterior.max())
    tied = np.flatnonzero(posterior >= top - 1e-12)
    if len(tied) > 1:
        marginal = model.cpds.tables["action"].counts.sum(axis=0)
        best = int(tied[np.argmax(marginal[tied])])
    else:
        best = int(tied[0])
    return ACTIONS[best], float(posterior[best])
