"""The teacher: terminal costs, rollout action selection, baselines, episodes.

Action selection is Monte Carlo rollout: each candidate action is scored by
simulating continuations under a fixed base policy with the learner's type
sampled from the current posterior and its weights pinned at the posterior
mean, then picking the cheapest candidate. Baseline teachers (a scripted
manipulator that never tutors, and a uniform-random teacher) share the same
episode engine.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .belief import (
    Belief,
    WeightGrid,
    belief_init,
    belief_update,
    posterior_enlightened_prob,
    posterior_mean_weights,
)
from .datagen import Dataset, feature_map, hamming, optimal_model, selection_cost
from .learner import (
    TUTOR,
    Action,
    InnerState,
    LearnerSim,
    enlightened_state,
    manipulation_level,
    naive_state,
    respond,
    transition,
    unassisted_learn,
)


class Teacher(enum.Enum):
    ROLLOUT = "rollout"
    MANIPULATIVE = "manipulative"
    RANDOM = "random"


@dataclass(frozen=True)
class TeacherConfig:
    u1: float = 1.0
    u2: float = 0.0
    stage_cost_suggest: float = 1.0
    stage_cost_tutor: float = 5.0
    horizon: int = 30
    rollout_samples: int = 32
    lookahead_depth: int | None = None  # None: simulate to the horizon
    aux_datasets: tuple[Dataset, ...] = ()
    eval_datasets: tuple[Dataset, ...] = ()
    eta: float = 0.5
    grid: WeightGrid = field(default_factory=WeightGrid)

    def __post_init__(self):
        if self.u1 < 0 or self.u2 < 0 or self.u1 + self.u2 <= 0:
            raise ValueError("scalarization weights must be non-negative with u1 + u2 > 0")
        if self.stage_cost_tutor <= self.stage_cost_suggest:
            raise ValueError("tutoring must cost more than a suggestion")
        if self.horizon < 0:
            raise ValueError("horizon must be non-negative")
        if self.rollout_samples < 1:
            raise ValueError("rollout_samples must be >= 1")
        if self.lookahead_depth is not None and self.lookahead_depth < 1:
            raise ValueError("lookahead_depth must be >= 1 when given")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must be a probability")

    def stage_cost(self, action: Action) -> float:
        return self.stage_cost_tutor if action == TUTOR else self.stage_cost_suggest


def terminal_cost(theta: np.ndarray, state: InnerState, ds: Dataset, cfg: TeacherConfig) -> float:
    """Scalarized terminal cost: current-dataset cost plus estimated unassisted cost."""
    current, future = terminal_cost_parts(theta, state, ds, cfg)
    return cfg.u1 * current + cfg.u2 * future


def terminal_cost_parts(
    theta: np.ndarray, state: InnerState, ds: Dataset, cfg: TeacherConfig
) -> tuple[float, float]:
    """Unweighted (current-dataset, aux-datasets) terminal components."""
    current = selection_cost(theta, ds)
    future = 0.0
    if cfg.u2 > 0:
        if not cfg.aux_datasets:
            raise ValueError("u2 > 0 requires aux_datasets")
        future = sum(selection_cost(unassisted_learn(state, d), d) for d in cfg.aux_datasets)
    return current, future


def base_order(ds: Dataset) -> np.ndarray:
    """Covariates by descending |corr to Y|, ties by lowest index."""
    return np.lexsort((np.arange(ds.d), -ds.abs_corr_y))


def base_policy(theta: np.ndarray, ds: Dataset, remaining: int, suggested: np.ndarray) -> Action:
    """Rollout base heuristic: next unsuggested covariate by |corr to Y|; never tutors.

    Once every covariate has been suggested it falls back to the cheapest
    near-no-op repeat (see _fallback_actions).
    """
    for i in base_order(ds):
        if not suggested[i]:
            return int(i)
    return int(_fallback_actions(np.asarray(theta, dtype=bool)[None, :], ds)[0])


def _sorted_desc(ds: Dataset, idx: tuple[int, ...]) -> np.ndarray:
    arr = np.array(idx, dtype=int)
    if arr.size == 0:
        return arr
    return arr[np.lexsort((arr, -ds.abs_corr_y[arr]))]


def _fallback_actions(models: np.ndarray, ds: Dataset) -> np.ndarray:
    """Per-particle action once everything has been suggested.

    Priority: repair a missing independent; repair an absent collinear pick;
    otherwise repeat the best included collinear (cost-neutral under the
    class-distance selection cost regardless of learner type).
    """
    R = models.shape[0]
    out = np.full(R, -1, dtype=int)
    ind_sorted = _sorted_desc(ds, ds.independent_idx)
    col_sorted = _sorted_desc(ds, ds.collinear_idx)
    done = np.zeros(R, dtype=bool)
    if ind_sorted.size:
        excl = ~models[:, ind_sorted]
        has = excl.any(axis=1)
        out[has] = ind_sorted[excl.argmax(axis=1)[has]]
        done |= has
    if col_sorted.size:
        inc = models[:, col_sorted]
        inc_any = inc.any(axis=1)
        sel = ~done & ~inc_any
        out[sel] = col_sorted[(~inc).argmax(axis=1)[sel]]
        sel2 = ~done & inc_any
        out[sel2] = col_sorted[inc.argmax(axis=1)[sel2]]
        done |= sel | sel2
    if not done.all():
        out[~done] = ind_sorted[0]
    return out


def manipulative_teacher(theta: np.ndarray, ds: Dataset, step: int) -> Action | None:
    """Scripted teacher: each independent once (by |corr to Y|), one collinear, stop."""
    script = list(_sorted_desc(ds, ds.independent_idx))
    col_sorted = _sorted_desc(ds, ds.collinear_idx)
    if col_sorted.size:
        script.append(col_sorted[0])
    if step < len(script):
        return int(script[step])
    return None


def random_teacher(ds: Dataset, rng: np.random.Generator) -> Action:
    """Uniform over the d suggestions and the tutor action."""
    k = int(rng.integers(0, ds.d + 1))
    return TUTOR if k == ds.d else k


def _selection_cost_batch(models: np.ndarray, ds: Dataset) -> np.ndarray:
    ind = np.zeros(ds.d, dtype=bool)
    ind[list(ds.independent_idx)] = True
    col = np.zeros(ds.d, dtype=bool)
    col[list(ds.collinear_idx)] = True
    missed = (ind & ~models).sum(axis=1)
    ncol = (col & models).sum(axis=1)
    return missed + np.maximum(0, ncol - 1)


def _step_suggest(
    models: np.ndarray,
    enl: np.ndarray,
    actions: np.ndarray,
    ds: Dataset,
    w1: float,
    w2: float,
    w0: float,
    u: np.ndarray,
) -> None:
    """One simulated suggestion step over a batch of particles, in place."""
    phi1 = ds.abs_corr_y[actions]
    phi2 = (ds.abs_corr[actions] * models).max(axis=1)
    score = w1 * phi1 + w0 + np.where(enl, w2 * phi2, 0.0)
    p = 1.0 / (1.0 + np.exp(-score))
    models[np.arange(actions.size), actions] = u < p


def rollout_action(
    belief: Belief,
    theta: np.ndarray,
    t: int,
    ds: Dataset,
    cfg: TeacherConfig,
    rng: np.random.Generator,
    suggested: np.ndarray | None = None,
) -> Action:
    """Pick the candidate action with the lowest mean simulated cost-to-go.

    Each candidate is scored over rollout_samples particles: the learner type
    is drawn from the posterior, weights are fixed at the posterior mean, the
    candidate is applied, and the base policy runs to the lookahead depth
    where the terminal cost is charged. Particles share uniform draws across
    candidates (common random numbers). Ties go to the lowest covariate
    index, with tutoring last.
    """
    if t >= cfg.horizon:
        raise ValueError("rollout_action requires t < horizon")
    if suggested is None:
        suggested = np.zeros(ds.d, dtype=bool)
    horizon_left = cfg.horizon - t
    depth = horizon_left if cfg.lookahead_depth is None else min(cfg.lookahead_depth, horizon_left)

    alpha = posterior_enlightened_prob(belief)
    pw = posterior_mean_weights(belief)
    w1, w2, w0 = pw.w1, pw.w2, belief.grid.w0
    R = cfg.rollout_samples
    enl0 = rng.random(R) < alpha
    tutor_draws = rng.random(R)
    U = rng.random((R, depth))

    aux_costs = (0.0, 0.0)  # (naive, enlightened)
    if cfg.u2 > 0:
        if not cfg.aux_datasets:
            raise ValueError("u2 > 0 requires aux_datasets")
        sim_naive = naive_state(w1=w1, w0=w0)
        sim_enl = enlightened_state(w1=w1, w2=w2, w0=w0)
        aux_costs = (
            sum(selection_cost(unassisted_learn(sim_naive, d), d) for d in cfg.aux_datasets),
            sum(selection_cost(unassisted_learn(sim_enl, d), d) for d in cfg.aux_datasets),
        )

    order_full = base_order(ds)
    best_action: Action | None = None
    best_q = np.inf
    for a in [*range(ds.d), TUTOR]:
        models = np.repeat(np.asarray(theta, dtype=bool)[None, :], R, axis=0)
        enl = enl0.copy()
        sugg = suggested.copy()
        stage = cfg.stage_cost(a) + (depth - 1) * cfg.stage_cost_suggest
        if a == TUTOR:
            enl = enl | (~enl & (tutor_draws < cfg.eta))
        else:
            _step_suggest(models, enl, np.full(R, a), ds, w1, w2, w0, U[:, 0])
            sugg[a] = True
        queue = [int(i) for i in order_full if not sugg[i]]
        for k in range(1, depth):
            if queue:
                act = queue.pop(0)
                sugg[act] = True
                actions = np.full(R, act)
            else:
                actions = _fallback_actions(models, ds)
            _step_suggest(models, enl, actions, ds, w1, w2, w0, U[:, k])
        term = cfg.u1 * _selection_cost_batch(models, ds) + cfg.u2 * np.where(
            enl, aux_costs[1], aux_costs[0]
        )
        q = stage + float(term.mean())
        if q < best_q:
            best_q = q
            best_action = a
    return best_action


@dataclass
class StepRecord:
    t: int  # 1-based step index
    action: Action
    response: int
    model: np.ndarray
    true_state: str
    posterior_enlightened: float
    cum_cost: float


@dataclass
class EpisodeLog:
    teacher: str
    horizon: int
    steps: list[StepRecord]
    theta_final: np.ndarray
    final_state: InnerState
    stage_cost_total: float
    terminal_current: float  # unweighted selection cost on the teaching dataset
    terminal_future: float  # unweighted aux-dataset sum
    terminal_cost: float  # u1/u2-weighted
    manipulation: int
    hamming_to_optimal: int
    final_belief: Belief | None = None

    @property
    def total_cost(self) -> float:
        return self.stage_cost_total + self.terminal_cost

    def action_label(self, action: Action) -> str:
        return "tutor" if action == TUTOR else str(int(action) + 1)

    def csv_rows(self) -> list[str]:
        rows = ["t,action,response,posterior_enlightened,true_state,cum_cost"]
        for s in self.steps:
            rows.append(
                f"{s.t},{self.action_label(s.action)},{s.response},"
                f"{s.posterior_enlightened:.17g},{s.true_state},{s.cum_cost:.17g}"
            )
        return rows

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.csv_rows()) + "\n")


def run_episode(
    teacher: Teacher,
    learner: LearnerSim,
    ds: Dataset,
    cfg: TeacherConfig,
    rng: np.random.Generator,
) -> EpisodeLog:
    """Play one teaching episode from a fresh learner.

    Per step: the teacher acts, the learner responds against its pre-update
    model, the inner state transitions, and the belief is conditioned on the
    response. The belief is tracked for every teacher but only steers the
    rollout one. The manipulative teacher ends the episode when its script
    runs out; the log then stays shorter than the horizon.
    """
    learner_rng, teacher_rng, planner_rng = rng.spawn(3)
    belief = belief_init(cfg.grid, cfg.eta)
    suggested = np.zeros(ds.d, dtype=bool)
    steps: list[StepRecord] = []
    cum = 0.0
    for t in range(cfg.horizon):
        if teacher is Teacher.ROLLOUT:
            action: Action | None = rollout_action(
                belief, learner.model, t, ds, cfg, planner_rng, suggested
            )
        elif teacher is Teacher.MANIPULATIVE:
            action = manipulative_teacher(learner.model, ds, t)
        else:
            action = random_teacher(ds, teacher_rng)
        if action is None:
            break
        phi = None if action == TUTOR else feature_map(int(action), learner.model, ds)
        b, new_model = respond(learner, action, ds, learner_rng)
        learner.model = new_model
        learner.state = transition(
            learner.state, action, cfg.eta, learner_rng, learner.enlightened_w2
        )
        belief = belief_update(belief, action, b, phi)
        if action != TUTOR:
            suggested[int(action)] = True
        cum += cfg.stage_cost(action)
        steps.append(
            StepRecord(
                t=t + 1,
                action=action,
                response=b,
                model=learner.model.copy(),
                true_state=learner.state.kind.value,
                posterior_enlightened=posterior_enlightened_prob(belief),
                cum_cost=cum,
            )
        )
    current, future = terminal_cost_parts(learner.model, learner.state, ds, cfg)
    theta_star = optimal_model(ds)
    return EpisodeLog(
        teacher=teacher.value,
        horizon=cfg.horizon,
        steps=steps,
        theta_final=learner.model.copy(),
        final_state=learner.state,
        stage_cost_total=cum,
        terminal_current=current,
        terminal_future=future,
        terminal_cost=cfg.u1 * current + cfg.u2 * future,
        manipulation=manipulation_level(learner.state, ds, learner.model),
        hamming_to_optimal=hamming(learner.model, theta_star),
        final_belief=belief,
    )
