"""Drivers for the three variable-selection experiments and their outputs.

Experiment 1: current-dataset-only terminal cost (u = (1, 0)); rollout vs the
scripted manipulative teacher. Experiment 2: unassisted learning cost of the
two fixed learner types on held-out datasets. Experiment 3: scalarized cost
(u = (0.5, 0.5)) with the aux-dataset estimate of future unassisted cost;
rollout vs manipulative vs random.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .datagen import Dataset, DatasetSpec, generate_dataset, selection_cost
from .learner import (
    DEFAULT_W0,
    DEFAULT_W1,
    DEFAULT_W2_ENLIGHTENED,
    Kind,
    LearnerSim,
    enlightened_state,
    naive_state,
    unassisted_learn,
)
from .planner import EpisodeLog, Teacher, TeacherConfig, run_episode

# offsets for deriving dataset seeds from the base seed
_TEACH_SEED = 10_000
_AUX_SEED = 20_000
_EVAL_SEED = 30_000


@dataclass(frozen=True)
class ExperimentSetup:
    """Everything a seeded experiment run needs besides the experiment id."""

    dataset: DatasetSpec = DatasetSpec()
    teacher: TeacherConfig = TeacherConfig()
    learner_w1: float = DEFAULT_W1
    learner_w0: float = DEFAULT_W0
    learner_w2: float = DEFAULT_W2_ENLIGHTENED
    n_seeds: int = 10
    base_seed: int = 0
    n_aux: int = 10
    n_eval: int = 10

    def teaching_spec(self, seed_index: int) -> DatasetSpec:
        return replace(self.dataset, seed=self.base_seed + _TEACH_SEED + seed_index)

    def aux_datasets(self) -> tuple[Dataset, ...]:
        return tuple(
            generate_dataset(replace(self.dataset, seed=self.base_seed + _AUX_SEED + i))
            for i in range(self.n_aux)
        )

    def eval_datasets(self) -> tuple[Dataset, ...]:
        return tuple(
            generate_dataset(replace(self.dataset, seed=self.base_seed + _EVAL_SEED + i))
            for i in range(self.n_eval)
        )


@dataclass
class TeacherArm:
    """Per-teacher results across seeds, padded to the horizon."""

    teacher: str
    cum_cost: np.ndarray  # (n_seeds, T) running stage cost, carried forward
    posterior: np.ndarray  # (n_seeds, T)
    total_cost: np.ndarray  # (n_seeds,) stage + weighted terminal
    final_selection_cost: np.ndarray  # (n_seeds,)
    manipulation: np.ndarray  # (n_seeds,)
    switched: np.ndarray  # (n_seeds,) true final state is enlightened
    logs: list[EpisodeLog] = field(default_factory=list)

    def mean_ci(self, arr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        mean = arr.mean(axis=0)
        n = arr.shape[0]
        se = arr.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros_like(mean)
        return mean, 1.96 * se


@dataclass
class ExperimentSummary:
    experiment: int
    horizon: int
    n_seeds: int
    arms: dict[str, TeacherArm] = field(default_factory=dict)
    # experiment 2 only: per-eval-dataset unassisted costs
    eval_costs_naive: np.ndarray | None = None
    eval_costs_enlightened: np.ndarray | None = None

    def write_curves_csv(self, path: str | Path) -> None:
        rows = ["experiment,teacher,seed,t,cum_cost,posterior_enlightened"]
        for name, arm in sorted(self.arms.items()):
            for s in range(arm.cum_cost.shape[0]):
                for t in range(arm.cum_cost.shape[1]):
                    rows.append(
                        f"{self.experiment},{name},{s},{t + 1},"
                        f"{arm.cum_cost[s, t]:.12g},{arm.posterior[s, t]:.12g}"
                    )
        Path(path).write_text("\n".join(rows) + "\n")

    def write_means_csv(self, path: str | Path) -> None:
        rows = [
            "experiment,teacher,t,mean_cum_cost,ci_cum_cost,mean_posterior,ci_posterior"
        ]
        for name, arm in sorted(self.arms.items()):
            mc, cc = arm.mean_ci(arm.cum_cost)
            mp, cp = arm.mean_ci(arm.posterior)
            for t in range(mc.size):
                rows.append(
                    f"{self.experiment},{name},{t + 1},{mc[t]:.12g},{cc[t]:.12g},"
                    f"{mp[t]:.12g},{cp[t]:.12g}"
                )
        Path(path).write_text("\n".join(rows) + "\n")

    def write_eval_csv(self, path: str | Path) -> None:
        rows = ["dataset_index,learner_type,unassisted_cost"]
        for i, c in enumerate(self.eval_costs_naive):
            rows.append(f"{i},naive,{c:.12g}")
        for i, c in enumerate(self.eval_costs_enlightened):
            rows.append(f"{i},enlightened,{c:.12g}")
        Path(path).write_text("\n".join(rows) + "\n")

    def to_report(self) -> dict:
        rep: dict = {"experiment": self.experiment, "n_seeds": self.n_seeds, "horizon": self.horizon}
        teachers = {}
        for name, arm in sorted(self.arms.items()):
            mt, ct = arm.mean_ci(arm.total_cost[:, None])
            teachers[name] = {
                "mean_total_cost": float(mt[0]),
                "ci_total_cost": float(ct[0]),
                "mean_final_selection_cost": float(arm.final_selection_cost.mean()),
                "mean_final_posterior": float(arm.posterior[:, -1].mean()),
                "mean_manipulation": float(arm.manipulation.mean()),
                "switch_rate": float(arm.switched.mean()),
            }
        if teachers:
            rep["teachers"] = teachers
        if self.eval_costs_naive is not None:
            rep["unassisted"] = {
                "naive_mean": float(self.eval_costs_naive.mean()),
                "naive_stdev": float(self.eval_costs_naive.std(ddof=1)),
                "enlightened_mean": float(self.eval_costs_enlightened.mean()),
                "enlightened_stdev": float(self.eval_costs_enlightened.std(ddof=1)),
            }
        return rep


def _pad_curves(log: EpisodeLog, horizon: int) -> tuple[np.ndarray, np.ndarray]:
    """Carry short episodes flat to the horizon for cross-seed aggregation."""
    cum = np.zeros(horizon)
    post = np.zeros(horizon)
    last_c, last_p = 0.0, 0.0
    by_t = {s.t: s for s in log.steps}
    for t in range(1, horizon + 1):
        if t in by_t:
            last_c, last_p = by_t[t].cum_cost, by_t[t].posterior_enlightened
        cum[t - 1] = last_c
        post[t - 1] = last_p
    return cum, post


def _run_arm(
    teacher: Teacher, setup: ExperimentSetup, cfg: TeacherConfig, experiment: int
) -> TeacherArm:
    n, T = setup.n_seeds, cfg.horizon
    arm = TeacherArm(
        teacher=teacher.value,
        cum_cost=np.zeros((n, T)),
        posterior=np.zeros((n, T)),
        total_cost=np.zeros(n),
        final_selection_cost=np.zeros(n),
        manipulation=np.zeros(n),
        switched=np.zeros(n, dtype=bool),
    )
    teacher_idx = list(Teacher).index(teacher)
    for s in range(n):
        ds = generate_dataset(setup.teaching_spec(s))
        learner = LearnerSim.fresh(
            ds.d,
            state=naive_state(w1=setup.learner_w1, w0=setup.learner_w0),
            rng_seed=s,
            enlightened_w2=setup.learner_w2,
        )
        rng = np.random.default_rng([setup.base_seed, experiment, teacher_idx, s])
        log = run_episode(teacher, learner, ds, cfg, rng)
        arm.logs.append(log)
        arm.cum_cost[s], arm.posterior[s] = _pad_curves(log, T)
        arm.total_cost[s] = log.total_cost
        arm.final_selection_cost[s] = log.terminal_current
        arm.manipulation[s] = log.manipulation
        arm.switched[s] = log.final_state.kind is Kind.ENLIGHTENED
    return arm


def run_experiment(experiment: int, setup: ExperimentSetup) -> ExperimentSummary:
    """Run one of the three experiments and aggregate curves across seeds."""
    if experiment not in (1, 2, 3):
        raise ValueError(f"unknown experiment id {experiment}")
    if experiment == 2:
        evals = setup.eval_datasets()
        nav = naive_state(w1=setup.learner_w1, w0=setup.learner_w0)
        enl = enlightened_state(w1=setup.learner_w1, w2=setup.learner_w2, w0=setup.learner_w0)
        return ExperimentSummary(
            experiment=2,
            horizon=setup.teacher.horizon,
            n_seeds=setup.n_seeds,
            eval_costs_naive=np.array(
                [selection_cost(unassisted_learn(nav, d), d) for d in evals]
            ),
            eval_costs_enlightened=np.array(
                [selection_cost(unassisted_learn(enl, d), d) for d in evals]
            ),
        )

    if experiment == 1:
        cfg = replace(setup.teacher, u1=1.0, u2=0.0, aux_datasets=())
        teachers = [Teacher.ROLLOUT, Teacher.MANIPULATIVE]
    else:
        cfg = replace(setup.teacher, u1=0.5, u2=0.5, aux_datasets=setup.aux_datasets())
        teachers = [Teacher.ROLLOUT, Teacher.MANIPULATIVE, Teacher.RANDOM]
    summary = ExperimentSummary(
        experiment=experiment, horizon=cfg.horizon, n_seeds=setup.n_seeds
    )
    for teacher in teachers:
        summary.arms[teacher.value] = _run_arm(teacher, setup, cfg, experiment)
    return summary
