"""Teaching an online meta-learner a good network initialization.

The learner runs follow-the-meta-leader: after each incoming sine-regression
task it takes warm-started first-order meta-gradient steps on the average
post-adaptation test loss of its task pool. The teacher owns the task pool
order; the one-step-lookahead teacher picks the unseen task whose
meta-gradient best trades step magnitude (difficulty) against alignment with
the direction toward the target initialization (usefulness).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .metanet import NetParams, init_params, inner_adapt, loss_and_grad


@dataclass(frozen=True)
class SineTask:
    """One regression task y = amplitude * sin(x + phase), noise-free."""

    amplitude: float
    phase: float
    x_train: np.ndarray
    y_train: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray

    def f(self, x: np.ndarray) -> np.ndarray:
        return self.amplitude * np.sin(np.asarray(x) + self.phase)

    def to_dict(self) -> dict:
        return {
            "amplitude": self.amplitude,
            "phase": self.phase,
            "x_train": self.x_train.tolist(),
            "x_test": self.x_test.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SineTask":
        x_tr = np.asarray(d["x_train"], dtype=float)
        x_te = np.asarray(d["x_test"], dtype=float)
        a, p = float(d["amplitude"]), float(d["phase"])
        return cls(a, p, x_tr, a * np.sin(x_tr + p), x_te, a * np.sin(x_te + p))


@dataclass(frozen=True)
class MetaConfig:
    inner_lr: float = 0.01
    inner_steps: int = 1
    meta_lr: float = 0.01
    meta_steps_per_round: int = 10
    task_batch: int = 100  # >= pool size: deterministic full-pool average
    k_shots: int = 10
    hidden: tuple[int, ...] = (32, 32)
    maml_steps: int = 2000
    maml_batch: int = 10
    maml_lr: float = 0.01
    n_train_tasks: int = 100
    n_rounds: int = 50
    two_shot_grid: int = 100

    def __post_init__(self):
        if self.inner_lr < 0 or self.meta_lr < 0:
            raise ValueError("learning rates must be non-negative")
        if self.inner_steps < 1:
            raise ValueError("inner_steps must be >= 1")

    @property
    def widths(self) -> tuple[int, ...]:
        return (1, *self.hidden, 1)


def sample_task(rng: np.random.Generator, k_shots: int) -> SineTask:
    amplitude = float(rng.uniform(0.1, 5.0))
    phase = float(rng.uniform(0.0, np.pi))
    x_tr = rng.uniform(-5.0, 5.0, size=k_shots)
    x_te = rng.uniform(-5.0, 5.0, size=k_shots)
    return SineTask(
        amplitude=amplitude,
        phase=phase,
        x_train=x_tr,
        y_train=amplitude * np.sin(x_tr + phase),
        x_test=x_te,
        y_test=amplitude * np.sin(x_te + phase),
    )


def sample_tasks(n: int, rng: np.random.Generator, k_shots: int = 10) -> list[SineTask]:
    return [sample_task(rng, k_shots) for _ in range(n)]


def save_tasks(tasks: list[SineTask], path: str | Path) -> None:
    import json

    Path(path).write_text(json.dumps([t.to_dict() for t in tasks]) + "\n")


def load_tasks(path: str | Path) -> list[SineTask]:
    import json

    return [SineTask.from_dict(d) for d in json.loads(Path(path).read_text())]


def task_meta_grad(params: NetParams, task: SineTask, cfg: MetaConfig) -> tuple[float, np.ndarray]:
    """Post-adaptation test loss and its first-order meta-gradient."""
    adapted = inner_adapt(params, task.x_train, task.y_train, cfg.inner_lr, cfg.inner_steps)
    return loss_and_grad(adapted, task.x_test, task.y_test)


def meta_loss(params: NetParams, tasks: list[SineTask], cfg: MetaConfig) -> float:
    """Mean post-adaptation test loss over tasks."""
    if not tasks:
        raise ValueError("meta_loss needs at least one task")
    total = 0.0
    for task in tasks:
        adapted = inner_adapt(params, task.x_train, task.y_train, cfg.inner_lr, cfg.inner_steps)
        loss, _ = loss_and_grad(adapted, task.x_test, task.y_test)
        total += loss
    return total / len(tasks)


def _meta_step(params: NetParams, batch: list[SineTask], cfg: MetaConfig, lr: float) -> NetParams:
    grad = np.zeros_like(params.flat)
    for task in batch:
        _, g = task_meta_grad(params, task, cfg)
        grad += g
    grad /= len(batch)
    return NetParams(params.flat - lr * grad, params.widths)


def maml_train(tasks: list[SineTask], cfg: MetaConfig, rng: np.random.Generator) -> NetParams:
    """Offline first-order meta-training over the full task set.

    Returns the final initialization, used as the teaching target.
    """
    params = init_params(cfg.widths, rng)
    for _ in range(cfg.maml_steps):
        idx = rng.choice(len(tasks), size=min(cfg.maml_batch, len(tasks)), replace=False)
        params = _meta_step(params, [tasks[i] for i in idx], cfg, cfg.maml_lr)
        if not np.all(np.isfinite(params.flat)):
            raise FloatingPointError("meta-training diverged (non-finite parameters)")
    return params


def ftml_round(
    params: NetParams, pool: list[SineTask], cfg: MetaConfig, rng: np.random.Generator
) -> NetParams:
    """Approximate the follow-the-meta-leader argmin with warm-started steps."""
    if not pool:
        raise ValueError("ftml_round needs a non-empty task pool")
    for _ in range(cfg.meta_steps_per_round):
        idx = rng.choice(len(pool), size=min(cfg.task_batch, len(pool)), replace=False)
        params = _meta_step(params, [pool[i] for i in idx], cfg, cfg.meta_lr)
    if not np.all(np.isfinite(params.flat)):
        raise FloatingPointError("follow-the-meta-leader update diverged")
    return params


def lookahead_score(g: np.ndarray, direction_to_target: np.ndarray, lr: float) -> float:
    """One-step expansion of the squared distance change after a step -lr*g.

    direction_to_target is theta_t - theta_target; the score is the
    difficulty term lr^2 ||g||^2 minus twice the usefulness term
    lr <g, theta_t - theta_target>.
    """
    return float(lr * lr * (g @ g) - 2.0 * lr * (g @ direction_to_target))


def teacher_select_task(
    params: NetParams, target: NetParams, candidates: list[SineTask], cfg: MetaConfig
) -> int:
    """Index of the candidate with the lowest one-step-lookahead score."""
    if not candidates:
        raise ValueError("no candidate tasks")
    direction = params.flat - target.flat
    best_i, best_s = 0, np.inf
    for i, task in enumerate(candidates):
        _, g = task_meta_grad(params, task, cfg)
        s = lookahead_score(g, direction, cfg.meta_lr)
        if s < best_s:
            best_i, best_s = i, s
    return best_i


def two_shot_loss(
    params: NetParams, heldout: SineTask, cfg: MetaConfig, rng: np.random.Generator
) -> float:
    """Adapt on two sampled points of the held-out task, score on a dense grid."""
    x2 = rng.uniform(-5.0, 5.0, size=2)
    y2 = heldout.f(x2)
    return _two_shot_fixed(params, heldout, x2, cfg)


def _two_shot_fixed(params: NetParams, task: SineTask, x2: np.ndarray, cfg: MetaConfig) -> float:
    adapted = inner_adapt(params, x2, task.f(x2), cfg.inner_lr, cfg.inner_steps)
    grid = np.linspace(-5.0, 5.0, cfg.two_shot_grid)
    loss, _ = loss_and_grad(adapted, grid, task.f(grid))
    return loss


@dataclass
class MetaCurves:
    """Per-round distance and two-shot loss for each teacher and seed."""

    n_rounds: int
    teachers: tuple[str, ...] = ("lookahead", "random")
    distance: dict[str, np.ndarray] = field(default_factory=dict)  # (n_seeds, n_rounds)
    two_shot: dict[str, np.ndarray] = field(default_factory=dict)

    def write_csv(self, path: str | Path) -> None:
        rows = ["round,teacher,seed,distance,two_shot_loss"]
        for teacher in self.teachers:
            d, ts = self.distance[teacher], self.two_shot[teacher]
            for s in range(d.shape[0]):
                for r in range(d.shape[1]):
                    rows.append(f"{r + 1},{teacher},{s},{d[s, r]:.12g},{ts[s, r]:.12g}")
        Path(path).write_text("\n".join(rows) + "\n")

    def to_report(self) -> dict:
        rep = {}
        for teacher in self.teachers:
            rep[teacher] = {
                "final_distance_mean": float(self.distance[teacher][:, -1].mean()),
                "final_two_shot_mean": float(self.two_shot[teacher][:, -1].mean()),
            }
        return rep


def save_params(params: NetParams, path: str | Path) -> None:
    import json

    Path(path).write_text(
        json.dumps({"widths": list(params.widths), "flat": params.flat.tolist()}) + "\n"
    )


def load_params(path: str | Path) -> NetParams:
    import json

    d = json.loads(Path(path).read_text())
    return NetParams(np.asarray(d["flat"], dtype=float), tuple(d["widths"]))


def run_meta_experiment(
    cfg: MetaConfig,
    n_seeds: int = 8,
    base_seed: int = 0,
    target: NetParams | None = None,
    cache_dir: str | Path | None = None,
) -> MetaCurves:
    """Teach the online meta-learner with the lookahead vs a random teacher.

    Per seed: meta-train the target initialization offline on the full task
    set, then run both teachers for n_rounds from the same starting
    parameters, recording the distance to the target and the two-shot loss
    after every round. The two-shot loss is averaged over a per-seed bank of
    held-out tasks with fixed adaptation points shared by both teachers, so
    the arm comparison is paired.
    """
    curves = MetaCurves(n_rounds=cfg.n_rounds)
    for teacher in curves.teachers:
        curves.distance[teacher] = np.zeros((n_seeds, cfg.n_rounds))
        curves.two_shot[teacher] = np.zeros((n_seeds, cfg.n_rounds))

    n_heldout = 10
    for s in range(n_seeds):
        task_rng = np.random.default_rng([base_seed, s, 0])
        tasks = sample_tasks(cfg.n_train_tasks, task_rng, cfg.k_shots)
        bank = [
            (task, task_rng.uniform(-5.0, 5.0, size=2))
            for task in sample_tasks(n_heldout, task_rng, cfg.k_shots)
        ]
        theta_star = target
        if theta_star is None:
            cache = Path(cache_dir) / f"meta_target_seed{s}.json" if cache_dir else None
            if cache is not None and cache.exists():
                theta_star = load_params(cache)
            else:
                theta_star = maml_train(tasks, cfg, np.random.default_rng([base_seed, s, 1]))
                if cache is not None:
                    save_params(theta_star, cache)
        # both teachers start the learner from the same initialization the
        # offline meta-training started from
        start = init_params(cfg.widths, np.random.default_rng([base_seed, s, 1]))

        for ti, teacher in enumerate(curves.teachers):
            params = start.copy()
            pool: list[SineTask] = []
            unseen = list(range(len(tasks)))
            learn_rng = np.random.default_rng([base_seed, s, 2 + ti])
            for r in range(cfg.n_rounds):
                if teacher == "lookahead":
                    pick = teacher_select_task(
                        params, theta_star, [tasks[i] for i in unseen], cfg
                    )
                else:
                    pick = int(learn_rng.integers(len(unseen)))
                pool.append(tasks[unseen.pop(pick)])
                params = ftml_round(params, pool, cfg, learn_rng)
                curves.distance[teacher][s, r] = float(
                    np.linalg.norm(params.flat - theta_star.flat)
                )
                curves.two_shot[teacher][s, r] = float(
                    np.mean([_two_shot_fixed(params, task, x2, cfg) for task, x2 in bank])
                )
    return curves
