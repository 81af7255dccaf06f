"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. Tolerances and runtime caps are pinned here; configurations are the
package defaults.
"""

import time
from contextlib import contextmanager

import numpy as np
import pytest

CRITERIA_SEEN = []


@contextmanager
def criterion(name, runtime_cap=None):
    start = time.time()
    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE {name}: FAIL")
        raise
    elapsed = time.time() - start
    if runtime_cap is not None and elapsed > runtime_cap:
        print(f"\nACCEPTANCE {name}: FAIL (runtime {elapsed:.0f}s > {runtime_cap}s)")
        raise AssertionError(f"{name} exceeded runtime cap: {elapsed:.0f}s > {runtime_cap}s")
    CRITERIA_SEEN.append(name)
    print(f"\nACCEPTANCE {name}: PASS ({elapsed:.1f}s)")


@pytest.fixture(scope="module")
def default_setup():
    from teachlab.experiments import ExperimentSetup

    return ExperimentSetup()  # 10 seeds, base seed 0, paper-shaped datasets


def test_experiment1_ordering(default_setup):
    """Manipulative teaching is cost-optimal for the current dataset."""
    from teachlab.experiments import run_experiment

    with criterion("experiment-1 ordering", runtime_cap=300):
        summary = run_experiment(1, default_setup)
        rollout = summary.arms["rollout"]
        manip = summary.arms["manipulative"]
        assert manip.total_cost.mean() <= rollout.total_cost.mean()
        good_seeds = int((rollout.final_selection_cost <= 1.0).sum())
        assert good_seeds >= 8, f"rollout taught well in only {good_seeds}/10 seeds"


def test_experiment2_gap(default_setup):
    """Enlightened unassisted cost at most half the naive one."""
    from teachlab.experiments import run_experiment

    with criterion("experiment-2 gap", runtime_cap=60):
        summary = run_experiment(2, default_setup)
        naive = summary.eval_costs_naive.mean()
        enl = summary.eval_costs_enlightened.mean()
        assert enl <= 0.5 * naive, f"enlightened {enl} vs naive {naive}"


def test_experiment3_ordering(default_setup):
    """Education beats manipulation and random play under the future-aware cost."""
    from teachlab.experiments import run_experiment

    with criterion("experiment-3 ordering", runtime_cap=600):
        summary = run_experiment(3, default_setup)
        rollout = summary.arms["rollout"]
        assert rollout.total_cost.mean() < summary.arms["manipulative"].total_cost.mean()
        assert rollout.total_cost.mean() < summary.arms["random"].total_cost.mean()
        switched = rollout.switched
        assert switched.any()
        mean_final_alpha = rollout.posterior[switched, -1].mean()
        assert mean_final_alpha >= 0.8, f"final posterior {mean_final_alpha:.3f}"


def test_impossibility_certificate():
    """No never-tutor policy is simultaneously optimal and non-manipulative."""
    from teachlab.propositions import TinyInstance, check_impossibility

    with criterion("impossibility certificate", runtime_cap=60):
        report = check_impossibility(TinyInstance())
        assert report.n_policies == 3**6  # exhaustive enumeration
        assert report.naive_manipulation_toward_target > 0
        assert report.n_optimal_and_non_manipulative == 0
        assert report.n_optimal > 0  # manipulation alone does reach the optimum


def test_education_certificate():
    """With certain switching, an optimal non-manipulative policy exists and transfers."""
    from teachlab.propositions import TinyInstance, check_education

    with criterion("education certificate"):
        report = check_education(TinyInstance(), eta=1.0)
        assert report.premise_holds
        assert report.best_success_probability == 1.0
        assert report.witness is not None
        assert report.transfer_ok is True


def test_belief_oracle_equivalence():
    """Incremental posterior equals exhaustive enumeration, TV < 1e-10."""
    from teachlab.belief import (
        WeightGrid,
        belief_bruteforce,
        belief_init,
        belief_update,
        total_variation,
    )
    from teachlab.learner import TUTOR

    with criterion("belief oracle equivalence"):
        grid = WeightGrid(w1_values=(0.0, 4.0, 8.0), w2_values=(-8.0, -4.0, -1.0))
        rng = np.random.default_rng(777)
        for _ in range(100):
            length = int(rng.integers(1, 7))
            history = []
            for _ in range(length):
                if rng.random() < 0.35:
                    history.append((TUTOR, int(rng.random() < 0.5), None))
                else:
                    history.append(
                        (int(rng.integers(0, 4)), int(rng.random() < 0.5),
                         (float(rng.random()), float(rng.random())))
                    )
            eta = float(rng.uniform(0.05, 0.95))
            b = belief_init(grid, eta)
            for action, response, phi in history:
                b = belief_update(b, action, response, phi)
            assert total_variation(b, belief_bruteforce(history, grid, eta)) < 1e-10


def test_gradient_check():
    """Backprop vs central differences: per-coordinate relative error < 1e-4."""
    from teachlab.metanet import NetParams, init_params, loss_and_grad

    with criterion("gradient check"):
        h = 1e-5
        for draw in range(10):
            rng = np.random.default_rng([42, draw])
            params = init_params((1, 6, 6, 1), rng)
            x = rng.uniform(-5, 5, 8)
            y = rng.standard_normal(8)
            _, grad = loss_and_grad(params, x, y)
            num = np.zeros_like(grad)
            for i in range(grad.size):
                up, down = params.flat.copy(), params.flat.copy()
                up[i] += h
                down[i] -= h
                lu, _ = loss_and_grad(NetParams(up, params.widths), x, y)
                ld, _ = loss_and_grad(NetParams(down, params.widths), x, y)
                num[i] = (lu - ld) / (2 * h)
            rel = np.abs(grad - num) / np.maximum(np.abs(grad) + np.abs(num), 1e-8)
            assert rel.max() < 1e-4


def test_meta_teaching_ordering():
    """Lookahead task selection beats random on final distance and two-shot loss."""
    from teachlab.metateach import MetaConfig, run_meta_experiment

    with criterion("meta-teaching ordering", runtime_cap=1200):
        curves = run_meta_experiment(MetaConfig(), n_seeds=8, base_seed=0)
        la_d = curves.distance["lookahead"][:, -1].mean()
        rn_d = curves.distance["random"][:, -1].mean()
        la_t = curves.two_shot["lookahead"][:, -1].mean()
        rn_t = curves.two_shot["random"][:, -1].mean()
        assert curves.distance["lookahead"].shape[1] == 50
        assert la_d < rn_d, f"distance {la_d:.3f} !< {rn_d:.3f}"
        assert la_t < rn_t, f"two-shot {la_t:.3f} !< {rn_t:.3f}"


def test_determinism(tmp_path, default_setup):
    """Identical config and seed produce byte-identical CSV outputs."""
    from dataclasses import replace

    from teachlab.experiments import run_experiment
    from teachlab.metateach import MetaConfig, run_meta_experiment

    with criterion("determinism", runtime_cap=600):
        setup = replace(default_setup, n_seeds=3)
        for exp_id, writer in ((1, "write_curves_csv"), (2, "write_eval_csv")):
            paths = []
            for k in range(2):
                summary = run_experiment(exp_id, setup)
                path = tmp_path / f"exp{exp_id}_{k}.csv"
                getattr(summary, writer)(path)
                paths.append(path)
            assert paths[0].read_bytes() == paths[1].read_bytes(), f"experiment {exp_id}"
        small_meta = MetaConfig(hidden=(8, 8), maml_steps=40, n_train_tasks=10, n_rounds=3)
        for k in range(2):
            run_meta_experiment(small_meta, n_seeds=1, base_seed=5).write_csv(
                tmp_path / f"meta_{k}.csv"
            )
        assert (tmp_path / "meta_0.csv").read_bytes() == (tmp_path / "meta_1.csv").read_bytes()


def test_session_replay():
    """[secondary] A scripted live session replays bit-identically offline."""
    from fastapi.testclient import TestClient

    from teachlab.config import config_from_dict
    from teachlab.server import create_app, replay_session

    with criterion("session replay"):
        run_cfg = config_from_dict({
            "dataset": {"n_samples": 200, "n_independent": 3, "n_collinear": 4},
            "teacher": {"horizon": 10, "rollout_samples": 16, "u1": 0.5, "u2": 0.5},
            "n_aux": 6,
        })
        app = create_app(run_cfg)
        with TestClient(app) as client:
            created = client.post("/api/v1/sessions", json={"seed": 20240809}).json()
            sid, state = created["session_id"], created["state"]
            rng = np.random.default_rng(1)
            responses = []
            suggestions = [state["pending"]]
            while state["pending"] is not None:
                b = 1 if state["pending"]["kind"] == "tutor" else int(rng.random() < 0.8)
                responses.append(b)
                r = client.post(
                    f"/api/v1/sessions/{sid}/response",
                    json={"response": b, "step": state["pending"]["step"]},
                )
                state = r.json()["state"]
                if state["pending"] is not None:
                    suggestions.append(state["pending"])
            csv_online = client.get(f"/api/v1/sessions/{sid}/episode.csv").text
            history_online = state["history"]

        engine = replay_session(run_cfg, 20240809, responses)
        assert engine.episode_csv() == csv_online
        assert engine.state_view()["history"] == history_online
        # every posterior value in the UI-facing history matches the CSV
        for row, h in zip(csv_online.strip().splitlines()[1:], history_online):
            assert float(row.split(",")[3]) == h["posterior_enlightened"]
