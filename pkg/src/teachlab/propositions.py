"""Brute-force certificates on a tiny instance for the two teaching claims.

Claim one (impossibility): if the learner's inner state can never change,
every teacher policy is manipulative or reaches a suboptimal model on some
branch. Claim two (education): once tutoring can switch the inner state,
some policy reaches the optimal model non-manipulatively with probability at
least the switch probability, and the resulting state transfers to a second
structurally identical dataset.

Both are certified by exhaustive enumeration of teacher action sequences
against a learner whose accept/reject decisions are deterministic (score
thresholded at zero), which makes the game tree finite: the only branching
left is whether a tutoring step fires the switch.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .datagen import Dataset, DatasetSpec, generate_dataset, optimal_model
from .learner import (
    TUTOR,
    Action,
    InnerState,
    decision_score,
    enlightened_state,
    manipulation_level,
    naive_state,
)
from .datagen import feature_map


@dataclass(frozen=True)
class TinyInstance:
    """Desk-size instance: 1 independent + 2 collinear covariates."""

    spec: DatasetSpec = DatasetSpec(n_samples=200, n_independent=1, n_collinear=2, seed=97)
    horizon: int = 6
    # weights for the deterministic learner; w2 strong enough that the
    # thresholded enlightened learner rejects a second collinear here
    w1: float = 12.0
    w0: float = -1.0
    w2_enlightened: float = -12.0

    def __post_init__(self):
        if self.spec.d > 4 or self.horizon > 6:
            raise ValueError("instance too large for exhaustive policy enumeration")

    def naive(self) -> InnerState:
        return naive_state(w1=self.w1, w0=self.w0)

    def enlightened(self) -> InnerState:
        return enlightened_state(w1=self.w1, w2=self.w2_enlightened, w0=self.w0)


def map_respond(state: InnerState, action: int, model: np.ndarray, ds: Dataset) -> int:
    """Thresholded accept decision: accept iff the preference score is >= 0."""
    phi = feature_map(action, model, ds)
    return int(decision_score(state, phi) >= 0.0)


def _play_deterministic(
    instance: TinyInstance, ds: Dataset, actions: tuple[Action, ...], switch_all: bool
) -> tuple[np.ndarray, bool]:
    """Play a sequence with every tutor either always or never switching."""
    model = np.zeros(ds.d, dtype=np.int8)
    enlightened = False
    for a in actions:
        state = instance.enlightened() if enlightened else instance.naive()
        if a == TUTOR:
            if switch_all:
                enlightened = True
        else:
            model[a] = map_respond(state, a, model, ds)
    return model, enlightened


def _success_probability(
    instance: TinyInstance,
    ds: Dataset,
    actions: tuple[Action, ...],
    eta: float,
    theta_star: np.ndarray,
    enl_unassisted_ok: bool,
) -> float:
    """Exact probability that a sequence ends optimal and non-manipulative.

    Branches only at tutor steps (switch fires with probability eta); the
    learner's decisions are deterministic given its current type.
    """

    def rec(i: int, model: np.ndarray, enlightened: bool, p: float) -> float:
        if i == len(actions):
            ok = enlightened and enl_unassisted_ok and bool((model == theta_star).all())
            return p if ok else 0.0
        a = actions[i]
        if a == TUTOR:
            if enlightened:
                return rec(i + 1, model, True, p)
            total = 0.0
            if eta > 0.0:
                total += rec(i + 1, model, True, p * eta)
            if eta < 1.0:
                total += rec(i + 1, model, False, p * (1.0 - eta))
            return total
        state = instance.enlightened() if enlightened else instance.naive()
        nxt = model.copy()
        nxt[a] = map_respond(state, a, nxt, ds)
        return rec(i + 1, nxt, enlightened, p)

    return rec(0, np.zeros(ds.d, dtype=np.int8), False, 1.0)


@dataclass
class ImpossibilityReport:
    n_policies: int
    n_optimal: int
    n_non_manipulative: int
    n_optimal_and_non_manipulative: int
    naive_manipulation_toward_target: int
    passed: bool


@dataclass
class EducationReport:
    eta: float
    premise_holds: bool
    n_policies: int
    best_success_probability: float
    witness: list[str] | None
    transfer_ok: bool | None
    passed: bool


@dataclass
class PropositionReport:
    instance_d: int
    horizon: int
    impossibility: ImpossibilityReport
    education: EducationReport
    education_zero_eta: EducationReport
    extras: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.impossibility.passed and self.education.passed and self.education_zero_eta.passed

    def to_dict(self) -> dict:
        return {
            "instance_d": self.instance_d,
            "horizon": self.horizon,
            "impossibility": vars(self.impossibility),
            "education": {**vars(self.education)},
            "education_zero_eta": {**vars(self.education_zero_eta)},
            "extras": self.extras,
            "passed": self.passed,
        }


def _labels(actions: tuple[Action, ...]) -> list[str]:
    return ["tutor" if a == TUTOR else f"x{a + 1}" for a in actions]


def check_impossibility(instance: TinyInstance) -> ImpossibilityReport:
    """Enumerate every never-tutor sequence against the deterministic naive learner."""
    ds = generate_dataset(instance.spec)
    theta_star = optimal_model(ds)
    naive = instance.naive()
    manip_naive = manipulation_level(naive, ds, theta_star)
    n_optimal = 0
    n_non_manip = 0
    n_both = 0
    n_policies = 0
    for actions in itertools.product(range(ds.d), repeat=instance.horizon):
        n_policies += 1
        model, _ = _play_deterministic(instance, ds, actions, switch_all=False)
        optimal = bool((model == theta_star).all())
        non_manip = manipulation_level(naive, ds, model) == 0
        n_optimal += optimal
        n_non_manip += non_manip
        n_both += optimal and non_manip
    return ImpossibilityReport(
        n_policies=n_policies,
        n_optimal=n_optimal,
        n_non_manipulative=n_non_manip,
        n_optimal_and_non_manipulative=n_both,
        naive_manipulation_toward_target=manip_naive,
        passed=n_both == 0 and manip_naive > 0,
    )


def check_education(instance: TinyInstance, eta: float) -> EducationReport:
    """Search tutoring policies for an optimal non-manipulative outcome.

    With eta = 0 the premise (an enlightened state is reachable) fails and
    the report says so without failing. Otherwise the best sequence must
    succeed with probability >= eta, and the witness's final state must be
    unassisted-optimal on a second dataset drawn from the same spec.
    """
    ds = generate_dataset(instance.spec)
    theta_star = optimal_model(ds)
    enl = instance.enlightened()
    enl_unassisted_ok = manipulation_level(enl, ds, theta_star) == 0
    if eta == 0.0:
        return EducationReport(
            eta=0.0,
            premise_holds=False,
            n_policies=0,
            best_success_probability=0.0,
            witness=None,
            transfer_ok=None,
            passed=True,  # unsatisfied premise, nothing to disprove
        )
    actionspace: list[Action] = [*range(ds.d), TUTOR]
    best_p = 0.0
    witness: tuple[Action, ...] | None = None
    n_policies = 0
    for actions in itertools.product(actionspace, repeat=instance.horizon):
        n_policies += 1
        p = _success_probability(instance, ds, actions, eta, theta_star, enl_unassisted_ok)
        if p > best_p:
            best_p, witness = p, actions
    transfer_ok = None
    if witness is not None:
        ds2 = generate_dataset(
            DatasetSpec(**{**instance.spec.to_dict(), "seed": instance.spec.seed + 1})
        )
        transfer_ok = manipulation_level(enl, ds2, optimal_model(ds2)) == 0
    passed = best_p >= eta - 1e-12 and bool(transfer_ok)
    return EducationReport(
        eta=eta,
        premise_holds=True,
        n_policies=n_policies,
        best_success_probability=best_p,
        witness=_labels(witness) if witness else None,
        transfer_ok=transfer_ok,
        passed=passed,
    )


def verify_propositions(
    instance: TinyInstance | None = None, eta: float = 1.0
) -> PropositionReport:
    """Run all certificates on the tiny instance."""
    instance = instance or TinyInstance()
    ds = generate_dataset(instance.spec)
    return PropositionReport(
        instance_d=ds.d,
        horizon=instance.horizon,
        impossibility=check_impossibility(instance),
        education=check_education(instance, eta),
        education_zero_eta=check_education(instance, 0.0),
    )
