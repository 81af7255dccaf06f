"""Simulated learner: acceptance policy, inner-state dynamics, unassisted learning.

The learner's inner state is a type tag (naive learners ignore collinearity,
w2 = 0; learners who understand it have w2 < 0) plus preference weights over
the two suggestion statistics. Tutoring is the only action that can switch
the type, and the switch is absorbing.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .datagen import Dataset, feature_map, hamming

# Tutoring action sentinel; covariate suggestions are plain 0-based indices.
TUTOR = "tutor"
Action = int | str

# Default simulated-learner calibration. w1 scales attention to |corr to Y|,
# w2 (negative once the learner understands collinearity) scales attention to
# the max |corr| against already-included covariates, w0 is a fixed bias.
DEFAULT_W1 = 12.0
DEFAULT_W0 = -1.0
DEFAULT_W2_ENLIGHTENED = -8.0


class Kind(enum.Enum):
    NAIVE = "naive"
    ENLIGHTENED = "enlightened"


@dataclass(frozen=True)
class InnerState:
    kind: Kind
    w1: float
    w2: float
    w0: float = DEFAULT_W0

    def __post_init__(self):
        if self.kind is Kind.NAIVE and self.w2 != 0.0:
            raise ValueError("naive inner state requires w2 = 0")
        if self.kind is Kind.ENLIGHTENED and self.w2 >= 0.0:
            raise ValueError("enlightened inner state requires w2 < 0")


def naive_state(w1: float = DEFAULT_W1, w0: float = DEFAULT_W0) -> InnerState:
    return InnerState(kind=Kind.NAIVE, w1=w1, w2=0.0, w0=w0)


def enlightened_state(
    w1: float = DEFAULT_W1, w2: float = DEFAULT_W2_ENLIGHTENED, w0: float = DEFAULT_W0
) -> InnerState:
    return InnerState(kind=Kind.ENLIGHTENED, w1=w1, w2=w2, w0=w0)


@dataclass
class LearnerSim:
    """Single-owner mutable learner: inner state plus current model."""

    state: InnerState
    model: np.ndarray
    rng_seed: int = 0
    enlightened_w2: float = DEFAULT_W2_ENLIGHTENED

    @classmethod
    def fresh(
        cls,
        d: int,
        state: InnerState | None = None,
        rng_seed: int = 0,
        enlightened_w2: float = DEFAULT_W2_ENLIGHTENED,
    ) -> "LearnerSim":
        return cls(
            state=state if state is not None else naive_state(),
            model=np.zeros(d, dtype=np.int8),
            rng_seed=rng_seed,
            enlightened_w2=enlightened_w2,
        )


def sigmoid(x: float) -> float:
    # stable for large |x|
    if x >= 0:
        return 1.0 / (1.0 + np.exp(-x))
    e = np.exp(x)
    return float(e / (1.0 + e))


def decision_score(state: InnerState, phi: tuple[float, float]) -> float:
    return state.w1 * phi[0] + state.w2 * phi[1] + state.w0


def acceptance_prob(state: InnerState, phi: tuple[float, float]) -> float:
    """Probability of accepting a suggestion with statistics phi."""
    return sigmoid(decision_score(state, phi))


def respond(
    learner: LearnerSim, action: Action, ds: Dataset, rng: np.random.Generator
) -> tuple[int, np.ndarray]:
    """Learner feedback bit and the model after it.

    A suggested covariate i is set to the feedback bit (accepting includes it,
    rejecting clears it). Tutoring never touches the model; its feedback bit
    is an uninformative coin.
    """
    if action == TUTOR:
        b = int(rng.random() < 0.5)
        return b, learner.model.copy()
    i = int(action)
    if not 0 <= i < ds.d:
        raise ValueError(f"covariate index {i} out of range for d={ds.d}")
    phi = feature_map(i, learner.model, ds)
    b = int(rng.random() < acceptance_prob(learner.state, phi))
    model = learner.model.copy()
    model[i] = b
    return b, model


def transition(
    state: InnerState,
    action: Action,
    eta: float,
    rng: np.random.Generator,
    enlightened_w2: float = DEFAULT_W2_ENLIGHTENED,
) -> InnerState:
    """Inner-state dynamics: only tutoring can switch naive -> enlightened.

    The switch fires with probability eta, keeps w1 and w0, and installs the
    learner's enlightened w2. The enlightened state is absorbing.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must be a probability")
    if state.kind is Kind.ENLIGHTENED or action != TUTOR:
        return state
    if rng.random() < eta:
        return replace(state, kind=Kind.ENLIGHTENED, w2=enlightened_w2)
    return state


def unassisted_learn(state: InnerState, ds: Dataset) -> np.ndarray:
    """Model the learner builds alone from the whole dataset.

    Deterministic sweep: covariates in descending |corr to Y| (ties by index),
    each included iff its decision score against the partial model is >= 0.
    """
    order = np.lexsort((np.arange(ds.d), -ds.abs_corr_y))
    model = np.zeros(ds.d, dtype=np.int8)
    for i in order:
        phi = feature_map(int(i), model, ds)
        if decision_score(state, phi) >= 0.0:
            model[i] = 1
    return model


def manipulation_level(state: InnerState, ds: Dataset, theta: np.ndarray) -> int:
    """Distance between the unassisted model and the taught one."""
    return hamming(unassisted_learn(state, ds), theta)


def is_enlightened(state: InnerState, ds: Dataset, theta: np.ndarray) -> bool:
    return manipulation_level(state, ds, theta) == 0
