"""Exact posterior over the learner's hidden switch time and preference weights.

The hidden state is (switch time, w1, w2): the learner starts naive and may
switch to the collinearity-aware type at any past tutoring step. Switches can
only happen at tutor actions, so the hypothesis space is (number of past
tutor actions + 1) switch candidates crossed with a finite weight grid, and
the posterior is computed exactly in log space.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .learner import DEFAULT_W0, TUTOR, Action

# Grid bounds chosen to bracket the simulated-learner calibration with margin;
# step 1.0 puts the default true weights exactly on-grid.
DEFAULT_W1_GRID = tuple(np.linspace(0.0, 16.0, 17))
DEFAULT_W2_GRID = tuple(np.linspace(-16.0, -1.0, 16))

NO_SWITCH = -1


def _logsumexp(a: np.ndarray) -> float:
    m = np.max(a)
    if not np.isfinite(m):
        return float(m)
    return float(m + np.log(np.sum(np.exp(a - m))))


@dataclass(frozen=True)
class WeightGrid:
    """Finite grid over (w1, w2) with a prior mass per point; w0 is known."""

    w1_values: tuple[float, ...] = DEFAULT_W1_GRID
    w2_values: tuple[float, ...] = DEFAULT_W2_GRID
    prior: np.ndarray | None = None  # shape (len(w1), len(w2)); uniform if None
    w0: float = DEFAULT_W0

    def __post_init__(self):
        if any(w2 >= 0 for w2 in self.w2_values):
            raise ValueError("w2 grid values must be strictly negative")
        n1, n2 = len(self.w1_values), len(self.w2_values)
        if self.prior is None:
            object.__setattr__(self, "prior", np.full((n1, n2), 1.0 / (n1 * n2)))
        else:
            p = np.asarray(self.prior, dtype=float)
            if p.shape != (n1, n2):
                raise ValueError("prior shape must match (len(w1_values), len(w2_values))")
            if abs(p.sum() - 1.0) > 1e-12 or np.any(p < 0):
                raise ValueError("prior must be a probability mass function")
            object.__setattr__(self, "prior", p)

    @property
    def w1_array(self) -> np.ndarray:
        return np.asarray(self.w1_values)

    @property
    def w2_array(self) -> np.ndarray:
        return np.asarray(self.w2_values)


@dataclass(frozen=True)
class Belief:
    """Joint posterior over (switch step, grid point) after history_len steps.

    Row s of log_w is the switch hypothesis switch_steps[s]; NO_SWITCH in
    first position means the learner is still naive. Rows stay normalized:
    logsumexp(log_w) == 0 after every update.
    """

    grid: WeightGrid
    eta: float
    history_len: int
    switch_steps: tuple[int, ...]  # NO_SWITCH first, then past tutor step indices
    log_w: np.ndarray  # shape (len(switch_steps), n1, n2)

    def normalized(self) -> "Belief":
        total = _logsumexp(self.log_w.ravel())
        if not np.isfinite(total):
            raise ValueError("history impossible under grid")
        return replace(self, log_w=self.log_w - total)

    def weights(self) -> np.ndarray:
        return np.exp(self.log_w)

    def to_dict(self) -> dict:
        w = self.weights()
        pw = posterior_mean_weights(self)
        hyps = [
            {"switch_step": int(s) if s != NO_SWITCH else None, "weight": float(w[k].sum())}
            for k, s in enumerate(self.switch_steps)
        ]
        return {
            "history_len": self.history_len,
            "eta": self.eta,
            "hypotheses": hyps,
            "enlightened_prob": posterior_enlightened_prob(self),
            "mean_w1": pw.w1,
            "mean_w2": pw.w2,
            "w2_from_prior": pw.w2_from_prior,
        }


@dataclass(frozen=True)
class PosteriorWeights:
    w1: float
    w2: float
    w2_from_prior: bool


def belief_init(grid: WeightGrid, eta: float) -> Belief:
    """Belief before any interaction: surely naive, prior over the grid."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must be a probability")
    with np.errstate(divide="ignore"):
        log_prior = np.log(grid.prior)
    return Belief(
        grid=grid,
        eta=eta,
        history_len=0,
        switch_steps=(NO_SWITCH,),
        log_w=log_prior[None, :, :].copy(),
    )


def _suggest_loglik(b: Belief, response: int, phi: tuple[float, float]) -> np.ndarray:
    """Log-likelihood of one suggestion response per (switch hyp, grid point)."""
    w1 = b.grid.w1_array[:, None]
    w2 = b.grid.w2_array[None, :]
    switched = np.array([s != NO_SWITCH for s in b.switch_steps])
    # w2 is active only on hypotheses that switched at some earlier step
    score = w1 * phi[0] + b.grid.w0 + np.where(switched[:, None, None], w2 * phi[1], 0.0)
    # log sigma(score) if accepted, log sigma(-score) if rejected
    sgn = 1.0 if response else -1.0
    return -np.logaddexp(0.0, -sgn * score)


def belief_update(b: Belief, action: Action, response: int, phi: tuple[float, float] | None) -> Belief:
    """Condition on one interaction step.

    Tutor: the still-naive mass branches into (switched here) x eta and
    (still naive) x (1 - eta); the response bit carries no information.
    Suggestion: every hypothesis is reweighted by the Bernoulli likelihood of
    the response under its effective weights (phi measured pre-update).
    """
    t = b.history_len
    if action == TUTOR:
        with np.errstate(divide="ignore"):
            stay = b.log_w[0] + np.log1p(-b.eta) if b.eta < 1.0 else np.full_like(b.log_w[0], -np.inf)
            switch_here = b.log_w[0] + (np.log(b.eta) if b.eta > 0.0 else -np.inf)
        log_w = np.concatenate([stay[None], b.log_w[1:], switch_here[None]], axis=0)
        out = Belief(
            grid=b.grid,
            eta=b.eta,
            history_len=t + 1,
            switch_steps=b.switch_steps + (t,),
            log_w=log_w,
        )
    else:
        if phi is None:
            raise ValueError("suggestion updates need the feature pair phi")
        out = replace(b, history_len=t + 1, log_w=b.log_w + _suggest_loglik(b, response, phi))
    return out.normalized()


def posterior_enlightened_prob(b: Belief) -> float:
    """Posterior probability that the switch has already happened."""
    return float(1.0 - np.exp(_logsumexp(b.log_w[0].ravel())))


def posterior_mean_weights(b: Belief) -> PosteriorWeights:
    """E[w1] over everything; E[w2] over switched mass (prior mean if none)."""
    w = b.weights()
    w1_mean = float((w.sum(axis=(0, 2)) * b.grid.w1_array).sum())
    switched_mass = w[1:].sum()
    if switched_mass <= 0.0:
        w2_prior = float((b.grid.prior.sum(axis=0) * b.grid.w2_array).sum())
        return PosteriorWeights(w1=w1_mean, w2=w2_prior, w2_from_prior=True)
    w2_mean = float((w[1:].sum(axis=(0, 1)) * b.grid.w2_array).sum() / switched_mass)
    return PosteriorWeights(w1=w1_mean, w2=w2_mean, w2_from_prior=False)


def belief_bruteforce(
    history: list[tuple[Action, int, tuple[float, float] | None]],
    grid: WeightGrid,
    eta: float,
) -> Belief:
    """Direct enumeration oracle over every (switch time, grid point) pair.

    history is a list of (action, response, phi) steps, phi = None for tutor
    steps. Intended for short histories in tests; cost grows with the number
    of tutor steps times the grid size.
    """
    if len(history) > 12:
        raise ValueError("brute-force belief is restricted to histories of length <= 12")
    tutor_steps = [t for t, (a, _, _) in enumerate(history) if a == TUTOR]
    candidates = [NO_SWITCH] + tutor_steps
    w1 = grid.w1_array[:, None]
    w2 = grid.w2_array[None, :]
    with np.errstate(divide="ignore"):
        log_prior = np.log(grid.prior)
        log_eta = np.log(eta) if eta > 0 else -np.inf
        log_stay = np.log1p(-eta) if eta < 1 else -np.inf

    rows = []
    for s in candidates:
        # switch-pattern probability: stayed naive at every tutor before s,
        # switched at s (or stayed at all tutors for the no-switch row)
        if s == NO_SWITCH:
            lp = log_stay * len(tutor_steps)
        else:
            lp = log_stay * tutor_steps.index(s) + log_eta
        row = log_prior + lp
        for t, (action, response, phi) in enumerate(history):
            if action == TUTOR:
                continue
            enlightened = s != NO_SWITCH and s < t
            score = w1 * phi[0] + grid.w0 + (w2 * phi[1] if enlightened else 0.0)
            sgn = 1.0 if response else -1.0
            row = row - np.logaddexp(0.0, -sgn * score)
        rows.append(row)
    b = Belief(
        grid=grid,
        eta=eta,
        history_len=len(history),
        switch_steps=tuple(candidates),
        log_w=np.stack(rows, axis=0),
    )
    return b.normalized()


def total_variation(a: Belief, b: Belief) -> float:
    """TV distance between two beliefs over matching (switch, grid) atoms."""
    if a.switch_steps != b.switch_steps:
        raise ValueError("beliefs have different hypothesis structures")
    return float(0.5 * np.abs(a.weights() - b.weights()).sum())
