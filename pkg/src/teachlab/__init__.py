"""Simulation lab for sequential teaching of learners with changeable inner states."""

from .belief import (
    Belief,
    WeightGrid,
    belief_bruteforce,
    belief_init,
    belief_update,
    posterior_enlightened_prob,
    posterior_mean_weights,
)
from .datagen import (
    Dataset,
    DatasetSpec,
    feature_map,
    generate_dataset,
    hamming,
    optimal_model,
    pearson_corr,
    selection_cost,
)
from .learner import (
    TUTOR,
    InnerState,
    Kind,
    LearnerSim,
    acceptance_prob,
    enlightened_state,
    is_enlightened,
    manipulation_level,
    naive_state,
    respond,
    transition,
    unassisted_learn,
)
from .planner import (
    EpisodeLog,
    Teacher,
    TeacherConfig,
    base_policy,
    manipulative_teacher,
    random_teacher,
    rollout_action,
    run_episode,
    terminal_cost,
)

__version__ = "0.1.0"
