from .qtm import (RuleError, TransitionRule, TruncatedQTM, hadamard_head_rule, move_right_rule,
                  qtm_dimension, qtm_run, qtm_step_bound, qtm_truncate, qtm_validate,
                  random_unidirectional_rule, shared_support_distance)
from .symrep import (hook_length_dimension, partitions, standard_tableaux, symrep_check,
                     symrep_generator)
from .walk import site_distribution, start_state, walk_run, walk_step

__all__ = [
    "RuleError", "TransitionRule", "TruncatedQTM", "hadamard_head_rule", "hook_length_dimension",
    "move_right_rule", "partitions", "qtm_dimension", "qtm_run", "qtm_step_bound", "qtm_truncate",
    "qtm_validate", "random_unidirectional_rule", "shared_support_distance", "site_distribution",
    "standard_tableaux", "start_state", "symrep_check", "symrep_generator", "walk_run",
    "walk_step",
]
