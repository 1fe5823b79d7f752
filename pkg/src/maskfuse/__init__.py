"""Reconcile two candidate binary masks of an RGB image.

Per-patch Gaussian mixtures turn pixel colours into foreground
probabilities; an exact min-cut then relabels the pixels the two masks
disagree on, trading probability agreement against colour-weighted
boundary length.

    from maskfuse import reconcile
    labels = reconcile(image, mask_a, mask_b).labels
"""

from .config import PipelineConfig, load_config
from .energy import (
    EnergyProblem,
    SolveResult,
    build_problem,
    color_similarity,
    objective_value,
    solve,
    solve_bruteforce,
    solve_graphcut,
)
from .gmm import GmmModel, component_density, fit_em, mixture_log_score
from .metrics import boxes_from_mask, dice, evaluate_dir, precision_recall
from .probmap import agreement, build_probability_map, compute_probability_map, global_pools

__version__ = "0.1.0"


def reconcile(image, mask_a, mask_b, cfg: PipelineConfig | None = None, prob=None) -> SolveResult:
    """Probability map (unless given) followed by the exact labeling solve."""
    cfg = cfg or PipelineConfig()
    if prob is None:
        prob = build_probability_map(image, mask_a, mask_b, cfg)
    problem = build_problem(image, prob, agreement(mask_a, mask_b), cfg)
    return solve(problem, cfg.solver)


__all__ = [
    "PipelineConfig",
    "load_config",
    "EnergyProblem",
    "SolveResult",
    "build_problem",
    "color_similarity",
    "objective_value",
    "solve",
    "solve_bruteforce",
    "solve_graphcut",
    "GmmModel",
    "component_density",
    "fit_em",
    "mixture_log_score",
    "boxes_from_mask",
    "dice",
    "evaluate_dir",
    "precision_recall",
    "agreement",
    "build_probability_map",
    "compute_probability_map",
    "global_pools",
    "reconcile",
]
