"""Binary labeling program over the ambiguous pixels, solved exactly.

The objective to maximize is

    O_idf - lambda * O_scf
    O_idf = sum_p x_p P_p + (1 - x_p)(1 - P_p)
    O_scf = sum_{(p,q) 4-neighbours} S_pq [x_p != x_q]
    S_pq  = exp(-||c_p - c_q|| / theta)

with pixels both masks agree on held fixed. Since every pairwise coefficient
is nonnegative the equivalent minimization is a submodular binary energy,
and its global optimum is a minimum s-t cut.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .config import PipelineConfig
from .maxflow import Graph
from .probmap import BG, FG

FREE, FIXED_0, FIXED_1 = -1, 0, 1
BRUTEFORCE_CAP = 25
_CHUNK = 1 << 16
_TIE_TOL = 1e-12


@dataclass(frozen=True)
class EnergyProblem:
    """``right_weight[r, c]`` joins (r, c)-(r, c+1); ``down_weight[r, c]`` joins (r, c)-(r+1, c)."""

    prob: np.ndarray
    right_weight: np.ndarray
    down_weight: np.ndarray
    fixed: np.ndarray
    lambda_: float

    def __post_init__(self):
        h, w = self.prob.shape
        if self.right_weight.shape != (h, w - 1) or self.down_weight.shape != (h - 1, w):
            raise ValueError("edge weight arrays do not match the pixel grid")
        if self.fixed.shape != (h, w):
            raise ValueError("fixed-assignment array does not match the pixel grid")
        if self.lambda_ < 0:
            raise ValueError("lambda must be nonnegative")

    @property
    def shape(self) -> tuple[int, int]:
        return self.prob.shape

    @property
    def free_count(self) -> int:
        return int((self.fixed == FREE).sum())


@dataclass(frozen=True)
class SolveResult:
    labels: np.ndarray
    objective: float
    o_idf: float
    o_scf: float
    free_count: int
    solve_time: float

    def summary(self) -> str:
        return (
            f"objective={self.objective!r} o_idf={self.o_idf!r} o_scf={self.o_scf!r} "
            f"free={self.free_count} time={self.solve_time:.3f}"
        )


def color_similarity(c1, c2, theta: float) -> np.ndarray | float:
    """exp(-||c1 - c2||_2 / theta) over the last axis."""
    if not theta > 0:
        raise ValueError("theta must be positive")
    d = np.asarray(c1, dtype=np.float64) - np.asarray(c2, dtype=np.float64)
    out = np.exp(-np.sqrt((d * d).sum(axis=-1)) / theta)
    return float(out) if np.ndim(out) == 0 else out


def build_problem(image, prob, agree, cfg: PipelineConfig | None = None) -> EnergyProblem:
    cfg = cfg or PipelineConfig()
    image = np.asarray(image, dtype=np.float64)
    prob = np.asarray(prob, dtype=np.float64)
    agree = np.asarray(agree)
    if not (image.shape[:2] == prob.shape == agree.shape):
        raise ValueError(
            f"dimension mismatch: image {image.shape[:2]}, prob {prob.shape}, agreement {agree.shape}"
        )
    fixed = np.full(agree.shape, FREE, dtype=np.int8)
    fixed[agree == FG] = FIXED_1
    fixed[agree == BG] = FIXED_0
    return EnergyProblem(
        prob=prob,
        right_weight=color_similarity(image[:, :-1], image[:, 1:], cfg.theta),
        down_weight=color_similarity(image[:-1], image[1:], cfg.theta),
        fixed=fixed,
        lambda_=float(cfg.lambda_),
    )


def objective_value(problem: EnergyProblem, labels) -> tuple[float, float, float]:
    """(o_idf, o_scf, o_idf - lambda * o_scf) over all pixels and edges."""
    x = np.asarray(labels)
    if x.shape != problem.shape:
        raise ValueError(f"labels shape {x.shape} does not match problem {problem.shape}")
    pinned = problem.fixed != FREE
    if np.any(x[pinned] != problem.fixed[pinned]):
        raise ValueError("labels violate a fixed assignment")
    x = x.astype(np.float64)
    p = problem.prob
    o_idf = float((x * p + (1 - x) * (1 - p)).sum())
    o_scf = float(
        (problem.right_weight * (x[:, 1:] != x[:, :-1])).sum()
        + (problem.down_weight * (x[1:] != x[:-1])).sum()
    )
    return o_idf, o_scf, o_idf - problem.lambda_ * o_scf


def _result(problem, labels, free_count, t0) -> SolveResult:
    o_idf, o_scf, total = objective_value(problem, labels)
    return SolveResult(labels, total, o_idf, o_scf, free_count, time.perf_counter() - t0)


def _neighbour_terms(problem: EnergyProblem):
    """Unary costs (cost of x=1, cost of x=0) per free pixel and free-free edges.

    Costs come from the equivalent minimization; edges to fixed pixels are
    folded into the unary costs of their free endpoint.
    """
    h, w = problem.shape
    lam = problem.lambda_
    fixed = problem.fixed
    free_idx = np.flatnonzero(fixed.ravel() == FREE)
    node_of = np.full(h * w, -1, dtype=np.int64)
    node_of[free_idx] = np.arange(free_idx.size)

    p = problem.prob.ravel()[free_idx]
    cost1 = 1.0 - p
    cost0 = p.copy()

    pairs = []
    flat_fixed = fixed.ravel()
    for weights, a_idx, b_idx in _edge_index_arrays(problem):
        fa, fb = node_of[a_idx], node_of[b_idx]
        s = lam * weights
        both = (fa >= 0) & (fb >= 0)
        pairs.append((fa[both], fb[both], s[both]))
        for free_end, fixed_end in ((fa, b_idx), (fb, a_idx)):
            sel = (free_end >= 0) & (flat_fixed[fixed_end] != FREE)
            lab = flat_fixed[fixed_end[sel]]
            # disagreeing with the fixed neighbour costs s
            np.add.at(cost0, free_end[sel][lab == FIXED_1], s[sel][lab == FIXED_1])
            np.add.at(cost1, free_end[sel][lab == FIXED_0], s[sel][lab == FIXED_0])
    ei = np.concatenate([q[0] for q in pairs])
    ej = np.concatenate([q[1] for q in pairs])
    es = np.concatenate([q[2] for q in pairs])
    return free_idx, cost1, cost0, ei, ej, es


def _edge_index_arrays(problem: EnergyProblem):
    h, w = problem.shape
    idx = np.arange(h * w).reshape(h, w)
    yield problem.right_weight.ravel(), idx[:, :-1].ravel(), idx[:, 1:].ravel()
    yield problem.down_weight.ravel(), idx[:-1].ravel(), idx[1:].ravel()


def _labels_from_free(problem: EnergyProblem, free_idx, free_labels) -> np.ndarray:
    labels = np.where(problem.fixed == FIXED_1, 1, 0).astype(np.uint8).ravel()
    labels[free_idx] = free_labels
    return labels.reshape(problem.shape)


def solve_graphcut(problem: EnergyProblem) -> SolveResult:
    """Exact maximizer via min cut; ties resolve toward background."""
    t0 = time.perf_counter()
    free_idx, cost1, cost0, ei, ej, es = _neighbour_terms(problem)
    n = free_idx.size
    g = Graph(n)
    # source side <=> label 1: cutting source->p pays cost0, p->sink pays cost1
    m = np.minimum(cost0, cost1)
    for k, (c0, c1) in enumerate(zip((cost0 - m).tolist(), (cost1 - m).tolist())):
        g.add_tedge(k, c0, c1)
    for a, b, s in zip(ei.tolist(), ej.tolist(), es.tolist()):
        if s > 0:
            g.add_edge(a, b, s, s)
    g.maxflow()
    free_labels = np.array([g.in_source_segment(k) for k in range(n)], dtype=np.uint8)
    return _result(problem, _labels_from_free(problem, free_idx, free_labels), n, t0)


def solve_bruteforce(problem: EnergyProblem, cap: int = BRUTEFORCE_CAP) -> SolveResult:
    """Enumerate every labeling of the free pixels and score it on the full grid.

    Scoring is a direct evaluation of O_idf - lambda * O_scf, sharing nothing
    with the graph-cut construction. Among optimal labelings (within 1e-12)
    the lexicographically smallest free-pixel vector in row-major order wins.
    """
    t0 = time.perf_counter()
    n = problem.free_count
    if n > cap:
        raise ValueError(f"brute force needs free_count <= {cap}, got {n}")
    h, w = problem.shape
    flat_fixed = problem.fixed.ravel()
    free_idx = np.flatnonzero(flat_fixed == FREE)
    base = (flat_fixed == FIXED_1).astype(np.uint8)
    p = problem.prob.ravel()
    idx = np.arange(h * w).reshape(h, w)
    ea = np.concatenate([idx[:, :-1].ravel(), idx[:-1].ravel()])
    eb = np.concatenate([idx[:, 1:].ravel(), idx[1:].ravel()])
    es = np.concatenate([problem.right_weight.ravel(), problem.down_weight.ravel()])
    shifts = np.arange(n - 1, -1, -1, dtype=np.uint64)

    best_val, best_code = -np.inf, 0
    total = 1 << n
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, total), dtype=np.uint64)
        x = np.repeat(base[None, :], codes.size, axis=0)
        x[:, free_idx] = (codes[:, None] >> shifts[None, :]) & np.uint64(1)
        xf = x.astype(np.float64)
        o_idf = xf @ p + (1.0 - xf) @ (1.0 - p)
        o_scf = (x[:, ea] ^ x[:, eb]).astype(np.float64) @ es
        val = o_idf - problem.lambda_ * o_scf
        cmax = val.max()
        if cmax > best_val + _TIE_TOL:
            best_val = cmax
            best_code = start + int(np.flatnonzero(val >= cmax - _TIE_TOL)[0])
    free_labels = np.array([(best_code >> (n - 1 - k)) & 1 for k in range(n)], dtype=np.uint8)
    return _result(problem, _labels_from_free(problem, free_idx, free_labels), n, t0)


def solve(problem: EnergyProblem, solver: str = "graphcut") -> SolveResult:
    if solver == "graphcut":
        return solve_graphcut(problem)
    if solver == "bruteforce":
        return solve_bruteforce(problem)
    raise ValueError(f"unknown solver {solver!r}")


def random_problem(height: int, width: int, rng: np.random.Generator) -> EnergyProblem:
    """Seeded random instance: uniform P, weights from a random image, random fixed set."""
    image = rng.integers(0, 256, size=(height, width, 3)).astype(np.float64)
    theta = float(rng.uniform(5.0, 60.0))
    fixed = np.full((height, width), FREE, dtype=np.int8)
    pinned = rng.random((height, width)) < rng.uniform(0.0, 0.5)
    fixed[pinned] = rng.integers(0, 2, size=int(pinned.sum()))
    return EnergyProblem(
        prob=rng.random((height, width)),
        right_weight=color_similarity(image[:, :-1], image[:, 1:], theta),
        down_weight=color_similarity(image[:-1], image[1:], theta),
        fixed=fixed,
        lambda_=float(rng.uniform(0.0, 3.0)),
    )
