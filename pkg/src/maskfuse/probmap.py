"""Per-patch foreground probability map from two candidate masks.

The image is cut into a ``split x split`` grid. In each patch a foreground
GMM is fitted to pixels both masks call foreground and a background GMM to
pixels both call background, with fallbacks to image-wide pools when a patch
has too few samples. Each pixel's foreground probability is the normalized
ratio of the two clipped mixture likelihoods.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import PipelineConfig
from .gmm import fit_em

BG, FG, AMBIGUOUS = 0, 1, 2
INIT_PROB = 0.5


class NoForegroundEvidence(ValueError):
    pass


@dataclass
class PatchStats:
    fitted: int = 0
    fallback_fg: int = 0
    fallback_bg: int = 0
    skipped: int = 0

    def summary(self) -> str:
        return (
            f"patches fitted={self.fitted} fallback_fg={self.fallback_fg} "
            f"fallback_bg={self.fallback_bg} skipped={self.skipped}"
        )


def agreement(mask_a: np.ndarray, mask_b: np.ndarray) -> np.ndarray:
    """FG where both masks are 1, BG where both are 0, AMBIGUOUS elsewhere."""
    mask_a = np.asarray(mask_a)
    mask_b = np.asarray(mask_b)
    if mask_a.shape != mask_b.shape:
        raise ValueError(f"mask dimensions differ: {_hw(mask_a)} vs {_hw(mask_b)}")
    out = np.full(mask_a.shape, AMBIGUOUS, dtype=np.uint8)
    out[(mask_a != 0) & (mask_b != 0)] = FG
    out[(mask_a == 0) & (mask_b == 0)] = BG
    return out


def _hw(arr) -> str:
    return f"{arr.shape[1]}x{arr.shape[0]}" if arr.ndim >= 2 else str(arr.shape)


def patch_bounds(length: int, split: int) -> list[tuple[int, int]]:
    """Half-open [start, stop) ranges of the grid along one axis.

    Block j starts at j * (length // split); the last block absorbs the
    remainder so the blocks tile the axis exactly.
    """
    step = length // split
    bounds = [(j * step, (j + 1) * step) for j in range(split)]
    bounds[-1] = (bounds[-1][0], length)
    return bounds


def patch_grid(height: int, width: int, split: int):
    """Yield (patch_index, row_slice, col_slice) in row-major order."""
    rows = patch_bounds(height, split)
    cols = patch_bounds(width, split)
    for j, (r0, r1) in enumerate(rows):
        for i, (c0, c1) in enumerate(cols):
            yield j * split + i, slice(r0, r1), slice(c0, c1)


def global_pools(image: np.ndarray, agree: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Image-wide FG and BG pixel pools, each (count, 3) float64."""
    pixels = np.asarray(image, dtype=np.float64)
    return pixels[agree == FG], pixels[agree == BG]


def normalized_foreground(llh_fg, llh_bg, clip: float = 100.0) -> tuple[np.ndarray, np.ndarray]:
    """Clip log-likelihoods to [-clip, clip], exponentiate and normalize.

    Returns (p_fg, p_bg) with p_fg + p_bg == 1.
    """
    lh_fg = np.exp(np.clip(llh_fg, -clip, clip))
    lh_bg = np.exp(np.clip(llh_bg, -clip, clip))
    total = lh_fg + lh_bg
    return lh_fg / total, lh_bg / total


def compute_probability_map(image, mask_a, mask_b, cfg: PipelineConfig | None = None):
    """Return ``(prob, stats)``: the float32 map and per-branch patch counts.

    Branch counts record every fallback that was taken, including on patches
    that end up skipped. A patch is also skipped when its background pool is
    still smaller than ``cfg.components`` after the fallback.
    """
    cfg = cfg or PipelineConfig()
    image = np.asarray(image)
    agree = agreement(mask_a, mask_b)
    if image.shape[:2] != agree.shape:
        raise ValueError(f"image is {_hw(image)} but masks are {_hw(agree)}")
    n = cfg.components
    pixels = image.astype(np.float64)
    either = (np.asarray(mask_a) != 0) | (np.asarray(mask_b) != 0)
    pool_fg, pool_bg = global_pools(image, agree)

    prob = np.full(agree.shape, INIT_PROB, dtype=np.float64)
    stats = PatchStats()
    for index, rs, cs in patch_grid(*agree.shape, cfg.split):
        patch_px = pixels[rs, cs].reshape(-1, 3)
        patch_agree = agree[rs, cs].ravel()
        p_fg = patch_px[patch_agree == FG]
        p_bg = patch_px[patch_agree == BG]
        if len(p_fg) <= n and either[rs, cs].sum() >= n:
            p_fg = pool_fg
            stats.fallback_fg += 1
        if len(p_bg) <= n and len(p_fg) >= n:
            p_bg = pool_bg
            stats.fallback_bg += 1
        if len(p_fg) <= n or len(p_bg) < n:
            stats.skipped += 1
            continue
        seed = cfg.seed ^ index
        g_fg = fit_em(p_fg, n, seed)
        g_bg = fit_em(p_bg, n, seed)
        p, _ = normalized_foreground(g_fg.log_score(patch_px), g_bg.log_score(patch_px), cfg.clip)
        prob[rs, cs] = p.reshape(prob[rs, cs].shape)
        stats.fitted += 1

    if len(pool_fg) == 0 and stats.fitted == 0:
        raise NoForegroundEvidence("no foreground evidence")
    return prob.astype(np.float32), stats


def build_probability_map(image, mask_a, mask_b, cfg: PipelineConfig | None = None) -> np.ndarray:
    return compute_probability_map(image, mask_a, mask_b, cfg)[0]
