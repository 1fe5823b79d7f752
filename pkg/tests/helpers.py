"""Shared fixture builders for the test suite."""

import numpy as np

FG_COLOR = (200, 60, 60)
BG_COLOR = (230, 210, 210)


def noisy_image(classes, seed=0, sd=8.0):
    rng = np.random.default_rng(seed)
    means = np.where(classes[..., None] == 1, FG_COLOR, BG_COLOR).astype(float)
    return np.clip(np.rint(means + rng.normal(0, sd, means.shape)), 0, 255).astype(np.uint8)


def fallback_fixture():
    """20x20, split=2, components=2: one patch per probability-map branch.

    patch 0 (top-left)     plenty of FG and BG          -> fitted normally
    patch 1 (top-right)    1 agreed FG + 3 mask-a only  -> global FG pool
    patch 2 (bottom-left)  99 FG, 1 agreed BG           -> global BG pool
    patch 3 (bottom-right) all background               -> skipped
    Expected summary: fitted=3 fallback_fg=1 fallback_bg=1 skipped=1.
    """
    a = np.zeros((20, 20), dtype=np.uint8)
    b = np.zeros((20, 20), dtype=np.uint8)
    a[0:10, 0:5] = b[0:10, 0:5] = 1
    a[2, 14] = b[2, 14] = 1
    a[5, 12:15] = 1
    a[10:20, 0:10] = b[10:20, 0:10] = 1
    a[15, 5] = b[15, 5] = 0
    classes = np.maximum(a, b)
    return noisy_image(classes, seed=1), a, b


CLIP_QUERY = (9, 9)
CLIP_GRAY = 113


def clip_fixture():
    """10x10, split=1, components=1, with one ambiguous pixel far out in the FG tail.

    Rows 0-4 are a tight FG cluster near 60, rows 5-9 a broad BG cluster near
    180. The ambiguous pixel at CLIP_QUERY is gray CLIP_GRAY; its raw FG
    log-likelihood is about -510 while its BG log-likelihood stays near -19.
    """
    rng = np.random.default_rng(0)
    fg = np.clip(np.rint(rng.normal(60, 3, (50, 3))), 0, 255)
    bg = np.clip(np.rint(rng.normal(180, 30, (49, 3))), 0, 255)
    pixels = np.vstack([fg, bg, [[CLIP_GRAY] * 3]])
    image = pixels.reshape(10, 10, 3).astype(np.uint8)
    a = np.zeros((10, 10), dtype=np.uint8)
    a[:5] = 1
    b = a.copy()
    a[CLIP_QUERY] = 1
    return image, a, b
