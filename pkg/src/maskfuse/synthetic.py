"""Synthetic stained-tissue scenes with known ground truth, for recovery tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

FG_MEAN = (200.0, 60.0, 60.0)
BG_MEAN = (230.0, 210.0, 210.0)
NOISE_SD = 10.0


@dataclass(frozen=True)
class Scene:
    image: np.ndarray  # (H, W, 3) uint8
    truth: np.ndarray  # (H, W) uint8
    mask_a: np.ndarray
    mask_b: np.ndarray


def blob_truth(rng: np.random.Generator, size: int = 64, n_blobs: tuple[int, int] = (3, 7)) -> np.ndarray:
    """Union of random ellipses."""
    yy, xx = np.mgrid[0:size, 0:size]
    truth = np.zeros((size, size), dtype=bool)
    for _ in range(rng.integers(*n_blobs)):
        cy, cx = rng.uniform(6, size - 6, size=2)
        ry, rx = rng.uniform(4, 10, size=2)
        truth |= ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0
    return truth.astype(np.uint8)


def render(truth: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Gaussian pixel intensities per class, rounded and clipped to uint8."""
    means = np.where(truth[..., None] == 1, FG_MEAN, BG_MEAN)
    pixels = means + rng.normal(0.0, NOISE_SD, size=means.shape)
    return np.clip(np.rint(pixels), 0, 255).astype(np.uint8)


def boundary_band(truth: np.ndarray, width: int = 2) -> np.ndarray:
    fg = truth.astype(bool)
    grown = ndimage.binary_dilation(fg, iterations=width)
    shrunk = ndimage.binary_erosion(fg, iterations=width, border_value=1)
    return grown & ~shrunk


def corrupt(truth: np.ndarray, rng: np.random.Generator, fraction: float = 0.10, width: int = 2) -> np.ndarray:
    """Flip ``fraction`` x (foreground area) pixels drawn from the boundary band."""
    band = np.flatnonzero(boundary_band(truth, width))
    count = min(band.size, int(round(fraction * int(truth.sum()))))
    out = truth.copy().ravel()
    flips = rng.choice(band, size=count, replace=False)
    out[flips] ^= 1
    return out.reshape(truth.shape)


def make_scene(seed: int, size: int = 64, fraction: float = 0.10) -> Scene:
    rng = np.random.default_rng(seed)
    truth = blob_truth(rng, size)
    image = render(truth, rng)
    return Scene(image, truth, corrupt(truth, rng, fraction), corrupt(truth, rng, fraction))
