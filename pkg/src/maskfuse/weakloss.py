"""Box-supervision loss evaluators on soft masks.

Two families are covered: the multiple-instance (MIL) formulation, where
every row and column crossing a box must contain some foreground and lines
outside all boxes must contain none, and the BoxInst pair of a projection
term plus a colour-gated pairwise agreement term. These are plain
evaluators with no gradients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .energy import color_similarity
from .imgio import check_boxes

POSITIVE, NEGATIVE = "positive", "negative"
PROB_CLAMP = 1e-7


@dataclass(frozen=True)
class Bag:
    kind: str
    pixels: tuple  # ((row, col), ...), one horizontal or vertical segment


def _check_soft(mask) -> np.ndarray:
    mask = np.asarray(mask, dtype=np.float64)
    if mask.ndim != 2:
        raise ValueError("soft mask must be 2-d")
    if not np.isfinite(mask).all() or mask.min() < 0 or mask.max() > 1:
        raise ValueError("soft mask values must be finite and in [0, 1]")
    return mask


def _walk(inside, r, c, dr, dc):
    h, w = inside.shape
    out = []
    while 0 <= r < h and 0 <= c < w and not inside[r, c]:
        out.append((r, c))
        r, c = r + dr, c + dc
    return out


def build_bags(boxes, width: int, height: int) -> list[Bag]:
    """Positive bags are every row and column of each box, edge to edge.

    Negative bags continue each box's four border lines outward to the image
    edge, stopping before the first pixel covered by any box. Empty and
    duplicate segments are dropped.
    """
    check_boxes(boxes, width, height)
    inside = np.zeros((height, width), dtype=bool)
    for x0, y0, x1, y1 in boxes:
        inside[y0:y1, x0:x1] = True

    bags = []
    for x0, y0, x1, y1 in boxes:
        for r in range(y0, y1):
            bags.append(Bag(POSITIVE, tuple((r, c) for c in range(x0, x1))))
        for c in range(x0, x1):
            bags.append(Bag(POSITIVE, tuple((r, c) for r in range(y0, y1))))

    seen = set()
    for x0, y0, x1, y1 in boxes:
        segments = []
        for r in (y0, y1 - 1):
            segments.append(_walk(inside, r, x0 - 1, 0, -1))
            segments.append(_walk(inside, r, x1, 0, 1))
        for c in (x0, x1 - 1):
            segments.append(_walk(inside, y0 - 1, c, -1, 0))
            segments.append(_walk(inside, y1, c, 1, 0))
        for seg in segments:
            key = tuple(sorted(seg))
            if key and key not in seen:
                seen.add(key)
                bags.append(Bag(NEGATIVE, key))
    return bags


def _bag_maxima(mask, bags, kind):
    vals = [max(mask[r, c] for r, c in bag.pixels) for bag in bags if bag.kind == kind]
    return np.clip(np.array(vals, dtype=np.float64), PROB_CLAMP, 1 - PROB_CLAMP)


def mil_unary(mask, bags) -> float:
    """Mean -log(max) over positive bags plus mean -log(1 - max) over negative bags."""
    mask = _check_soft(mask)
    if not bags:
        raise ValueError("empty bag list")
    pos = _bag_maxima(mask, bags, POSITIVE)
    neg = _bag_maxima(mask, bags, NEGATIVE)
    loss = 0.0
    if pos.size:
        loss += float(-np.log(pos).mean())
    if neg.size:
        loss += float(-np.log(1.0 - neg).mean())
    return loss


def _pair_slices(shape, offsets):
    h, w = shape[:2]
    for dy, dx in offsets:
        if dy >= h or abs(dx) >= w:
            continue
        if dx >= 0:
            yield (slice(0, h - dy), slice(0, w - dx)), (slice(dy, h), slice(dx, w))
        else:
            yield (slice(0, h - dy), slice(-dx, w)), (slice(dy, h), slice(0, w + dx))


def _offsets(neighbors: int, dilation: int = 1):
    d = dilation
    if neighbors == 4:
        return [(0, d), (d, 0)]
    if neighbors == 8:
        return [(0, d), (d, 0), (d, d), (d, -d)]
    raise ValueError("neighbors must be 4 or 8")


def mil_pairwise(mask, neighbors: int = 4) -> float:
    """Mean squared difference over 4- or 8-neighbour pairs."""
    mask = _check_soft(mask)
    diffs = [(mask[a] - mask[b]).ravel() for a, b in _pair_slices(mask.shape, _offsets(neighbors))]
    diffs = np.concatenate(diffs) if diffs else np.zeros(0)
    return float((diffs**2).mean()) if diffs.size else 0.0


def _dice_loss(u, v) -> float:
    denom = float(u @ u + v @ v)
    if denom == 0:
        return 1.0
    return 1.0 - 2.0 * float(u @ v) / denom


def boxinst_projection(mask, boxes) -> float:
    """Dice mismatch between the max-projections of the mask and of each box.

    Summed over the two axes, averaged over boxes.
    """
    mask = _check_soft(mask)
    if not boxes:
        raise ValueError("empty box list")
    check_boxes(boxes, mask.shape[1], mask.shape[0])
    losses = []
    for x0, y0, x1, y1 in boxes:
        crop = mask[y0:y1, x0:x1]
        on_x = crop.max(axis=0)
        on_y = crop.max(axis=1)
        losses.append(_dice_loss(on_x, np.ones_like(on_x)) + _dice_loss(on_y, np.ones_like(on_y)))
    return float(np.mean(losses))


def boxinst_pairwise(mask, image, tau: float = 0.3, theta_b: float = 15.0, dilation: int = 1) -> float:
    """Label-agreement log loss over colour-similar 8-neighbour pairs."""
    mask = _check_soft(mask)
    image = np.asarray(image, dtype=np.float64)
    if image.shape[:2] != mask.shape:
        raise ValueError("image and mask dimensions differ")
    if not 0 <= tau <= 1:
        raise ValueError("tau must lie in [0, 1]")
    terms = []
    for a, b in _pair_slices(mask.shape, _offsets(8, dilation)):
        similar = color_similarity(image[a], image[b], theta_b) >= tau
        mp, mq = mask[a][similar], mask[b][similar]
        agree = np.clip(mp * mq + (1 - mp) * (1 - mq), PROB_CLAMP, 1 - PROB_CLAMP)
        terms.append(-np.log(agree))
    terms = np.concatenate(terms) if terms else np.zeros(0)
    return float(terms.mean()) if terms.size else 0.0
