#! /usr/bin/env python3
"""Scoring masks and turning them into boxes.

Uses the golden fixture directories shipped with the tests.
"""

from pathlib import Path

import numpy as np

from maskfuse.metrics import boxes_from_mask, dice, evaluate_dir, precision_recall

# =============================================================================
# Dice on a hand-countable pair: |pred| = 4, |gt| = 6, overlap 3 -> 0.6.

pred = np.zeros((3, 4), dtype=np.uint8)
gt = np.zeros((3, 4), dtype=np.uint8)
pred[0] = 1
gt[0, 1:] = 1
gt[1, :3] = 1
print("dice", dice(pred, gt), "precision/recall", precision_recall(pred, gt))

# =============================================================================
# Boxes come from 8-connected components, so a diagonal neck stays one object.

mask = np.zeros((8, 10), dtype=np.uint8)
mask[1:3, 1:3] = 1
mask[3, 3] = 1
mask[5:7, 6:9] = 1
print("boxes", boxes_from_mask(mask))

# =============================================================================
# Directory evaluation pairs files by stem and appends a mean row.

fixtures = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "eval"
report = evaluate_dir(sorted((fixtures / "pred").glob("*.png")), sorted((fixtures / "gt").glob("*.png")))
print(report.to_csv(), end="")
