#! /usr/bin/env python3
"""Box-supervision losses evaluated on hand-made soft masks.

A mask that exactly fills its boxes scores (near) zero on the tightness terms
and on the colour-gated pairwise term; the plain MIL smoothness term still
counts the box borders. A mask stuck at 0.5 pays log 2 per bag or pair.
"""

import numpy as np

from maskfuse.weakloss import NEGATIVE, POSITIVE, boxinst_pairwise, boxinst_projection, build_bags, mil_pairwise, mil_unary

boxes = [(2, 2, 7, 6), (9, 1, 13, 9)]
h, w = 12, 15

# =============================================================================
# Bags: every row and column of a box is a positive bag; lines running out
# from each box edge, stopping at other boxes, are negative bags.

bags = build_bags(boxes, w, h)
print(f"{sum(b.kind == POSITIVE for b in bags)} positive bags, {sum(b.kind == NEGATIVE for b in bags)} negative bags")

# =============================================================================
# Perfect mask, with object pixels coloured differently from the background.

perfect = np.zeros((h, w))
for x0, y0, x1, y1 in boxes:
    perfect[y0:y1, x0:x1] = 1.0
image = np.where(perfect[..., None] == 1, [200, 60, 60], [230, 210, 210])

half = np.full((h, w), 0.5)
for name, mask in (("perfect", perfect), ("half", half)):
    print(
        f"{name:>8}: mil_unary {mil_unary(mask, bags):.6f}  mil_pairwise {mil_pairwise(mask):.6f}  "
        f"proj {boxinst_projection(mask, boxes):.6f}  pairwise {boxinst_pairwise(mask, image):.6f}"
    )
