"""Pixel-level segmentation metrics and mask/box utilities."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .imgio import read_mask_png

CSV_HEADER = "image,dice,precision,recall,tp,fp,fn"


def _pair(pred, gt):
    pred = np.asarray(pred) != 0
    gt = np.asarray(gt) != 0
    if pred.shape != gt.shape:
        raise ValueError(f"dimension mismatch: {pred.shape} vs {gt.shape}")
    return pred, gt


def confusion(pred, gt) -> tuple[int, int, int]:
    """(tp, fp, fn) pixel counts."""
    pred, gt = _pair(pred, gt)
    return int((pred & gt).sum()), int((pred & ~gt).sum()), int((~pred & gt).sum())


def dice(pred, gt) -> float:
    """2|A & B| / (|A| + |B|); two empty masks score 1."""
    tp, fp, fn = confusion(pred, gt)
    denom = 2 * tp + fp + fn
    return 1.0 if denom == 0 else 2 * tp / denom


def precision_recall(pred, gt) -> tuple[float, float]:
    tp, fp, fn = confusion(pred, gt)
    precision = 1.0 if tp + fp == 0 else tp / (tp + fp)
    recall = 1.0 if tp + fn == 0 else tp / (tp + fn)
    return precision, recall


def boxes_from_mask(mask) -> list[tuple[int, int, int, int]]:
    """Tight (x_min, y_min, x_max, y_max) boxes of the 8-connected components."""
    mask = np.asarray(mask) != 0
    labels, _ = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    boxes = [(sl[1].start, sl[0].start, sl[1].stop, sl[0].stop) for sl in ndimage.find_objects(labels)]
    return sorted(boxes, key=lambda b: (b[1], b[0]))


@dataclass(frozen=True)
class EvalRow:
    image: str
    dice: float
    precision: float
    recall: float
    tp: int
    fp: int
    fn: int


@dataclass
class EvalReport:
    rows: list[EvalRow] = field(default_factory=list)

    def mean(self, name: str) -> float:
        return float(np.mean([getattr(r, name) for r in self.rows])) if self.rows else float("nan")

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for r in self.rows:
            lines.append(f"{r.image},{r.dice:.6f},{r.precision:.6f},{r.recall:.6f},{r.tp},{r.fp},{r.fn}")
        lines.append(
            f"mean,{self.mean('dice'):.6f},{self.mean('precision'):.6f},{self.mean('recall'):.6f},,,"
        )
        return "\n".join(lines) + "\n"


def evaluate_pair(name: str, pred, gt) -> EvalRow:
    try:
        tp, fp, fn = confusion(pred, gt)
    except ValueError as exc:
        raise ValueError(f"{name}: {exc}") from None
    return EvalRow(name, dice(pred, gt), *precision_recall(pred, gt), tp, fp, fn)


def evaluate_dir(pred_paths, gt_paths) -> EvalReport:
    """Pair PNG masks by filename stem and score each pair; rows sorted by stem."""
    preds = {Path(p).stem: Path(p) for p in pred_paths}
    gts = {Path(p).stem: Path(p) for p in gt_paths}
    for stem in sorted(preds.keys() ^ gts.keys()):
        side = "ground truth" if stem in preds else "prediction"
        raise ValueError(f"unpaired file: no {side} counterpart for {stem!r}")
    report = EvalReport()
    for stem in sorted(preds):
        report.rows.append(evaluate_pair(stem, read_mask_png(preds[stem]), read_mask_png(gts[stem])))
    return report
