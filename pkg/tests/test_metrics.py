from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from maskfuse.imgio import write_mask_png
from maskfuse.metrics import (
    boxes_from_mask,
    confusion,
    dice,
    evaluate_dir,
    precision_recall,
)

GOLDEN = Path(__file__).parent / "fixtures" / "eval"

masks = st.integers(1, 10).flatmap(
    lambda h: st.integers(1, 10).flatmap(
        lambda w: st.tuples(
            arrays(np.uint8, (h, w), elements=st.integers(0, 1)),
            arrays(np.uint8, (h, w), elements=st.integers(0, 1)),
        )
    )
)


def test_dice_hand_count():
    pred = np.zeros((3, 4), dtype=np.uint8)
    gt = np.zeros((3, 4), dtype=np.uint8)
    pred[0, :4] = 1
    gt[0, 1:4] = 1
    gt[1, :3] = 1
    assert (pred.sum(), gt.sum(), (pred & gt).sum()) == (4, 6, 3)
    assert dice(pred, gt) == pytest.approx(0.6, abs=1e-15)


def test_dice_identity_disjoint_empty():
    a = np.eye(4, dtype=np.uint8)
    assert dice(a, a) == 1.0
    assert dice(a, 1 - a) == 0.0
    assert dice(np.zeros((3, 3)), np.zeros((3, 3))) == 1.0


def test_precision_recall_hand_count():
    pred = np.array([1, 1, 1, 1, 0, 0, 0, 0])
    gt = np.array([1, 1, 1, 0, 1, 1, 1, 0])
    assert confusion(pred, gt) == (3, 1, 3)
    assert precision_recall(pred, gt) == (0.75, 0.5)


def test_precision_recall_subset_and_identity():
    gt = np.ones((3, 3))
    pred = np.zeros((3, 3))
    pred[1, 1] = 1
    p, r = precision_recall(pred, gt)
    assert p == 1.0 and r < 1.0
    assert precision_recall(gt, gt) == (1.0, 1.0)
    assert precision_recall(np.zeros((2, 2)), np.zeros((2, 2))) == (1.0, 1.0)


def test_dimension_mismatch():
    for fn in (dice, precision_recall):
        with pytest.raises(ValueError, match="dimension mismatch"):
            fn(np.zeros((2, 3)), np.zeros((3, 2)))


@settings(max_examples=300)
@given(masks)
def test_metric_axioms(pair):
    a, b = pair
    d = dice(a, b)
    assert 0.0 <= d <= 1.0
    assert d == dice(b, a)
    assert dice(a, a) == 1.0
    p, r = precision_recall(a, b)
    assert 0.0 <= p <= 1.0 and 0.0 <= r <= 1.0
    tp, fp, fn = confusion(a, b)
    if tp + fp > 0 and tp + fn > 0:
        f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
        assert d == pytest.approx(f1, abs=1e-12)


def test_boxes_examples():
    m = np.zeros((6, 6), dtype=np.uint8)
    m[:3, :3] = 1
    assert boxes_from_mask(m) == [(0, 0, 3, 3)]
    d = np.zeros((4, 4), dtype=np.uint8)
    d[1, 1] = d[2, 2] = 1
    assert boxes_from_mask(d) == [(1, 1, 3, 3)]
    assert boxes_from_mask(np.zeros((4, 4))) == []


def test_boxes_ordering():
    m = np.zeros((10, 10), dtype=np.uint8)
    m[5, 1] = 1
    m[1, 7] = 1
    m[1, 2:4] = 1
    assert boxes_from_mask(m) == [(2, 1, 4, 2), (7, 1, 8, 2), (1, 5, 2, 6)]


@settings(max_examples=200)
@given(arrays(np.uint8, st.tuples(st.integers(1, 15), st.integers(1, 15)), elements=st.integers(0, 1)))
def test_boxes_cover_and_tight(mask):
    boxes = boxes_from_mask(mask)
    covered = np.zeros(mask.shape, dtype=bool)
    for x0, y0, x1, y1 in boxes:
        assert x0 < x1 and y0 < y1
        covered[y0:y1, x0:x1] = True
        crop = mask[y0:y1, x0:x1]
        assert crop[0].any() and crop[-1].any() and crop[:, 0].any() and crop[:, -1].any()
    assert covered[mask == 1].all()
    assert boxes == sorted(boxes, key=lambda b: (b[1], b[0]))


def _write_pairs(tmp_path, pairs):
    for name, (pred, gt) in pairs.items():
        for sub, m in (("pred", pred), ("gt", gt)):
            (tmp_path / sub).mkdir(exist_ok=True)
            write_mask_png(m, tmp_path / sub / f"{name}.png")
    return sorted((tmp_path / "pred").glob("*.png")), sorted((tmp_path / "gt").glob("*.png"))


def test_evaluate_dir_mean(tmp_path):
    a = np.eye(3, dtype=np.uint8)
    preds, gts = _write_pairs(tmp_path, {"one": (a, a), "two": (a, 1 - a)})
    report = evaluate_dir(preds, gts)
    assert [r.image for r in report.rows] == ["one", "two"]
    assert report.mean("dice") == 0.5


def test_evaluate_dir_single_perfect(tmp_path):
    a = np.eye(3, dtype=np.uint8)
    report = evaluate_dir(*_write_pairs(tmp_path, {"x": (a, a)}))
    assert (report.mean("dice"), report.mean("precision"), report.mean("recall")) == (1.0, 1.0, 1.0)


def test_evaluate_dir_missing_counterpart(tmp_path):
    a = np.eye(3, dtype=np.uint8)
    preds, gts = _write_pairs(tmp_path, {"x": (a, a), "lonely": (a, a)})
    with pytest.raises(ValueError, match="lonely"):
        evaluate_dir(preds, [g for g in gts if g.stem != "lonely"])


def test_evaluate_dir_dimension_mismatch_names_file(tmp_path):
    (tmp_path / "pred").mkdir()
    (tmp_path / "gt").mkdir()
    write_mask_png(np.ones((2, 2), dtype=np.uint8), tmp_path / "pred" / "odd.png")
    write_mask_png(np.ones((3, 2), dtype=np.uint8), tmp_path / "gt" / "odd.png")
    with pytest.raises(ValueError, match="odd"):
        evaluate_dir([tmp_path / "pred" / "odd.png"], [tmp_path / "gt" / "odd.png"])


def test_golden_csv():
    report = evaluate_dir(sorted((GOLDEN / "pred").glob("*.png")), sorted((GOLDEN / "gt").glob("*.png")))
    assert report.to_csv() == (GOLDEN / "golden.csv").read_text()
