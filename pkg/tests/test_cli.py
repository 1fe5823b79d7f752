import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from maskfuse.cli import main
from maskfuse.config import PipelineConfig
from maskfuse.imgio import read_mask_png, read_pfm, write_boxes, write_mask_png, write_pfm, write_png_image
from maskfuse.probmap import build_probability_map
from maskfuse.synthetic import make_scene

GOLDEN = Path(__file__).parent / "fixtures" / "eval"


def write_scene(d: Path, seed=0, size=32):
    s = make_scene(seed, size=size)
    write_png_image(s.image, d / "img.png")
    write_mask_png(s.mask_a, d / "a.png")
    write_mask_png(s.mask_b, d / "b.png")
    return s


def tiny_scene(d: Path):
    """12x12 scene whose masks disagree on 10 pixels, small enough for brute force."""
    s = make_scene(3, size=12, fraction=0.0)
    a, b = s.truth.copy(), s.truth.copy()
    rng = np.random.default_rng(0)
    flips = rng.choice(a.size, 10, replace=False)
    a.ravel()[flips[:5]] ^= 1
    b.ravel()[flips[5:]] ^= 1
    write_png_image(s.image, d / "img.png")
    write_mask_png(a, d / "a.png")
    write_mask_png(b, d / "b.png")
    return s, a, b


def pipeline_args(cmd, d, out, *extra):
    return [cmd, "--image", str(d / "img.png"), "--mask-a", str(d / "a.png"),
            "--mask-b", str(d / "b.png"), "--out", str(out), *extra]


def test_probmap_happy_path(tmp_path, capsys):
    write_scene(tmp_path)
    assert main(pipeline_args("probmap", tmp_path, tmp_path / "p.pfm", "--split", "4")) == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("patches fitted=")
    assert {"fitted", "fallback_fg", "fallback_bg", "skipped"} == {kv.split("=")[0] for kv in line.split()[1:]}
    prob = read_pfm(tmp_path / "p.pfm")
    assert prob.shape == (32, 32)


def test_probmap_mask_mismatch(tmp_path, capsys):
    write_scene(tmp_path)
    write_mask_png(np.zeros((20, 30), dtype=np.uint8), tmp_path / "b.png")
    assert main(pipeline_args("probmap", tmp_path, tmp_path / "p.pfm")) == 2
    err = capsys.readouterr().err
    assert "32x32" in err and "30x20" in err


@pytest.mark.parametrize("flag", [["--components", "0"], ["--split", "-1"], ["--components", "two"]])
def test_probmap_bad_flag(tmp_path, flag):
    write_scene(tmp_path)
    with pytest.raises(SystemExit) as exc:
        main(pipeline_args("probmap", tmp_path, tmp_path / "p.pfm", *flag))
    assert exc.value.code == 1


def test_missing_required_flag_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["reconcile", "--image", "x.png"])
    assert exc.value.code == 1


def test_missing_input_file(tmp_path, capsys):
    assert main(pipeline_args("probmap", tmp_path, tmp_path / "p.pfm")) == 2
    assert "img.png" in capsys.readouterr().err


def test_reconcile_identical_masks(tmp_path, capsys):
    s = write_scene(tmp_path)
    write_mask_png(s.mask_a, tmp_path / "b.png")
    assert main(pipeline_args("reconcile", tmp_path, tmp_path / "o.png", "--split", "4")) == 0
    assert "free=0" in capsys.readouterr().out
    np.testing.assert_array_equal(read_mask_png(tmp_path / "o.png"), s.mask_a)


def test_reconcile_lambda_zero_thresholds(tmp_path):
    s = write_scene(tmp_path)
    assert main(pipeline_args("reconcile", tmp_path, tmp_path / "o.png", "--lambda", "0", "--split", "4")) == 0
    out = read_mask_png(tmp_path / "o.png")
    prob = build_probability_map(s.image, s.mask_a, s.mask_b, PipelineConfig(split=4))
    amb = s.mask_a != s.mask_b
    np.testing.assert_array_equal(out[amb], (prob[amb] > 0.5).astype(np.uint8))
    np.testing.assert_array_equal(out[~amb], s.mask_a[~amb])


def test_reconcile_solvers_agree(tmp_path, capsys):
    tiny_scene(tmp_path)
    objectives = {}
    for solver in ("graphcut", "bruteforce"):
        args = pipeline_args("reconcile", tmp_path, tmp_path / f"{solver}.png", "--split", "2",
                             "--components", "2", "--solver", solver)
        assert main(args) == 0
        line = capsys.readouterr().out.strip()
        assert "free=10" in line
        objectives[solver] = line.split()[0]
    assert objectives["graphcut"] == objectives["bruteforce"]


def test_reconcile_bruteforce_cap(tmp_path, capsys):
    s = write_scene(tmp_path)
    free = int((s.mask_a != s.mask_b).sum())
    assert free > 25
    assert main(pipeline_args("reconcile", tmp_path, tmp_path / "o.png", "--solver", "bruteforce")) == 2
    assert f"got {free}" in capsys.readouterr().err


def test_reconcile_summary_format(tmp_path, capsys):
    write_scene(tmp_path)
    main(pipeline_args("reconcile", tmp_path, tmp_path / "o.png", "--split", "4"))
    keys = [kv.split("=")[0] for kv in capsys.readouterr().out.split()]
    assert keys == ["objective", "o_idf", "o_scf", "free", "time"]


def test_composability(tmp_path, capsys):
    write_scene(tmp_path, seed=5)
    assert main(pipeline_args("probmap", tmp_path, tmp_path / "p.pfm", "--seed", "9")) == 0
    assert main(pipeline_args("reconcile", tmp_path, tmp_path / "via.png", "--prob", str(tmp_path / "p.pfm"))) == 0
    assert main(pipeline_args("reconcile", tmp_path, tmp_path / "direct.png", "--seed", "9")) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert (tmp_path / "via.png").read_bytes() == (tmp_path / "direct.png").read_bytes()
    assert lines[1].split()[:4] == lines[2].split()[:4]


def test_reconcile_prob_dimension_mismatch(tmp_path):
    write_scene(tmp_path)
    write_pfm(np.full((4, 4), 0.5, dtype=np.float32), tmp_path / "p.pfm")
    assert main(pipeline_args("reconcile", tmp_path, tmp_path / "o.png", "--prob", str(tmp_path / "p.pfm"))) == 2


def test_defaults_when_no_flags(tmp_path, capsys):
    write_scene(tmp_path, size=40)
    main(pipeline_args("reconcile", tmp_path, tmp_path / "default.png"))
    main(pipeline_args("reconcile", tmp_path, tmp_path / "explicit.png", "--components", "5", "--split", "10",
                       "--theta", "20", "--lambda", "2", "--clip", "100", "--seed", "0", "--solver", "graphcut"))
    lines = capsys.readouterr().out.strip().splitlines()
    assert (tmp_path / "default.png").read_bytes() == (tmp_path / "explicit.png").read_bytes()
    assert lines[0].split()[:4] == lines[1].split()[:4]


def test_config_file_precedence(tmp_path, capsys):
    write_scene(tmp_path)
    (tmp_path / "c.cfg").write_text("split=4\ncomponents=2\n")
    main(pipeline_args("probmap", tmp_path, tmp_path / "cfg.pfm", "--config", str(tmp_path / "c.cfg"), "--components", "3"))
    main(pipeline_args("probmap", tmp_path, tmp_path / "flags.pfm", "--split", "4", "--components", "3"))
    assert (tmp_path / "cfg.pfm").read_bytes() == (tmp_path / "flags.pfm").read_bytes()
    (tmp_path / "bad.cfg").write_text("split=zero\n")
    assert main(pipeline_args("probmap", tmp_path, tmp_path / "x.pfm", "--config", str(tmp_path / "bad.cfg"))) == 1


def test_determinism(tmp_path, capsys):
    write_scene(tmp_path, seed=11)
    for k in (1, 2):
        main(pipeline_args("probmap", tmp_path, tmp_path / f"p{k}.pfm", "--split", "4", "--seed", "3"))
        main(pipeline_args("reconcile", tmp_path, tmp_path / f"o{k}.png", "--split", "4", "--seed", "3"))
    out = capsys.readouterr().out.strip().splitlines()
    assert (tmp_path / "p1.pfm").read_bytes() == (tmp_path / "p2.pfm").read_bytes()
    assert (tmp_path / "o1.png").read_bytes() == (tmp_path / "o2.png").read_bytes()
    assert out[0] == out[2]
    assert out[1].split()[:4] == out[3].split()[:4]


def test_oracle_check_small(capsys):
    assert main(["oracle-check", "--size", "3x3", "--trials", "50", "--seed", "7"]) == 0
    assert capsys.readouterr().out.strip() == "oracle-check size=3x3 trials=50 pass=50 fail=0"


@pytest.mark.parametrize("argv", [["--size", "6x6"], ["--trials", "0"], ["--size", "4by4"]])
def test_oracle_check_usage_errors(argv):
    assert main(["oracle-check", *argv]) == 1


def test_evaluate_golden(tmp_path):
    out = tmp_path / "report.csv"
    assert main(["evaluate", "--pred", str(GOLDEN / "pred"), "--gt", str(GOLDEN / "gt"), "--out", str(out)]) == 0
    assert out.read_bytes() == (GOLDEN / "golden.csv").read_bytes()


def test_evaluate_stdout_and_unpaired(tmp_path, capsys):
    assert main(["evaluate", "--pred", str(GOLDEN / "pred"), "--gt", str(GOLDEN / "gt")]) == 0
    assert capsys.readouterr().out == (GOLDEN / "golden.csv").read_text()
    (tmp_path / "pred").mkdir()
    (tmp_path / "gt").mkdir()
    write_mask_png(np.ones((2, 2), dtype=np.uint8), tmp_path / "pred" / "solo.png")
    assert main(["evaluate", "--pred", str(tmp_path / "pred"), "--gt", str(tmp_path / "gt")]) == 2
    assert "solo" in capsys.readouterr().err


def test_boxes_from_mask_two_blobs(tmp_path, capsys):
    m = np.zeros((10, 12), dtype=np.uint8)
    m[1:3, 1:4] = 1
    m[6:9, 7:11] = 1
    write_mask_png(m, tmp_path / "m.png")
    assert main(["boxes-from-mask", "--mask", str(tmp_path / "m.png")]) == 0
    assert capsys.readouterr().out.splitlines() == ["1 1 4 3", "7 6 11 9"]
    assert main(["boxes-from-mask", "--mask", str(tmp_path / "m.png"), "--out", str(tmp_path / "b.txt")]) == 0
    assert (tmp_path / "b.txt").read_text() == "1 1 4 3\n7 6 11 9\n"


def test_weakloss_perfect_projection(tmp_path, capsys):
    boxes = [(1, 1, 4, 3), (7, 6, 11, 9)]
    m = np.zeros((10, 12), dtype=np.float32)
    for x0, y0, x1, y1 in boxes:
        m[y0:y1, x0:x1] = 1
    write_pfm(m, tmp_path / "m.pfm")
    write_boxes(boxes, tmp_path / "b.txt")
    assert main(["weakloss", "--mask", str(tmp_path / "m.pfm"), "--boxes", str(tmp_path / "b.txt"),
                 "--loss", "boxinst-proj"]) == 0
    assert capsys.readouterr().out.strip() == "loss=0 term=boxinst-proj"


def test_weakloss_all_terms(tmp_path, capsys):
    write_pfm(np.full((6, 6), 0.5, dtype=np.float32), tmp_path / "m.pfm")
    write_boxes([(1, 1, 4, 4)], tmp_path / "b.txt")
    write_png_image(np.full((6, 6, 3), 90, dtype=np.uint8), tmp_path / "img.png")
    argv = ["weakloss", "--mask", str(tmp_path / "m.pfm"), "--boxes", str(tmp_path / "b.txt"),
            "--image", str(tmp_path / "img.png")]
    for term in ("mil-unary", "mil-pairwise", "boxinst-proj", "boxinst-pairwise"):
        argv += ["--loss", term]
    assert main(argv) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    # projection per axis: 1 - 2*(3*0.5)/(3*0.25 + 3) = 0.2, two axes
    assert lines == ["loss=1.38629 term=mil-unary", "loss=0 term=mil-pairwise",
                     "loss=0.4 term=boxinst-proj", "loss=0.693147 term=boxinst-pairwise"]


def test_weakloss_requires_boxes(tmp_path):
    write_pfm(np.zeros((3, 3), dtype=np.float32), tmp_path / "m.pfm")
    assert main(["weakloss", "--mask", str(tmp_path / "m.pfm"), "--loss", "mil-unary"]) == 1


def test_weakloss_png_mask(tmp_path, capsys):
    Image.fromarray(np.full((4, 4), 255, dtype=np.uint8), mode="L").save(tmp_path / "m.png")
    assert main(["weakloss", "--mask", str(tmp_path / "m.png"), "--loss", "mil-pairwise"]) == 0
    assert capsys.readouterr().out.strip() == "loss=0 term=mil-pairwise"


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "maskfuse", "oracle-check", "--size", "2x2", "--trials", "5"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == "oracle-check size=2x2 trials=5 pass=5 fail=0"
    proc = subprocess.run([sys.executable, "-m", "maskfuse", "oracle-check", "--size", "9x9"],
                          capture_output=True, text=True)
    assert proc.returncode == 1
