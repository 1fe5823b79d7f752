"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data or validation error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import energy, imgio, metrics, probmap, weakloss
from .config import SOLVERS, load_config

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
LOSSES = ("mil-unary", "mil-pairwise", "boxinst-proj", "boxinst-pairwise")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _config_from(args):
    try:
        return load_config(
            args.config,
            components=getattr(args, "components", None),
            split=getattr(args, "split", None),
            theta=getattr(args, "theta", None),
            lambda_=getattr(args, "lambda_", None),
            clip=getattr(args, "clip", None),
            seed=getattr(args, "seed", None),
            solver=getattr(args, "solver", None),
        )
    except (ValueError, OSError) as exc:
        raise UsageError(str(exc)) from exc


def _read_inputs(args):
    image = imgio.read_png_image(args.image)
    mask_a = imgio.read_mask_png(args.mask_a)
    mask_b = imgio.read_mask_png(args.mask_b)
    if mask_a.shape != mask_b.shape:
        raise ValueError(
            f"mask dimension mismatch: mask-a is {mask_a.shape[1]}x{mask_a.shape[0]}, "
            f"mask-b is {mask_b.shape[1]}x{mask_b.shape[0]}"
        )
    if image.shape[:2] != mask_a.shape:
        raise ValueError(
            f"image is {image.shape[1]}x{image.shape[0]} but masks are {mask_a.shape[1]}x{mask_a.shape[0]}"
        )
    return image, mask_a, mask_b


def cmd_probmap(args) -> int:
    cfg = _config_from(args)
    image, mask_a, mask_b = _read_inputs(args)
    prob, stats = probmap.compute_probability_map(image, mask_a, mask_b, cfg)
    imgio.write_pfm(prob, args.out)
    print(stats.summary())
    return EXIT_OK


def cmd_reconcile(args) -> int:
    cfg = _config_from(args)
    image, mask_a, mask_b = _read_inputs(args)
    if args.prob is not None:
        prob = imgio.read_pfm(args.prob)
        if prob.shape != mask_a.shape:
            raise ValueError(f"probability map is {prob.shape[1]}x{prob.shape[0]}, masks are {mask_a.shape[1]}x{mask_a.shape[0]}")
    else:
        prob = probmap.build_probability_map(image, mask_a, mask_b, cfg)
    problem = energy.build_problem(image, prob, probmap.agreement(mask_a, mask_b), cfg)
    if cfg.solver == "bruteforce" and problem.free_count > energy.BRUTEFORCE_CAP:
        raise ValueError(
            f"bruteforce solver is capped at {energy.BRUTEFORCE_CAP} ambiguous pixels, got {problem.free_count}"
        )
    result = energy.solve(problem, cfg.solver)
    imgio.write_mask_png(result.labels, args.out)
    print(result.summary())
    return EXIT_OK


def oracle_instance(seed: int, trial: int, height: int, width: int) -> energy.EnergyProblem:
    """The random instance checked by oracle-check for (seed, trial)."""
    return energy.random_problem(height, width, np.random.default_rng([seed, trial]))


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"--size must look like WxH, got {text!r}") from None
    if w < 1 or h < 1:
        raise UsageError("--size dimensions must be positive")
    return w, h


def cmd_oracle_check(args) -> int:
    w, h = _parse_size(args.size)
    if w * h > energy.BRUTEFORCE_CAP:
        raise UsageError(f"--size {w}x{h} has {w * h} pixels, above the brute-force cap of {energy.BRUTEFORCE_CAP}")
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    failures = 0
    for trial in range(args.trials):
        problem = oracle_instance(args.seed, trial, h, w)
        fast = energy.solve_graphcut(problem)
        slow = energy.solve_bruteforce(problem)
        if abs(fast.objective - slow.objective) > 1e-9:
            failures += 1
            print(
                f"FAIL size={w}x{h} seed={args.seed} trial={trial} "
                f"graphcut={fast.objective!r} bruteforce={slow.objective!r}",
                file=sys.stderr,
            )
    print(f"oracle-check size={w}x{h} trials={args.trials} pass={args.trials - failures} fail={failures}")
    return EXIT_OK if failures == 0 else EXIT_DATA


def cmd_evaluate(args) -> int:
    preds = sorted(Path(args.pred).glob("*.png"))
    gts = sorted(Path(args.gt).glob("*.png"))
    report = metrics.evaluate_dir(preds, gts)
    csv = report.to_csv()
    if args.out:
        Path(args.out).write_text(csv, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(csv)
    return EXIT_OK


def cmd_boxes_from_mask(args) -> int:
    boxes = metrics.boxes_from_mask(imgio.read_mask_png(args.mask))
    if args.out:
        imgio.write_boxes(boxes, args.out)
    else:
        for x0, y0, x1, y1 in boxes:
            print(f"{x0} {y0} {x1} {y1}")
    return EXIT_OK


def _read_soft_mask(path):
    if str(path).lower().endswith(".pfm"):
        return imgio.read_pfm(path).astype(np.float64)
    return imgio.read_mask_png(path).astype(np.float64)


def cmd_weakloss(args) -> int:
    mask = _read_soft_mask(args.mask)
    h, w = mask.shape
    boxes = imgio.read_boxes(args.boxes) if args.boxes else None
    for term in args.loss:
        if term in ("mil-unary", "boxinst-proj") and boxes is None:
            raise UsageError(f"--loss {term} requires --boxes")
        if term == "boxinst-pairwise" and args.image is None:
            raise UsageError("--loss boxinst-pairwise requires --image")
        if term == "mil-unary":
            value = weakloss.mil_unary(mask, weakloss.build_bags(boxes, w, h))
        elif term == "mil-pairwise":
            value = weakloss.mil_pairwise(mask, args.neighbors)
        elif term == "boxinst-proj":
            value = weakloss.boxinst_projection(mask, boxes)
        else:
            value = weakloss.boxinst_pairwise(mask, imgio.read_png_image(args.image), args.tau, args.theta_b)
        print(f"loss={value:.6g} term={term}")
    return EXIT_OK


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _add_pipeline_flags(p, *, solver: bool):
    p.add_argument("--image", required=True)
    p.add_argument("--mask-a", required=True)
    p.add_argument("--mask-b", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--components", type=_positive_int, help="GMM components (default 5)")
    p.add_argument("--split", type=_positive_int, help="patch grid per dimension (default 10)")
    p.add_argument("--clip", type=float, help="log-likelihood clip bound (default 100)")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    if solver:
        p.add_argument("--prob", help="precomputed probability map (PFM)")
        p.add_argument("--lambda", dest="lambda_", type=float, help="smoothness weight (default 2)")
        p.add_argument("--theta", type=float, help="colour similarity temperature (default 20)")
        p.add_argument("--solver", choices=SOLVERS, help="default graphcut")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="maskfuse", description="Reconcile two binary masks of an RGB image.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("probmap", help="per-patch GMM foreground probability map")
    _add_pipeline_flags(p, solver=False)
    p.set_defaults(func=cmd_probmap)

    p = sub.add_parser("reconcile", help="solve the labeling program over ambiguous pixels")
    _add_pipeline_flags(p, solver=True)
    p.set_defaults(func=cmd_reconcile)

    p = sub.add_parser("oracle-check", help="graph cut vs exhaustive enumeration on random instances")
    p.add_argument("--size", default="4x4", help="WxH, at most 25 pixels")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("evaluate", help="Dice / precision / recall over paired mask directories")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("boxes-from-mask", help="tight boxes of 8-connected components")
    p.add_argument("--mask", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_boxes_from_mask)

    p = sub.add_parser("weakloss", help="evaluate box-supervision losses on a mask")
    p.add_argument("--mask", required=True, help="PFM soft mask or PNG binary mask")
    p.add_argument("--boxes")
    p.add_argument("--image")
    p.add_argument("--loss", action="append", choices=LOSSES, required=True)
    p.add_argument("--neighbors", type=int, choices=(4, 8), default=4)
    p.add_argument("--tau", type=float, default=0.3)
    p.add_argument("--theta-b", type=float, default=15.0)
    p.set_defaults(func=cmd_weakloss)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"maskfuse {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"maskfuse {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
