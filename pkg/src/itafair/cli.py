"""Command-line entry point wiring the library into one workflow.

Subcommands: estimate, compare, distribution, fairness, split, synth, report.
Exit codes: 0 success, 1 usage error, 2 data error. Every run echoes its
resolved configuration to stderr so results can be reproduced.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__, analysis, splits, synthgen
from .colorspace import ItaVariant, SkinTypeThresholds
from .errors import ItafairError
from .estimators import (
    EstimatorConfig,
    IntervalGate,
    Method,
    Status,
    read_tones_csv,
    run_batch,
    write_tones_csv,
)
from .thresholding import GhtParams

METHOD_FLAGS = {
    "dlhss": (Method.DLHSS, ItaVariant.ARCTAN2),
    "colorseg": (Method.COLOR_SEG, ItaVariant.ARCTAN2),
    "rp": (Method.RANDOM_PATCH, ItaVariant.ARCTAN),
    "rp2": (Method.RANDOM_PATCH, ItaVariant.ARCTAN2),
    "ght": (Method.GHT, ItaVariant.ARCTAN2),
}

LABELS_CSV_HEADER = ("image_id", "label")

_CONFIG_KEYS = (
    "thresholds", "side", "patch_size", "min_patch_usable_frac",
    "hsv_h", "hsv_s", "hsv_v", "ycrcb_y", "ycrcb_cr", "ycrcb_cb",
    "blackhat_kernel", "blackhat_threshold",
    "ght_nu", "ght_tau", "ght_kappa", "ght_omega",
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit code 1 instead of argparse's 2
        raise _UsageError(message)


def _iter_config_lines(path: Path):
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def parse_config_file(path) -> dict[str, str]:
    """key=value lines; blank lines and # comments ignored."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such config file: {path}")
    values: dict[str, str] = {}
    for lineno, raw in _iter_config_lines(path):
        key, eq, value = raw.partition("=")
        key, value = key.strip(), value.strip()
        if not eq or key not in _CONFIG_KEYS:
            raise ItafairError(f"{path}: line {lineno}: unknown config entry {raw!r}")
        values[key] = value
    return values


def _pair(text: str) -> tuple[float, float]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise ValueError(f"expected lo:hi, got {text!r}")
    return float(lo), float(hi)


def build_estimator_config(options: dict[str, str]) -> EstimatorConfig:
    cfg = EstimatorConfig()
    if "thresholds" in options:
        cutoffs = tuple(float(v) for v in options["thresholds"].split(","))
        cfg = replace(cfg, thresholds=SkinTypeThresholds(cutoffs))
    for key, attr, conv in (
        ("side", "side", int),
        ("patch_size", "patch_size", int),
        ("min_patch_usable_frac", "min_patch_usable_frac", float),
        ("blackhat_kernel", "blackhat_kernel", int),
        ("blackhat_threshold", "blackhat_threshold", int),
    ):
        if key in options:
            cfg = replace(cfg, **{attr: conv(options[key])})
    hsv = {k: _pair(options[f"hsv_{k}"]) for k in "hsv" if f"hsv_{k}" in options}
    if hsv:
        lo = list(cfg.hsv_gate.lo)
        hi = list(cfg.hsv_gate.hi)
        for i, k in enumerate("hsv"):
            if k in hsv:
                lo[i], hi[i] = hsv[k]
        cfg = replace(cfg, hsv_gate=IntervalGate(tuple(lo), tuple(hi)))
    ycc = {k: _pair(options[f"ycrcb_{k}"]) for k in ("y", "cr", "cb") if f"ycrcb_{k}" in options}
    if ycc:
        lo = list(cfg.ycrcb_gate.lo)
        hi = list(cfg.ycrcb_gate.hi)
        for i, k in enumerate(("y", "cr", "cb")):
            if k in ycc:
                lo[i], hi[i] = ycc[k]
        cfg = replace(cfg, ycrcb_gate=IntervalGate(tuple(lo), tuple(hi)))
    ght_kwargs = {
        k: float(options[f"ght_{k}"]) for k in ("nu", "tau", "kappa", "omega")
        if f"ght_{k}" in options
    }
    if ght_kwargs:
        base = cfg.ght
        cfg = replace(cfg, ght=GhtParams(
            nu=ght_kwargs.get("nu", base.nu),
            tau=ght_kwargs.get("tau", base.tau),
            kappa=ght_kwargs.get("kappa", base.kappa),
            omega=ght_kwargs.get("omega", base.omega),
        ))
    return cfg


def config_lines(cfg: EstimatorConfig) -> list[str]:
    return [
        f"thresholds={','.join(f'{c:g}' for c in cfg.thresholds.cutoffs)}",
        f"side={cfg.side}",
        f"patch_size={cfg.patch_size}",
        f"min_patch_usable_frac={cfg.min_patch_usable_frac:g}",
        f"hsv_h={cfg.hsv_gate.lo[0]:g}:{cfg.hsv_gate.hi[0]:g}",
        f"hsv_s={cfg.hsv_gate.lo[1]:g}:{cfg.hsv_gate.hi[1]:g}",
        f"hsv_v={cfg.hsv_gate.lo[2]:g}:{cfg.hsv_gate.hi[2]:g}",
        f"ycrcb_y={cfg.ycrcb_gate.lo[0]:g}:{cfg.ycrcb_gate.hi[0]:g}",
        f"ycrcb_cr={cfg.ycrcb_gate.lo[1]:g}:{cfg.ycrcb_gate.hi[1]:g}",
        f"ycrcb_cb={cfg.ycrcb_gate.lo[2]:g}:{cfg.ycrcb_gate.hi[2]:g}",
        f"blackhat_kernel={cfg.blackhat_kernel}",
        f"blackhat_threshold={cfg.blackhat_threshold}",
        f"ght_nu={cfg.ght.nu:g}",
        f"ght_tau={cfg.ght.tau:g}",
        f"ght_kappa={cfg.ght.kappa:g}",
        f"ght_omega={cfg.ght.omega:g}",
    ]


def default_config_hash() -> str:
    payload = "\n".join(config_lines(EstimatorConfig())).encode()
    return hashlib.sha256(payload).hexdigest()[:12]


def _echo_config(cfg: EstimatorConfig, extra: dict | None = None) -> None:
    for line in config_lines(cfg):
        print(f"config: {line}", file=sys.stderr)
    for key, value in (extra or {}).items():
        print(f"config: {key}={value}", file=sys.stderr)


def _resolved_config(args) -> EstimatorConfig:
    options: dict[str, str] = {}
    if getattr(args, "config", None):
        options.update(parse_config_file(args.config))
    # flags win over the config file
    if getattr(args, "side", None) is not None:
        options["side"] = str(args.side)
    if getattr(args, "thresholds", None):
        options["thresholds"] = args.thresholds
    return build_estimator_config(options)


def read_labels_csv(path) -> list[tuple[str, str]]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such labels file: {path}")
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != LABELS_CSV_HEADER:
            raise ItafairError(f"{path}: unexpected labels CSV header {header}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise ItafairError(f"{path}: row {lineno} has {len(row)} fields")
            records.append((row[0], row[1]))
    return records


# ---------------------------------------------------------------------------
# Subcommand bodies.

def _cmd_estimate(args) -> int:
    cfg = _resolved_config(args)
    method, variant = METHOD_FLAGS[args.method]
    _echo_config(cfg, {"command": "estimate", "method": args.method, "images": args.images})
    results = run_batch(
        args.images,
        method,
        cfg=cfg,
        variant=variant,
        mask_dir=args.masks,
        lesion_mask_dir=args.lesion_masks,
    )
    write_tones_csv(results, args.out)
    n_ok = sum(1 for r in results if r.status is Status.OK)
    print(f"estimated {len(results)} images ({n_ok} ok) -> {args.out}")
    return 0


def _cmd_compare(args) -> int:
    _echo_config(EstimatorConfig(), {
        "command": "compare", "a": args.a, "b": args.b, "dark_cutoff": args.dark_cutoff,
    })
    res_a = read_tones_csv(args.a)
    res_b = read_tones_csv(args.b)
    matrix = analysis.agreement_matrix(res_a, res_b, dark_cutoff=args.dark_cutoff)
    analysis.write_agreement_csv(matrix, args.out)
    dark_path = Path(args.out).with_suffix(".dark_ids.txt")
    dark_path.write_text("".join(f"{i}\n" for i in matrix.joint_dark_ids))
    print(analysis.agreement_table(matrix, Path(args.a).stem, Path(args.b).stem))
    print(f"matrix -> {args.out}; joint-dark ids -> {dark_path}")
    return 0


def _cmd_distribution(args) -> int:
    _echo_config(EstimatorConfig(), {"command": "distribution", "tones": args.tones})
    results = read_tones_csv(args.tones)
    dist = analysis.type_distribution(results)
    print(analysis.distribution_table(dist, title=f"Skin type distribution ({args.tones})"))
    if args.out:
        analysis.write_distribution_csv(dist, args.out)
    if args.svg:
        analysis.save_bar_chart_svg(
            [t for t in sorted(dist)],
            [dist[t][1] for t in sorted(dist)],
            args.svg,
            title="Skin type distribution (%)",
            y_max=100.0,
        )
    return 0


def _cmd_fairness(args) -> int:
    _echo_config(EstimatorConfig(), {
        "command": "fairness", "preds": args.preds, "tones": args.tones,
    })
    preds = analysis.read_predictions_csv(args.preds)
    tones = read_tones_csv(args.tones)
    reports = analysis.fairness_by_type(preds, tones)
    print(analysis.fairness_table(reports))
    if args.out:
        analysis.write_fairness_csv(reports, args.out)
    if args.svg:
        analysis.save_bar_chart_svg(
            [t for t in sorted(reports)],
            [reports[t].balanced_accuracy for t in sorted(reports)],
            args.svg,
            title="Balanced accuracy per skin type",
            y_max=1.0,
        )
    return 0


def _cmd_split(args) -> int:
    _echo_config(EstimatorConfig(), {
        "command": "split", "mode": args.mode, "labels": args.labels, "seed": args.seed,
    })
    records = read_labels_csv(args.labels)
    if args.mode == "baseline":
        if args.test_size is not None:
            assignment = splits.stratified_split_fixed_test(records, args.test_size, seed=args.seed)
        else:
            ratios = tuple(float(r) for r in args.ratios.split(","))
            assignment = splits.stratified_split(records, ratios, seed=args.seed)
    else:
        if not args.tones:
            raise _UsageError("--tones is required for --mode datashift")
        tones = read_tones_csv(args.tones)
        assignment = splits.datashift_split(tones, records, seed=args.seed, cutoff=args.cutoff)
    splits.write_split_csv(assignment, args.out)
    sizes = {s.value: len(assignment.ids_in(s)) for s in splits.Subset}
    print(f"split sizes: {sizes} -> {args.out}")
    return 0


def _cmd_synth(args) -> int:
    corpus = synthgen.parse_corpus_spec(args.spec)
    if args.seed is not None:
        corpus = replace(corpus, seed=args.seed)
    _echo_config(EstimatorConfig(), {
        "command": "synth", "spec": args.spec, "count": corpus.count, "seed": corpus.seed,
    })
    paths = synthgen.generate_corpus(corpus, args.out_dir)
    print(f"wrote {corpus.count} images under {args.out_dir} "
          f"(ground truth: {paths['ground_truth']})")
    return 0


def _cmd_report(args) -> int:
    _echo_config(EstimatorConfig(), {"command": "report", "out": args.out})
    tone_sets = []
    for path in args.tones:
        tone_sets.append((Path(path).stem, read_tones_csv(path)))
    sections = []
    svg_dir = Path(args.svg_dir) if args.svg_dir else None
    if svg_dir:
        svg_dir.mkdir(parents=True, exist_ok=True)
    for name, results in tone_sets:
        dist = analysis.type_distribution(results)
        sections.append(analysis.distribution_table(dist, title=f"Distribution: {name}"))
        if svg_dir:
            analysis.save_bar_chart_svg(
                sorted(dist), [dist[t][1] for t in sorted(dist)],
                svg_dir / f"distribution_{name}.svg",
                title=f"Distribution {name} (%)", y_max=100.0,
            )
    for i in range(len(tone_sets)):
        for j in range(i + 1, len(tone_sets)):
            (name_a, res_a), (name_b, res_b) = tone_sets[i], tone_sets[j]
            matrix = analysis.agreement_matrix(res_a, res_b, dark_cutoff=args.dark_cutoff)
            sections.append(analysis.agreement_table(matrix, name_a, name_b))
    if args.preds:
        preds = analysis.read_predictions_csv(args.preds)
        for name, results in tone_sets:
            try:
                reports = analysis.fairness_by_type(preds, results)
            except ItafairError as exc:
                sections.append(f"Fairness vs {name}: skipped ({exc})")
                continue
            sections.append(f"Fairness vs {name}\n" + analysis.fairness_table(reports))
            if svg_dir:
                analysis.save_bar_chart_svg(
                    sorted(reports),
                    [reports[t].balanced_accuracy for t in sorted(reports)],
                    svg_dir / f"fairness_{name}.svg",
                    title=f"BA per skin type ({name})", y_max=1.0,
                )
    text = "\n\n".join(sections) + "\n"
    Path(args.out).write_text(text)
    print(f"report -> {args.out}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="itafair", description=__doc__)
    parser.add_argument(
        "--version", action="version",
        version=f"itafair {__version__} (default config {default_config_hash()})",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("estimate", help="estimate skin tones for an image directory")
    p.add_argument("--images", required=True, help="directory of PNG/JPEG images")
    p.add_argument("--method", required=True, choices=sorted(METHOD_FLAGS))
    p.add_argument("--out", required=True, help="output tones CSV")
    p.add_argument("--masks", help="healthy-skin mask dir (required for dlhss)")
    p.add_argument("--lesion-masks", help="optional lesion mask dir (rp/rp2 diagnostics)")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--side", type=int, help="standardization side override")
    p.add_argument("--thresholds", help="comma-separated skin-type cutoffs")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("compare", help="agreement matrix between two tones CSVs")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--out", required=True, help="output matrix CSV")
    p.add_argument("--dark-cutoff", type=float, default=analysis.DEFAULT_DARK_CUTOFF_DEG)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("distribution", help="skin type distribution of a tones CSV")
    p.add_argument("--tones", required=True)
    p.add_argument("--out", help="optional output CSV")
    p.add_argument("--svg", help="optional SVG bar chart")
    p.set_defaults(func=_cmd_distribution)

    p = sub.add_parser("fairness", help="per-skin-type metrics for predictions")
    p.add_argument("--preds", required=True, help="predictions CSV")
    p.add_argument("--tones", required=True, help="tones CSV")
    p.add_argument("--out", help="optional output CSV")
    p.add_argument("--svg", help="optional SVG bar chart")
    p.set_defaults(func=_cmd_fairness)

    p = sub.add_parser("split", help="baseline or data-shift split generation")
    p.add_argument("--mode", required=True, choices=("baseline", "datashift"))
    p.add_argument("--labels", required=True, help="CSV with header image_id,label")
    p.add_argument("--out", required=True, help="output split CSV")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ratios", default="0.57,0.14,0.29", help="baseline train,val,test")
    p.add_argument("--test-size", type=int, help="baseline: exact test-set size")
    p.add_argument("--tones", help="datashift: tones CSV")
    p.add_argument("--cutoff", type=float, default=splits.DEFAULT_SHIFT_CUTOFF_DEG)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("synth", help="generate a synthetic corpus from a spec file")
    p.add_argument("--spec", required=True, help="key=value corpus spec file")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, help="override the spec seed")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("report", help="bundle distributions/agreement/fairness into one report")
    p.add_argument("--tones", action="append", required=True, help="tones CSV (repeatable)")
    p.add_argument("--preds", help="optional predictions CSV")
    p.add_argument("--out", required=True, help="output text report")
    p.add_argument("--svg-dir", help="optional directory for SVG charts")
    p.add_argument("--dark-cutoff", type=float, default=analysis.DEFAULT_DARK_CUTOFF_DEG)
    p.set_defaults(func=_cmd_report)

    return parser


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ItafairError, FileNotFoundError, NotADirectoryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
