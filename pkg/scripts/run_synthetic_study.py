#!/usr/bin/env python3
"""End-to-end desk-scale study on a synthetic corpus.

Generates a corpus with known ground-truth tones, runs all five estimator
variants, quantifies their pairwise agreement, simulates a lesion classifier
whose accuracy degrades with darker true tone, and shows how the fairness
read-out changes with the tone estimation method. Finishes with baseline and
data-shift splits.

Usage:
    python scripts/run_synthetic_study.py --out-dir study_out [--seed 7] [--count 40]
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from itafair import analysis, splits
from itafair.colorspace import ItaVariant
from itafair.estimators import (
    EstimatorConfig,
    Method,
    Status,
    read_tones_csv,
    run_batch,
    write_tones_csv,
)
from itafair.synthgen import CorpusSpec, generate_corpus

METHOD_RUNS = {
    "dlhss": dict(method=Method.DLHSS),
    "colorseg": dict(method=Method.COLOR_SEG),
    "rp": dict(method=Method.RANDOM_PATCH, variant=ItaVariant.ARCTAN),
    "rp2": dict(method=Method.RANDOM_PATCH, variant=ItaVariant.ARCTAN2),
    "ght": dict(method=Method.GHT),
}


def simulate_predictions(truths, rng):
    """Classifier whose per-image accuracy drops with darker true skin type."""
    records = []
    for k, truth in enumerate(truths):
        true_label = analysis.ISIC18_CLASSES[k % len(analysis.ISIC18_CLASSES)]
        p_correct = max(0.35, 0.95 - 0.10 * (truth.skin_type - 1))
        if rng.random() < p_correct:
            pred = true_label
        else:
            others = [c for c in analysis.ISIC18_CLASSES if c != true_label]
            pred = others[int(rng.integers(len(others)))]
        records.append(analysis.PredictionRecord(truth.image_id, true_label, pred))
    return records


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="study_out")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--count", type=int, default=40)
    args = parser.parse_args(argv)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = EstimatorConfig()
    rng = np.random.default_rng(args.seed)

    print(f"[1/5] generating {args.count} synthetic images ...")
    corpus = CorpusSpec(count=args.count, seed=args.seed,
                        hair_count=2, hair_width=2, noise_sigma=1.5)
    paths = generate_corpus(corpus, out / "corpus")
    truths = read_tones_csv(paths["ground_truth"])
    truth_dist = analysis.type_distribution(truths)
    print(analysis.distribution_table(truth_dist, title="Ground-truth distribution"))

    print("\n[2/5] estimating tones with all methods ...")
    tones = {}
    for name, kwargs in METHOD_RUNS.items():
        mask_dir = paths["masks"] if kwargs["method"] is Method.DLHSS else None
        results = run_batch(paths["images"], cfg=cfg, mask_dir=mask_dir,
                            lesion_mask_dir=paths["lesions"], **kwargs)
        tones[name] = results
        write_tones_csv(results, out / f"tones_{name}.csv")
        n_ok = sum(1 for r in results if r.status is Status.OK)
        print(f"  {name:10s} {n_ok}/{len(results)} ok")

    print("\n[3/5] agreement between methods ...")
    names = list(tones)
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            a, b = names[i], names[j]
            m = analysis.agreement_matrix(tones[a], tones[b])
            diag = int(np.trace(m.counts))
            print(f"  {a:10s} vs {b:10s}: {diag}/{m.n_joined} on the diagonal, "
                  f"{len(m.joint_dark_ids)} jointly dark")
            analysis.write_agreement_csv(m, out / f"agreement_{a}_vs_{b}.csv")

    print("\n[4/5] fairness of one synthetic classifier under each tone method ...")
    preds = simulate_predictions(truths, rng)
    analysis.write_predictions_csv(preds, out / "predictions.csv")
    for name in names:
        try:
            reports = analysis.fairness_by_type(preds, tones[name])
        except Exception as exc:
            print(f"  {name}: skipped ({exc})")
            continue
        ba = {t: round(r.balanced_accuracy, 3) for t, r in reports.items()}
        print(f"  {name:10s} BA per type: {ba}")
        analysis.write_fairness_csv(reports, out / f"fairness_{name}.csv")
        analysis.save_bar_chart_svg(
            sorted(reports), [reports[t].balanced_accuracy for t in sorted(reports)],
            out / f"fairness_{name}.svg",
            title=f"BA per skin type ({name})", y_max=1.0,
        )

    print("\n[5/5] baseline and data-shift splits ...")
    labels = [(t.image_id, analysis.ISIC18_CLASSES[k % 7]) for k, t in enumerate(truths)]
    baseline = splits.stratified_split(labels, seed=args.seed)
    splits.write_split_csv(baseline, out / "split_baseline.csv")
    sizes = {s.value: len(baseline.ids_in(s)) for s in splits.Subset}
    print(f"  baseline sizes: {sizes}")
    for name in ("dlhss", "rp"):
        try:
            shift = splits.datashift_split(tones[name], labels, seed=args.seed)
        except Exception as exc:
            print(f"  datashift[{name}]: skipped ({exc})")
            continue
        sizes = {s.value: len(shift.ids_in(s)) for s in splits.Subset}
        print(f"  datashift[{name}] sizes: {sizes}")
        splits.write_split_csv(shift, out / f"split_datashift_{name}.csv")

    print(f"\ndone; outputs under {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
