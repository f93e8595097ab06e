"""Distribution, agreement and subgroup fairness analytics over tone estimates.

Only rows with status Ok enter any aggregate; everything else is excluded and
counted separately. Balanced accuracy is the unweighted mean of per-class
recalls over the classes actually present in the (sub)group's ground truth.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyInputError, ItafairError, NoOverlapError
from .estimators import ItaResult, Status

ISIC18_CLASSES = ("MEL", "NV", "BCC", "AKIEC", "BKL", "DF", "VASC")

PREDICTIONS_CSV_HEADER = ("image_id", "true_label", "pred_label")

DEFAULT_DARK_CUTOFF_DEG = 28.0

N_SKIN_TYPES = 6


@dataclass(frozen=True)
class PredictionRecord:
    image_id: str
    true_label: str
    pred_label: str

    def __post_init__(self) -> None:
        for label in (self.true_label, self.pred_label):
            if label not in ISIC18_CLASSES:
                raise ValueError(f"unknown lesion class {label!r}")


@dataclass(frozen=True)
class AgreementMatrix:
    """6x6 joint skin-type counts for two estimation runs on the same images."""

    counts: np.ndarray  # (6, 6) int, rows = method A, columns = method B
    joint_dark_ids: tuple[str, ...]
    n_excluded: int  # images missing or non-Ok in either input

    @property
    def n_joined(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class MetricsReport:
    n: int
    balanced_accuracy: float
    recall_per_class: dict[str, float]  # NaN for classes with no support
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    support: dict[str, int]
    undefined_precision_classes: tuple[str, ...]


def _ok_by_id(results) -> dict[str, ItaResult]:
    out: dict[str, ItaResult] = {}
    for r in results:
        if r.image_id in out:
            raise ValueError(f"duplicate image id {r.image_id!r} in tone results")
        out[r.image_id] = r
    return {k: v for k, v in out.items() if v.status is Status.OK}


def type_distribution(results) -> dict[int, tuple[int, float]]:
    """Counts and percentages per skin type over Ok rows."""
    ok = [r for r in results if r.status is Status.OK]
    total = len(ok)
    counts = {t: 0 for t in range(1, N_SKIN_TYPES + 1)}
    for r in ok:
        counts[r.skin_type] += 1
    return {
        t: (c, 100.0 * c / total if total else 0.0)
        for t, c in counts.items()
    }


def agreement_matrix(a, b, dark_cutoff: float = DEFAULT_DARK_CUTOFF_DEG) -> AgreementMatrix:
    """Joint skin-type counts of two runs, plus the ids both call dark."""
    ok_a = _ok_by_id(a)
    ok_b = _ok_by_id(b)
    all_ids = set(r.image_id for r in a) | set(r.image_id for r in b)
    joined = sorted(set(ok_a) & set(ok_b))
    counts = np.zeros((N_SKIN_TYPES, N_SKIN_TYPES), dtype=np.int64)
    dark = []
    for image_id in joined:
        ra, rb = ok_a[image_id], ok_b[image_id]
        counts[ra.skin_type - 1, rb.skin_type - 1] += 1
        if ra.ita_deg <= dark_cutoff and rb.ita_deg <= dark_cutoff:
            dark.append(image_id)
    return AgreementMatrix(
        counts=counts,
        joint_dark_ids=tuple(dark),
        n_excluded=len(all_ids) - len(joined),
    )


def classification_metrics(preds) -> MetricsReport:
    """Confusion-matrix metrics over the seven lesion classes.

    Per-class recall is defined only for classes present in the truth;
    balanced accuracy averages those recalls unweighted. Weighted metrics
    weight by truth support. Precision of a class that is never predicted is
    defined as 0 and the class is reported in undefined_precision_classes.
    """
    preds = list(preds)
    if not preds:
        raise EmptyInputError("no prediction records")
    idx = {c: i for i, c in enumerate(ISIC18_CLASSES)}
    k = len(ISIC18_CLASSES)
    confusion = np.zeros((k, k), dtype=np.int64)
    for p in preds:
        confusion[idx[p.true_label], idx[p.pred_label]] += 1

    support = confusion.sum(axis=1)
    predicted = confusion.sum(axis=0)
    correct = np.diag(confusion)

    recalls = np.full(k, math.nan)
    present = support > 0
    recalls[present] = correct[present] / support[present]

    precisions = np.zeros(k, dtype=np.float64)
    has_pred = predicted > 0
    precisions[has_pred] = correct[has_pred] / predicted[has_pred]
    undefined = tuple(
        ISIC18_CLASSES[i] for i in range(k) if present[i] and not has_pred[i]
    )

    f1 = np.zeros(k, dtype=np.float64)
    pr = precisions + np.where(present, recalls, 0.0)
    nz = present & (pr > 0)
    f1[nz] = 2.0 * precisions[nz] * recalls[nz] / pr[nz]

    n = int(support.sum())
    return MetricsReport(
        n=n,
        balanced_accuracy=float(recalls[present].mean()),
        recall_per_class={c: float(recalls[i]) for i, c in enumerate(ISIC18_CLASSES)},
        weighted_precision=float((support[present] * precisions[present]).sum() / n),
        weighted_recall=float((support[present] * recalls[present]).sum() / n),
        weighted_f1=float((support[present] * f1[present]).sum() / n),
        support={c: int(support[i]) for i, c in enumerate(ISIC18_CLASSES)},
        undefined_precision_classes=undefined,
    )


def fairness_by_type(preds, tones) -> dict[int, MetricsReport]:
    """classification_metrics per assigned skin type; empty groups are omitted."""
    tone_by_id = _ok_by_id(tones)
    groups: dict[int, list[PredictionRecord]] = {}
    for p in preds:
        tone = tone_by_id.get(p.image_id)
        if tone is None:
            continue
        groups.setdefault(tone.skin_type, []).append(p)
    if not groups:
        raise NoOverlapError("no prediction joins any Ok tone estimate")
    return {t: classification_metrics(groups[t]) for t in sorted(groups)}


def read_predictions_csv(path) -> list[PredictionRecord]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such predictions file: {path}")
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != PREDICTIONS_CSV_HEADER:
            raise ItafairError(f"{path}: unexpected predictions CSV header {header}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise ItafairError(f"{path}: row {lineno} has {len(row)} fields")
            try:
                records.append(PredictionRecord(*row))
            except ValueError as exc:
                raise ItafairError(f"{path}: row {lineno}: {exc}") from exc
    return records


def write_predictions_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PREDICTIONS_CSV_HEADER)
        for r in records:
            writer.writerow([r.image_id, r.true_label, r.pred_label])


# ---------------------------------------------------------------------------
# Report formatting: CSV, plain-text tables, and small standalone SVG charts.

def write_distribution_csv(dist, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["skin_type", "count", "percent"])
        for t in sorted(dist):
            count, pct = dist[t]
            writer.writerow([t, count, f"{pct:.2f}"])


def write_agreement_csv(matrix: AgreementMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# joined={matrix.n_joined} excluded={matrix.n_excluded} "
                 f"joint_dark={len(matrix.joint_dark_ids)}\n")
        writer = csv.writer(fh)
        writer.writerow(["a_type"] + [f"b_{t}" for t in range(1, N_SKIN_TYPES + 1)])
        for i in range(N_SKIN_TYPES):
            writer.writerow([i + 1] + [int(v) for v in matrix.counts[i]])


def write_fairness_csv(reports: dict[int, MetricsReport], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["skin_type", "n", "balanced_accuracy", "weighted_precision",
             "weighted_recall", "weighted_f1"]
            + [f"recall_{c}" for c in ISIC18_CLASSES]
        )
        for t in sorted(reports):
            r = reports[t]
            recalls = [
                f"{r.recall_per_class[c]:.4f}" if math.isfinite(r.recall_per_class[c]) else ""
                for c in ISIC18_CLASSES
            ]
            writer.writerow(
                [t, r.n, f"{r.balanced_accuracy:.4f}", f"{r.weighted_precision:.4f}",
                 f"{r.weighted_recall:.4f}", f"{r.weighted_f1:.4f}"] + recalls
            )


def distribution_table(dist, title: str = "Skin type distribution") -> str:
    lines = [title, "type  count  percent"]
    for t in sorted(dist):
        count, pct = dist[t]
        lines.append(f"   {t}  {count:5d}  {pct:6.2f}%")
    return "\n".join(lines)


def agreement_table(matrix: AgreementMatrix, name_a: str = "A", name_b: str = "B") -> str:
    lines = [
        f"Skin type agreement: rows={name_a}, columns={name_b} "
        f"(joined={matrix.n_joined}, excluded={matrix.n_excluded})",
        "      " + "".join(f"{t:>7d}" for t in range(1, N_SKIN_TYPES + 1)),
    ]
    for i in range(N_SKIN_TYPES):
        lines.append(f"   {i + 1}  " + "".join(f"{int(v):>7d}" for v in matrix.counts[i]))
    lines.append(f"jointly dark ids: {len(matrix.joint_dark_ids)}")
    return "\n".join(lines)


def fairness_table(reports: dict[int, MetricsReport]) -> str:
    lines = [
        "Per-skin-type metrics",
        "type      n      BA   w-prec  w-rec   w-f1",
    ]
    for t in sorted(reports):
        r = reports[t]
        lines.append(
            f"   {t}  {r.n:5d}  {r.balanced_accuracy:6.4f}  {r.weighted_precision:6.4f} "
            f"{r.weighted_recall:6.4f} {r.weighted_f1:6.4f}"
        )
    return "\n".join(lines)


def save_bar_chart_svg(labels, values, path, title: str = "", y_max: float | None = None) -> None:
    """Write a small self-contained SVG bar chart (byte-deterministic)."""
    labels = [str(x) for x in labels]
    values = [float(v) for v in values]
    if len(labels) != len(values):
        raise ValueError("labels and values must have the same length")
    width, height, margin = 480, 280, 40
    plot_w, plot_h = width - 2 * margin, height - 2 * margin
    top = y_max if y_max is not None else max(values + [1e-12])
    n = max(len(values), 1)
    bar_w = plot_w / n * 0.7
    gap = plot_w / n
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="13">{title}</text>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
        f'<text x="{margin - 6}" y="{margin + 4}" text-anchor="end" font-size="10">{top:g}</text>',
        f'<text x="{margin - 6}" y="{height - margin + 4}" text-anchor="end" font-size="10">0</text>',
    ]
    for i, (label, value) in enumerate(zip(labels, values)):
        h = 0.0 if top <= 0 else max(0.0, min(value / top, 1.0)) * plot_h
        x = margin + i * gap + (gap - bar_w) / 2
        y = height - margin - h
        parts.append(f'<rect x="{x:.1f}" y="{y:.1f}" width="{bar_w:.1f}" height="{h:.1f}" '
                     f'fill="#4878a8"/>')
        parts.append(f'<text x="{x + bar_w / 2:.1f}" y="{height - margin + 14}" '
                     f'text-anchor="middle" font-size="10">{label}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
