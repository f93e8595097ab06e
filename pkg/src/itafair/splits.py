"""Deterministic train/validation/test split generation.

Within each lesion class, ids are shuffled with a seeded generator and
apportioned by largest-remainder rounding, so per-class subset sizes deviate
from the exact ratio share by at most one sample. Remainder ties are resolved
in the fixed priority order Train > Test > Val.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import (
    EmptyTestSetError,
    EmptyTrainSetError,
    InvalidRatiosError,
    ItafairError,
)
from .estimators import Status

DEFAULT_RATIOS = (0.57, 0.14, 0.29)
DEFAULT_SHIFT_CUTOFF_DEG = 41.0
TRAIN_VAL_RATIO = (0.8, 0.2)

SPLIT_CSV_HEADER = ("image_id", "subset")


class Subset(str, Enum):
    TRAIN = "Train"
    VAL = "Val"
    TEST = "Test"


class SplitMode(str, Enum):
    BASELINE = "Baseline"
    DATA_SHIFT = "DataShift"


_TIE_PRIORITY = {Subset.TRAIN: 0, Subset.TEST: 1, Subset.VAL: 2}


@dataclass(frozen=True)
class SplitAssignment:
    assignment: Mapping[str, Subset]
    seed: int
    mode: SplitMode

    def ids_in(self, subset: Subset) -> list[str]:
        return sorted(i for i, s in self.assignment.items() if s is subset)


def largest_remainder_counts(total: int, ratios, subsets) -> dict[Subset, int]:
    """Apportion ``total`` over subsets by ratio with largest-remainder rounding."""
    exact = [total * r for r in ratios]
    base = [math.floor(e) for e in exact]
    leftover = total - sum(base)
    order = sorted(
        range(len(subsets)),
        key=lambda i: (-(exact[i] - base[i]), _TIE_PRIORITY[subsets[i]]),
    )
    for i in order[:leftover]:
        base[i] += 1
    return dict(zip(subsets, base))


def _check_ratios(ratios, n: int) -> None:
    if len(ratios) != n or any(not (r > 0 and math.isfinite(r)) for r in ratios):
        raise InvalidRatiosError(f"need {n} positive ratios, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise InvalidRatiosError(f"ratios {ratios} do not sum to 1")


def _by_class(records) -> dict[str, list[str]]:
    seen: dict[str, str] = {}
    classes: dict[str, list[str]] = {}
    for image_id, label in records:
        if image_id in seen:
            raise ValueError(f"duplicate image id {image_id!r} in records")
        seen[image_id] = label
        classes.setdefault(label, []).append(image_id)
    return classes


def _assign_class(rng, ids, counts, subsets) -> dict[str, Subset]:
    ids = sorted(ids)
    rng.shuffle(ids)
    out = {}
    start = 0
    for subset in subsets:
        for image_id in ids[start:start + counts[subset]]:
            out[image_id] = subset
        start += counts[subset]
    return out


def stratified_split(records, ratios=DEFAULT_RATIOS, seed: int = 0) -> SplitAssignment:
    """Per-class seeded shuffle and largest-remainder allotment to Train/Val/Test."""
    _check_ratios(ratios, 3)
    subsets = (Subset.TRAIN, Subset.VAL, Subset.TEST)
    rng = np.random.default_rng(seed)
    classes = _by_class(records)
    assignment: dict[str, Subset] = {}
    for label in sorted(classes):
        ids = sorted(classes[label])
        counts = largest_remainder_counts(len(ids), ratios, subsets)
        assignment.update(_assign_class(rng, ids, counts, subsets))
    return SplitAssignment(MappingProxyType(assignment), seed, SplitMode.BASELINE)


def stratified_split_fixed_test(records, test_size: int, seed: int = 0) -> SplitAssignment:
    """Baseline split with an exact total test size (e.g. to mirror another split).

    The test quota is apportioned across classes by class share, then the
    remainder of each class is split Train:Val = 80:20.
    """
    records = list(records)
    classes = _by_class(records)
    total = len(records)
    if not 0 <= test_size <= total:
        raise InvalidRatiosError(f"test_size {test_size} outside [0, {total}]")
    labels = sorted(classes)
    exact = [test_size * len(classes[c]) / total for c in labels]
    base = [math.floor(e) for e in exact]
    leftover = test_size - sum(base)
    order = sorted(range(len(labels)), key=lambda i: (-(exact[i] - base[i]), labels[i]))
    for i in order[:leftover]:
        base[i] += 1

    rng = np.random.default_rng(seed)
    assignment: dict[str, Subset] = {}
    for label, n_test in zip(labels, base):
        ids = sorted(classes[label])
        rng.shuffle(ids)
        for image_id in ids[:n_test]:
            assignment[image_id] = Subset.TEST
        rest = ids[n_test:]
        counts = largest_remainder_counts(len(rest), TRAIN_VAL_RATIO, (Subset.TRAIN, Subset.VAL))
        assignment.update(_assign_class(rng, rest, counts, (Subset.TRAIN, Subset.VAL)))
    return SplitAssignment(MappingProxyType(assignment), seed, SplitMode.BASELINE)


def datashift_split(
    tones,
    records,
    seed: int = 0,
    cutoff: float = DEFAULT_SHIFT_CUTOFF_DEG,
) -> SplitAssignment:
    """Light-skin pool (ITA > cutoff) split 80:20 Train/Val; the rest is Test.

    Records are joined to Ok tone estimates on image_id; records without a
    usable estimate are left out of the assignment.
    """
    ita_by_id = {
        r.image_id: r.ita_deg for r in tones
        if r.status is Status.OK and math.isfinite(r.ita_deg)
    }
    light = []
    dark = []
    seen = set()
    for image_id, label in records:
        if image_id in seen:
            raise ValueError(f"duplicate image id {image_id!r} in records")
        seen.add(image_id)
        ita = ita_by_id.get(image_id)
        if ita is None:
            continue
        (light if ita > cutoff else dark).append((image_id, label))
    if not light:
        raise EmptyTrainSetError(f"no records with ITA > {cutoff}")
    if not dark:
        raise EmptyTestSetError(f"no records with ITA <= {cutoff}")

    rng = np.random.default_rng(seed)
    assignment: dict[str, Subset] = {image_id: Subset.TEST for image_id, _ in dark}
    classes = _by_class(light)
    for label in sorted(classes):
        ids = sorted(classes[label])
        counts = largest_remainder_counts(len(ids), TRAIN_VAL_RATIO, (Subset.TRAIN, Subset.VAL))
        assignment.update(_assign_class(rng, ids, counts, (Subset.TRAIN, Subset.VAL)))
    return SplitAssignment(MappingProxyType(assignment), seed, SplitMode.DATA_SHIFT)


def write_split_csv(split: SplitAssignment, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# seed={split.seed} mode={split.mode.value}\n")
        writer = csv.writer(fh)
        writer.writerow(SPLIT_CSV_HEADER)
        for image_id in sorted(split.assignment):
            writer.writerow([image_id, split.assignment[image_id].value])


def read_split_csv(path) -> SplitAssignment:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such split file: {path}")
    seed = 0
    mode = SplitMode.BASELINE
    assignment: dict[str, Subset] = {}
    with open(path, newline="") as fh:
        first = fh.readline()
        if first.startswith("#"):
            for token in first[1:].split():
                key, _, value = token.partition("=")
                if key == "seed":
                    seed = int(value)
                elif key == "mode":
                    mode = SplitMode(value)
            header_line = fh.readline()
        else:
            header_line = first
        if tuple(header_line.strip().split(",")) != SPLIT_CSV_HEADER:
            raise ItafairError(f"{path}: unexpected split CSV header {header_line!r}")
        for lineno, row in enumerate(csv.reader(fh), start=3):
            if len(row) != 2:
                raise ItafairError(f"{path}: row {lineno} has {len(row)} fields")
            assignment[row[0]] = Subset(row[1])
    return SplitAssignment(MappingProxyType(assignment), seed, mode)
