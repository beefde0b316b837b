"""Cross-validation splits, frame-level scoring, and report structures.

Ground truth rows may include the random catch-all class; prediction columns
may include neutral. A neutral prediction is never counted as a false
positive for any activity, but does cost recall on the frame's true class.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, replace

import numpy as np

from .memm import NEUTRAL
from .skeleton import RANDOM, LabeledSequence, mirror_sequence


def subsequence(seq: LabeledSequence, start: int, stop: int) -> LabeledSequence:
    return replace(
        seq,
        frames=seq.frames[start:stop],
        rgb_images=None if seq.rgb_images is None else seq.rgb_images[start:stop],
        depth_images=None
        if seq.depth_images is None
        else seq.depth_images[start:stop],
    )


def split_new_person(
    sequences: list[LabeledSequence], held_out_subject: str
) -> tuple[list[LabeledSequence], list[LabeledSequence]]:
    """Leave one subject out; training data is mirrored, random footage is
    only ever tested."""
    train: list[LabeledSequence] = []
    test: list[LabeledSequence] = []
    for seq in sequences:
        if seq.subject_id == held_out_subject:
            test.append(seq)
        elif seq.activity_label != RANDOM:
            train.append(seq)
            train.append(mirror_sequence(seq))
    return train, test


def split_have_seen(
    sequences: list[LabeledSequence], subject: str, seed: int = 0
) -> tuple[list[LabeledSequence], list[LabeledSequence]]:
    """Split each of the subject's labeled sequences at its midpoint: the
    first half (plus mirror) trains, the second half tests. Other subjects
    train in full; the subject's random footage tests in full. The seed is
    accepted for interface stability; the midpoint split needs none."""
    del seed
    train: list[LabeledSequence] = []
    test: list[LabeledSequence] = []
    for seq in sequences:
        if seq.activity_label == RANDOM:
            if seq.subject_id == subject:
                test.append(seq)
        elif seq.subject_id != subject:
            train.append(seq)
            train.append(mirror_sequence(seq))
        else:
            mid = len(seq) // 2
            first = subsequence(seq, 0, mid)
            train.append(first)
            train.append(mirror_sequence(first))
            test.append(subsequence(seq, mid, len(seq)))
    return train, test


@dataclass(frozen=True)
class ConfusionMatrix:
    """Frame counts; rows are ground truth, columns are predictions."""

    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    counts: np.ndarray

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("truth\\pred," + ",".join(self.col_labels) + "\n")
        for label, row in zip(self.row_labels, self.counts):
            out.write(label + "," + ",".join(str(int(c)) for c in row) + "\n")
        return out.getvalue()


@dataclass(frozen=True)
class MetricsReport:
    """Per-activity precision/recall with per-location and overall macros."""

    setting: str
    per_location: dict[str, dict[str, tuple[float, float]]]
    location_macro: dict[str, tuple[float, float]]
    overall: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "setting": self.setting,
            "locations": {
                loc: {
                    "activities": {
                        a: {"precision": p, "recall": r}
                        for a, (p, r) in sorted(acts.items())
                    },
                    "macro": {
                        "precision": self.location_macro[loc][0],
                        "recall": self.location_macro[loc][1],
                    },
                }
                for loc, acts in sorted(self.per_location.items())
            },
            "overall": {"precision": self.overall[0], "recall": self.overall[1]},
        }


def confusion_metrics(
    matrix: ConfusionMatrix, activities: list[str]
) -> dict[str, tuple[float, float]]:
    """Precision and recall per activity recomputed from the matrix."""
    metrics = {}
    for a in activities:
        col = matrix.col_labels.index(a)
        row = matrix.row_labels.index(a)
        tp = float(matrix.counts[row, col])
        predicted = float(matrix.counts[:, col].sum())
        actual = float(matrix.counts[row, :].sum())
        precision = tp / predicted if predicted > 0 else 0.0
        recall = tp / actual if actual > 0 else 0.0
        metrics[a] = (precision, recall)
    return metrics


def score(
    predictions: list[str],
    truths: list[str],
    activities: list[str] | None = None,
) -> tuple[ConfusionMatrix, dict[str, tuple[float, float]]]:
    """Frame-level confusion matrix and per-activity precision/recall.

    ``activities`` fixes the metric classes; by default they are the truth
    labels other than random. Neutral predictions on random frames land in
    the (random, neutral) cell and touch no activity metric.
    """
    if len(predictions) != len(truths):
        raise ValueError("predictions and truths must have equal length")
    if activities is None:
        activities = sorted(set(truths) - {RANDOM, NEUTRAL})
    rows = tuple(sorted(activities)) + (RANDOM,)
    cols = tuple(sorted(activities)) + (NEUTRAL,)
    row_index = {label: i for i, label in enumerate(rows)}
    col_index = {label: i for i, label in enumerate(cols)}

    counts = np.zeros((len(rows), len(cols)), dtype=int)
    for truth, pred in zip(truths, predictions):
        if truth not in row_index:
            raise ValueError(f"unexpected ground-truth label {truth!r}")
        if pred not in col_index:
            raise ValueError(f"unexpected predicted label {pred!r}")
        counts[row_index[truth], col_index[pred]] += 1

    matrix = ConfusionMatrix(row_labels=rows, col_labels=cols, counts=counts)
    return matrix, confusion_metrics(matrix, sorted(activities))


def build_report(
    setting: str,
    location_metrics: dict[str, dict[str, tuple[float, float]]],
) -> MetricsReport:
    """Assemble per-location metrics into the final report with unweighted
    macro averages."""
    location_macro = {}
    all_pairs = []
    for loc, metrics in location_metrics.items():
        values = list(metrics.values())
        location_macro[loc] = (
            float(np.mean([v[0] for v in values])),
            float(np.mean([v[1] for v in values])),
        )
        all_pairs.extend(values)
    overall = (
        float(np.mean([v[0] for v in all_pairs])),
        float(np.mean([v[1] for v in all_pairs])),
    )
    return MetricsReport(
        setting=setting,
        per_location=location_metrics,
        location_macro=location_macro,
        overall=overall,
    )
