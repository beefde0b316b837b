"""End-to-end training and detection for one location, plus the
fold-structured evaluation protocols."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .baselines import LinearActivityClassifier, one_level_step, train_naive
from .errors import MissingActivityDataError
from .evaluate import (
    ConfusionMatrix,
    MetricsReport,
    build_report,
    score,
    split_have_seen,
    split_new_person,
)
from .features import sequence_features
from .gmm import SubActivityBank, Standardizer, build_bank, soft_labels
from .hog import CameraIntrinsics, person_bbox, rgb_to_gray, simple_hog, skeletal_hog
from .memm import (
    DEFAULT_SUBSTRUCTURE_CAP,
    NEUTRAL_STAY,
    SELF_TRANSITION,
    TO_NEUTRAL,
    TRANSITION_FLOOR,
    TransitionTables,
    detect_stream,
    estimate_transitions,
    manual_activity_table,
)
from .skeleton import RANDOM, LabeledSequence

MODEL_KINDS = ("full", "naive", "one_level")


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs beyond the data itself."""

    location: str = ""
    use_hog_simple: bool = False
    use_hog_skeletal: bool = False
    substructure_cap: int = DEFAULT_SUBSTRUCTURE_CAP
    seed: int = 0
    self_prob: float = SELF_TRANSITION
    to_neutral: float = TO_NEUTRAL
    neutral_stay: float = NEUTRAL_STAY
    smoothing: float = TRANSITION_FLOOR
    boundary_prior: str = "uniform"
    incremental: bool = False
    intrinsics: CameraIntrinsics = field(default_factory=CameraIntrinsics)

    def __post_init__(self) -> None:
        if self.substructure_cap < 2:
            raise ValueError("substructure_cap must be at least 2")
        if self.boundary_prior not in ("uniform", "carry"):
            raise ValueError("boundary_prior must be 'uniform' or 'carry'")


def featurize(seq: LabeledSequence, config: RunConfig) -> np.ndarray:
    """Skeletal feature matrix, extended with the enabled HOG blocks."""
    blocks = [sequence_features(seq)]
    if config.use_hog_simple or config.use_hog_skeletal:
        if seq.rgb_images is None or seq.depth_images is None:
            raise ValueError(
                "HOG blocks are enabled but the sequence carries no images"
            )
        gray = [rgb_to_gray(img) for img in seq.rgb_images]
        if config.use_hog_simple:
            rows = [
                simple_hog(g, d, person_bbox(f, config.intrinsics))
                for g, d, f in zip(gray, seq.depth_images, seq.frames)
            ]
            blocks.append(np.stack(rows))
        if config.use_hog_skeletal:
            rows = [
                skeletal_hog(g, d, f, config.intrinsics)
                for g, d, f in zip(gray, seq.depth_images, seq.frames)
            ]
            blocks.append(np.stack(rows))
    return np.hstack(blocks)


@dataclass
class TrainedModel:
    """A per-location model bundle: cluster bank, transition tables, and the
    two baselines sharing the same standardized feature space."""

    config: RunConfig
    bank: SubActivityBank
    tables: TransitionTables
    naive: LinearActivityClassifier
    one_level_trans: np.ndarray
    em_histories: dict[str, list[float]] = field(default_factory=dict)
    sample_counts: dict[str, int] = field(default_factory=dict)

    @property
    def standardizer(self) -> Standardizer:
        return self.bank.standardizer


def train_location_model(
    sequences: list[LabeledSequence],
    config: RunConfig,
    features: dict[int, np.ndarray] | None = None,
) -> TrainedModel:
    """Train the full model and baselines for ``config.location``.

    Sequences from other locations supply the negative clusters; random
    footage is never trained on. ``features`` optionally caches feature
    matrices keyed by id(sequence).
    """
    location = config.location
    labeled = [s for s in sequences if s.activity_label != RANDOM]
    in_loc = [s for s in labeled if s.location == location]
    if not in_loc:
        raise MissingActivityDataError(f"no training sequences for {location!r}")

    cache = features if features is not None else {}

    def feats(seq: LabeledSequence) -> np.ndarray:
        key = id(seq)
        if key not in cache:
            cache[key] = featurize(seq, config)
        return cache[key]

    activities = sorted({s.activity_label for s in in_loc})
    training: dict[str, np.ndarray] = {}
    for seq in labeled:
        training.setdefault(seq.activity_label, [])
        training[seq.activity_label].append(feats(seq))
    training = {a: np.vstack(rows) for a, rows in training.items()}

    standardizer = Standardizer.fit(np.vstack(list(training.values())))
    histories: dict[str, list[float]] = {}
    bank = build_bank(
        training,
        in_location=set(activities),
        location=location,
        seed=config.seed,
        standardizer=standardizer,
        history_sink=histories,
    )

    soft_seqs = [soft_labels(bank, feats(s)) for s in in_loc]
    tables = estimate_transitions(
        soft_seqs,
        [s.activity_label for s in in_loc],
        sub_prior=bank.weights,
        activities=activities,
        smoothing=config.smoothing,
        self_prob=config.self_prob,
        to_neutral=config.to_neutral,
        neutral_stay=config.neutral_stay,
    )

    frame_features = np.vstack([standardizer.apply(feats(s)) for s in in_loc])
    frame_labels = [s.activity_label for s in in_loc for _ in range(len(s))]
    naive = train_naive(frame_features, frame_labels)

    n = len(naive.classes)
    restricted = manual_activity_table(n, config.self_prob, config.to_neutral)[:n, :n]
    one_level_trans = restricted / restricted.sum(axis=1, keepdims=True)

    return TrainedModel(
        config=config,
        bank=bank,
        tables=tables,
        naive=naive,
        one_level_trans=one_level_trans,
        em_histories=histories,
        sample_counts={a: training[a].shape[0] for a in sorted(training)},
    )


def detect_with_model(
    model: TrainedModel, features: np.ndarray, kind: str = "full"
) -> tuple[list[str], np.ndarray, tuple[str, ...]]:
    """Per-frame labels and posteriors from the chosen model variant."""
    if kind == "full":
        labels, posteriors = detect_stream(
            features,
            model.bank,
            model.tables,
            cap=model.config.substructure_cap,
            incremental=model.config.incremental,
            boundary_prior=model.config.boundary_prior,
        )
        return labels, posteriors, model.tables.states
    if kind == "naive":
        std = model.standardizer.apply(features)
        labels = model.naive.predict(std)
        return list(labels), model.naive.predict_proba(std), model.naive.classes
    if kind == "one_level":
        std = model.standardizer.apply(features)
        classes = model.naive.classes
        alpha = np.full(len(classes), 1.0 / len(classes))
        posteriors = np.empty((std.shape[0], len(classes)))
        for t in range(std.shape[0]):
            alpha = one_level_step(alpha, std[t], model.naive, model.one_level_trans)
            posteriors[t] = alpha
        labels = [classes[i] for i in np.argmax(posteriors, axis=1)]
        return labels, posteriors, classes
    raise ValueError(f"unknown model kind {kind!r}; choose from {MODEL_KINDS}")


@dataclass(frozen=True)
class EvalOutcome:
    report: MetricsReport
    confusions: dict[str, ConfusionMatrix]


def evaluate_dataset(
    sequences: list[LabeledSequence],
    setting: str,
    config: RunConfig,
    kind: str = "full",
) -> EvalOutcome:
    """Run every fold of the chosen protocol and aggregate frame metrics."""
    if setting not in ("new_person", "have_seen"):
        raise ValueError("setting must be 'new_person' or 'have_seen'")
    subjects = sorted({s.subject_id for s in sequences})
    locations = sorted({s.location for s in sequences})
    frames: dict[str, tuple[list[str], list[str]]] = {
        loc: ([], []) for loc in locations
    }
    activity_by_loc: dict[str, set[str]] = {loc: set() for loc in locations}
    for s in sequences:
        if s.activity_label != RANDOM:
            activity_by_loc[s.location].add(s.activity_label)

    for subject in subjects:
        if setting == "new_person":
            train, test = split_new_person(sequences, subject)
        else:
            train, test = split_have_seen(sequences, subject, seed=config.seed)
        cache: dict[int, np.ndarray] = {}
        for location in locations:
            test_loc = [s for s in test if s.location == location]
            if not test_loc:
                continue
            model = train_location_model(
                train, replace(config, location=location), features=cache
            )
            for seq in test_loc:
                labels, _, _ = detect_with_model(model, featurize(seq, config), kind)
                truths, preds = frames[location]
                truths.extend([seq.activity_label] * len(labels))
                preds.extend(labels)

    location_metrics = {}
    confusions = {}
    for location in locations:
        truths, preds = frames[location]
        if not truths:
            continue
        matrix, metrics = score(
            preds, truths, activities=sorted(activity_by_loc[location])
        )
        confusions[location] = matrix
        location_metrics[location] = metrics
    return EvalOutcome(
        report=build_report(setting, location_metrics), confusions=confusions
    )
