"""Two-layer hierarchical MEMM: transition tables, per-substructure scoring,
and online dynamic-programming selection of the segmentation into
substructures.

States: a top layer of activities (plus a catch-all neutral state) and a
mid layer of sub-activity clusters from a SubActivityBank. At each frame
the detector scores, for every candidate start time within the last T
frames, the hypothesis that the current activity began there, reusing the
stored optimum for the prefix. All scoring is done in log space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    MissingActivityDataError,
    UninitializedStateError,
    WindowTooLongError,
)
from .gmm import SubActivityBank, log_posterior

NEUTRAL = "neutral"

DEFAULT_SUBSTRUCTURE_CAP = 90  # 3 s at 30 Hz
TRANSITION_FLOOR = 1e-6

# manual activity-transition values: activities mostly persist, switches
# usually pass through a brief neutral stretch
SELF_TRANSITION = 0.6
TO_NEUTRAL = 0.3
NEUTRAL_STAY = 0.4


def _floor_and_normalize(rows: np.ndarray, floor: float) -> np.ndarray:
    """Row-normalize keeping every entry at or above ``floor``.

    Entries at the floor stay pinned while the remaining mass is scaled,
    iterating until no entry falls below the floor after scaling.
    """
    rows = np.array(rows, dtype=float)
    for r in range(rows.shape[0]):
        row = np.maximum(rows[r], floor)
        for _ in range(rows.shape[1]):
            pinned = row <= floor
            free = ~pinned
            if not free.any():
                row = np.full_like(row, 1.0 / len(row))
                break
            scale = (1.0 - floor * pinned.sum()) / row[free].sum()
            row = np.where(pinned, floor, row * scale)
            if np.all(row >= floor):
                break
        rows[r] = row
    return rows


def neutral_transition(sub_trans: np.ndarray, floor: float = TRANSITION_FLOOR) -> np.ndarray:
    """Mid-layer transition rows for the neutral state.

    The complement 1 - sum over activities of P(y'|y, z), clamped below at
    the floor and row-normalized: transitions no activity uses get the
    neutral mass.
    """
    complement = np.maximum(1.0 - sub_trans.sum(axis=0), floor)
    return _floor_and_normalize(complement, floor)


def manual_activity_table(
    n_activities: int,
    self_prob: float = SELF_TRANSITION,
    to_neutral: float = TO_NEUTRAL,
    neutral_stay: float = NEUTRAL_STAY,
    floor: float = TRANSITION_FLOOR,
) -> np.ndarray:
    """(n+1, n+1) activity transition table, neutral state last."""
    n = n_activities
    table = np.zeros((n + 1, n + 1))
    for i in range(n):
        if n > 1:
            table[i, :n] = (1.0 - self_prob - to_neutral) / (n - 1)
        table[i, i] = self_prob
        table[i, n] = to_neutral
    table[n, :n] = (1.0 - neutral_stay) / n
    table[n, n] = neutral_stay
    return _floor_and_normalize(table, floor)


@dataclass
class TransitionTables:
    """All transition structure of the model; rows are stochastic.

    ``sub_trans[i]`` is the mid-layer table conditioned on activity
    ``activities[i]``; the neutral state's table is separate. The activity
    table ``act_trans`` is ordered activities-then-neutral.
    """

    activities: tuple[str, ...]
    sub_trans: np.ndarray  # (n_act, m, m)
    neutral_trans: np.ndarray  # (m, m)
    act_trans: np.ndarray  # (n_act + 1, n_act + 1)
    sub_prior: np.ndarray  # (m,)

    log_sub_all: np.ndarray = field(init=False, repr=False)
    log_act: np.ndarray = field(init=False, repr=False)
    log_boundary_uniform: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        stacked = np.concatenate(
            [self.sub_trans, self.neutral_trans[None, :, :]], axis=0
        )
        self.log_sub_all = np.log(stacked)
        self.log_act = np.log(self.act_trans)
        # boundary term under a uniform prior over the previous sub-activity
        self.log_boundary_uniform = np.log(stacked.mean(axis=1))

    @property
    def states(self) -> tuple[str, ...]:
        return self.activities + (NEUTRAL,)

    @property
    def n_states(self) -> int:
        return len(self.activities) + 1

    @property
    def n_sub(self) -> int:
        return len(self.sub_prior)

    @property
    def act_prior(self) -> np.ndarray:
        return np.full(self.n_states, 1.0 / self.n_states)


def estimate_transitions(
    soft_seqs: list[np.ndarray],
    labels: list[str],
    sub_prior: np.ndarray,
    activities: list[str] | None = None,
    smoothing: float = TRANSITION_FLOOR,
    self_prob: float = SELF_TRANSITION,
    to_neutral: float = TO_NEUTRAL,
    neutral_stay: float = NEUTRAL_STAY,
) -> TransitionTables:
    """Build all tables from per-sequence soft state posteriors.

    For each activity the expected transition counts are accumulated as
    outer products of consecutive posterior rows, smoothed and normalized;
    the neutral table is the clamped complement and the activity table is
    the manual one.
    """
    if activities is None:
        activities = sorted(set(labels))
    activities = list(activities)
    if NEUTRAL in activities:
        raise ValueError(f"{NEUTRAL!r} is reserved for the catch-all state")
    m = soft_seqs[0].shape[1] if soft_seqs else len(sub_prior)

    sub_trans = np.empty((len(activities), m, m))
    for i, activity in enumerate(activities):
        counts = np.zeros((m, m))
        n_seqs = 0
        for seq, label in zip(soft_seqs, labels):
            if label != activity:
                continue
            n_seqs += 1
            if seq.shape[0] > 1:
                counts += seq[:-1].T @ seq[1:]
        if n_seqs == 0:
            raise MissingActivityDataError(f"no sequences labeled {activity!r}")
        sub_trans[i] = _floor_and_normalize(counts + smoothing, smoothing)

    return TransitionTables(
        activities=tuple(activities),
        sub_trans=sub_trans,
        neutral_trans=neutral_transition(sub_trans, smoothing),
        act_trans=manual_activity_table(
            len(activities), self_prob, to_neutral, neutral_stay, smoothing
        ),
        sub_prior=np.asarray(sub_prior, dtype=float),
    )


# -- substructure scoring ------------------------------------------------------

def _viterbi_chain(
    log_trans: np.ndarray, log_boundary: np.ndarray, log_em: np.ndarray
) -> tuple[float, list[int]]:
    """Exact max over sub-activity chains of one substructure, with path."""
    alpha = log_boundary + log_em[0]
    back: list[np.ndarray] = []
    for t in range(1, log_em.shape[0]):
        cand = alpha[:, None] + log_trans
        back.append(np.argmax(cand, axis=0))
        alpha = cand.max(axis=0) + log_em[t]
    last = int(np.argmax(alpha))
    path = [last]
    for pointers in reversed(back):
        path.append(int(pointers[path[-1]]))
    path.reverse()
    return float(alpha[last]), path


def log_emissions(bank: SubActivityBank, window: np.ndarray, sub_prior: np.ndarray) -> np.ndarray:
    """log P(y|x) - log P(y) rows for a raw feature window."""
    rows = log_posterior(bank, bank.standardizer.apply(np.atleast_2d(window)))
    return rows - np.log(sub_prior)[None, :]


def substructure_score_from_posteriors(
    z: str,
    z_prev: str,
    posteriors: np.ndarray,
    tables: TransitionTables,
    cap: int = DEFAULT_SUBSTRUCTURE_CAP,
) -> tuple[float, list[int]]:
    """Score one substructure hypothesis from per-frame state posteriors.

    Returns log of P(activity | previous activity) times the maximum over
    all sub-activity chains of the factored joint, plus the best chain. The
    prior over the sub-activity just before the window is uniform.
    """
    posteriors = np.atleast_2d(posteriors)
    if posteriors.shape[0] > cap:
        raise WindowTooLongError(
            f"window of {posteriors.shape[0]} frames exceeds cap {cap}"
        )
    states = tables.states
    zi, pi = states.index(z), states.index(z_prev)
    log_em = np.log(posteriors) - np.log(tables.sub_prior)[None, :]
    score, path = _viterbi_chain(
        tables.log_sub_all[zi], tables.log_boundary_uniform[zi], log_em
    )
    return float(tables.log_act[pi, zi]) + score, path


def substructure_score(
    z: str,
    z_prev: str,
    window: np.ndarray,
    bank: SubActivityBank,
    tables: TransitionTables,
    cap: int = DEFAULT_SUBSTRUCTURE_CAP,
) -> tuple[float, list[int]]:
    """substructure_score_from_posteriors on raw (unstandardized) features."""
    window = np.atleast_2d(window)
    if window.shape[0] > cap:
        raise WindowTooLongError(f"window of {window.shape[0]} frames exceeds cap {cap}")
    states = tables.states
    zi, pi = states.index(z), states.index(z_prev)
    log_em = log_emissions(bank, window, tables.sub_prior)
    score, path = _viterbi_chain(
        tables.log_sub_all[zi], tables.log_boundary_uniform[zi], log_em
    )
    return float(tables.log_act[pi, zi]) + score, path


# -- online structure selection -------------------------------------------------

@dataclass
class DetectorState:
    """Per-stream memory: stored activity scores per past time, the emission
    buffer for the last T frames, and (in incremental mode) cached chain
    maxima for every open window."""

    t: int = 0
    score_times: list[int] = field(default_factory=list)
    log_scores: list[np.ndarray] = field(default_factory=list)
    emission_times: list[int] = field(default_factory=list)
    emissions: list[np.ndarray] = field(default_factory=list)
    window_starts: list[int] = field(default_factory=list)
    window_alphas: np.ndarray | None = None
    window_trans: np.ndarray | None = None
    chosen_start: int = -1


def init_state(tables: TransitionTables) -> DetectorState:
    """Fresh stream state with a uniform activity belief at time 0."""
    nz = tables.n_states
    return DetectorState(
        t=0,
        score_times=[0],
        log_scores=[np.full(nz, -np.log(nz))],
    )


def _logsumexp(values: np.ndarray, axis: int = -1) -> np.ndarray:
    peak = values.max(axis=axis, keepdims=True)
    out = peak + np.log(np.exp(values - peak).sum(axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis)


def _extend_alphas(alphas: np.ndarray, log_sub_all: np.ndarray, e: np.ndarray) -> np.ndarray:
    # one max-product step for every open window at once
    return (alphas[:, :, :, None] + log_sub_all[None, :, :, :]).max(axis=2) + e


def _boundary_alpha(
    tables: TransitionTables,
    e: np.ndarray,
    prev_emission: np.ndarray | None,
    boundary_prior: str,
) -> np.ndarray:
    if boundary_prior == "uniform" or prev_emission is None:
        return tables.log_boundary_uniform + e
    # carry: weight the boundary sum by the previous frame's state posterior
    log_post = prev_emission + np.log(tables.sub_prior)
    prev = np.exp(log_post - _logsumexp(log_post))
    stacked = np.exp(tables.log_sub_all)  # (nz, m, m)
    return np.log(prev @ stacked) + e


def _trans_part(tables: TransitionTables, log_score_row: np.ndarray) -> np.ndarray:
    # log sum over previous activities of stored score times transition
    return _logsumexp(log_score_row[:, None] + tables.log_act, axis=0)


def structure_step(
    state: DetectorState,
    x_t: np.ndarray,
    bank: SubActivityBank,
    tables: TransitionTables,
    cap: int = DEFAULT_SUBSTRUCTURE_CAP,
    incremental: bool = False,
    boundary_prior: str = "uniform",
) -> tuple[DetectorState, str, np.ndarray]:
    """Advance one frame; returns (state, predicted activity, P(z | stream)).

    Every candidate start within the last ``cap`` frames is scored as the
    stored prefix optimum composed with one substructure covering the
    remainder; the per-activity maximum over starts is renormalized and
    stored. Incremental and non-incremental modes perform the identical
    arithmetic; the former caches open-window chain maxima across frames.
    """
    if not state.score_times:
        raise UninitializedStateError("state has no stored scores; use init_state")
    e = log_emissions(bank, x_t, tables.sub_prior)[0]
    t = state.t + 1
    oldest_start = max(0, t - cap)

    state.emission_times.append(t)
    state.emissions.append(e)

    score_by_time = dict(zip(state.score_times, state.log_scores))

    if incremental and state.window_alphas is not None:
        keep = [i for i, s in enumerate(state.window_starts) if s >= oldest_start]
        starts = [state.window_starts[i] for i in keep]
        alphas = _extend_alphas(state.window_alphas[keep], tables.log_sub_all, e)
        trans = state.window_trans[keep]
        prev_emission = (
            state.emissions[-2] if len(state.emissions) > 1 else None
        )
        new_alpha = _boundary_alpha(tables, e, prev_emission, boundary_prior)
        starts.append(t - 1)
        alphas = np.concatenate([alphas, new_alpha[None]], axis=0)
        trans = np.concatenate(
            [trans, _trans_part(tables, score_by_time[t - 1])[None]], axis=0
        )
    else:
        emission_by_time = dict(zip(state.emission_times, state.emissions))
        starts = []
        alphas = np.empty((0, tables.n_states, tables.n_sub))
        trans_rows = []
        for tau in range(oldest_start + 1, t + 1):
            if len(starts) > 0:
                alphas = _extend_alphas(alphas, tables.log_sub_all, emission_by_time[tau])
            prev_emission = emission_by_time.get(tau - 1)
            new_alpha = _boundary_alpha(
                tables, emission_by_time[tau], prev_emission, boundary_prior
            )
            starts.append(tau - 1)
            alphas = np.concatenate([alphas, new_alpha[None]], axis=0)
            trans_rows.append(_trans_part(tables, score_by_time[tau - 1]))
        trans = np.stack(trans_rows)

    candidates = trans + alphas.max(axis=2)  # (W, nz)
    # max over starts; ties resolved toward the later start
    best_idx = len(starts) - 1 - np.argmax(candidates[::-1], axis=0)
    best = candidates[best_idx, np.arange(tables.n_states)]
    log_row = best - _logsumexp(best)
    posterior_z = np.exp(log_row)
    posterior_z /= posterior_z.sum()
    label = tables.states[int(np.argmax(log_row))]

    state.t = t
    state.score_times.append(t)
    state.log_scores.append(log_row)
    state.window_starts = starts
    state.window_alphas = alphas
    state.window_trans = trans
    state.chosen_start = starts[int(best_idx[int(np.argmax(log_row))])]

    keep_scores = [i for i, s in enumerate(state.score_times) if s >= t - cap]
    state.score_times = [state.score_times[i] for i in keep_scores]
    state.log_scores = [state.log_scores[i] for i in keep_scores]
    keep_em = [i for i, s in enumerate(state.emission_times) if s >= t - cap + 1]
    state.emission_times = [state.emission_times[i] for i in keep_em]
    state.emissions = [state.emissions[i] for i in keep_em]

    return state, label, posterior_z


def detect_stream(
    features: np.ndarray,
    bank: SubActivityBank,
    tables: TransitionTables,
    cap: int = DEFAULT_SUBSTRUCTURE_CAP,
    incremental: bool = False,
    boundary_prior: str = "uniform",
) -> tuple[list[str], np.ndarray]:
    """Label every frame of a feature matrix online; frame t sees only <= t."""
    state = init_state(tables)
    labels = []
    posteriors = np.empty((features.shape[0], tables.n_states))
    for t in range(features.shape[0]):
        state, label, post = structure_step(
            state,
            features[t],
            bank,
            tables,
            cap=cap,
            incremental=incremental,
            boundary_prior=boundary_prior,
        )
        labels.append(label)
        posteriors[t] = post
    return labels, posteriors


class HierarchicalActivityDetector:
    """sklearn-style estimator over feature sequences.

    fit takes a list of (T_i, d) feature matrices with one activity label
    per sequence; ``negatives`` maps out-of-location activity names to
    pooled feature matrices used for the bank's negative clusters. predict
    labels one feature matrix per frame, online.
    """

    def __init__(
        self,
        substructure_cap: int = DEFAULT_SUBSTRUCTURE_CAP,
        smoothing: float = TRANSITION_FLOOR,
        self_prob: float = SELF_TRANSITION,
        to_neutral: float = TO_NEUTRAL,
        neutral_stay: float = NEUTRAL_STAY,
        seed: int = 0,
        boundary_prior: str = "uniform",
        incremental: bool = False,
        location: str = "",
    ):
        self.substructure_cap = substructure_cap
        self.smoothing = smoothing
        self.self_prob = self_prob
        self.to_neutral = to_neutral
        self.neutral_stay = neutral_stay
        self.seed = seed
        self.boundary_prior = boundary_prior
        self.incremental = incremental
        self.location = location

    def fit(self, X, y, negatives: dict[str, np.ndarray] | None = None):
        from .gmm import Standardizer, build_bank, soft_labels

        X = [np.asarray(seq, dtype=float) for seq in X]
        labels = list(y)
        training = {}
        for seq, label in zip(X, labels):
            training.setdefault(label, []).append(seq)
        training = {a: np.vstack(rows) for a, rows in training.items()}
        activities = sorted(training)
        if negatives:
            for name, samples in negatives.items():
                if name in training:
                    raise ValueError(f"negative activity {name!r} is also trained")
                training[name] = np.asarray(samples, dtype=float)

        standardizer = Standardizer.fit(np.vstack(list(training.values())))
        self.bank_ = build_bank(
            training,
            in_location=set(activities),
            location=self.location,
            seed=self.seed,
            standardizer=standardizer,
        )
        soft = [soft_labels(self.bank_, seq) for seq in X]
        self.tables_ = estimate_transitions(
            soft,
            labels,
            sub_prior=self.bank_.weights,
            activities=activities,
            smoothing=self.smoothing,
            self_prob=self.self_prob,
            to_neutral=self.to_neutral,
            neutral_stay=self.neutral_stay,
        )
        self.classes_ = self.tables_.states
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "tables_"):
            raise UninitializedStateError("detector is not fitted")

    def predict(self, X):
        labels, _ = self.detect(X)
        return np.asarray(labels)

    def predict_proba(self, X):
        _, posteriors = self.detect(X)
        return posteriors

    def detect(self, X):
        self._check_fitted()
        return detect_stream(
            np.asarray(X, dtype=float),
            self.bank_,
            self.tables_,
            cap=self.substructure_cap,
            incremental=self.incremental,
            boundary_prior=self.boundary_prior,
        )

    def start_stream(self) -> DetectorState:
        self._check_fitted()
        return init_state(self.tables_)

    def step(self, state: DetectorState, x_t: np.ndarray):
        self._check_fitted()
        return structure_step(
            state,
            x_t,
            self.bank_,
            self.tables_,
            cap=self.substructure_cap,
            incremental=self.incremental,
            boundary_prior=self.boundary_prior,
        )

    def get_params(self, deep=True):
        return {
            "substructure_cap": self.substructure_cap,
            "smoothing": self.smoothing,
            "self_prob": self.self_prob,
            "to_neutral": self.to_neutral,
            "neutral_stay": self.neutral_stay,
            "seed": self.seed,
            "boundary_prior": self.boundary_prior,
            "incremental": self.incremental,
            "location": self.location,
        }

    def set_params(self, **params):
        valid = self.get_params()
        for key, value in params.items():
            if key not in valid:
                raise ValueError(f"unknown parameter {key!r}")
            setattr(self, key, value)
        return self
