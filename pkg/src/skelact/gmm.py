"""Diagonal-covariance Gaussian mixtures and the per-location cluster bank.

Each modeled activity contributes five clusters fit by EM; every activity
that does not occur at the location contributes one "negative" cluster.
The combined bank defines the mid-level state vocabulary, its weights act
as the state prior, and its per-frame posteriors drive both transition
estimation and online scoring.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateClusterError,
    DimensionMismatchError,
    TooFewSamplesError,
)

NEGATIVE = "__negative__"

VARIANCE_FLOOR = 1e-6
_WEIGHT_FLOOR = 1e-8
_LOG_DENSITY_FLOOR = -745.0  # exp() underflows to 0 just below this
MAX_EM_ITERATIONS = 300
EM_TOL = 1e-6


@dataclass(frozen=True)
class Standardizer:
    """Per-dimension zero-mean unit-variance scaling from the training split."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, samples: np.ndarray) -> "Standardizer":
        samples = np.asarray(samples, dtype=float)
        scale = samples.std(axis=0)
        scale = np.where(scale < 1e-12, 1.0, scale)
        return cls(mean=samples.mean(axis=0), scale=scale)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.mean) / self.scale


@dataclass(frozen=True)
class GaussianCluster:
    """One mixture component with diagonal covariance."""

    mean: np.ndarray
    variances: np.ndarray  # diagonal of the covariance
    weight: float
    origin_activity: str


@dataclass(frozen=True)
class SubActivityBank:
    """All clusters for one location, with the shared feature scaling."""

    location: str
    clusters: tuple[GaussianCluster, ...]
    standardizer: Standardizer
    activities: tuple[str, ...] = field(default=())  # modeled at this location

    @property
    def n_states(self) -> int:
        return len(self.clusters)

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.clusters])

    @property
    def dim(self) -> int:
        return len(self.clusters[0].mean)


def _log_densities(
    x: np.ndarray, means: np.ndarray, variances: np.ndarray
) -> np.ndarray:
    """Row-wise diagonal-Gaussian log densities, (n_samples, n_clusters)."""
    x = np.atleast_2d(x)
    log_norm = -0.5 * np.sum(np.log(2.0 * np.pi * variances), axis=1)
    sq = np.square(x[:, None, :] - means[None, :, :]) / variances[None, :, :]
    return log_norm[None, :] - 0.5 * sq.sum(axis=2)


def _kmeans_pp_centers(
    samples: np.ndarray, k: int, rng: np.random.Generator
) -> np.ndarray:
    n = samples.shape[0]
    centers = [samples[rng.integers(n)]]
    d2 = np.sum(np.square(samples - centers[0]), axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            centers.append(samples[rng.integers(n)])
            continue
        centers.append(samples[rng.choice(n, p=d2 / total)])
        d2 = np.minimum(d2, np.sum(np.square(samples - centers[-1]), axis=1))
    return np.stack(centers)


def _em_fit(samples, k, rng):
    n, d = samples.shape
    centers = _kmeans_pp_centers(samples, k, rng)
    assign = np.argmin(
        np.sum(np.square(samples[:, None, :] - centers[None, :, :]), axis=2), axis=1
    )
    means = np.empty((k, d))
    variances = np.empty((k, d))
    weights = np.empty(k)
    global_var = np.maximum(samples.var(axis=0), VARIANCE_FLOOR)
    for j in range(k):
        members = samples[assign == j]
        if len(members) == 0:
            means[j] = centers[j]
            variances[j] = global_var
            weights[j] = 1.0 / n
        else:
            means[j] = members.mean(axis=0)
            variances[j] = np.maximum(members.var(axis=0), VARIANCE_FLOOR)
            weights[j] = len(members) / n
    weights /= weights.sum()

    history = []
    for _ in range(MAX_EM_ITERATIONS):
        joint = _log_densities(samples, means, variances) + np.log(weights)[None, :]
        row_max = joint.max(axis=1, keepdims=True)
        log_norm = row_max + np.log(np.exp(joint - row_max).sum(axis=1, keepdims=True))
        ll = float(log_norm.mean())
        resp = np.exp(joint - log_norm)

        counts = resp.sum(axis=0)
        weights = counts / n
        if np.any(weights < _WEIGHT_FLOOR):
            return None, history  # collapsed component, caller may reseed
        means = (resp.T @ samples) / counts[:, None]
        second = (resp.T @ np.square(samples)) / counts[:, None]
        variances = np.maximum(second - np.square(means), VARIANCE_FLOOR)

        history.append(ll)
        if len(history) > 1 and history[-1] - history[-2] < EM_TOL:
            break
    return (means, variances, weights), history


def fit_gmm(
    samples: np.ndarray,
    k: int,
    seed: int,
    origin_activity: str = "",
    return_history: bool = False,
):
    """Fit a k-component diagonal GMM by EM with k-means++ initialization.

    Deterministic given (samples, k, seed). Stops when the mean per-sample
    log-likelihood improves by less than 1e-6 or after 300 iterations. A
    component whose weight collapses below 1e-8 triggers one reseed
    (seed + 1) before raising DegenerateClusterError.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2:
        raise DimensionMismatchError("samples must be a 2-D array")
    if samples.shape[0] < 2 * k:
        raise TooFewSamplesError(
            f"need at least {2 * k} samples for k={k}, got {samples.shape[0]}"
        )

    params, history = _em_fit(samples, k, np.random.default_rng(seed))
    if params is None:
        params, history = _em_fit(samples, k, np.random.default_rng(seed + 1))
        if params is None:
            raise DegenerateClusterError(
                f"mixture component collapsed twice (k={k}, seed={seed})"
            )
    means, variances, weights = params
    clusters = [
        GaussianCluster(
            mean=means[j],
            variances=variances[j],
            weight=float(weights[j]),
            origin_activity=origin_activity,
        )
        for j in range(k)
    ]
    if return_history:
        return clusters, history
    return clusters


CLUSTERS_PER_ACTIVITY = 5


def build_bank(
    training: dict[str, np.ndarray],
    in_location: set[str] | frozenset[str],
    location: str,
    seed: int = 0,
    standardizer: Standardizer | None = None,
    history_sink: dict[str, list[float]] | None = None,
) -> SubActivityBank:
    """Build the location's cluster bank from per-activity feature matrices.

    Activities in ``in_location`` get five clusters each; every other
    activity in ``training`` contributes a single negative cluster. Bank
    weights are proportional to source sample count times source mixture
    weight, normalized over the whole bank. ``history_sink`` collects each
    fit's log-likelihood trace when given.
    """
    if standardizer is None:
        standardizer = Standardizer.fit(
            np.vstack([training[a] for a in sorted(training)])
        )

    clusters: list[GaussianCluster] = []
    raw_weights: list[float] = []
    for activity in sorted(training):
        samples = standardizer.apply(training[activity])
        if activity in in_location:
            if samples.shape[0] < 10:
                raise TooFewSamplesError(
                    f"activity {activity!r} has {samples.shape[0]} samples (< 10)"
                )
            fitted, history = fit_gmm(
                samples,
                CLUSTERS_PER_ACTIVITY,
                seed,
                origin_activity=activity,
                return_history=True,
            )
        else:
            fitted, history = fit_gmm(
                samples, 1, seed, origin_activity=NEGATIVE, return_history=True
            )
        if history_sink is not None:
            history_sink[activity] = history
        for c in fitted:
            clusters.append(c)
            raw_weights.append(samples.shape[0] * c.weight)

    total = sum(raw_weights)
    normalized = [
        GaussianCluster(
            mean=c.mean,
            variances=c.variances,
            weight=w / total,
            origin_activity=c.origin_activity,
        )
        for c, w in zip(clusters, raw_weights)
    ]
    return SubActivityBank(
        location=location,
        clusters=tuple(normalized),
        standardizer=standardizer,
        activities=tuple(sorted(in_location)),
    )


def log_posterior(bank: SubActivityBank, x: np.ndarray) -> np.ndarray:
    """Log P(state | x) rows for standardized input x, (n, m).

    Computed entirely in log space, so relative densities survive arbitrary
    magnitudes; each normalized log posterior is floored at -745, keeping
    full support (exp never reaches exact zero).
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != bank.dim:
        raise DimensionMismatchError(
            f"feature dim {x.shape[1]} != bank dim {bank.dim}"
        )
    means = np.stack([c.mean for c in bank.clusters])
    variances = np.stack([c.variances for c in bank.clusters])
    joint = _log_densities(x, means, variances) + np.log(bank.weights)[None, :]
    row_max = joint.max(axis=1, keepdims=True)
    log_norm = row_max + np.log(np.exp(joint - row_max).sum(axis=1, keepdims=True))
    return np.maximum(joint - log_norm, _LOG_DENSITY_FLOOR)


def posterior(bank: SubActivityBank, x: np.ndarray) -> np.ndarray:
    """P(state | x) for one standardized feature vector; sums to 1, no zeros."""
    p = np.exp(log_posterior(bank, x)[0])
    return p / p.sum()


def soft_labels(bank: SubActivityBank, sequence: np.ndarray) -> np.ndarray:
    """Per-frame state posteriors for a raw (unstandardized) feature matrix."""
    rows = np.exp(log_posterior(bank, bank.standardizer.apply(sequence)))
    return rows / rows.sum(axis=1, keepdims=True)
