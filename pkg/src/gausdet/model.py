"""Statistical model and decision rules for Gaussian signal detection.

Observations are y_i = xi_i (+ s_i under the alternative) with xi_i standard
normal and s_i zero-mean Gaussian with standard deviation sigma_i.  The
module holds the intensity-vector type, the scalar statistics D, T, B derived
from it, and the three decision rules built on the log-likelihood ratio:
the single-point ellipsoid test, the discrete-prior mixture test, and the
max-likelihood-ratio (GLRT) test over a finite candidate set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import logsumexp

from .errors import DimensionMismatch, InvalidInput

ArrayLike = Union[Sequence[float], np.ndarray]

WEIGHT_SUM_TOL = 1e-12


class Hypothesis(str, Enum):
    H0 = "H0"
    H1 = "H1"


def _as_vector(values: ArrayLike, name: str = "values") -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1 or arr.size < 1:
        raise InvalidInput(f"{name} must be a nonempty 1-D array")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True, eq=False)
class IntensityVector:
    """Nonnegative per-component signal standard deviations sigma_i.

    The central parameter of every formula in the package.  Immutable;
    derived quantities are exposed as properties.
    """

    values: np.ndarray

    def __post_init__(self):
        arr = _as_vector(self.values, "sigma")
        neg = np.flatnonzero(arr < 0)
        if neg.size:
            raise InvalidInput(f"sigma[{neg[0]}] negative")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def squared(self) -> np.ndarray:
        """Componentwise variances sigma_i^2."""
        return self.values**2

    @property
    def r_squared(self) -> np.ndarray:
        """Componentwise sigma_i^2 / (1 + sigma_i^2), the null-side weights."""
        s2 = self.squared
        return s2 / (1.0 + s2)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntensityVector) and np.array_equal(
            self.values, other.values
        )

    def __hash__(self) -> int:
        return hash(self.values.tobytes())

    def __repr__(self) -> str:
        return f"IntensityVector({self.values.tolist()})"


@dataclass(frozen=True, eq=False)
class Observation:
    """An observed vector y, dimension matching the model."""

    values: np.ndarray

    def __post_init__(self):
        arr = _as_vector(self.values, "y")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.size


def _obs_values(y: Union[Observation, ArrayLike]) -> np.ndarray:
    if isinstance(y, Observation):
        return y.values
    return _as_vector(y, "y")


def _check_dims(y: np.ndarray, sigma: IntensityVector) -> None:
    if y.size != sigma.n:
        raise DimensionMismatch(
            f"observation has length {y.size}, model has length {sigma.n}"
        )


@dataclass(frozen=True)
class SignalStatistics:
    """Scalar statistics of an intensity vector.

    D = sum ln(1+sigma_i^2)          (nats; the KL-type normalizer)
    T = sum sigma_i^2/(1+sigma_i^2)  (mean of the test statistic under noise)
    B = 2 sum sigma_i^4/(1+sigma_i^2)^2  (its variance under noise)
    delta = ln(max sigma_i^2 / min sigma_i^2), defined only when all
    sigma_i > 0 (None otherwise).

    window is the open interval (T - D, sum sigma_i^2 - D) of test levels A
    for which both error probabilities decay; the large-deviation machinery
    assumes A inside it.
    """

    D: float
    T: float
    B: float
    delta: Optional[float]
    window: tuple[float, float]


def signal_statistics(sigma: IntensityVector) -> SignalStatistics:
    """Compute D, T, B, delta, and the operating window for ``sigma``."""
    s2 = sigma.squared
    D = float(np.sum(np.log1p(s2)))
    T = float(np.sum(s2 / (1.0 + s2)))
    B = float(2.0 * np.sum((s2 / (1.0 + s2)) ** 2))
    if np.all(s2 > 0):
        delta = float(np.log(np.max(s2) / np.min(s2)))
    else:
        delta = None
    window = (T - D, float(np.sum(s2)) - D)
    return SignalStatistics(D=D, T=T, B=B, delta=delta, window=window)


def log_likelihood_ratio(
    y: Union[Observation, ArrayLike], sigma: IntensityVector
) -> float:
    """Log-likelihood ratio r(y, sigma) of signal-plus-noise vs noise.

    r = (1/2) sum sigma_i^2 y_i^2 / (1+sigma_i^2) - D(sigma)/2.
    """
    yv = _obs_values(y)
    _check_dims(yv, sigma)
    D = float(np.sum(np.log1p(sigma.squared)))
    return float(0.5 * np.dot(yv**2, sigma.r_squared) - 0.5 * D)


@dataclass(frozen=True)
class NpTest:
    """Single-point ellipsoid test: accept H0 iff sum w_i y_i^2 <= D + A.

    The weights are w_i = sigma_i^2/(1+sigma_i^2).  The acceptance region is
    closed (boundary decides H0) and nonempty, which requires D + A >= 0.
    """

    sigma: IntensityVector
    A: float
    in_window: bool = field(init=False)

    def __post_init__(self):
        stats = signal_statistics(self.sigma)
        if stats.D + self.A < 0:
            raise InvalidInput(
                f"D + A = {stats.D + self.A:.6g} < 0: empty acceptance region"
            )
        lo, hi = stats.window
        object.__setattr__(self, "in_window", lo < self.A < hi)

    @property
    def threshold(self) -> float:
        """The ellipsoid radius D(sigma) + A."""
        return float(np.sum(np.log1p(self.sigma.squared))) + self.A

    def accepts(self, Y: np.ndarray) -> np.ndarray:
        """Vectorized H0-acceptance over rows of Y (shape (m, n))."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if Y.shape[1] != self.sigma.n:
            raise DimensionMismatch(
                f"rows of Y have length {Y.shape[1]}, model has {self.sigma.n}"
            )
        stat = (Y**2) @ self.sigma.r_squared
        return stat <= self.threshold


def np_decide(test: NpTest, y: Union[Observation, ArrayLike]) -> Hypothesis:
    """Decide H0/H1 for a single observation under the ellipsoid test."""
    yv = _obs_values(y)
    _check_dims(yv, test.sigma)
    return Hypothesis.H0 if bool(test.accepts(yv[None, :])[0]) else Hypothesis.H1


@dataclass(frozen=True, eq=False)
class DiscretePrior:
    """Finite-support prior over intensity vectors."""

    points: tuple[IntensityVector, ...]
    weights: np.ndarray

    def __post_init__(self):
        points = tuple(self.points)
        if not points:
            raise InvalidInput("prior must have at least one support point")
        w = _as_vector(self.weights, "weights")
        if w.size != len(points):
            raise DimensionMismatch("one weight per support point required")
        if np.any(w < 0):
            raise InvalidInput("weights must be nonnegative")
        if abs(float(np.sum(w)) - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidInput(
                f"weights sum to {float(np.sum(w)):.17g}, not 1 within {WEIGHT_SUM_TOL}"
            )
        n = points[0].n
        for p in points:
            if p.n != n:
                raise DimensionMismatch("prior support points have mixed lengths")
        w.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.points[0].n


def bayes_log_ratio(
    y: Union[Observation, ArrayLike], prior: DiscretePrior
) -> float:
    """Log mixture likelihood ratio ln sum_k w_k exp(r(y, sigma_k)).

    Computed with a max-shifted exponential sum, so D(sigma_k) of order
    hundreds does not underflow.  With a one-point prior this equals
    ``log_likelihood_ratio`` exactly.
    """
    yv = _obs_values(y)
    if yv.size != prior.n:
        raise DimensionMismatch(
            f"observation has length {yv.size}, prior has length {prior.n}"
        )
    logs = np.array(
        [log_likelihood_ratio(yv, p) for p in prior.points], dtype=float
    )
    return float(logsumexp(logs, b=prior.weights))


@dataclass(frozen=True, eq=False)
class BayesTest:
    """Mixture test: accept H0 iff the log mixture ratio is <= level."""

    prior: DiscretePrior
    level: float

    def accepts(self, Y: np.ndarray) -> np.ndarray:
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if Y.shape[1] != self.prior.n:
            raise DimensionMismatch(
                f"rows of Y have length {Y.shape[1]}, prior has {self.prior.n}"
            )
        W = np.stack([p.r_squared for p in self.prior.points])  # (k, n)
        Dk = np.array(
            [float(np.sum(np.log1p(p.squared))) for p in self.prior.points]
        )
        logs = 0.5 * (Y**2) @ W.T - 0.5 * Dk  # (m, k)
        mix = logsumexp(logs, b=self.prior.weights, axis=1)
        return mix <= self.level


def bayes_decide(
    y: Union[Observation, ArrayLike], prior: DiscretePrior, level: float
) -> Hypothesis:
    """Decide H0/H1 with the mixture test at the given level."""
    value = bayes_log_ratio(y, prior)
    return Hypothesis.H0 if value <= level else Hypothesis.H1


@dataclass(frozen=True, eq=False)
class FinitePoints:
    """A finite candidate set of intensity vectors sharing one dimension."""

    points: tuple[IntensityVector, ...]

    def __post_init__(self):
        points = tuple(self.points)
        if not points:
            raise InvalidInput("candidate set must be nonempty")
        n = points[0].n
        for p in points:
            if p.n != n:
                raise DimensionMismatch("candidate points have mixed lengths")
        object.__setattr__(self, "points", points)

    @property
    def n(self) -> int:
        return self.points[0].n

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class ProductFloor:
    """Parametric set {lam >= 0 : prod(1+lam_i^2) >= (1+D^2)^n}."""

    n: int
    D: float

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInput("n must be >= 1")
        if self.D <= 0:
            raise InvalidInput("D must be positive")

    def witness_points(self) -> FinitePoints:
        """The single point (D, ..., D); the set reduces to it exactly."""
        return FinitePoints(
            (IntensityVector(np.full(self.n, self.D)),)
        )


@dataclass(frozen=True)
class SumFloor:
    """Parametric set {sigma >= 0 : sum sigma_i^2 >= n R^2}."""

    n: int
    R: float

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInput("n must be >= 1")
        if self.R <= 0:
            raise InvalidInput("R must be positive")

    def one_hot_points(self) -> FinitePoints:
        """The n vectors with a single coordinate equal to R*sqrt(n)."""
        v = self.R * math.sqrt(self.n)
        pts = []
        for i in range(self.n):
            arr = np.zeros(self.n)
            arr[i] = v
            pts.append(IntensityVector(arr))
        return FinitePoints(tuple(pts))

    def witness_points(self) -> FinitePoints:
        """One-hot minimizers of D plus the flat point (R, ..., R)."""
        pts = list(self.one_hot_points().points)
        pts.append(IntensityVector(np.full(self.n, self.R)))
        return FinitePoints(tuple(pts))


CandidateSet = Union[FinitePoints, ProductFloor, SumFloor]


def _levels_array(levels: Union[float, ArrayLike], m: int) -> np.ndarray:
    arr = np.asarray(levels, dtype=float)
    if arr.ndim == 0:
        return np.full(m, float(arr))
    if arr.ndim != 1 or arr.size != m:
        raise DimensionMismatch("one level per candidate required")
    return arr


@dataclass(frozen=True, eq=False)
class GlrtTest:
    """Max-ratio test: accept H0 iff max_k [2 r(y, sigma_k) - A_k] <= 0."""

    candidates: FinitePoints
    levels: np.ndarray

    def __post_init__(self):
        levels = _levels_array(self.levels, len(self.candidates))
        levels.setflags(write=False)
        object.__setattr__(self, "levels", levels)

    def accepts(self, Y: np.ndarray) -> np.ndarray:
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if Y.shape[1] != self.candidates.n:
            raise DimensionMismatch(
                f"rows of Y have length {Y.shape[1]}, candidates have "
                f"{self.candidates.n}"
            )
        W = np.stack([p.r_squared for p in self.candidates.points])
        Dk = np.array(
            [float(np.sum(np.log1p(p.squared))) for p in self.candidates.points]
        )
        # 2 r(y, sigma_k) - A_k = y^2 . w_k - D_k - A_k
        stat = (Y**2) @ W.T - Dk - self.levels
        return np.max(stat, axis=1) <= 0.0


def glrt_decide(
    candidates: FinitePoints,
    levels: Union[float, ArrayLike],
    y: Union[Observation, ArrayLike],
) -> Hypothesis:
    """Decide H0/H1 with the max-ratio test over a finite candidate set.

    ``levels`` is a per-candidate array or one scalar used for every
    candidate.  Boundary ties decide H0 (closed acceptance region).
    """
    yv = _obs_values(y)
    test = GlrtTest(candidates, levels)
    if yv.size != candidates.n:
        raise DimensionMismatch(
            f"observation has length {yv.size}, candidates have {candidates.n}"
        )
    return Hypothesis.H0 if bool(test.accepts(yv[None, :])[0]) else Hypothesis.H1
