"""Chernoff-type exponents and large-deviation bounds on the error probabilities.

For the ellipsoid test at level A with threshold D + A:

* miss probability:        beta  <= exp(-g(u0)),  2g(u) = sum ln(1+u s_i^2) - u(D+A)
* mismatched miss (true intensity lambda):  beta_mm <= exp(-g_nu(v0)) with the
  transformed variances nu_i^2 = s_i^2 (1+l_i^2)/(1+s_i^2)
* false alarm:             alpha <= exp(-f(t0)),  2f(t) = t(D+A) + sum ln(1-t r_i^2)

u0, v0, t0 solve the stationarity equations; each left side is strictly
monotone in the unknown, so a bracketed Newton solver converges
unconditionally.  The module also provides the matching lower-bound sandwich
on ln(beta) built from a blockwise chi-square construction, and the
sufficient conditions under which a nearby intensity lambda can replace
sigma without changing the exponent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, InvalidInput, OutOfRegime
from .model import IntensityVector, signal_statistics
from .solvers import RootResult, grow_upper_bracket, solve_bracketed

INTERIOR = "interior"
AT_ZERO = "at_zero"
AT_ONE = "at_one"


@dataclass(frozen=True)
class ExponentSolution:
    """Result of a scalar exponent maximization.

    argmax is u0/v0/t0; value is the maximized exponent in nats;
    stationarity_residual is the derivative of the exponent at argmax
    (zero up to solver tolerance when boundary_case is "interior").
    """

    argmax: float
    value: float
    stationarity_residual: float
    iterations: int
    boundary_case: str


@dataclass(frozen=True)
class MismatchProfile:
    """Transformed variances nu_i^2 = sigma_i^2 (1+lambda_i^2)/(1+sigma_i^2)."""

    sigma: IntensityVector
    lam: IntensityVector
    nu_squared: np.ndarray


@dataclass(frozen=True)
class BoundInterval:
    """A lower/upper sandwich on a log-probability."""

    lower: float
    upper: float
    lower_provenance: str
    upper_provenance: str

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise InvalidInput(
                f"interval lower {self.lower:.6g} exceeds upper {self.upper:.6g}"
            )

    def contains(self, x: float) -> bool:
        return self.lower <= x <= self.upper


@dataclass(frozen=True)
class BetaLowerBound:
    """Sandwich on ln(beta) plus the blockwise construction behind it.

    interval is the headline sandwich [-g(u0) - sqrt(delta n ln(pi n))
    - ln(pi n), -g(u0)].  constructive_lower is the bound actually computed
    from the K-block partition (also a valid lower bound on ln beta).
    u1 solves the blockwise stationarity equation; u1 >= u0 always.
    """

    interval: BoundInterval
    constructive_lower: float
    u0: ExponentSolution
    u1: float
    u1_residual: float
    K: int


@dataclass(frozen=True)
class ConditionCheck:
    """Outcome of a replaceability condition evaluation.

    ratio = lhs / g_ref measures the relative exponent perturbation; small
    ratio means replacing sigma by lambda costs little.  violated is set
    when a log argument was nonpositive, which makes the condition fail
    structurally (lhs is NaN in that case).
    """

    mode: str
    lhs: float
    g_ref: float
    ratio: float
    violated: bool


def _weighted_exponent(w2: np.ndarray, threshold: float, x: float):
    """(g, g') for 2g(x) = sum ln(1 + x w2_i) - x * threshold, x >= 0."""
    two_g = float(np.sum(np.log1p(x * w2))) - x * threshold
    two_gp = float(np.sum(w2 / (1.0 + x * w2))) - threshold
    return 0.5 * two_g, 0.5 * two_gp


def g_eval(sigma: IntensityVector, A: float, u: float):
    """Evaluate the miss exponent g and its derivative at u >= 0.

    2g(u) = sum ln(1+u sigma_i^2) - u (D+A);  g(1) = -A/2 identically.
    """
    if u < 0:
        raise InvalidInput("u must be nonnegative")
    stats = signal_statistics(sigma)
    return _weighted_exponent(sigma.squared, stats.D + A, u)


def _solve_weighted_stationarity(
    w2: np.ndarray, threshold: float, hi: float
) -> RootResult:
    """Root of sum w2/(1+x w2) = threshold on (0, hi); LHS strictly decreasing."""

    def h(x: float) -> float:
        return float(np.sum(w2 / (1.0 + x * w2))) - threshold

    def dh(x: float) -> float:
        return -float(np.sum((w2 / (1.0 + x * w2)) ** 2))

    return solve_bracketed(h, dh, 0.0, hi)


def solve_u0(sigma: IntensityVector, A: float) -> ExponentSolution:
    """Maximize the miss exponent g over u >= 0.

    Interior solutions lie in (0, 1) and satisfy
    sum sigma_i^2/(1+u0 sigma_i^2) = D + A.  When A is outside the
    operating window the maximum sits at an endpoint: u0 = 0 for A at or
    above the upper edge (g = 0), u0 = 1 for A at or below the lower edge
    (g = -A/2).  Endpoints are reported via boundary_case, never an error.
    """
    s2 = sigma.squared
    stats = signal_statistics(sigma)
    threshold = stats.D + A
    _, gp0 = _weighted_exponent(s2, threshold, 0.0)
    if gp0 <= 0:
        g0, _ = _weighted_exponent(s2, threshold, 0.0)
        return ExponentSolution(0.0, g0, gp0, 0, AT_ZERO)
    g1, gp1 = _weighted_exponent(s2, threshold, 1.0)
    if gp1 >= 0:
        return ExponentSolution(1.0, g1, gp1, 0, AT_ONE)
    res = _solve_weighted_stationarity(s2, threshold, 1.0)
    g, gp = _weighted_exponent(s2, threshold, res.root)
    return ExponentSolution(res.root, g, gp, res.iterations, INTERIOR)


def beta_upper_bound(sigma: IntensityVector, A: float) -> float:
    """Chernoff upper bound exp(-g(u0)) on the miss probability, clipped to 1."""
    sol = solve_u0(sigma, A)
    return min(1.0, math.exp(-sol.value))


def mismatch_profile(sigma: IntensityVector, lam: IntensityVector) -> MismatchProfile:
    """Transformed variances of the designed-for-sigma test under true lambda."""
    if sigma.n != lam.n:
        raise DimensionMismatch(
            f"sigma has length {sigma.n}, lambda has length {lam.n}"
        )
    nu2 = sigma.squared * (1.0 + lam.squared) / (1.0 + sigma.squared)
    return MismatchProfile(sigma, lam, nu2)


def beta_mismatch_upper(
    sigma: IntensityVector, lam: IntensityVector, A: float
):
    """Chernoff bound on the mismatched miss probability beta_sigma(A, lambda).

    Solves sum nu_i^2/(1+v0 nu_i^2) = D(sigma) + A over v0 >= 0; when the
    mean sum nu_i^2 already sits at or below the threshold the optimum is
    v0 = 0 and the bound is the trivial 1.  Returns (solution, bound).
    """
    prof = mismatch_profile(sigma, lam)
    nu2 = prof.nu_squared
    stats = signal_statistics(sigma)
    threshold = stats.D + A
    g0, gp0 = _weighted_exponent(nu2, threshold, 0.0)
    if gp0 <= 0:
        sol = ExponentSolution(0.0, g0, gp0, 0, AT_ZERO)
        return sol, 1.0

    def h(x: float) -> float:
        return float(np.sum(nu2 / (1.0 + x * nu2))) - threshold

    hi = grow_upper_bracket(h)
    res = _solve_weighted_stationarity(nu2, threshold, hi)
    g, gp = _weighted_exponent(nu2, threshold, res.root)
    sol = ExponentSolution(res.root, g, gp, res.iterations, INTERIOR)
    return sol, min(1.0, math.exp(-g))


def alpha_upper_bound(sigma: IntensityVector, A: float):
    """Chernoff bound on the false alarm probability, plus the simple bound.

    2f(t) = t(D+A) + sum ln(1 - t r_i^2) with r_i^2 = sigma_i^2/(1+sigma_i^2);
    the stationarity equation is sum r_i^2/(1-t0 r_i^2) = D+A.  Returns
    (solution at t0, exp(-f(t0)), exp(-A/2)); both are valid upper bounds
    on alpha and neither dominates the other for all A.
    """
    r2 = sigma.r_squared
    stats = signal_statistics(sigma)
    threshold = stats.D + A
    simple = math.exp(-A / 2.0)

    def f_eval(t: float):
        two_f = t * threshold + float(np.sum(np.log1p(-t * r2)))
        two_fp = threshold - float(np.sum(r2 / (1.0 - t * r2)))
        return 0.5 * two_f, 0.5 * two_fp

    f0, fp0 = f_eval(0.0)
    if fp0 <= 0:  # threshold <= T: no positive exponent available
        sol = ExponentSolution(0.0, f0, fp0, 0, AT_ZERO)
        return sol, 1.0, simple
    f1, fp1 = f_eval(1.0)
    if fp1 >= 0:  # threshold >= sum sigma^2: optimum at t = 1, f = A/2
        sol = ExponentSolution(1.0, f1, fp1, 0, AT_ONE)
        return sol, min(1.0, math.exp(-f1)), simple

    def h(t: float) -> float:
        return threshold - float(np.sum(r2 / (1.0 - t * r2)))

    def dh(t: float) -> float:
        return -float(np.sum((r2 / (1.0 - t * r2)) ** 2))

    res = solve_bracketed(h, dh, 0.0, 1.0)
    f, fp = f_eval(res.root)
    sol = ExponentSolution(res.root, f, fp, res.iterations, INTERIOR)
    return sol, min(1.0, math.exp(-f)), simple


MODE_EXACT_U0 = "exact_u0"
MODE_U0_EQUALS_1 = "u0_equals_1"
MODE_ASYMP1A = "asymp1a"


def sufficient_condition_check(
    sigma: IntensityVector,
    lam: IntensityVector,
    A: float,
    mode: str = MODE_EXACT_U0,
) -> ConditionCheck:
    """Evaluate a replaceability condition for swapping sigma with lambda.

    mode "exact_u0": lhs = sum ln[1 + u0 s_i^2 (l_i^2-s_i^2) /
    ((1+s_i^2)(1+u0 s_i^2))] against g_ref = g(u0).  mode "u0_equals_1":
    the same expression frozen at u0 = 1 against g_ref = |g(1)| = |A|/2,
    for the near-critical regime where u0 is close to 1.  mode "asymp1a":
    lhs = g(u0) - max{g_nu(u0), g_nu(1)} with g_nu the mismatch exponent.

    A nonpositive log argument (possible when lambda_i << sigma_i) is
    reported via violated=True with lhs = NaN, never an exception.
    """
    if sigma.n != lam.n:
        raise DimensionMismatch(
            f"sigma has length {sigma.n}, lambda has length {lam.n}"
        )
    s2 = sigma.squared
    l2 = lam.squared
    stats = signal_statistics(sigma)
    threshold = stats.D + A

    def log_sum_at(u: float):
        args = 1.0 + u * s2 * (l2 - s2) / ((1.0 + s2) * (1.0 + u * s2))
        if np.any(args <= 0):
            return None
        return float(np.sum(np.log(args)))

    if mode == MODE_EXACT_U0:
        sol = solve_u0(sigma, A)
        if sol.boundary_case != INTERIOR:
            raise OutOfRegime(
                f"level A outside the operating window (u0 {sol.boundary_case})"
            )
        lhs = log_sum_at(sol.argmax)
        g_ref = sol.value
    elif mode == MODE_U0_EQUALS_1:
        lhs = log_sum_at(1.0)
        g_ref = abs(A) / 2.0
    elif mode == MODE_ASYMP1A:
        sol = solve_u0(sigma, A)
        g_ref = sol.value
        nu2 = mismatch_profile(sigma, lam).nu_squared
        g_nu_u0, _ = _weighted_exponent(nu2, threshold, sol.argmax)
        g_nu_1, _ = _weighted_exponent(nu2, threshold, 1.0)
        lhs = g_ref - max(g_nu_u0, g_nu_1)
    else:
        raise InvalidInput(f"unknown mode {mode!r}")

    if lhs is None:
        return ConditionCheck(mode, math.nan, g_ref, math.nan, True)
    ratio = lhs / g_ref if g_ref != 0 else math.nan
    return ConditionCheck(mode, lhs, g_ref, ratio, False)


def _block_sizes(n: int, K: int) -> np.ndarray:
    sizes = np.full(K, n // K, dtype=int)
    sizes[: n % K] += 1
    return sizes


def default_block_count(n: int, delta: float) -> int:
    """K minimizing n*delta/K + K ln(pi n), clamped to [1, n]."""
    k = round(math.sqrt(n * delta / math.log(math.pi * n)))
    return max(1, min(n, k))


def beta_lower_bound(
    sigma: IntensityVector, A: float, K: Optional[int] = None
) -> BetaLowerBound:
    """Two-sided sandwich on ln(beta) around the Chernoff exponent.

    Requires all sigma_i > 0 (the spread delta must exist) and A inside the
    operating window.  The lower side comes from partitioning the sorted
    variances into K blocks, bounding each block by a pure chi-square event
    at its largest variance, and applying the chi-square lower-tail
    sandwich per block; the block thresholds are chosen optimally via the
    stationarity equation sum_k m_k b_k/(1+u1 b_k) = D + A.
    """
    s2 = sigma.squared
    if np.any(s2 == 0):
        raise InvalidInput("delta undefined: some sigma_i = 0")
    n = sigma.n
    stats = signal_statistics(sigma)
    delta = stats.delta
    sol = solve_u0(sigma, A)
    if sol.boundary_case != INTERIOR:
        raise OutOfRegime(
            f"level A outside the operating window (u0 {sol.boundary_case})"
        )
    upper = -sol.value
    log_pin = math.log(math.pi * n)
    lower = upper - math.sqrt(delta * n * log_pin) - log_pin
    interval = BoundInterval(
        lower=lower,
        upper=upper,
        lower_provenance="block chi-square construction, optimized K",
        upper_provenance="Chernoff bound exp(-g(u0))",
    )

    if K is None:
        K = default_block_count(n, delta)
    if not 1 <= K <= n:
        raise InvalidInput(f"K must be in [1, {n}]")
    sizes = _block_sizes(n, K)
    s2_desc = np.sort(s2)[::-1]
    heads = np.concatenate(([0], np.cumsum(sizes)[:-1]))
    b = s2_desc[heads]  # block-leading (largest) variances
    m = sizes.astype(float)
    # Threshold here is the raw ellipsoid radius D + A, split across blocks.
    threshold = stats.D + A

    def h(u: float) -> float:
        return float(np.sum(m * b / (1.0 + u * b))) - threshold

    def dh(u: float) -> float:
        return -float(np.sum(m * (b / (1.0 + u * b)) ** 2))

    if h(0.0) <= 0:
        u1, u1_res = 0.0, h(0.0)
    else:
        hi = grow_upper_bracket(h)
        res = solve_bracketed(h, dh, 0.0, hi)
        u1, u1_res = res.root, res.residual

    # Per-block chi-square lower-tail sandwich at a_k = m_k/(1+u1 b_k) <= m_k.
    a = m / (1.0 + u1 * b)
    pivot = -0.5 * (m * (np.log1p(u1 * b) - 1.0) + a)
    constructive = float(
        np.sum(pivot - 0.5 * np.log(math.pi * m) - 1.0 / (3.0 * m))
    )
    return BetaLowerBound(
        interval=interval,
        constructive_lower=constructive,
        u0=sol,
        u1=u1,
        u1_residual=u1_res,
        K=int(K),
    )


@dataclass(frozen=True)
class TransferBound:
    """Upper bound on ln beta(A, lambda) transferred from sigma.

    applicable is False when the exponent-ordering hypothesis
    g_sigma(u0) <= g_lambda(u0) fails numerically.  raw is the transferred
    value before clipping at 0 (probabilities cannot exceed 1).
    """

    applicable: bool
    value: Optional[float]
    raw: Optional[float]


def bound_transfer(
    sigma: IntensityVector, lam: IntensityVector, A: float
) -> TransferBound:
    """Transfer the ln(beta) upper estimate from sigma to lambda.

    Valid when g_sigma(u0) <= g_lambda(u0) (checked numerically, with
    u0 the maximizer for sigma); then ln beta(A, lambda) <= -g_sigma(u0)
    + sqrt(delta_sigma n ln(pi n)) + ln(pi n).
    """
    if sigma.n != lam.n:
        raise DimensionMismatch(
            f"sigma has length {sigma.n}, lambda has length {lam.n}"
        )
    if np.any(sigma.squared == 0):
        raise InvalidInput("delta undefined: some sigma_i = 0")
    sol = solve_u0(sigma, A)
    g_sig = sol.value
    g_lam, _ = g_eval(lam, A, sol.argmax)
    if g_sig > g_lam + 1e-12 * (1.0 + abs(g_sig)):
        return TransferBound(False, None, None)
    stats = signal_statistics(sigma)
    n = sigma.n
    log_pin = math.log(math.pi * n)
    raw = -g_sig + math.sqrt(stats.delta * n * log_pin) + log_pin
    return TransferBound(True, min(0.0, raw), raw)
