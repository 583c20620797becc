"""Training-effectiveness analytics.

Covers the plateau learning curve y = b0 + b1 * x**(-b2) over cumulative
production, per-doubling learning rates, and Mann-Whitney U comparison of
two operator groups at chosen production levels. All functions are pure;
the exact U null distribution is memoized process-wide.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

DOUBLING_LEVELS = (1, 2, 4, 8, 16, 32, 64)


class EmptyInput(Exception):
    pass


class InsufficientData(Exception):
    pass


class EmptySample(Exception):
    pass


class ExactWithTies(Exception):
    """The exact method is only defined for tie-free samples."""


class OutOfRange(Exception):
    pass


@dataclass(frozen=True)
class CurvePoint:
    x: int  # cumulative batches, >= 1
    y: float  # cumulative average setup minutes, > 0


def cumulative_average(times: list[float]) -> list[CurvePoint]:
    """Running mean of per-batch setup minutes; point i covers batches 1..i+1."""
    if not times:
        raise EmptyInput("no batch times")
    if any(t <= 0 for t in times):
        raise ValueError("batch times must be positive")
    points = []
    total = 0.0
    for i, t in enumerate(times):
        total += t
        points.append(CurvePoint(x=i + 1, y=total / (i + 1)))
    return points


@dataclass(frozen=True)
class DoublingAnalysis:
    """Successive ratios of values observed at doubling production levels."""

    doubling_xs: tuple[int, ...]
    values: tuple[float, ...]
    rates: tuple[float, ...]  # fractions, values[i+1] / values[i]
    mean_rate: float  # arithmetic mean of rates, fraction


def doubling_rates(values: list[float], xs: tuple[int, ...] | None = None) -> DoublingAnalysis:
    """Learning rates between successive doublings; mean is their average.

    Display convention elsewhere: individual rates to 0.1 pp, mean to 0.01 pp.
    """
    if len(values) < 2:
        raise InsufficientData("need at least two doubling values")
    if any(v <= 0 for v in values):
        raise ValueError("doubling values must be positive")
    if xs is None:
        xs = tuple(2**i for i in range(len(values)))
    elif len(xs) != len(values):
        raise ValueError("xs and values must have equal length")
    rates = tuple(values[i + 1] / values[i] for i in range(len(values) - 1))
    return DoublingAnalysis(
        doubling_xs=tuple(xs),
        values=tuple(float(v) for v in values),
        rates=rates,
        mean_rate=sum(rates) / len(rates),
    )


@dataclass(frozen=True)
class LearningCurveModel:
    b0: float  # asymptotic minimum minutes
    b1: float  # maximum reduction minutes
    b2: float  # decay exponent
    sse: float
    degenerate: bool = False


def predict(model: LearningCurveModel, x: int) -> float:
    if x < 1:
        raise ValueError(f"x must be >= 1, got {x}")
    return model.b0 + model.b1 * float(x) ** (-model.b2)


def curve_residuals(params, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Residuals model(x) - y for parameter triple (b0, b1, b2)."""
    b0, b1, b2 = params
    return b0 + b1 * xs ** (-b2) - ys


def curve_jacobian(params, xs: np.ndarray) -> np.ndarray:
    """Analytic Jacobian of the residuals w.r.t. (b0, b1, b2)."""
    _, b1, b2 = params
    decay = xs ** (-b2)
    return np.column_stack([np.ones_like(xs), decay, -b1 * np.log(xs) * decay])


_B2_STARTS = tuple(round(0.1 * i, 1) for i in range(1, 21))


def _gauss_newton(xs, ys, start, max_iter=500, rel_tol=1e-10):
    # Step-halving damped Gauss-Newton, projected onto params >= 0.
    # Parameters pinned at 0 whose gradient points outward are frozen so the
    # reduced step stays a descent direction on the active face.
    params = np.array(start, float)
    resid = curve_residuals(params, xs, ys)
    sse = float(resid @ resid)
    for _ in range(max_iter):
        jac = curve_jacobian(params, xs)
        grad = jac.T @ resid
        free = ~((params <= 0.0) & (grad > 0.0))
        if not free.any():
            break
        step = np.zeros(len(params))
        step[free] = np.linalg.lstsq(jac[:, free], -resid, rcond=None)[0]
        scale = 1.0
        improved = False
        for _ in range(60):
            cand = np.maximum(params + scale * step, 0.0)
            cand_resid = curve_residuals(cand, xs, ys)
            cand_sse = float(cand_resid @ cand_resid)
            if cand_sse < sse:
                improved = True
                break
            scale *= 0.5
        if not improved:
            break
        rel_drop = (sse - cand_sse) / max(sse, 1e-300)
        params, resid, sse = cand, cand_resid, cand_sse
        if rel_drop < rel_tol:
            break
    return params, sse


def fit_towill(points: list[CurvePoint]) -> LearningCurveModel:
    """Nonnegative least-squares fit of y = b0 + b1 * x**(-b2).

    Deterministic multi-start: b2 over 0.1..2.0 in steps of 0.1, with
    b0 = 0.9 * min(y) and b1 = y(first x) - b0, each refined by damped
    Gauss-Newton until the relative SSE drop falls below 1e-10 (500
    iterations cap). Lowest SSE wins; exact ties resolve to the lower b2.
    """
    if len(points) < 4:
        raise InsufficientData(f"need at least 4 points, got {len(points)}")
    xs = np.array([p.x for p in points], float)
    ys = np.array([p.y for p in points], float)
    if len(np.unique(xs)) != len(xs):
        raise InsufficientData("points must have distinct x")
    order = np.argsort(xs)
    xs, ys = xs[order], ys[order]
    if np.all(ys == ys[0]):
        return LearningCurveModel(b0=float(ys[0]), b1=0.0, b2=0.0, sse=0.0, degenerate=True)

    b0_init = 0.9 * float(ys.min())
    b1_init = max(float(ys[0]) - b0_init, 0.0)
    best_params, best_sse = None, math.inf
    for b2_start in _B2_STARTS:
        params, sse = _gauss_newton(xs, ys, (b0_init, b1_init, b2_start))
        if sse < best_sse or (sse == best_sse and params[2] < best_params[2]):
            best_params, best_sse = params, sse
    return LearningCurveModel(
        b0=float(best_params[0]),
        b1=float(best_params[1]),
        b2=float(best_params[2]),
        sse=best_sse,
    )


def normal_cdf(z: float) -> float:
    """Standard normal CDF via the complementary error function."""
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def _midranks(pooled: list[float]) -> list[float]:
    n = len(pooled)
    order = sorted(range(n), key=lambda i: pooled[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and pooled[order[j + 1]] == pooled[order[i]]:
            j += 1
        mid = (i + j) / 2.0 + 1.0
        for t in range(i, j + 1):
            ranks[order[t]] = mid
        i = j + 1
    return ranks


@dataclass(frozen=True)
class MwuResult:
    n1: int
    n2: int
    r1: float
    r2: float
    u1: float
    u2: float
    u: float
    z: float  # absolute normal score, no continuity or tie correction
    p_two_tailed: float
    critical_u: int | None
    reject: bool
    alpha: float
    method: str


@lru_cache(maxsize=None)
def exact_u_counts(n1: int, n2: int) -> tuple[int, ...]:
    """Number of rank arrangements giving each U value, tie-free null.

    Recurrence: f(n1, n2, u) = f(n1-1, n2, u-n2) + f(n1, n2-1, u).
    """
    if n1 == 0 or n2 == 0:
        return (1,)
    shifted = exact_u_counts(n1 - 1, n2)
    reduced = exact_u_counts(n1, n2 - 1)
    counts = []
    for u in range(n1 * n2 + 1):
        total = 0
        if 0 <= u - n2 < len(shifted):
            total += shifted[u - n2]
        if u < len(reduced):
            total += reduced[u]
        counts.append(total)
    return tuple(counts)


def critical_u(n1: int, n2: int, alpha: float) -> int | None:
    """Largest u with P(U <= u) <= alpha/2 under the exact null distribution.

    None when even u = 0 exceeds the tail bound (no rejection possible).
    """
    if not (1 <= n1 <= 25 and 1 <= n2 <= 25):
        raise OutOfRange(f"sample sizes must be in 1..25, got {n1}, {n2}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    counts = exact_u_counts(n1, n2)
    total = sum(counts)
    cum = 0
    best: int | None = None
    for u, c in enumerate(counts):
        cum += c
        if 2 * cum <= alpha * total:
            best = u
        else:
            break
    return best


def mann_whitney(
    a: list[float],
    b: list[float],
    alpha: float = 0.05,
    method: str = "normal",
    continuity: bool = False,
) -> MwuResult:
    """Two-sided Mann-Whitney U test on pooled midranks.

    By default the normal approximation applies no continuity and no tie
    correction, the convention the published study figures follow; pass
    continuity=True for the corrected variant. z is reported as an absolute
    value. The exact method counts the tie-free null distribution of U and
    doubles the lower tail.
    """
    if not a or not b:
        raise EmptySample("both samples must be non-empty")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if method not in ("normal", "exact"):
        raise ValueError(f"method must be 'normal' or 'exact', got {method!r}")
    n1, n2 = len(a), len(b)
    pooled = [float(v) for v in a] + [float(v) for v in b]
    ranks = _midranks(pooled)
    r1 = sum(ranks[:n1])
    r2 = sum(ranks[n1:])
    u1 = r1 - n1 * (n1 + 1) / 2.0
    u2 = n1 * n2 - u1
    u = min(u1, u2)
    sd = math.sqrt(n1 * n2 * (n1 + n2 + 1) / 12.0)
    shift = 0.5 if continuity else 0.0
    z = max(abs(u - n1 * n2 / 2.0) - shift, 0.0) / sd

    if method == "normal":
        p = math.erfc(z / math.sqrt(2.0))
    else:
        if len(set(pooled)) != len(pooled):
            raise ExactWithTies("exact method requires tie-free samples")
        counts = exact_u_counts(n1, n2)
        total = sum(counts)
        cum = sum(counts[: int(u) + 1])
        p = min(1.0, 2.0 * cum / total)

    crit = critical_u(n1, n2, alpha) if max(n1, n2) <= 25 else None
    reject = crit is not None and u <= crit
    return MwuResult(
        n1=n1, n2=n2, r1=r1, r2=r2, u1=u1, u2=u2, u=u, z=z,
        p_two_tailed=p, critical_u=crit, reject=reject, alpha=alpha, method=method,
    )


@dataclass(frozen=True)
class ComparisonReport:
    levels: tuple[int, ...]
    mean_a: tuple[float, ...]
    mean_b: tuple[float, ...]
    marginal_differences: tuple[float, ...]  # mean_a - mean_b per level
    tests: tuple[MwuResult, ...]
    doubling_a: DoublingAnalysis
    doubling_b: DoublingAnalysis
    curve_a: LearningCurveModel
    curve_b: LearningCurveModel


def compare_groups(
    group_a,
    group_b,
    levels: tuple[int, ...] = DOUBLING_LEVELS,
    alpha: float = 0.05,
    method: str = "normal",
) -> ComparisonReport:
    """Compare two operator x batch matrices of setup minutes.

    Per level: each operator's cumulative average, group means, the marginal
    difference (group A minus group B), and a Mann-Whitney test across the
    two per-operator value sets. Group-level doubling rates and curve fits
    run on the group mean values at the levels.
    """
    a = np.asarray(group_a, dtype=float)
    b = np.asarray(group_b, dtype=float)
    for name, m in (("A", a), ("B", b)):
        if m.ndim != 2 or m.shape[0] < 2:
            raise InsufficientData(f"group {name} needs at least 2 operators")
        if m.shape[1] < max(levels):
            raise InsufficientData(
                f"group {name} covers {m.shape[1]} batches, needs {max(levels)}"
            )
        if np.any(m <= 0):
            raise ValueError(f"group {name} contains non-positive setup times")

    horizon = max(levels)
    batch_axis = np.arange(1, horizon + 1, dtype=float)
    cum_a = np.cumsum(a[:, :horizon], axis=1) / batch_axis
    cum_b = np.cumsum(b[:, :horizon], axis=1) / batch_axis
    cols = np.asarray(levels) - 1
    values_a = cum_a[:, cols]
    values_b = cum_b[:, cols]
    mean_a = values_a.mean(axis=0)
    mean_b = values_b.mean(axis=0)

    tests = tuple(
        mann_whitney(list(values_a[:, i]), list(values_b[:, i]), alpha=alpha, method=method)
        for i in range(len(levels))
    )
    points_a = [CurvePoint(int(lv), float(m)) for lv, m in zip(levels, mean_a)]
    points_b = [CurvePoint(int(lv), float(m)) for lv, m in zip(levels, mean_b)]
    return ComparisonReport(
        levels=tuple(int(lv) for lv in levels),
        mean_a=tuple(float(v) for v in mean_a),
        mean_b=tuple(float(v) for v in mean_b),
        marginal_differences=tuple(float(x - y) for x, y in zip(mean_a, mean_b)),
        tests=tests,
        doubling_a=doubling_rates(list(mean_a), xs=tuple(levels)),
        doubling_b=doubling_rates(list(mean_b), xs=tuple(levels)),
        curve_a=fit_towill(points_a),
        curve_b=fit_towill(points_b),
    )
