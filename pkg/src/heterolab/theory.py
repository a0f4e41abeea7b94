"""Numerical checks of the two aggregation results.

1. Concentration: under i.i.d. neighbor labels and bounded features, the
   aggregated vector ``h_i = W mean_j x_j`` satisfies
   ``P(||h_i - E h_i|| >= t) <= 2 l exp(-deg t^2 / (2 rho(W)^2 B^2 l))``.
2. Two-class CSBM: with the midpoint boundary, mean aggregation lowers the
   misclassification probability once ``deg > ((p+q)/(p-q))^2``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from heterolab.errors import NumericalError, ValidationError
from heterolab.synth import (
    CsbmParams,
    NeighborDistribution,
    RngSeed,
    expected_aggregate,
    sample_aggregates,
)

_SQRT1_2 = 1.0 / math.sqrt(2.0)


def std_normal_cdf(x: float) -> float:
    """Phi(x) from the complementary error function.

    The lower tail is always computed directly and the upper tail as its
    complement, so Phi(x) + Phi(-x) == 1 up to one rounding.
    """
    if not math.isfinite(x):
        raise ValidationError(f"non-finite argument {x!r}")
    if x <= 0.0:
        return 0.5 * math.erfc(-x * _SQRT1_2)
    return 1.0 - 0.5 * math.erfc(x * _SQRT1_2)


def spectral_norm(W, tol: float = 1e-10, max_iter: int = 10_000, seed: int = 0) -> float:
    """Largest singular value by power iteration on W^T W."""
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 2:
        raise ValidationError("spectral_norm expects a matrix")
    if not np.isfinite(W).all():
        raise ValidationError("matrix has non-finite entries")
    if not W.any():
        return 0.0
    G = W.T @ W
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(G.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        u = G @ v
        norm = np.linalg.norm(u)
        if norm == 0.0:
            v = rng.standard_normal(G.shape[0])
            v /= np.linalg.norm(v)
            continue
        v = u / norm
        lam_new = float(v @ G @ v)
        if abs(lam_new - lam) <= tol * abs(lam_new):
            lam = lam_new
            break
        lam = lam_new
    else:
        raise NumericalError(f"power iteration did not converge in {max_iter} steps")
    return math.sqrt(max(lam, 0.0))


def hoeffding_bound(degree: int, t: float, rho: float, B: float, l: int) -> float:
    if degree < 1 or t < 0 or rho <= 0 or B <= 0 or l < 1:
        raise ValidationError(f"bound domain violated: degree={degree}, t={t}, rho={rho}, B={B}, l={l}")
    return 2.0 * l * math.exp(-degree * t * t / (2.0 * rho * rho * B * B * l))


@dataclass
class ConcentrationReport:
    t_grid: list[float]
    empirical: list[float]
    bound: list[float]
    trials: int
    degree: int
    rho: float
    B: float
    l: int
    seed: int
    violations: list[float] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"kind": "concentration", **asdict(self)}


def verify_concentration(dist: NeighborDistribution, feats, W, degree: int, t_grid, trials: int,
                         seed: int, check: bool = True) -> ConcentrationReport:
    """Empirical tail of ||h_i - E h_i|| vs the concentration bound.

    E h_i comes from the distribution parameters, not from the samples.
    With ``check`` set, any grid point where the empirical frequency exceeds
    the bound by more than 3 Monte Carlo standard errors raises.
    """
    if trials < 10_000:
        raise ValidationError("need at least 1e4 trials")
    if any(f.shape != "uniform" for f in feats):
        raise ValidationError("concentration check needs bounded (uniform) features")
    B = max(f.bound for f in feats)
    W = np.asarray(W, dtype=np.float64)
    l = feats[0].mean.size
    rho = spectral_norm(W)
    mean = expected_aggregate(dist, feats, W)
    rng = RngSeed(seed, 31).generator()
    dev = np.linalg.norm(sample_aggregates(dist, feats, degree, W, trials, rng) - mean, axis=1)

    ts = [float(t) for t in t_grid]
    emp, bnd, bad = [], [], []
    for t in ts:
        p_hat = float(np.mean(dev >= t))
        b = hoeffding_bound(degree, t, rho, B, l)
        slack = 3.0 * math.sqrt(p_hat * (1.0 - p_hat) / trials)
        if p_hat > b + slack:
            bad.append(t)
        emp.append(p_hat)
        bnd.append(b)
    report = ConcentrationReport(ts, emp, bnd, trials, degree, rho, B, l, seed, bad)
    if check and bad:
        raise NumericalError(f"empirical tail exceeds bound at t={bad}")
    return report


@dataclass(frozen=True)
class DecisionBoundary:
    w: np.ndarray
    m: np.ndarray

    @property
    def b(self) -> float:
        return float(-self.w @ self.m)

    def score(self, z) -> np.ndarray:
        return np.asarray(z) @ self.w + self.b


def boundary_from_params(mu0, mu1) -> DecisionBoundary:
    mu0 = np.asarray(mu0, dtype=np.float64)
    mu1 = np.asarray(mu1, dtype=np.float64)
    diff = mu0 - mu1
    norm = np.linalg.norm(diff)
    if norm == 0.0:
        raise ValidationError("class means coincide; no decision boundary")
    return DecisionBoundary(w=diff / norm, m=(mu0 + mu1) / 2.0)


@dataclass(frozen=True)
class NeverHelps:
    """p == q: aggregated means collapse onto the midpoint, so no degree helps."""

    p: float
    q: float
    threshold = math.inf


def degree_threshold(p: float, q: float) -> float | NeverHelps:
    if not (0.0 < p <= 1.0 and 0.0 < q <= 1.0):
        raise ValidationError(f"p and q must lie in (0, 1], got p={p}, q={q}")
    if p == q:
        return NeverHelps(p, q)
    return ((p + q) / (p - q)) ** 2


def distances(params: CsbmParams, degree: float) -> tuple[float, float]:
    """(dis_x, dis_h'): distance of the class mean to the boundary, raw and
    for the sqrt(degree)-rescaled aggregate (both unit variance)."""
    half = params.separation / 2.0
    pq = params.p + params.q
    ratio = abs(params.p - params.q) / pq if pq > 0 else 0.0
    return half, math.sqrt(degree) * ratio * half


def analytic_misclassification(params: CsbmParams, degree: float) -> tuple[float, float]:
    if degree <= 0:
        raise ValidationError("degree must be positive")
    dx, dh = distances(params, degree)
    return std_normal_cdf(-dx), std_normal_cdf(-dh)


def monte_carlo_misclassification(params: CsbmParams, degree: int, trials: int, seed: int) -> dict:
    """Empirical error of the midpoint classifier on raw and aggregated features.

    Half the trials come from each class. Raw features are N(mu_c, I);
    aggregates are N((p mu_c + q mu_c') / (p+q), I / degree). For p < q the
    aggregate means swap sides, so the classifier for h uses the flipped
    orientation.
    """
    if trials < 10_000:
        raise ValidationError("need at least 1e4 trials")
    if params.separation == 0.0:
        raise ValidationError("class means coincide")
    bd = boundary_from_params(params.mu0, params.mu1)
    rng = RngSeed(seed, 41 + int(degree)).generator()
    half = trials // 2
    counts = (half, trials - half)
    mus = (params.mu0, params.mu1)
    pq = params.p + params.q
    orient = 1.0 if params.p >= params.q else -1.0
    err_x = err_h = 0
    for c in (0, 1):
        sign = 1.0 if c == 0 else -1.0
        x = mus[c] + rng.standard_normal((counts[c], params.l))
        err_x += int(np.count_nonzero(sign * bd.score(x) <= 0))
        agg_mean = (params.p * mus[c] + params.q * mus[1 - c]) / pq
        h = agg_mean + rng.standard_normal((counts[c], params.l)) / math.sqrt(degree)
        err_h += int(np.count_nonzero(orient * sign * bd.score(h) <= 0))
    p_x, p_h = analytic_misclassification(params, degree)
    return {
        "degree": int(degree),
        "trials": trials,
        "p_x": p_x,
        "p_h": p_h,
        "p_x_hat": err_x / trials,
        "p_h_hat": err_h / trials,
    }


@dataclass
class MisclassificationCurve:
    p: float
    q: float
    separation: float
    threshold: float
    degrees: list[int]
    p_x: float
    p_h: list[float]
    p_x_hat: list[float]
    p_h_hat: list[float]
    trials: int
    seed: int

    def to_json(self) -> dict:
        return {"kind": "csbm-misclassification", **asdict(self)}


def misclassification_curve(params: CsbmParams, degrees, trials: int, seed: int) -> MisclassificationCurve:
    rows = [monte_carlo_misclassification(params, d, trials, seed) for d in degrees]
    thr = degree_threshold(params.p, params.q)
    return MisclassificationCurve(
        p=params.p,
        q=params.q,
        separation=params.separation,
        threshold=thr.threshold if isinstance(thr, NeverHelps) else thr,
        degrees=[int(d) for d in degrees],
        p_x=rows[0]["p_x"] if rows else std_normal_cdf(-params.separation / 2),
        p_h=[r["p_h"] for r in rows],
        p_x_hat=[r["p_x_hat"] for r in rows],
        p_h_hat=[r["p_h_hat"] for r in rows],
        trials=trials,
        seed=seed,
    )
