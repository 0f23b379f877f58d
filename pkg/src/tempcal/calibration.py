"""Temperature scaling: tempered softmax and the 1-D temperature fit.

Dividing logits by a positive scalar temperature T before the softmax
softens (T > 1) or sharpens (T < 1) the probabilities while leaving the
argmax untouched, so classification metrics are invariant.  The optimal
T minimizes mean NLL on a held-out validation set.  The objective is
convex in 1/T, hence unimodal in log T; a coarse log-spaced scan
followed by golden-section search brackets the minimum without
derivatives.  The analytic dNLL/dT is kept for verification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .interchange import LabeledLogits
from .metrics import ProbPredictions

__all__ = [
    "T_MIN",
    "T_MAX",
    "FitResult",
    "tempered_softmax",
    "apply_temperature",
    "nll_at",
    "nll_gradient",
    "fit_temperature",
]

T_MIN = 0.05
T_MAX = 20.0

_COARSE_POINTS = 50
_LOG_BRACKET_TOL = 1e-5
_MAX_EVALUATIONS = 10_000

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0


@dataclass
class FitResult:
    """Outcome of the temperature search."""

    temperature: float
    nll_before: float  # at T = 1
    nll_after: float  # at the fitted T
    evaluations: int
    converged: bool
    at_bound: bool  # fitted T sits on the search-domain boundary


def _check_temperature(t: float) -> float:
    t = float(t)
    if not (T_MIN <= t <= T_MAX):
        raise ValueError(f"temperature {t} outside [{T_MIN}, {T_MAX}]")
    return t


def tempered_softmax(z: np.ndarray, temperature: float) -> np.ndarray:
    """Softmax of z / T, stabilized by max subtraction.

    Accepts a single logit vector or an (n, K) batch; rows sum to 1 and
    the argmax equals the argmax of z for every in-range T.
    """
    t = _check_temperature(temperature)
    z = np.asarray(z, dtype=np.float64)
    # NaN propagates through min and max; -inf hits min, +inf hits max
    if z.size and not (np.isfinite(z.min()) and np.isfinite(z.max())):
        raise ValueError("logits must be finite")
    if z.shape[-1] < 2:
        raise ValueError("need at least two classes")
    s = z / t  # fresh array; safe to finish in place
    s -= s.max(axis=-1, keepdims=True)
    np.exp(s, out=s)
    s /= s.sum(axis=-1, keepdims=True)
    return s


def apply_temperature(data: LabeledLogits, temperature: float) -> ProbPredictions:
    """Row-wise tempered softmax; labels pass through unchanged."""
    # the softmax output satisfies the ProbPredictions invariants by
    # construction and data validated its labels, so skip re-validation
    return ProbPredictions._from_valid(
        tempered_softmax(data.logits, temperature),
        data.labels.copy(),
    )


def nll_at(data: LabeledLogits, temperature: float) -> float:
    """Mean NLL of the tempered softmax: mean[logsumexp(z/T) - z_y/T]."""
    t = _check_temperature(temperature)
    s = data.logits / t
    z_true = s[np.arange(data.n), data.labels]
    return float(np.mean(logsumexp(s, axis=1) - z_true))


def nll_gradient(data: LabeledLogits, temperature: float) -> float:
    """Analytic dNLL/dT: mean of (z_y - sum_k p_k z_k) / T^2."""
    t = _check_temperature(temperature)
    p = tempered_softmax(data.logits, t)
    expected = np.sum(p * data.logits, axis=1)
    z_true = data.logits[np.arange(data.n), data.labels]
    return float(np.mean(z_true - expected) / (t * t))


def fit_temperature(data: LabeledLogits) -> FitResult:
    """Minimize NLL over T in [T_MIN, T_MAX].

    Strategy: evaluate a 50-point log-spaced grid, then golden-section
    search on log T inside the bracketing interval until the bracket is
    narrower than 1e-5 in log T.  T = 1 and any touched domain boundary
    are added to the final candidate set, so the result never loses to
    the uncalibrated baseline and boundary optima are returned exactly.
    """
    data.validate()
    evaluations = 0

    def f_log(x: float) -> float:
        nonlocal evaluations
        evaluations += 1
        return nll_at(data, math.exp(x))

    lo, hi = math.log(T_MIN), math.log(T_MAX)
    xs = np.linspace(lo, hi, _COARSE_POINTS)
    ys = [f_log(float(x)) for x in xs]
    best = int(np.argmin(ys))

    a = float(xs[max(best - 1, 0)])
    b = float(xs[min(best + 1, _COARSE_POINTS - 1)])

    # golden-section on log T
    h = b - a
    c = a + _INVPHI2 * h
    d = a + _INVPHI * h
    yc = f_log(c)
    yd = f_log(d)
    converged = True
    while h > _LOG_BRACKET_TOL:
        if evaluations >= _MAX_EVALUATIONS:
            converged = False
            break
        if yc < yd:
            b, d, yd = d, c, yc
            h = b - a
            c = a + _INVPHI2 * h
            yc = f_log(c)
        else:
            a, c, yc = c, d, yd
            h = b - a
            d = a + _INVPHI * h
            yd = f_log(d)

    # boundaries first so a flat tie (e.g. NLL underflowing to 0) resolves
    # to the exact domain edge rather than the nearby search midpoint
    candidates = []
    if best == 0:
        candidates.append(T_MIN)
    if best == _COARSE_POINTS - 1:
        candidates.append(T_MAX)
    candidates += [math.exp(0.5 * (a + b)), 1.0]

    nlls = []
    for t in candidates:
        evaluations += 1
        nlls.append(nll_at(data, t))
    pick = int(np.argmin(nlls))
    t_star = candidates[pick]
    nll_after = nlls[pick]
    nll_before = nlls[-1]  # candidates[-1] is T = 1

    return FitResult(
        temperature=t_star,
        nll_before=nll_before,
        nll_after=nll_after,
        evaluations=evaluations,
        converged=converged,
        at_bound=(t_star == T_MIN or t_star == T_MAX),
    )
