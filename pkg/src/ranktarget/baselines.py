"""Comparison methods: probit MLE on dichotomized ranks, and PMT least squares.

Both fits prepend their own intercept column; the covariate matrices passed
in carry covariates only. Probit-based targeting uses the linear index alone
(never its normal-CDF transform) because ranks are invariant to monotone
transforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtri

from .data import RankingScheme
from .errors import AllSameOutcome, InvalidQuota, RankDeficient

SEPARATION_COEF_BOUND = 1e3
MAX_NEWTON_ITERATIONS = 50


def dichotomize(scheme: RankingScheme, quota: int) -> dict[str, int]:
    """Program-inclusion indicator: 1 for households ranked within the quota."""
    if not 1 <= quota <= scheme.n:
        raise InvalidQuota(f"quota {quota} out of range for community of {scheme.n}")
    return {hid: int(rank <= quota) for hid, rank in scheme.ranks.items()}


@dataclass(frozen=True)
class ProbitFit:
    beta: np.ndarray            # intercept first
    converged: bool
    separation_detected: bool
    iterations: int
    log_likelihood: float

    def linear_index(self, x: np.ndarray) -> np.ndarray:
        """Intercept + x.slopes; larger means more likely included."""
        x = np.asarray(x, dtype=float)
        return self.beta[0] + x @ self.beta[1:]


def probit_log_likelihood(beta: np.ndarray, x_full: np.ndarray, d: np.ndarray) -> float:
    eta = x_full @ beta
    return float(np.sum(np.where(d == 1, log_ndtr(eta), log_ndtr(-eta))))


def _probit_score_weights(eta: np.ndarray, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # score residual lambda_i and Newton weight w_i = lambda_i * (lambda_i + eta_i)
    sign = np.where(d == 1, 1.0, -1.0)
    z = sign * eta
    log_phi = -0.5 * z * z - 0.5 * np.log(2.0 * np.pi)
    lam = sign * np.exp(log_phi - log_ndtr(z))
    return lam, lam * (lam + eta)


def fit_probit_mle(x: np.ndarray, d: np.ndarray, tol: float = 1e-8) -> ProbitFit:
    """Newton maximization of the probit likelihood.

    Under complete or quasi-complete separation the likelihood has no finite
    maximizer; rather than dropping variables the fit caps its iterations,
    flags ``separation_detected``, and returns the capped coefficients.
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=int)
    if d.min() == d.max():
        raise AllSameOutcome("all outcomes identical; probit is not estimable")
    n, p = x.shape
    if n <= p + 1:
        raise RankDeficient("need more observations than parameters")
    x_full = np.hstack([np.ones((n, 1)), x])
    beta = np.zeros(p + 1)
    beta[0] = float(ndtri(np.clip(d.mean(), 1e-12, 1.0 - 1e-12)))
    ll = probit_log_likelihood(beta, x_full, d)

    converged = False
    iterations = 0
    for iterations in range(1, MAX_NEWTON_ITERATIONS + 1):
        eta = x_full @ beta
        lam, w = _probit_score_weights(eta, d)
        grad = x_full.T @ lam
        if np.linalg.norm(grad) < tol:
            converged = True
            break
        hess = x_full.T @ (w[:, None] * x_full)
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            break
        # Halve the step until the likelihood improves; stalls under separation.
        scale = 1.0
        for _ in range(30):
            ll_new = probit_log_likelihood(beta + scale * step, x_full, d)
            if ll_new >= ll:
                break
            scale /= 2.0
        beta = beta + scale * step
        ll = ll_new

    separation = bool(np.max(np.abs(beta)) > SEPARATION_COEF_BOUND or ll > -1e-6)
    return ProbitFit(
        beta=beta,
        converged=converged and not separation,
        separation_detected=separation,
        iterations=iterations,
        log_likelihood=ll,
    )


@dataclass(frozen=True)
class PmtFit:
    coefficients: np.ndarray    # intercept first
    residual_variance: float

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.coefficients[0] + x @ self.coefficients[1:]


def fit_pmt_ols(x: np.ndarray, y: np.ndarray) -> PmtFit:
    """Least-squares regression of expenditure on covariates (the standard
    proxy-means-test calibration)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = x.shape
    if n <= p + 1:
        raise RankDeficient("need more observations than parameters")
    x_full = np.hstack([np.ones((n, 1)), x])
    coefs, _, rank, _ = np.linalg.lstsq(x_full, y, rcond=None)
    if rank < p + 1:
        raise RankDeficient("covariate matrix is rank deficient")
    resid = y - x_full @ coefs
    dof = max(n - p - 1, 1)
    return PmtFit(coefficients=coefs, residual_variance=float(resid @ resid) / dof)


def probit_targeting_scores(fit: ProbitFit, x: np.ndarray) -> np.ndarray:
    """Need scores in the package-wide orientation (lowest = selected).

    The probit index is large for likely-included (poor) households, so the
    targeting score is its negation.
    """
    return -fit.linear_index(x)


def pmt_targeting_scores(fit: PmtFit, x: np.ndarray) -> np.ndarray:
    """Predicted expenditures; the poorest (lowest) are selected."""
    return fit.predict(x)
