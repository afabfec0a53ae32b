"""Maximum pseudolikelihood estimation for the exponential-family models.

The pseudolikelihood is a product of full-conditional Bernoulli terms
(site spins for the lattice, dyads for the graph), so maximization is a
logistic fit on change statistics. Newton steps with analytic derivatives
are projected onto the prior box; monotone (separated) data legitimately
pin the estimate at a bound. A golden-section pass over the box handles
the one-dimensional fallback.
"""

import numpy as np
from scipy.optimize import minimize_scalar

from ..errors import ConvergenceError
from .ergm import ErgmModel, dyad_index_pairs
from .ising import IsingModel

MAX_ITER = 200
GRAD_TOL = 1e-8


def _design(model, data):
    """Per-site (response in {0,1}, change-stat covariates) for the logistic fit."""
    data = model.validate_state(data)
    if isinstance(model, IsingModel):
        m, n = model.rows, model.cols
        pad = np.zeros((m + 2, n + 2), dtype=np.int64)
        pad[1:-1, 1:-1] = data
        nbr = pad[:-2, 1:-1] + pad[2:, 1:-1] + pad[1:-1, :-2] + pad[1:-1, 2:]
        # P(x_s = +1 | rest) = logistic(2 theta nbr): covariate 2*nbr, response (x+1)/2
        x = (2 * nbr).reshape(-1, 1).astype(np.float64)
        y = ((data.reshape(-1) + 1) // 2).astype(np.float64)
        return y, x
    if isinstance(model, ErgmModel):
        pairs = dyad_index_pairs(model.n_nodes)
        x = np.empty((len(pairs), 4))
        y = np.empty(len(pairs))
        for k, (i, j) in enumerate(pairs):
            x[k] = model.change_stat(data, int(i), int(j))
            y[k] = data[i, j]
        return y, x
    raise ConvergenceError(f"no pseudolikelihood for model kind {model.kind!r}")


def _log_pl_terms(theta, y, x):
    eta = x @ theta
    # log p(y) = y*eta - log(1 + exp(eta)), stable via logaddexp
    ll = float(np.sum(y * eta - np.logaddexp(0.0, eta)))
    p = 1.0 / (1.0 + np.exp(-eta))
    grad = x.T @ (y - p)
    w = p * (1.0 - p)
    hess = -(x.T * w) @ x
    return ll, grad, hess


def mple(model, data) -> np.ndarray:
    """Box-constrained pseudolikelihood maximizer; deterministic given data."""
    y, x = _design(model, data)
    lo, hi = model.prior.lo, model.prior.hi
    theta = model.prior.midpoint()
    for _ in range(MAX_ITER):
        ll, grad, hess = _log_pl_terms(theta, y, x)
        # at a bound with the gradient pointing outward, the component is optimal
        active = ((theta <= lo) & (grad < 0)) | ((theta >= hi) & (grad > 0))
        free_grad = np.where(active, 0.0, grad)
        if np.max(np.abs(free_grad)) < GRAD_TOL:
            return theta
        try:
            step = np.linalg.solve(hess, -grad)
        except np.linalg.LinAlgError:
            step = None
        if step is None or not np.all(np.isfinite(step)):
            if model.param_dim == 1:
                return _golden_1d(y, x, lo[0], hi[0])
            raise ConvergenceError("singular pseudolikelihood Hessian", last_iterate=theta)
        theta = np.clip(theta + step, lo, hi)
    if model.param_dim == 1:
        return _golden_1d(y, x, lo[0], hi[0])
    raise ConvergenceError(
        f"pseudolikelihood Newton did not converge in {MAX_ITER} iterations",
        last_iterate=theta,
    )


def _golden_1d(y, x, lo, hi) -> np.ndarray:
    res = minimize_scalar(
        lambda t: -_log_pl_terms(np.array([t]), y, x)[0],
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-10},
    )
    return np.array([float(res.x)])
