"""Averaged matrices and the explicit mean-field opinion process.

The K x K mixing matrix row-normalizes expected listening weight by
source community,

    mixing[r, s] = shares[s] * beta[r, s] * kappa[s, r] / (row total),

built either from the limit shares or from the realized empirical
shares.  The per-vertex n x n averaged matrix never has to be
materialized: multiplying it into a community-constant matrix equals
looking up the corresponding K x K product row by label, so all
production paths work at K x K size.  A dense small-n materialization
is kept only as a test oracle for that reduction.

The mean-field trajectory of a vertex combines its own decayed signal
stream with deterministic community terms assembled from powers of the
mixing matrix and the hop-weight table.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .rng import substream
from .dynamics import hop_weight_table

_DENSE_ORACLE_MAX_N = 4000


def mixing_matrix(shares, kappa, beta):
    """Row-normalized expected-influence matrix; rows with zero total
    stay identically zero (legal: communities with no inbound mass)."""
    shares = np.asarray(shares, dtype=float)
    K = shares.size
    raw = np.empty((K, K))
    for r in range(K):
        raw[r] = shares * beta[r] * kappa[:, r]
    totals = raw.sum(axis=1)
    out = np.zeros_like(raw)
    pos = totals > 0.0
    out[pos] = raw[pos] / totals[pos, None]
    return out


def vertex_mixing_matrix(labels, shares, kappa, beta):
    """Dense n x n averaged matrix (small-n test oracle only).

    The K x K reduction used everywhere else is exact for this full
    matrix, so it is built without excluding the diagonal; the excluded
    diagonal entry is an O(1/n) correction absorbed by the convergence
    constants.
    """
    labels = np.asarray(labels)
    n = labels.size
    if n > _DENSE_ORACLE_MAX_N:
        raise ValueError(f"dense averaged matrix is a small-n oracle (n <= {_DENSE_ORACLE_MAX_N})")
    shares = np.asarray(shares, dtype=float)
    K = shares.size
    totals = np.array([(shares * beta[r] * kappa[:, r]).sum() for r in range(K)])
    out = np.zeros((n, n))
    for r in range(K):
        rows = labels == r
        if totals[r] <= 0 or not rows.any():
            continue
        out[np.ix_(rows, np.arange(n))] = beta[r, labels] * kappa[labels, r] / (n * totals[r])
    return out


def expand_rows(community_matrix, labels):
    """Lift a K x ell community matrix to n x ell by label lookup."""
    return np.asarray(community_matrix)[np.asarray(labels)]


def share_mismatch(pi, pi_hat):
    """Worst relative cross-moment gap between limit and realized shares."""
    pi = np.asarray(pi, dtype=float)
    pi_hat = np.asarray(pi_hat, dtype=float)
    num = np.abs(np.outer(pi, pi_hat) - np.outer(pi_hat, pi))  # [r, s]
    den = np.outer(pi_hat, pi)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(den > 0, num / den, np.where(num > 0, np.inf, 0.0))
    return float(ratio.max())


def no_inbound_prob(spec, n, theta, census):
    """Exact probability that a community-r vertex has no in-edges,
    given the label census (finite-n product, not the Poisson limit)."""
    census = np.asarray(census)
    out = np.empty(spec.K)
    for r in range(spec.K):
        p = np.minimum(spec.kappa[:, r] * theta / n, 1.0)
        exponents = census.astype(float).copy()
        exponents[r] = max(exponents[r] - 1.0, 0.0)  # no self-loops
        with np.errstate(divide="ignore"):
            log_terms = np.where(p < 1.0, np.log1p(-p) * exponents, -np.inf * (exponents > 0))
        out[r] = math.exp(float(np.sum(np.where(exponents > 0, log_terms, 0.0))))
    return out


@dataclass
class MeanFieldModel:
    """Everything the explicit approximation needs, at K x K size."""

    mixing: np.ndarray          # limit-share matrix
    mixing_emp: np.ndarray      # empirical-share matrix
    beta: np.ndarray            # K x K weight means
    weight_second: np.ndarray   # K x K weight second moments
    signal_mean: np.ndarray     # K x ell, E[external signal | community]
    initial_mean: np.ndarray    # K x ell, E[initial opinion | community]
    no_inbound_prob: np.ndarray  # K,
    nonzero_rows: np.ndarray    # bool K, rows of the limit matrix with mass


def build_meanfield_model(spec, n, theta, census):
    beta = spec.weight_mean_matrix()
    v = spec.weight_second_moment_matrix()
    pi_hat = np.asarray(census, dtype=float) / n
    M = mixing_matrix(spec.pi, spec.kappa, beta)
    M_emp = mixing_matrix(pi_hat, spec.kappa, beta)
    p0 = no_inbound_prob(spec, n, theta, census)
    W_bar = spec.d * spec.signal_mean_matrix() + spec.c * spec.belief_mean_matrix() * p0[:, None]
    R_bar = spec.init_mean_matrix()
    return MeanFieldModel(
        mixing=M, mixing_emp=M_emp, beta=beta, weight_second=v,
        signal_mean=W_bar, initial_mean=R_bar, no_inbound_prob=p0,
        nonzero_rows=M.sum(axis=1) > 0,
    )


def deterministic_profile(mixing, signal_mean, initial_mean, c, d, k_max):
    """Community-level deterministic terms of the trajectory.

    Returns (k_max+1, K, ell); entry k is the sum over past steps of
    hop-weighted mixing powers applied to the signal mean, plus the
    hop-weighted powers applied to the initial mean at lag k.
    """
    K, ell = np.asarray(signal_mean).shape
    table = hop_weight_table(k_max, c, d)
    powers_W = np.empty((k_max + 1, K, ell))
    powers_R = np.empty((k_max + 1, K, ell))
    powers_W[0] = signal_mean
    powers_R[0] = initial_mean
    for s in range(1, k_max + 1):
        powers_W[s] = mixing @ powers_W[s - 1]
        powers_R[s] = mixing @ powers_R[s - 1]
    det = np.zeros((k_max + 1, K, ell))
    cum_signal = np.zeros((K, ell))
    for k in range(1, k_max + 1):
        init_block = np.tensordot(table[k, 1 : k + 1], powers_R[1 : k + 1], axes=(0, 0))
        det[k] = cum_signal + init_block
        # the lag-k signal term only enters from step k+1 onward
        cum_signal += np.tensordot(table[k, 1 : k + 1], powers_W[1 : k + 1], axes=(0, 0))
    return det


def meanfield_trajectory(community, signal_draws, mixing, signal_mean, initial_mean,
                         initial_row, c, d, k_max, profile=None):
    """Trajectory of one vertex under the explicit approximation.

    signal_draws holds the vertex's own external signals for steps
    1..k_max (shared with the coupled graph run when coupling is on).
    Passing the empirical-share matrix as `mixing` yields the
    intermediate (finite-n) construction instead.
    """
    signal_draws = np.asarray(signal_draws, dtype=float)
    initial_row = np.asarray(initial_row, dtype=float)
    if signal_draws.shape[0] < k_max:
        raise ValueError(f"need {k_max} signal rows, got {signal_draws.shape[0]}")
    if profile is None:
        profile = deterministic_profile(mixing, signal_mean, initial_mean, c, d, k_max)
    a = 1.0 - c - d
    out = np.empty((k_max + 1, initial_row.size))
    out[0] = initial_row
    stream = np.zeros_like(initial_row)
    decay = 1.0
    for k in range(1, k_max + 1):
        stream = a * stream + signal_draws[k - 1]
        decay *= a
        out[k] = stream + profile[k, community] + decay * initial_row
    return out


def intermediate_trajectory(community, signal_draws, initial_row, model, c, d, k_max,
                            profile=None):
    """Finite-n intermediate construction: same shape as the mean-field
    trajectory with the empirical-share matrix in place of the limit
    one, evaluated through the K x K reduction (the n x n averaged
    matrix is never materialized)."""
    return meanfield_trajectory(
        community, signal_draws, model.mixing_emp, model.signal_mean,
        model.initial_mean, initial_row, c, d, k_max, profile=profile,
    )


@dataclass
class RegimeStats:
    """Edge-density regime functionals for one (n, theta) point."""

    mu: np.ndarray
    nu: np.ndarray
    delta: float | None
    lam: float | None
    share_mismatch: float
    dense_ok: bool
    edge_prob_clipped: bool
    nonzero_rows: np.ndarray


def regime_stats(spec, pi_hat, n, theta):
    beta = spec.weight_mean_matrix()
    v = spec.weight_second_moment_matrix()
    pi_hat = np.asarray(pi_hat, dtype=float)
    mu = np.array([(beta[r] * pi_hat * spec.kappa[:, r]).sum() for r in range(spec.K)])
    nu = np.array([(v[r] * pi_hat * spec.kappa[:, r]).sum() for r in range(spec.K)])
    limit_totals = np.array([(beta[r] * spec.pi * spec.kappa[:, r]).sum() for r in range(spec.K)])
    nonzero = limit_totals > 0.0
    mismatch = share_mismatch(spec.pi, pi_hat)
    if not nonzero.any():
        delta = lam = None
        dense_ok = False
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            delta = float(np.max(np.where(mu[nonzero] > 0, nu[nonzero] / mu[nonzero] ** 2, np.inf)))
            lam = float(np.max(np.where(nu[nonzero] > 0, mu[nonzero] / nu[nonzero], np.inf)))
        dense_ok = bool(
            np.isfinite(delta) and np.isfinite(lam)
            and theta >= (6.0 * spec.H * lam) ** 2 * delta * math.log(max(n, 2))
        )
    clipped = bool(np.max(spec.kappa) * theta / n > 1.0)
    return RegimeStats(
        mu=mu, nu=nu, delta=delta, lam=lam, share_mismatch=mismatch,
        dense_ok=dense_ok, edge_prob_clipped=clipped, nonzero_rows=nonzero,
    )


def stationary_horizon(tol, d, ell):
    """Smallest truncation depth whose discarded geometric tail is
    below tol in sup norm (tail <= ell * (1-d)^(T+1) / d)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if d >= 1.0:
        return 0
    return max(int(math.ceil(math.log(tol * d / ell) / math.log(1.0 - d))), 0)


class StationarySampler:
    """Draws from the truncated stationary opinion law of one community.

    A draw fixes the vertex attributes (belief vector, no-inbound
    indicator), streams fresh media draws over the truncated horizon,
    and adds the deterministic community term assembled from mixing
    powers.  The horizon comes from the explicit geometric tail bound,
    never a fixed constant.
    """

    def __init__(self, spec, model, tol):
        self.spec = spec
        self.model = model
        self.tol = float(tol)
        self.horizon = stationary_horizon(tol, spec.d, spec.ell)
        # signal-only deterministic part: all hop terms available in the long run
        table = hop_weight_table(self.horizon, spec.c, spec.d)
        powers = np.empty((self.horizon + 1, spec.K, spec.ell))
        powers[0] = model.signal_mean
        for s in range(1, self.horizon + 1):
            powers[s] = model.mixing @ powers[s - 1]
        self.det = np.zeros((spec.K, spec.ell))
        for t in range(1, self.horizon + 1):
            self.det += np.tensordot(table[t, 1 : t + 1], powers[1 : t + 1], axes=(0, 0))

    def sample(self, community, rng, size=1):
        spec = self.spec
        T = self.horizon
        q = spec.belief_dists[community].sample(rng, size=size)
        flag = rng.random(size) < self.model.no_inbound_prob[community]
        z = spec.signal_dists[community].sample(rng, size=size * (T + 1)).reshape(size, T + 1, spec.ell)
        if spec.signal_belief_weight:
            z = (1.0 - spec.signal_belief_weight) * z + spec.signal_belief_weight * q[:, None, :]
        W = spec.d * z + spec.c * (q * flag[:, None])[:, None, :]
        decay = (1.0 - spec.c - spec.d) ** np.arange(T + 1)
        return np.tensordot(decay, W, axes=(0, 1)) + self.det[community]


def sample_stationary(spec, model, community, tol, seed, size=1):
    """Convenience wrapper over StationarySampler."""
    sampler = StationarySampler(spec, model, tol)
    rng = seed if isinstance(seed, np.random.Generator) else substream(seed, rngmod.STATIONARY)
    return sampler.sample(community, rng, size=size)
