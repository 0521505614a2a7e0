"""Error norms, chaos statistics and concentration checks.

Every experiment here follows the same two-level sampling design: the
label vector is drawn once per outer replication and held fixed while
graphs, weights, signals and initial opinions are redrawn inside, which
estimates label-conditional expectations; the outer loop over label
draws probes the remaining convergence-in-probability layer.

Coupling is always on: the graph run and its explicit approximation
consume the identical per-vertex signal frames and initial opinions.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .rng import substream
from .graph import sample_graph, normalize_weights, sample_labels
from .dynamics import OpinionState, sample_signal_frame, step
from .meanfield import (
    StationarySampler, build_meanfield_model, deterministic_profile, regime_stats,
)
from .parallel import parallel_map


def matrix_inf_distance(Xa, Xb):
    """Max-over-rows l1 distance (the sup operator norm of the difference)."""
    Xa = np.asarray(Xa, dtype=float)
    Xb = np.asarray(Xb, dtype=float)
    if Xa.shape != Xb.shape:
        raise ValueError(f"shape mismatch: {Xa.shape} vs {Xb.shape}")
    if Xa.size == 0:
        return 0.0
    return float(np.abs(Xa - Xb).sum(axis=-1).max())


# ---------------------------------------------------------------------------
# coupled graph / approximation runs


def coupled_gap_run(spec, labels, theta, k_max, seed, profile, census=None):
    """One inner replication of the coupled pair of processes.

    Returns (inf_norms, community_gaps): the per-step sup-norm gap, and
    the per-step community averages of the l1 row gaps between the graph
    process and the explicit approximation built from the same signal
    frames.  Vertices sharing a label are exchangeable given the labels,
    so the community average is an unbiased estimate of any single
    vertex's expected row gap (hence of the max over vertices), without
    the upward bias of maxing noisy per-vertex means.
    """
    labels = np.asarray(labels)
    if census is None:
        census = np.bincount(labels, minlength=spec.K)
    graph = sample_graph(spec, labels, theta, seed)
    influence = normalize_weights(graph)
    init_rng = substream(seed, rngmod.INIT)
    signal_rng = substream(seed, rngmod.SIGNALS)
    R0 = spec.sample_initial(labels, graph.beliefs, init_rng)
    state = OpinionState(R=R0, k=0)
    a = 1.0 - spec.c - spec.d
    stream = np.zeros_like(R0)
    decay = 1.0
    inf_norms = np.zeros(k_max + 1)
    community_gaps = np.zeros((k_max + 1, spec.K))
    denom = np.maximum(census, 1)
    for k in range(1, k_max + 1):
        frame = sample_signal_frame(spec, graph, signal_rng)
        state = step(state, influence, frame, spec.c, spec.d)
        stream = a * stream + frame.W
        decay *= a
        approx = stream + profile[k, labels] + decay * R0
        gap = np.abs(state.R - approx).sum(axis=1)
        community_gaps[k] = np.bincount(labels, weights=gap, minlength=spec.K) / denom
        inf_norms[k] = gap.max()
    return inf_norms, community_gaps


@dataclass
class ErrorPoint:
    """Estimates for one (n, theta, outer label draw) grid point."""

    n: int
    theta: float
    outer: int
    reps: int
    k_max: int
    inf_estimate: np.ndarray      # per step
    inf_se: np.ndarray
    row_estimate: np.ndarray      # per step, max over vertices of mean row gap
    row_se: np.ndarray            # se at the maximizing vertex
    sup_inf: float
    sup_inf_se: float
    sup_row: float
    sup_row_se: float
    dense_ok: bool
    edge_prob_clipped: bool
    share_mismatch: float


@dataclass
class ErrorCurve:
    k_max: int
    points: list

    def by_n(self):
        """Outer-averaged sup-norm estimates keyed by n."""
        out = {}
        for pt in self.points:
            out.setdefault(pt.n, []).append(pt)
        return {
            n: {
                "theta": pts[0].theta,
                "sup_inf": float(np.mean([p.sup_inf for p in pts])),
                "sup_row": float(np.mean([p.sup_row for p in pts])),
                "dense_ok": all(p.dense_ok for p in pts),
            }
            for n, pts in out.items()
        }


def error_experiment(spec, n_list, theta_rule, k_max, inner, outer, seed, threads=1):
    """Monte Carlo estimates of both approximation norms on an
    (n, theta) grid, with the deterministic truncation at k_max
    reported through the returned curve rather than hidden."""
    inner_counts = list(inner) if isinstance(inner, (list, tuple, np.ndarray)) else [inner] * len(n_list)
    if any(int(r) < 1 for r in inner_counts):
        raise ValueError("replication budget must be at least 1")
    points = []
    for point_idx, n in enumerate(n_list):
        theta = float(theta_rule(n)) if callable(theta_rule) else float(theta_rule[point_idx])
        reps = int(inner_counts[point_idx])
        for o in range(outer):
            labels = sample_labels(spec, n, (seed, point_idx, o))
            census = np.bincount(labels, minlength=spec.K)
            model = build_meanfield_model(spec, n, theta, census)
            profile = deterministic_profile(
                model.mixing, model.signal_mean, model.initial_mean, spec.c, spec.d, k_max
            )
            stats = regime_stats(spec, census / n, n, theta)

            def unit(i, labels=labels, theta=theta, profile=profile, census=census,
                     point_idx=point_idx, o=o):
                return coupled_gap_run(
                    spec, labels, theta, k_max, (seed, point_idx, o, i), profile,
                    census=census,
                )

            results = parallel_map(unit, range(reps), threads=threads)
            inf_sum = np.zeros(k_max + 1)
            inf_sq = np.zeros(k_max + 1)
            row_sum = np.zeros((k_max + 1, spec.K))
            row_sq = np.zeros((k_max + 1, spec.K))
            for inf_norms, community_gaps in results:
                inf_sum += inf_norms
                inf_sq += inf_norms**2
                row_sum += community_gaps
                row_sq += community_gaps**2
            inf_mean = inf_sum / reps
            inf_se = _se(inf_sum, inf_sq, reps)
            row_mean = row_sum / reps
            row_se_all = _se(row_sum, row_sq, reps)
            row_arg = row_mean.argmax(axis=1)
            steps = np.arange(k_max + 1)
            row_est = row_mean[steps, row_arg]
            row_se = row_se_all[steps, row_arg]
            k_inf = int(inf_mean.argmax())
            k_row = int(row_est.argmax())
            points.append(
                ErrorPoint(
                    n=n, theta=theta, outer=o, reps=reps, k_max=k_max,
                    inf_estimate=inf_mean, inf_se=inf_se,
                    row_estimate=row_est, row_se=row_se,
                    sup_inf=float(inf_mean[k_inf]), sup_inf_se=float(inf_se[k_inf]),
                    sup_row=float(row_est[k_row]), sup_row_se=float(row_se[k_row]),
                    dense_ok=stats.dense_ok, edge_prob_clipped=stats.edge_prob_clipped,
                    share_mismatch=stats.share_mismatch,
                )
            )
    return ErrorCurve(k_max=k_max, points=points)


def _se(total, total_sq, reps):
    if reps < 2:
        return np.zeros_like(np.asarray(total, dtype=float))
    var = (total_sq - total**2 / reps) / (reps - 1)
    return np.sqrt(np.maximum(var, 0.0) / reps)


def burn_in_steps(d, frac=0.01):
    """Steps until the memory of the initial condition is below frac."""
    if d >= 1.0:
        return 1
    return max(int(math.ceil(math.log(frac) / math.log(1.0 - d))), 1)


# ---------------------------------------------------------------------------
# bounded test functions on trajectory matrices


@dataclass(frozen=True)
class TestFunction:
    fid: str
    bound: float
    _fn: object

    def __call__(self, V):
        """V has shape (..., ell, k+1): column j is the opinion at time j."""
        return self._fn(np.asarray(V, dtype=float))


def parse_function(fid, ell, k):
    """Built-in family: coordinate projections, products of coordinates,
    clipped monomials, and the constant one."""
    parts = fid.split(":")
    kind = parts[0]
    args = [int(tok) for tok in parts[1].split(",")] if len(parts) > 1 else []
    def check(topic, time):
        if not (0 <= topic < ell and 0 <= time <= k):
            raise ValueError(f"function {fid!r} indexes outside ell={ell}, k={k}")
    if kind == "proj" and len(args) == 2:
        topic, time = args
        check(topic, time)
        return TestFunction(fid, 1.0, lambda V: V[..., topic, time])
    if kind == "prod" and len(args) == 4:
        t1, m1, t2, m2 = args
        check(t1, m1)
        check(t2, m2)
        return TestFunction(fid, 1.0, lambda V: V[..., t1, m1] * V[..., t2, m2])
    if kind == "poly" and len(args) == 3:
        topic, time, degree = args
        check(topic, time)
        if degree < 1:
            raise ValueError(f"function {fid!r} needs degree >= 1")
        return TestFunction(fid, 1.0, lambda V: np.clip(V[..., topic, time] ** degree, -1.0, 1.0))
    if kind == "one":
        return TestFunction(fid, 1.0, lambda V: np.ones(V.shape[:-2]))
    raise ValueError(f"unknown test function id {fid!r}")


def limit_trajectory_draws(spec, model, profile, community, k, reps, rng):
    """Replicas of the explicit limit trajectory for one community,
    shaped (reps, ell, k+1)."""
    q = spec.belief_dists[community].sample(rng, size=reps)
    flag = rng.random(reps) < model.no_inbound_prob[community]
    if spec.init_dists == "beliefs":
        R0 = q.copy()
    else:
        R0 = spec.init_dists[community].sample(rng, size=reps)
    z = spec.signal_dists[community].sample(rng, size=reps * k).reshape(reps, k, spec.ell)
    if spec.signal_belief_weight:
        z = (1.0 - spec.signal_belief_weight) * z + spec.signal_belief_weight * q[:, None, :]
    W = spec.d * z + spec.c * (q * flag[:, None])[:, None, :]
    a = 1.0 - spec.c - spec.d
    out = np.empty((reps, spec.ell, k + 1))
    out[:, :, 0] = R0
    stream = np.zeros((reps, spec.ell))
    decay = 1.0
    for m in range(1, k + 1):
        stream = a * stream + W[:, m - 1]
        decay *= a
        out[:, :, m] = stream + profile[m, community] + decay * R0
    return out


@dataclass
class ChaosReport:
    n: int
    theta: float
    k: int
    reps: int
    product_rows: list   # dicts per vertex set
    measure_rows: list   # dicts per (function, community)


def chaos_experiment(spec, n, theta, k, vertex_sets, set_functions, inner, seed,
                     measure_functions=(), limit_reps=4000, threads=1,
                     pooled_pairs=(), pooled_functions=()):
    """Estimate both sides of the trajectory factorization for fixed
    vertex sets, and the per-community empirical-measure functionals.

    pooled_pairs lists community pairs (r1, r2); for each, the joint
    moment is additionally estimated by averaging the pair product over
    disjoint fixed (community-r1, community-r2) vertex pairs.  Vertices
    sharing a label are exchangeable given the labels, so every such
    pair has the same joint moment and the pooled average estimates the
    identical quantity with far less Monte Carlo noise.
    """
    labels = sample_labels(spec, n, (seed, 0))
    census = np.bincount(labels, minlength=spec.K)
    model = build_meanfield_model(spec, n, theta, census)
    profile = deterministic_profile(
        model.mixing, model.signal_mean, model.initial_mean, spec.c, spec.d, max(k, 1)
    )
    sets = [np.asarray(vs, dtype=np.int64) for vs in vertex_sets]
    funcs = [[parse_function(fid, spec.ell, k) for fid in fids] for fids in set_functions]
    for vs, fs in zip(sets, funcs):
        if len(vs) != len(fs):
            raise ValueError("each vertex needs exactly one test function")
    measure_funcs = [parse_function(fid, spec.ell, k) for fid in measure_functions]
    pool_funcs = [
        [parse_function(fid, spec.ell, k) for fid in fids] for fids in pooled_functions
    ]
    pool_idx = []
    for (r1, r2) in pooled_pairs:
        left = np.flatnonzero(labels == r1)
        right = np.flatnonzero(labels == r2)
        m = min(left.size, right.size)
        if m == 0:
            raise ValueError(f"no vertices available for community pair ({r1}, {r2})")
        pool_idx.append((left[:m], right[:m]))

    def unit(i):
        graph = sample_graph(spec, labels, theta, (seed, 0, i))
        influence = normalize_weights(graph)
        init_rng = substream((seed, 0, i), rngmod.INIT)
        signal_rng = substream((seed, 0, i), rngmod.SIGNALS)
        R0 = spec.sample_initial(labels, graph.beliefs, init_rng)
        traj = np.empty((n, spec.ell, k + 1))
        traj[:, :, 0] = R0
        state = OpinionState(R=R0, k=0)
        for m in range(1, k + 1):
            frame = sample_signal_frame(spec, graph, signal_rng)
            state = step(state, influence, frame, spec.c, spec.d)
            traj[:, :, m] = state.R
        prods = [
            float(np.prod([f(traj[v]) for v, f in zip(vs, fs)]))
            for vs, fs in zip(sets, funcs)
        ]
        pooled = [
            float(np.mean(fs[0](traj[left]) * fs[1](traj[right])))
            for (left, right), fs in zip(pool_idx, pool_funcs)
        ]
        measures = [
            [float(f(traj[labels == r]).mean() * (labels == r).mean()) if (labels == r).any() else 0.0
             for r in range(spec.K)]
            for f in measure_funcs
        ]
        return prods, measures, pooled

    results = parallel_map(unit, range(inner), threads=threads)
    prod_samples = np.array([res[0] for res in results])          # (inner, n_sets)
    measure_samples = np.array([res[1] for res in results])       # (inner, n_f, K)
    pooled_samples = np.array([res[2] for res in results])        # (inner, n_pairs)

    # limit side per community and function
    limit_rng = substream(seed, rngmod.STATIONARY, 1)
    needed = sorted({int(labels[v]) for vs in sets for v in vs} | set(range(spec.K)))
    limit_draws = {
        r: limit_trajectory_draws(spec, model, profile, r, k, limit_reps, limit_rng)
        for r in needed
    }

    product_rows = []
    for idx, (vs, fs) in enumerate(zip(sets, funcs)):
        graph_est = float(prod_samples[:, idx].mean())
        graph_se = float(prod_samples[:, idx].std(ddof=1) / math.sqrt(inner)) if inner > 1 else 0.0
        limit_means, limit_ses = [], []
        for v, f in zip(vs, fs):
            vals = f(limit_draws[int(labels[v])])
            limit_means.append(float(vals.mean()))
            limit_ses.append(float(vals.std(ddof=1) / math.sqrt(limit_reps)))
        limit_prod = float(np.prod(limit_means))
        # first-order error propagation through the product
        var = 0.0
        for j, (m_j, s_j) in enumerate(zip(limit_means, limit_ses)):
            partial = np.prod([m for jj, m in enumerate(limit_means) if jj != j])
            var += (partial * s_j) ** 2
        product_rows.append(
            {
                "vertices": tuple(int(v) for v in vs),
                "communities": tuple(int(labels[v]) for v in vs),
                "functions": tuple(f.fid for f in fs),
                "graph_estimate": graph_est,
                "graph_se": graph_se,
                "limit_estimate": limit_prod,
                "limit_se": float(math.sqrt(var)),
                "gap": abs(graph_est - limit_prod),
            }
        )

    for idx, ((r1, r2), fs) in enumerate(zip(pooled_pairs, pool_funcs)):
        graph_est = float(pooled_samples[:, idx].mean())
        graph_se = float(pooled_samples[:, idx].std(ddof=1) / math.sqrt(inner)) if inner > 1 else 0.0
        m1 = fs[0](limit_draws[r1])
        m2 = fs[1](limit_draws[r2])
        limit_prod = float(m1.mean() * m2.mean())
        var = (m2.mean() * m1.std(ddof=1) / math.sqrt(limit_reps)) ** 2
        var += (m1.mean() * m2.std(ddof=1) / math.sqrt(limit_reps)) ** 2
        product_rows.append(
            {
                "vertices": "pooled",
                "communities": (int(r1), int(r2)),
                "functions": tuple(f.fid for f in fs),
                "graph_estimate": graph_est,
                "graph_se": graph_se,
                "limit_estimate": limit_prod,
                "limit_se": float(math.sqrt(var)),
                "gap": abs(graph_est - limit_prod),
            }
        )

    measure_rows = []
    for fi, f in enumerate(measure_funcs):
        for r in range(spec.K):
            samples = measure_samples[:, fi, r]
            vals = f(limit_draws[r])
            limit_est = float(spec.pi[r] * vals.mean())
            limit_se = float(spec.pi[r] * vals.std(ddof=1) / math.sqrt(limit_reps))
            graph_est = float(samples.mean())
            graph_se = float(samples.std(ddof=1) / math.sqrt(inner)) if inner > 1 else 0.0
            measure_rows.append(
                {
                    "function": f.fid,
                    "community": r,
                    "graph_estimate": graph_est,
                    "graph_se": graph_se,
                    "limit_estimate": limit_est,
                    "limit_se": limit_se,
                    "gap": abs(graph_est - limit_est),
                }
            )
    return ChaosReport(
        n=n, theta=float(theta), k=k, reps=inner,
        product_rows=product_rows, measure_rows=measure_rows,
    )


# ---------------------------------------------------------------------------
# stationarity / limit exchange


@dataclass
class StationarityReport:
    n: int
    theta: float
    k_long: int
    reps: int
    horizon: int
    rows: list  # dicts per (community, topic, moment)


def stationarity_experiment(spec, n, theta, k_long, inner, tol, seed,
                            stationary_reps=20000, threads=1, sampler_tol=None):
    """Compare long-run per-community moments of the graph process with
    Monte Carlo moments of the truncated stationary law.

    tol gates the burn-in ((1-d)^k_long must be below it); the stationary
    sampler truncates at the tighter sampler_tol (default tol / 100) so
    its truncation bias is negligible next to the burn-in one.
    """
    if (1.0 - spec.d) ** k_long >= tol:
        raise ValueError(
            f"k_long={k_long} does not burn in to tol={tol}: (1-d)^k = {(1.0 - spec.d) ** k_long:.3g}"
        )
    sampler_tol = tol * 1e-2 if sampler_tol is None else sampler_tol
    labels = sample_labels(spec, n, (seed, 0))
    census = np.bincount(labels, minlength=spec.K)
    model = build_meanfield_model(spec, n, theta, census)

    def unit(i):
        graph = sample_graph(spec, labels, theta, (seed, 0, i))
        influence = normalize_weights(graph)
        init_rng = substream((seed, 0, i), rngmod.INIT)
        signal_rng = substream((seed, 0, i), rngmod.SIGNALS)
        state = OpinionState(R=spec.sample_initial(labels, graph.beliefs, init_rng), k=0)
        for _ in range(k_long):
            frame = sample_signal_frame(spec, graph, signal_rng)
            state = step(state, influence, frame, spec.c, spec.d)
        first = np.empty((spec.K, spec.ell))
        second = np.empty((spec.K, spec.ell))
        for r in range(spec.K):
            mask = labels == r
            first[r] = state.R[mask].mean(axis=0)
            second[r] = (state.R[mask] ** 2).mean(axis=0)
        return first, second

    results = parallel_map(unit, range(inner), threads=threads)
    firsts = np.array([res[0] for res in results])
    seconds = np.array([res[1] for res in results])

    sampler = StationarySampler(spec, model, sampler_tol)
    stat_rng = substream(seed, rngmod.STATIONARY)
    rows = []
    for r in range(spec.K):
        draws = sampler.sample(r, stat_rng, size=stationary_reps)
        for moment, graph_s, stat_vals in (
            ("mean", firsts, draws),
            ("second", seconds, draws**2),
        ):
            for topic in range(spec.ell):
                g = graph_s[:, r, topic]
                graph_est = float(g.mean())
                graph_se = float(g.std(ddof=1) / math.sqrt(inner)) if inner > 1 else 0.0
                s_vals = stat_vals[:, topic]
                stat_est = float(s_vals.mean())
                stat_se = float(s_vals.std(ddof=1) / math.sqrt(stationary_reps))
                rows.append(
                    {
                        "community": r,
                        "topic": topic,
                        "moment": moment,
                        "graph_estimate": graph_est,
                        "graph_se": graph_se,
                        "stationary_estimate": stat_est,
                        "stationary_se": stat_se,
                        "gap": abs(graph_est - stat_est),
                        "combined_se": math.sqrt(graph_se**2 + stat_se**2),
                    }
                )
    return StationarityReport(
        n=n, theta=float(theta), k_long=k_long, reps=inner,
        horizon=sampler.horizon, rows=rows,
    )


# ---------------------------------------------------------------------------
# concentration-bound Monte Carlo checks


@dataclass
class ConcentrationCase:
    """Random-sum test case: per-type counts, one weight law on [0, H]
    and one value law on [-1, 1]."""

    count_dists: list       # entries ("poisson", mean) or ("binomial", trials, p)
    weight_dist: object
    value_dist: object
    H: float
    eps_grid: tuple

    def count_mean(self, r):
        kind = self.count_dists[r][0]
        if kind == "poisson":
            return float(self.count_dists[r][1])
        if kind == "binomial":
            _, m, p = self.count_dists[r]
            return float(m) * float(p)
        raise ValueError(f"count law {kind!r} rejected: needs the Poisson mgf bound")

    def mu_nu(self):
        eb = self.weight_dist.mean()
        eb2 = self.weight_dist.second_moment()
        mu = sum(self.count_mean(r) for r in range(len(self.count_dists))) * eb
        nu = sum(self.count_mean(r) for r in range(len(self.count_dists))) * eb2
        return mu, nu


def sum_deviation_bound(eps, mu, nu, H):
    """One-sided tail bound for the centered random sum at level eps*mu."""
    if nu <= 0:
        return float("inf")
    x = eps * mu
    return math.exp(-(x**2) / (2.0 * nu) + H * x**3 / (2.0 * nu**2))


def ratio_deviation_bound(eps, mu, nu, H):
    """Two-sided tail bound for the normalized-ratio deviation at level eps."""
    if nu <= 0:
        return float("inf")
    x = (eps / 2.0) * mu
    return 4.0 * math.exp(-(x**2) / (2.0 * nu) + H * x**3 / (2.0 * nu**2))


@dataclass
class ConcentrationReport:
    case: ConcentrationCase
    replications: int
    mu: float
    nu: float
    rows: list


def concentration_check(case, replications, seed):
    """Empirical exceedance frequencies against the analytic bounds.

    Raises if any empirical tail beats its bound by more than three
    binomial standard errors in the regime where the bound is
    informative (<= 1).
    """
    rng = substream(seed, rngmod.CONCENTRATION)
    K = len(case.count_dists)
    mu, nu = case.mu_nu()
    eb = case.weight_dist.mean()
    ex = case.value_dist.mean()
    S_tot = np.zeros(replications)
    T_tot = np.zeros(replications)
    mean_S = 0.0
    mean_T = 0.0
    for r in range(K):
        kind = case.count_dists[r][0]
        if kind == "poisson":
            counts = rng.poisson(case.count_dists[r][1], size=replications)
        elif kind == "binomial":
            _, m, p = case.count_dists[r]
            counts = rng.binomial(int(m), float(p), size=replications)
        else:
            raise ValueError(f"count law {kind!r} rejected: needs the Poisson mgf bound")
        total = int(counts.sum())
        rep_ids = np.repeat(np.arange(replications), counts)
        b = case.weight_dist.sample(rng, size=total)
        x = case.value_dist.sample(rng, size=total)
        S_tot += np.bincount(rep_ids, weights=b, minlength=replications)
        T_tot += np.bincount(rep_ids, weights=b * x, minlength=replications)
        mean_S += case.count_mean(r) * eb
        mean_T += case.count_mean(r) * eb * ex

    sum_dev = S_tot - mean_S
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(S_tot > 0, T_tot / np.where(S_tot > 0, S_tot, 1.0), 0.0)
    ratio_target = mean_T / mean_S if mean_S > 0 else 0.0
    ratio_dev = np.abs(ratio - ratio_target)

    rows = []
    for eps in case.eps_grid:
        sum_tail = float(np.mean(sum_dev > eps * mu)) if mu > 0 else float(np.mean(sum_dev > 0))
        ratio_tail = float(np.mean(ratio_dev > eps))
        for stat, emp, bound in (
            ("sum", sum_tail, sum_deviation_bound(eps, mu, nu, case.H)),
            ("ratio", ratio_tail, ratio_deviation_bound(eps, mu, nu, case.H)),
        ):
            se = math.sqrt(max(emp * (1.0 - emp), 0.0) / replications)
            rows.append(
                {
                    "epsilon": float(eps), "statistic": stat,
                    "empirical_tail": emp, "stderr": se, "bound": float(min(bound, np.inf)),
                }
            )
            if bound <= 1.0 and emp > bound + 3.0 * se:
                raise RuntimeError(
                    f"{stat} tail {emp:.4g} exceeds bound {bound:.4g} + 3 se at eps={eps}"
                )
    return ConcentrationReport(case=case, replications=replications, mu=mu, nu=nu, rows=rows)
