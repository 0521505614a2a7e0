"""Experiment orchestration, CSV/JSON persistence, run manifest.

For a fixed (config, seed) every output byte is reproducible except the
manifest's timestamp and wall time.  CSVs are UTF-8, comma-separated
with LF line endings and a header on the first line; numbers use
Python's shortest round-trip representation.
"""

import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import rng as rngmod
from .rng import substream
from .config import ConfigError, serialize_config, theta_value
from .distributions import parse_scalar
from .graph import sample_graph, sample_labels, normalize_weights
from .dynamics import simulate
from .meanfield import build_meanfield_model, mixing_matrix, regime_stats
from .gwtree import a_s_profile, neighborhood_diagnostic, offspring_means
from .metrics import (
    ConcentrationCase, burn_in_steps, chaos_experiment, concentration_check,
    error_experiment, stationarity_experiment,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _scipy_version():
    import scipy

    return scipy.__version__


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def config_hash(cfg):
    return hashlib.sha256(serialize_config(cfg).encode("utf-8")).hexdigest()


def run(cfg, out_dir=None):
    """Execute one experiment; returns the machine-readable summary."""
    started = time.time()
    out = Path(out_dir if out_dir is not None else cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    dispatch = {
        "error": _run_error,
        "chaos": _run_chaos,
        "stationary": _run_stationary,
        "concentration": _run_concentration,
        "tree": _run_tree,
        "simulate": _run_simulate,
        "meanfield": _run_meanfield,
    }
    if cfg.kind not in dispatch:
        raise ConfigError(f"kind: unknown experiment kind {cfg.kind!r}")
    summary, outputs = dispatch[cfg.kind](cfg, out)
    summary["kind"] = cfg.kind
    summary["seed"] = cfg.seed
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    manifest = {
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "kind": cfg.kind,
        "versions": {
            "opinionlab": __version__,
            "numpy": np.__version__,
            "scipy": _scipy_version(),
            "python": sys.version.split()[0],
        },
        "outputs": sorted(outputs + ["summary.json"]),
        "wall_time_s": time.time() - started,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _k_max(cfg):
    return cfg.k_max if cfg.k_max > 0 else burn_in_steps(cfg.model.d)


def _run_error(cfg, out):
    curve = error_experiment(
        cfg.model, cfg.n_grid, lambda n: theta_value(cfg.theta_rule, n),
        _k_max(cfg), cfg.inner_reps, cfg.outer_reps, cfg.seed, threads=cfg.threads,
    )
    groups = {}
    for pt in curve.points:
        groups.setdefault(pt.n, []).append(pt)
    rows = []
    for n in cfg.n_grid:
        pts = groups[n]
        reps = sum(p.reps for p in pts)
        dense = all(p.dense_ok for p in pts)
        for k in range(curve.k_max + 1):
            for norm, attr, se_attr in (
                ("inf", "inf_estimate", "inf_se"),
                ("row_l1", "row_estimate", "row_se"),
            ):
                est = float(np.mean([getattr(p, attr)[k] for p in pts]))
                se = float(np.sqrt(np.mean([getattr(p, se_attr)[k] ** 2 for p in pts]) / len(pts)))
                rows.append((n, pts[0].theta, k, norm, est, se, reps, dense))
        for norm, attr, se_attr in (("inf", "sup_inf", "sup_inf_se"), ("row_l1", "sup_row", "sup_row_se")):
            est = float(np.mean([getattr(p, attr) for p in pts]))
            se = float(np.sqrt(np.mean([getattr(p, se_attr) ** 2 for p in pts]) / len(pts)))
            rows.append((n, pts[0].theta, -1, norm, est, se, reps, dense))
    write_csv(
        out / "error_curve.csv",
        ["n", "theta", "k", "norm_type", "estimate", "stderr", "reps", "dense_ok"],
        rows,
    )
    summary = {
        "k_max": curve.k_max,
        "points": [
            {
                "n": p.n, "theta": p.theta, "outer": p.outer, "reps": p.reps,
                "sup_inf": p.sup_inf, "sup_inf_se": p.sup_inf_se,
                "sup_row": p.sup_row, "sup_row_se": p.sup_row_se,
                "dense_ok": p.dense_ok, "edge_prob_clipped": p.edge_prob_clipped,
                "share_mismatch": p.share_mismatch,
            }
            for p in curve.points
        ],
    }
    return summary, ["error_curve.csv"]


def _run_chaos(cfg, out):
    n = cfg.n_grid[0]
    theta = theta_value(cfg.theta_rule, n)
    vertex_sets = cfg.vertex_sets or [[0]]
    functions = cfg.functions or [["proj:0,%d" % cfg.k] * len(vs) for vs in vertex_sets]
    report = chaos_experiment(
        cfg.model, n, theta, cfg.k, vertex_sets, functions, cfg.inner_reps, cfg.seed,
        measure_functions=cfg.measure_functions, limit_reps=cfg.limit_reps,
        threads=cfg.threads,
    )
    rows = []
    for row in report.product_rows:
        verts = row["vertices"]
        verts = verts if isinstance(verts, str) else " ".join(map(str, verts))
        rows.append(
            (n, cfg.k, "product", verts,
             " ".join(map(str, row["communities"])), " ".join(row["functions"]),
             row["graph_estimate"], row["graph_se"], row["limit_estimate"],
             row["limit_se"], row["gap"])
        )
    for row in report.measure_rows:
        rows.append(
            (n, cfg.k, "measure", "", str(row["community"]), row["function"],
             row["graph_estimate"], row["graph_se"], row["limit_estimate"],
             row["limit_se"], row["gap"])
        )
    write_csv(
        out / "chaos.csv",
        ["n", "k", "statistic", "vertices", "communities", "functions",
         "graph_estimate", "graph_stderr", "limit_estimate", "limit_stderr", "gap"],
        rows,
    )
    return {"n": n, "theta": theta, "product_rows": report.product_rows,
            "measure_rows": report.measure_rows}, ["chaos.csv"]


def _run_stationary(cfg, out):
    n = cfg.n_grid[0]
    theta = theta_value(cfg.theta_rule, n)
    k_long = cfg.k_max if cfg.k_max > 0 else burn_in_steps(cfg.model.d, cfg.burn_tol)
    report = stationarity_experiment(
        cfg.model, n, theta, k_long, cfg.inner_reps, cfg.burn_tol, cfg.seed,
        stationary_reps=cfg.stationary_reps, threads=cfg.threads,
    )
    rows = [
        (n, theta, row["community"], row["topic"], row["moment"],
         row["graph_estimate"], row["graph_se"], row["stationary_estimate"],
         row["stationary_se"], row["gap"], row["combined_se"])
        for row in report.rows
    ]
    write_csv(
        out / "stationarity.csv",
        ["n", "theta", "community", "topic", "moment", "graph_estimate", "graph_stderr",
         "stationary_estimate", "stationary_stderr", "gap", "combined_stderr"],
        rows,
    )
    return {"n": n, "theta": theta, "k_long": k_long, "horizon": report.horizon,
            "rows": report.rows}, ["stationarity.csv"]


def _run_concentration(cfg, out):
    if cfg.count_law != "poisson":
        raise ConfigError("count_law: only 'poisson' is wired through the config")
    rows = []
    summaries = []
    for case_idx, mean in enumerate(cfg.count_means):
        case = ConcentrationCase(
            count_dists=[("poisson", mean)],
            weight_dist=parse_scalar(cfg.conc_weight),
            value_dist=parse_scalar(cfg.conc_value),
            H=cfg.model.H,
            eps_grid=tuple(cfg.eps_grid),
        )
        report = concentration_check(case, cfg.inner_reps, (cfg.seed, case_idx))
        for row in report.rows:
            rows.append(
                (f"poisson:{mean:g}", row["epsilon"], row["statistic"],
                 row["empirical_tail"], row["stderr"], row["bound"], cfg.inner_reps)
            )
        summaries.append({"case": f"poisson:{mean:g}", "mu": report.mu, "nu": report.nu,
                          "rows": report.rows})
    write_csv(
        out / "concentration.csv",
        ["case", "epsilon", "statistic", "empirical_tail", "stderr", "bound", "replications"],
        rows,
    )
    return {"cases": summaries}, ["concentration.csv"]


def _run_tree(cfg, out):
    spec = cfg.model
    scaling_rows = []
    diag_rows = []
    # node values drawn from the first-topic belief law of each community
    value_dists = [dist.components[0] for dist in spec.belief_dists]
    mixing_emp = mixing_matrix(spec.pi, spec.kappa, spec.weight_mean_matrix())
    for point_idx, n in enumerate(cfg.n_grid):
        theta = theta_value(cfg.theta_rule, n)
        q = offspring_means(spec, spec.pi, theta)
        for root_type in range(spec.K):
            ests, ses = a_s_profile(
                spec, root_type, cfg.depth, value_dists, q, mixing_emp,
                cfg.tree_reps, (cfg.seed, point_idx, root_type),
            )
            for s in range(1, cfg.depth + 1):
                scaling_rows.append((theta, root_type, s, float(ests[s - 1]),
                                     float(ses[s - 1]), cfg.tree_reps))
        non_tree = 0
        checked = 0
        for g in range(cfg.outer_reps):
            labels = sample_labels(spec, n, (cfg.seed, point_idx, g))
            graph = sample_graph(spec, labels, theta, (cfg.seed, point_idx, g))
            pick = substream((cfg.seed, point_idx, g), rngmod.TREE)
            vertices = pick.choice(n, size=min(cfg.vertices_checked, n), replace=False)
            for v in vertices:
                diag = neighborhood_diagnostic(graph, int(v), cfg.depth, K=spec.K)
                checked += 1
                non_tree += 0 if diag.is_tree() else 1
        diag_rows.append((n, theta, cfg.depth, checked,
                          non_tree / checked if checked else 0.0))
    write_csv(
        out / "tree_scaling.csv",
        ["theta", "root_type", "s", "estimate", "stderr", "replications"],
        scaling_rows,
    )
    write_csv(
        out / "tree_diagnostic.csv",
        ["n", "theta", "depth", "vertex_count_checked", "non_tree_fraction"],
        diag_rows,
    )
    return {"scaling": scaling_rows, "diagnostic": diag_rows}, [
        "tree_scaling.csv", "tree_diagnostic.csv",
    ]


def _run_simulate(cfg, out):
    spec = cfg.model
    n = cfg.n_grid[0]
    theta = theta_value(cfg.theta_rule, n)
    k_max = _k_max(cfg)
    record = [v for v in cfg.record if v < n]
    rows = []
    for rep in range(cfg.inner_reps):
        labels = sample_labels(spec, n, (cfg.seed, rep))
        graph = sample_graph(spec, labels, theta, (cfg.seed, rep))
        influence = normalize_weights(graph)
        traj, _ = simulate(spec, graph, influence, k_max, (cfg.seed, rep), record=record)
        for vi, v in enumerate(traj.vertices):
            for t in range(k_max + 1):
                for topic in range(spec.ell):
                    rows.append((rep, int(v), int(traj.communities[vi]), t, topic,
                                 float(traj.values[vi, topic, t])))
    write_csv(
        out / "trajectories.csv",
        ["replication", "vertex", "community", "time", "topic", "value"],
        rows,
    )
    return {"n": n, "theta": theta, "k_max": k_max, "recorded": record}, ["trajectories.csv"]


def _run_meanfield(cfg, out):
    spec = cfg.model
    n = cfg.n_grid[0]
    theta = theta_value(cfg.theta_rule, n)
    labels = sample_labels(spec, n, (cfg.seed, 0))
    census = np.bincount(labels, minlength=spec.K)
    model = build_meanfield_model(spec, n, theta, census)
    stats = regime_stats(spec, census / n, n, theta)
    report = {
        "n": n,
        "theta": theta,
        "mixing": model.mixing.tolist(),
        "mixing_empirical": model.mixing_emp.tolist(),
        "signal_mean": model.signal_mean.tolist(),
        "initial_mean": model.initial_mean.tolist(),
        "no_inbound_prob": model.no_inbound_prob.tolist(),
        "regime": {
            "mu": stats.mu.tolist(),
            "nu": stats.nu.tolist(),
            "delta": stats.delta,
            "lambda": stats.lam,
            "share_mismatch": stats.share_mismatch,
            "dense_ok": stats.dense_ok,
            "edge_prob_clipped": stats.edge_prob_clipped,
            "nonzero_rows": stats.nonzero_rows.tolist(),
        },
    }
    with open(out / "model_report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report, ["model_report.json"]
