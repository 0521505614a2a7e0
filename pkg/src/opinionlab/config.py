"""Experiment configuration: plain key-value text or JSON.

The native format is one ``key = value`` pair per line with ``#``
comments; hierarchy uses dotted keys.  Vectors are space-separated,
matrices separate rows with ``;``, per-community distribution lists
separate entries with ``|``.  A JSON document (detected by a leading
``{``) with the same keys, possibly nested, is accepted as alternative
input.

Example::

    kind = error
    seed = 42
    out = results
    n_grid = 500 1000 2000
    theta = pow:0.8
    inner_reps = 20
    outer_reps = 3
    model.K = 2
    model.ell = 1
    model.pi = 0.5 0.5
    model.kappa = 2 1 ; 1 2
    model.c = 0.3
    model.d = 0.2
    model.H = 1
    model.weights = point:1 point:1 ; point:1 point:1
    model.beliefs = uniform:-1,1 | uniform:-1,1
    model.signals = uniform:-0.5,0.5 | uniform:-0.5,0.5
"""

import json
import math
from dataclasses import dataclass, field, fields

import numpy as np

from .distributions import parse_scalar, parse_vector, DistributionError
from .model import ModelSpec

KINDS = ("simulate", "meanfield", "error", "chaos", "stationary", "concentration", "tree")

THETA_RULES = ("const", "log", "loglog", "pow", "linear")


class ConfigError(ValueError):
    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def theta_value(rule, n):
    """Evaluate a density rule string at graph size n."""
    kind, _, arg = rule.partition(":")
    if kind not in THETA_RULES:
        raise ConfigError(f"theta: unknown rule {rule!r}")
    try:
        x = float(arg)
    except ValueError:
        raise ConfigError(f"theta: malformed argument in {rule!r}") from None
    if kind == "const":
        return x
    if kind == "log":
        return x * math.log(n)
    if kind == "loglog":
        return x * math.log(math.log(n))
    if kind == "pow":
        return float(n) ** x
    return x * n


@dataclass
class ExperimentConfig:
    kind: str
    seed: int
    out: str
    model: ModelSpec
    n_grid: list
    theta_rule: str
    inner_reps: int = 10
    outer_reps: int = 1
    threads: int = 1
    k_max: int = 0              # 0: derive from the contraction burn-in
    burn_tol: float = 1e-4
    k: int = 2                  # chaos trajectory length
    vertex_sets: list = field(default_factory=list)
    functions: list = field(default_factory=list)
    measure_functions: list = field(default_factory=list)
    limit_reps: int = 4000
    depth: int = 2              # tree generation depth
    tree_reps: int = 10000
    vertices_checked: int = 100
    stationary_reps: int = 20000
    eps_grid: list = field(default_factory=lambda: [0.1, 0.2, 0.5])
    count_means: list = field(default_factory=lambda: [50.0])
    count_law: str = "poisson"
    conc_weight: str = "point:1"
    conc_value: str = "uniform:-1,1"
    record: list = field(default_factory=lambda: [0])

    def thetas(self):
        return [theta_value(self.theta_rule, n) for n in self.n_grid]


_DEFAULTS = {f.name: f.default for f in fields(ExperimentConfig)}


def _flatten_json(obj, prefix=""):
    out = {}
    for key, val in obj.items():
        dotted = f"{prefix}{key}"
        if isinstance(val, dict):
            out.update(_flatten_json(val, prefix=f"{dotted}."))
        elif isinstance(val, list):
            out[dotted] = " ".join(
                ";" if item == ";" else ("|" if item == "|" else str(item)) for item in val
            )
        elif isinstance(val, bool):
            out[dotted] = "true" if val else "false"
        else:
            out[dotted] = str(val)
    return out


def _read_pairs(text):
    text = text.strip()
    if text.startswith("{"):
        return _flatten_json(json.loads(text)), []
    pairs = {}
    problems = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, _, value = line.partition("=")
        pairs[key.strip()] = value.strip()
    return pairs, problems


def _parse_vector_field(text):
    return [float(tok) for tok in text.split()]


def _parse_matrix_field(text):
    rows = [r.strip() for r in text.split(";")]
    return [[float(tok) for tok in row.split()] for row in rows if row]


def _parse_model(pairs, problems):
    def take(key, default=None):
        return pairs.pop(f"model.{key}", default)

    def bad(key, msg):
        problems.append(f"model.{key}: {msg}")

    try:
        K = int(take("K", "1"))
    except ValueError:
        bad("K", "not an integer")
        K = 1
    try:
        ell = int(take("ell", "1"))
    except ValueError:
        bad("ell", "not an integer")
        ell = 1

    def number(key, default):
        txt = take(key, default)
        try:
            return float(txt)
        except ValueError:
            bad(key, f"not a number: {txt!r}")
            return float(default)

    c = number("c", "0.3")
    d = number("d", "0.2")
    H = number("H", "1")
    w = number("signal_belief_weight", "0")

    try:
        pi = _parse_vector_field(take("pi", " ".join(["%g" % (1.0 / K)] * K)))
    except ValueError:
        bad("pi", "malformed vector")
        pi = [1.0 / K] * K
    try:
        kappa = _parse_matrix_field(take("kappa", ";".join([" ".join(["1"] * K)] * K)))
    except ValueError:
        bad("kappa", "malformed matrix")
        kappa = [[1.0] * K for _ in range(K)]

    def dist_matrix(key, default_tok):
        text = take(key, None)
        if text is None:
            return [[parse_scalar(default_tok)] * K for _ in range(K)]
        try:
            rows = [r.strip() for r in text.split(";") if r.strip()]
            if len(rows) == 1 and K > 1 and len(rows[0].split()) == 1:
                return [[parse_scalar(rows[0])] * K for _ in range(K)]
            return [[parse_scalar(tok) for tok in row.split()] for row in rows]
        except DistributionError as exc:
            bad(key, str(exc))
            return [[parse_scalar(default_tok)] * K for _ in range(K)]

    def dist_list(key, default_tok):
        text = take(key, None)
        if text is None:
            return [parse_vector(default_tok, ell) for _ in range(K)]
        if text == "beliefs":
            return "beliefs"
        try:
            entries = [e.strip() for e in text.split("|") if e.strip()]
            if len(entries) == 1 and K > 1:
                entries = entries * K
            return [parse_vector(entry, ell) for entry in entries]
        except DistributionError as exc:
            bad(key, str(exc))
            return [parse_vector(default_tok, ell) for _ in range(K)]

    weights = dist_matrix("weights", "uniform:0,1")
    beliefs = dist_list("beliefs", "uniform:-1,1")
    signals = dist_list("signals", "uniform:-1,1")
    init = dist_list("init", "uniform:-1,1")
    fixed = take("fixed_composition", "false").lower() in ("true", "1", "yes")

    spec = ModelSpec(
        K=K, ell=ell, pi=np.asarray(pi), kappa=np.asarray(kappa), c=c, d=d, H=H,
        weight_dists=weights,
        belief_dists=beliefs if beliefs != "beliefs" else [],
        signal_dists=signals if signals != "beliefs" else [],
        signal_belief_weight=w, init_dists=init, fixed_composition=fixed,
    )
    if beliefs == "beliefs" or signals == "beliefs":
        problems.append("model.beliefs/model.signals: 'beliefs' only valid for model.init")
    for issue in spec.validate():
        problems.append(f"model.{issue}")
    return spec


def parse_config(text):
    """Parse and validate; raises ConfigError carrying every violation."""
    pairs, problems = _read_pairs(text)
    model = _parse_model(pairs, problems)

    def take(key, default=None):
        return pairs.pop(key, default)

    kind = take("kind", "error")
    if kind not in KINDS:
        problems.append(f"kind: unknown experiment kind {kind!r}; options: {', '.join(KINDS)}")

    def integer(key, default, minimum=None):
        txt = take(key, str(default))
        try:
            val = int(txt)
        except ValueError:
            problems.append(f"{key}: not an integer: {txt!r}")
            return default
        if minimum is not None and val < minimum:
            problems.append(f"{key}: must be >= {minimum}, got {val}")
        return val

    def floating(key, default, positive=False):
        txt = take(key, str(default))
        try:
            val = float(txt)
        except ValueError:
            problems.append(f"{key}: not a number: {txt!r}")
            return default
        if positive and val <= 0:
            problems.append(f"{key}: must be positive, got {val}")
        return val

    seed = integer("seed", 0)
    out = take("out", "results")
    try:
        n_grid = [int(tok) for tok in take("n_grid", "1000").split()]
    except ValueError:
        problems.append("n_grid: malformed integer list")
        n_grid = [1000]
    if not n_grid:
        problems.append("n_grid: must not be empty")
    if any(n < 1 for n in n_grid):
        problems.append("n_grid: entries must be >= 1")

    theta_rule = take("theta", "log:1")
    for n in n_grid:
        if n < 1:
            continue
        try:
            theta = theta_value(theta_rule, n)
        except ConfigError as exc:
            problems.extend(exc.problems)
            break
        if not theta > 0:
            problems.append(f"theta: rule {theta_rule!r} gives non-positive theta at n={n}")
            break

    vertex_sets = [
        [int(tok) for tok in part.split()]
        for part in take("vertex_sets", "").split(";")
        if part.strip()
    ]
    functions = [
        part.split() for part in take("functions", "").split(";") if part.strip()
    ]

    cfg = ExperimentConfig(
        kind=kind, seed=seed, out=out, model=model, n_grid=n_grid, theta_rule=theta_rule,
        inner_reps=integer("inner_reps", _DEFAULTS["inner_reps"], minimum=1),
        outer_reps=integer("outer_reps", _DEFAULTS["outer_reps"], minimum=1),
        threads=integer("threads", _DEFAULTS["threads"], minimum=1),
        k_max=integer("k_max", _DEFAULTS["k_max"], minimum=0),
        burn_tol=floating("burn_tol", _DEFAULTS["burn_tol"], positive=True),
        k=integer("k", _DEFAULTS["k"], minimum=0),
        vertex_sets=vertex_sets,
        functions=functions,
        measure_functions=take("measure_functions", "").split(),
        limit_reps=integer("limit_reps", _DEFAULTS["limit_reps"], minimum=1),
        depth=integer("depth", _DEFAULTS["depth"], minimum=0),
        tree_reps=integer("tree_reps", _DEFAULTS["tree_reps"], minimum=1),
        vertices_checked=integer("vertices_checked", _DEFAULTS["vertices_checked"], minimum=1),
        stationary_reps=integer("stationary_reps", _DEFAULTS["stationary_reps"], minimum=1),
        eps_grid=[float(tok) for tok in take("eps_grid", "0.1 0.2 0.5").split()],
        count_means=[float(tok) for tok in take("count_means", "50").split()],
        count_law=take("count_law", "poisson"),
        conc_weight=take("conc_weight", _DEFAULTS["conc_weight"]),
        conc_value=take("conc_value", _DEFAULTS["conc_value"]),
        record=[int(tok) for tok in take("record", "0").split()],
    )
    for key in pairs:
        problems.append(f"{key}: unknown key")
    if problems:
        raise ConfigError(problems)
    return cfg


def serialize_config(cfg):
    """Canonical text form; parse(serialize(cfg)) reproduces cfg."""
    spec = cfg.model
    lines = [
        f"kind = {cfg.kind}",
        f"seed = {cfg.seed}",
        f"out = {cfg.out}",
        f"n_grid = {' '.join(str(n) for n in cfg.n_grid)}",
        f"theta = {cfg.theta_rule}",
        f"inner_reps = {cfg.inner_reps}",
        f"outer_reps = {cfg.outer_reps}",
        f"threads = {cfg.threads}",
        f"k_max = {cfg.k_max}",
        f"burn_tol = {cfg.burn_tol!r}",
        f"k = {cfg.k}",
        f"limit_reps = {cfg.limit_reps}",
        f"depth = {cfg.depth}",
        f"tree_reps = {cfg.tree_reps}",
        f"vertices_checked = {cfg.vertices_checked}",
        f"stationary_reps = {cfg.stationary_reps}",
        f"eps_grid = {' '.join(repr(e) for e in cfg.eps_grid)}",
        f"count_means = {' '.join(repr(m) for m in cfg.count_means)}",
        f"count_law = {cfg.count_law}",
        f"conc_weight = {cfg.conc_weight}",
        f"conc_value = {cfg.conc_value}",
        f"record = {' '.join(str(v) for v in cfg.record)}",
    ]
    if cfg.vertex_sets:
        lines.append(
            "vertex_sets = " + " ; ".join(" ".join(str(v) for v in vs) for vs in cfg.vertex_sets)
        )
    if cfg.functions:
        lines.append("functions = " + " ; ".join(" ".join(fs) for fs in cfg.functions))
    if cfg.measure_functions:
        lines.append("measure_functions = " + " ".join(cfg.measure_functions))
    lines += [
        f"model.K = {spec.K}",
        f"model.ell = {spec.ell}",
        f"model.pi = {' '.join(repr(float(p)) for p in spec.pi)}",
        "model.kappa = " + " ; ".join(" ".join(repr(float(v)) for v in row) for row in spec.kappa),
        f"model.c = {spec.c!r}",
        f"model.d = {spec.d!r}",
        f"model.H = {spec.H!r}",
        "model.weights = " + " ; ".join(
            " ".join(spec.weight_dists[r][s].token() for s in range(spec.K)) for r in range(spec.K)
        ),
        "model.beliefs = " + " | ".join(dist.token() for dist in spec.belief_dists),
        "model.signals = " + " | ".join(dist.token() for dist in spec.signal_dists),
        f"model.signal_belief_weight = {spec.signal_belief_weight!r}",
        "model.init = " + (
            "beliefs" if spec.init_dists == "beliefs"
            else " | ".join(dist.token() for dist in spec.init_dists)
        ),
        f"model.fixed_composition = {'true' if spec.fixed_composition else 'false'}",
    ]
    return "\n".join(lines) + "\n"
