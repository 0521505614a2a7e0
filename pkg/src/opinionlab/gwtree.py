"""Marked K-type branching trees and graph tree-likeness diagnostics.

A tree node of type r has independent Poisson numbers of type-s
children with means offspring_means[s, r]; child edges carry weights
from the listener/source weight law, normalized per node into weights
that multiply along branches into path weights (root weight 1).  The
per-generation weighted sums of node values estimate how far a
normalized random sum sits from its community-matrix prediction.

Trees are built level by level under a node budget, since expected
generation size grows geometrically with depth.
"""

from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .rng import substream
from .distributions import Point, Uniform

NODE_BUDGET = 1_000_000
_BATCH_NODE_CAP = 20_000_000


class TreeBudgetError(RuntimeError):
    def __init__(self, expected, budget):
        super().__init__(
            f"expected generation size {expected:.3g} exceeds node budget {budget:g}"
        )
        self.expected = expected
        self.budget = budget


def offspring_means(spec, shares, theta):
    """Matrix q with q[s, r] = kappa[s, r] * shares[s] * theta, the mean
    number of type-s children of a type-r node."""
    shares = np.asarray(shares, dtype=float)
    return spec.kappa * shares[:, None] * float(theta)


@dataclass
class TreeLevel:
    types: np.ndarray        # node types
    parent: np.ndarray       # index into previous level (-1 at the root)
    weight: np.ndarray       # raw edge weight from the parent (nan at the root)
    norm_weight: np.ndarray  # per-parent normalized weight (1 at the root)
    path_weight: np.ndarray  # product of normalized weights back to the root
    offspring: np.ndarray    # per-node child counts by type, (n_nodes, K)


@dataclass
class GWTree:
    root_type: int
    depth: int
    levels: list

    def generation(self, s):
        return self.levels[s]

    def size(self):
        return sum(level.types.size for level in self.levels)

    def ancestry(self, s, i):
        """Ulam-Harris style address of node i in generation s as the
        tuple of child indices along the path from the root."""
        path = []
        for level_idx in range(s, 0, -1):
            level = self.levels[level_idx]
            parent = level.parent[i]
            first_child = int(np.searchsorted(level.parent, parent))
            path.append(int(i - first_child + 1))
            i = parent
        return tuple(reversed(path))


def _check_budget(q, depth, budget):
    growth = float(q.sum(axis=0).max(initial=0.0))
    expected = growth**depth if depth else 1.0
    if expected > budget:
        raise TreeBudgetError(expected, budget)


def sample_tree(spec, root_type, q, depth, seed, node_budget=NODE_BUDGET):
    """Materialize one marked tree to the given depth."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    q = np.asarray(q, dtype=float)
    _check_budget(q, depth, node_budget)
    rng = seed if isinstance(seed, np.random.Generator) else substream(seed, rngmod.TREE)
    K = spec.K
    levels = [
        TreeLevel(
            types=np.array([root_type]),
            parent=np.array([-1]),
            weight=np.array([np.nan]),
            norm_weight=np.array([1.0]),
            path_weight=np.array([1.0]),
            offspring=np.zeros((1, K), dtype=np.int64),
        )
    ]
    total_nodes = 1
    for _ in range(depth):
        cur = levels[-1]
        m = cur.types.size
        if m == 0:
            levels.append(_empty_level(K))
            continue
        counts = rng.poisson(q[:, cur.types].T)  # (m, K)
        cur.offspring[:] = counts
        per_node = counts.sum(axis=1)
        total = int(per_node.sum())
        total_nodes += total
        if total_nodes > node_budget:
            raise TreeBudgetError(total_nodes, node_budget)
        parent = np.repeat(np.arange(m), per_node)
        child_types = np.repeat(np.tile(np.arange(K), m), counts.ravel())
        # uniformly permute siblings so order carries no type information
        keys = rng.random(total)
        order = np.lexsort((keys, parent))
        child_types = child_types[order]
        weight = _draw_edge_weights(spec, cur.types[parent], child_types, rng)
        totals = np.bincount(parent, weights=weight, minlength=m)
        norm = np.zeros(total)
        pos = totals[parent] > 0.0
        norm[pos] = weight[pos] / totals[parent[pos]]
        path = cur.path_weight[parent] * norm
        levels.append(
            TreeLevel(
                types=child_types, parent=parent, weight=weight,
                norm_weight=norm, path_weight=path,
                offspring=np.zeros((total, K), dtype=np.int64),
            )
        )
    return GWTree(root_type=int(root_type), depth=depth, levels=levels)


def _empty_level(K):
    return TreeLevel(
        types=np.empty(0, np.int64), parent=np.empty(0, np.int64),
        weight=np.empty(0), norm_weight=np.empty(0), path_weight=np.empty(0),
        offspring=np.zeros((0, K), dtype=np.int64),
    )


def _draw_edge_weights(spec, parent_types, child_types, rng):
    total = parent_types.size
    out = np.empty(total)
    for pt in range(spec.K):
        for ct in range(spec.K):
            mask = (parent_types == pt) & (child_types == ct)
            cnt = int(mask.sum())
            if cnt:
                out[mask] = spec.weight_dists[pt][ct].sample(rng, size=cnt)
    return out


def weighted_generation_sum(tree, s, values):
    """Path-weighted sum of node values over generation s.

    values may be per-type (shape (K,) or (K, ell)) or per-node (shape
    (n_nodes,) or (n_nodes, ell)); returns a scalar or one value per
    topic accordingly.
    """
    if s > tree.depth:
        raise ValueError(f"tree depth {tree.depth} < requested generation {s}")
    level = tree.levels[s]
    values = np.asarray(values, dtype=float)
    K = tree.levels[0].offspring.shape[1]
    if level.types.size == 0:
        return np.zeros(values.shape[-1]) if values.ndim == 2 else 0.0
    if values.shape[0] == K:
        node_vals = values[level.types]       # per-type values (wins on ties)
    elif values.shape[0] == level.types.size:
        node_vals = values                    # per-node values
    else:
        raise ValueError(
            f"values must be per-type (length {K}) or per-node (length {level.types.size})"
        )
    if node_vals.ndim == 1:
        return float(level.path_weight @ node_vals)
    return level.path_weight @ node_vals


def path_weight_sum(tree, s):
    """Total path weight of generation s (lies in [0, 1])."""
    if s > tree.depth:
        raise ValueError(f"tree depth {tree.depth} < requested generation {s}")
    return float(tree.levels[s].path_weight.sum())


# ---------------------------------------------------------------------------
# Monte Carlo estimation of the generation-sum deviation


def _value_means(value_dists, K):
    if isinstance(value_dists, np.ndarray) or (
        isinstance(value_dists, (list, tuple)) and value_dists and np.isscalar(value_dists[0])
    ):
        arr = np.asarray(value_dists, dtype=float)
        return [Point(float(v)) for v in arr], arr
    means = np.array([dist.mean() for dist in value_dists])
    return list(value_dists), means


def _all_point_weights(spec):
    vals = set()
    for row in spec.weight_dists:
        for dist in row:
            if not isinstance(dist, Point):
                return None
            vals.add(dist.value)
    return vals.pop() if len(vals) == 1 else None


def generation_sum_samples(spec, root_type, q, s_max, value_dists, replications, seed,
                           node_budget=NODE_BUDGET, batch_cap=_BATCH_NODE_CAP):
    """Path-weighted value sums for generations 1..s_max over independent
    trees, simulated level-synchronously in batches.

    Values at every generation are drawn fresh from the per-type laws,
    so each column is a set of i.i.d. generation sums.  Returns an array
    (replications, s_max).
    """
    q = np.asarray(q, dtype=float)
    _check_budget(q, s_max, node_budget)
    rng = seed if isinstance(seed, np.random.Generator) else substream(seed, rngmod.TREE)
    value_rng = substream(seed, rngmod.VALUES) if not isinstance(seed, np.random.Generator) else rng
    dists, _ = _value_means(value_dists, spec.K)
    point_weight = _all_point_weights(spec)
    growth = float(q.sum(axis=0).max(initial=0.0))
    expected_leaf = max(growth**s_max, 1.0)
    batch = int(np.clip(batch_cap / expected_leaf, 1, replications))
    out = np.empty((replications, s_max))
    done = 0
    while done < replications:
        b = min(batch, replications - done)
        out[done : done + b] = _batch_sums(spec, root_type, q, s_max, dists, b, rng,
                                           value_rng, point_weight, batch_cap)
        done += b
    return out


def _draw_values(dist, rng, size):
    # float32 draws are plenty for Monte Carlo values and twice as fast
    if type(dist) is Uniform:
        out = rng.random(size, dtype=np.float32)
        out *= np.float32(dist.hi - dist.lo)
        out += np.float32(dist.lo)
        return out
    return dist.sample(rng, size=size)


def _segment_sums(values, per_node):
    """Per-parent sums of consecutive value segments of the given sizes.

    Segments are one parent's offspring (tens to hundreds of values), so
    a float32 input loses ~1e-6 relative accuracy at most, far below the
    Monte Carlo noise floor.
    """
    out = np.zeros(per_node.size)
    nz = per_node > 0
    if nz.any():
        offsets = np.concatenate(([0], np.cumsum(per_node)[:-1]))
        out[nz] = np.add.reduceat(values, offsets[nz])
    return out


def _batch_sums(spec, root_type, q, s_max, dists, b, rng, value_rng, point_weight, cap):
    K = spec.K
    types = np.full(b, root_type, dtype=np.int64)
    tree_id = np.arange(b)
    path = np.ones(b)
    sums = np.zeros((b, s_max))
    for s in range(1, s_max + 1):
        if K == 1:
            counts = rng.poisson(q[0, 0], size=types.size)
            per_node = counts
        else:
            counts = rng.poisson(q[:, types].T)
            per_node = counts.sum(axis=1)
        total = int(per_node.sum())
        if total > 4 * cap:
            raise TreeBudgetError(total, 4 * cap)
        if total == 0:
            break
        if s == s_max and K == 1:
            # deepest generation: per-parent reductions, no child arrays
            if point_weight is not None and point_weight <= 0.0:
                break
            values = _draw_values(dists[0], value_rng, total)
            if point_weight is not None:
                seg = _segment_sums(values, per_node)
                contrib = path * seg / np.maximum(per_node, 1)
            else:
                weight = spec.weight_dists[0][0].sample(rng, size=total)
                seg_wx = _segment_sums(weight * values, per_node)
                seg_w = _segment_sums(weight, per_node)
                contrib = np.where(seg_w > 0, path * seg_wx / np.where(seg_w > 0, seg_w, 1.0), 0.0)
            sums[:, s - 1] = np.bincount(tree_id, weights=contrib, minlength=b)
            break
        parent = np.repeat(np.arange(types.size), per_node)
        if K == 1:
            child_types = np.zeros(total, dtype=np.int64)
        else:
            child_types = np.repeat(np.tile(np.arange(K), types.size), counts.ravel())
        if point_weight is not None:
            if point_weight > 0.0:
                norm = 1.0 / per_node[parent]
            else:
                norm = np.zeros(total)
        else:
            weight = _draw_edge_weights(spec, types[parent], child_types, rng)
            totals = np.bincount(parent, weights=weight, minlength=types.size)
            norm = np.zeros(total)
            pos = totals[parent] > 0.0
            norm[pos] = weight[pos] / totals[parent[pos]]
        path = path[parent] * norm
        tree_id = tree_id[parent]
        types = child_types
        if K == 1:
            values = _draw_values(dists[0], value_rng, total)
        else:
            values = np.empty(total)
            for ct in range(K):
                mask = types == ct
                cnt = int(mask.sum())
                if cnt:
                    values[mask] = dists[ct].sample(value_rng, size=cnt)
        sums[:, s - 1] = np.bincount(tree_id, weights=path * values, minlength=b)
    return sums


def estimate_a_s(spec, root_type, s, value_dists, q, mixing_emp, replications, seed,
                 node_budget=NODE_BUDGET):
    """Monte Carlo mean absolute deviation of the generation-s weighted
    sum from its community-matrix prediction, with standard error."""
    if replications < 1:
        raise ValueError("need at least one replication")
    dists, means = _value_means(value_dists, spec.K)
    target = float((np.linalg.matrix_power(mixing_emp, s) @ means)[root_type])
    sums = generation_sum_samples(spec, root_type, q, s, dists, replications, seed,
                                  node_budget=node_budget)
    devs = np.abs(sums[:, s - 1] - target)
    est = float(devs.mean())
    se = float(devs.std(ddof=1) / np.sqrt(replications)) if replications > 1 else 0.0
    return est, se


def a_s_profile(spec, root_type, s_max, value_dists, q, mixing_emp, replications, seed,
                node_budget=NODE_BUDGET):
    """Deviation estimates for every generation 1..s_max from one shared
    set of trees; returns (estimates, standard errors)."""
    dists, means = _value_means(value_dists, spec.K)
    sums = generation_sum_samples(spec, root_type, q, s_max, dists, replications, seed,
                                  node_budget=node_budget)
    ests = np.empty(s_max)
    ses = np.empty(s_max)
    power = np.eye(spec.K)
    for s in range(1, s_max + 1):
        power = mixing_emp @ power
        target = float((power @ means)[root_type])
        devs = np.abs(sums[:, s - 1] - target)
        ests[s - 1] = devs.mean()
        ses[s - 1] = devs.std(ddof=1) / np.sqrt(replications) if replications > 1 else 0.0
    return ests, ses


# ---------------------------------------------------------------------------
# Graph-side tree-likeness diagnostic


@dataclass
class NeighborhoodDiagnostic:
    vertex: int
    depth: int
    tree_depth: int              # deepest generation with no repeated vertex
    generation_census: list      # per explored generation, K-vector of label counts
    in_degree_sequence: list     # per explored generation, in-degrees of its vertices

    def is_tree(self, s=None):
        s = self.depth if s is None else s
        return self.tree_depth >= s


def neighborhood_diagnostic(graph, vertex, depth, K=None, node_cap=2_000_000):
    """Unfold the inbound neighborhood of a vertex generation by
    generation; the unfolding is a tree exactly while no vertex repeats."""
    K = K if K is not None else graph.pi_hat.size
    indptr, sources, labels = graph.indptr, graph.sources, graph.labels
    frontier = np.array([vertex], dtype=np.int64)
    seen = {int(vertex)}
    census = [np.bincount(labels[frontier], minlength=K)]
    indeg = [np.diff(indptr)[frontier]]
    tree_depth = depth
    for g in range(1, depth + 1):
        parts = [sources[indptr[v] : indptr[v + 1]] for v in frontier]
        nxt = np.concatenate(parts) if parts else np.empty(0, np.int64)
        if nxt.size > node_cap:
            raise RuntimeError(f"neighborhood exploded past {node_cap} vertices")
        unique = np.unique(nxt)
        repeated = unique.size < nxt.size or any(int(v) in seen for v in unique)
        if repeated:
            tree_depth = g - 1
            break
        seen.update(int(v) for v in unique)
        frontier = nxt
        census.append(np.bincount(labels[frontier], minlength=K))
        indeg.append(np.diff(indptr)[frontier])
        if frontier.size == 0:
            break
    return NeighborhoodDiagnostic(
        vertex=int(vertex), depth=depth, tree_depth=tree_depth,
        generation_census=census, in_degree_sequence=indeg,
    )
