"""Population-level model parameters.

A ``ModelSpec`` collects everything that does not depend on the graph
size: community count and shares, the edge kernel, averaging weights,
and the distribution families for edge weights, internal beliefs and
media signals.  The density parameter theta and the vertex count n are
supplied per experiment point.
"""

from dataclasses import dataclass, field

import numpy as np

from .distributions import VectorDist, supported_in


class SpecError(ValueError):
    """Raised when a ModelSpec violates one of its invariants."""


@dataclass
class ModelSpec:
    """Parameters of the opinion model and its random graph.

    Attributes
    ----------
    K : number of communities.
    ell : number of topics.
    pi : length-K community shares, positive, summing to 1.
    kappa : K x K nonnegative edge kernel; kappa[s, r] scales the
        probability that a community-s vertex is an in-neighbor of a
        community-r vertex.
    c, d : network / external averaging weights, d > 0, c + d <= 1.
    H : cap for unnormalized edge weights.
    weight_dists : K x K nested list; weight_dists[r][s] is the law of
        the weight a community-r listener puts on a community-s source,
        supported in [0, H].
    belief_dists : per-community law of the internal belief vector,
        supported in [-1, 1]^ell.
    signal_dists : per-community law of the media draw, supported in
        [-1, 1]^ell.
    signal_belief_weight : in [0, 1]; the media draw is the convex mix
        (1 - w) * community draw + w * own belief vector, which keeps
        the signal law dependent on the belief vector with a closed-form
        conditional mean.
    init_dists : per-community law of the initial opinion rows, or the
        string "beliefs" to start every vertex at its belief vector.
    fixed_composition : sample labels with exact counts round(n * pi)
        instead of i.i.d. draws (variance reduction; shares then match
        pi up to rounding).
    """

    K: int
    ell: int
    pi: np.ndarray
    kappa: np.ndarray
    c: float
    d: float
    H: float
    weight_dists: list
    belief_dists: list
    signal_dists: list
    signal_belief_weight: float = 0.0
    init_dists: object = None
    fixed_composition: bool = False

    def __post_init__(self):
        self.pi = np.asarray(self.pi, dtype=float)
        self.kappa = np.asarray(self.kappa, dtype=float)
        if self.init_dists is None:
            # default: each topic uniform on [-1, 1], i.i.d. within community
            from .distributions import Uniform

            u = VectorDist(tuple(Uniform(-1.0, 1.0) for _ in range(self.ell)))
            self.init_dists = [u] * self.K

    def validate(self):
        """Return a list of invariant violations (empty when valid)."""
        problems = []
        if self.K < 1:
            problems.append("K: community count must be >= 1")
        if self.ell < 1:
            problems.append("ell: topic count must be >= 1")
        if self.pi.shape != (self.K,):
            problems.append(f"pi: expected length {self.K}, got shape {self.pi.shape}")
        else:
            if np.any(self.pi <= 0):
                problems.append("pi: all community shares must be positive")
            if abs(self.pi.sum() - 1.0) > 1e-9:
                problems.append(f"pi: shares sum to {self.pi.sum()}, expected 1")
        if self.kappa.shape != (self.K, self.K):
            problems.append(f"kappa: expected shape {(self.K, self.K)}, got {self.kappa.shape}")
        elif np.any(self.kappa < 0):
            problems.append("kappa: kernel entries must be nonnegative")
        if not self.d > 0:
            problems.append("d: external weight must be positive")
        if self.c < 0:
            problems.append("c: network weight must be nonnegative")
        if self.c + self.d > 1 + 1e-12:
            problems.append(f"c,d: c + d = {self.c + self.d} exceeds 1")
        if not self.H > 0:
            problems.append("H: weight cap must be positive")
        problems += self._validate_dists()
        if not 0.0 <= self.signal_belief_weight <= 1.0:
            problems.append("signal_belief_weight: must lie in [0, 1]")
        return problems

    def _validate_dists(self):
        problems = []
        if len(self.weight_dists) != self.K or any(len(row) != self.K for row in self.weight_dists):
            problems.append(f"weight_dists: expected {self.K}x{self.K} entries")
        else:
            for r in range(self.K):
                for s in range(self.K):
                    if not supported_in(self.weight_dists[r][s], 0.0, self.H):
                        problems.append(f"weight_dists[{r}][{s}]: support outside [0, {self.H}]")
        for name, dists in (("belief_dists", self.belief_dists), ("signal_dists", self.signal_dists)):
            if len(dists) != self.K:
                problems.append(f"{name}: expected {self.K} entries")
                continue
            for r, dist in enumerate(dists):
                if len(dist) != self.ell:
                    problems.append(f"{name}[{r}]: expected {self.ell} components")
                elif not supported_in(dist, -1.0, 1.0):
                    problems.append(f"{name}[{r}]: support outside [-1, 1]")
        if self.init_dists != "beliefs":
            if len(self.init_dists) != self.K:
                problems.append(f"init_dists: expected {self.K} entries")
            else:
                for r, dist in enumerate(self.init_dists):
                    if len(dist) != self.ell:
                        problems.append(f"init_dists[{r}]: expected {self.ell} components")
                    elif not supported_in(dist, -1.0, 1.0):
                        problems.append(f"init_dists[{r}]: support outside [-1, 1]")
        return problems

    def check(self):
        problems = self.validate()
        if problems:
            raise SpecError("; ".join(problems))
        return self

    # ---- closed-form moments used by the mean-field construction ----

    def weight_mean_matrix(self):
        """K x K matrix of E[weight | listener r, source s]."""
        return np.array(
            [[self.weight_dists[r][s].mean() for s in range(self.K)] for r in range(self.K)]
        )

    def weight_second_moment_matrix(self):
        return np.array(
            [[self.weight_dists[r][s].second_moment() for s in range(self.K)] for r in range(self.K)]
        )

    def belief_mean_matrix(self):
        """K x ell matrix of per-community belief means."""
        return np.array([dist.mean() for dist in self.belief_dists])

    def signal_mean_matrix(self):
        """K x ell matrix of per-community media-draw means."""
        w = self.signal_belief_weight
        base = np.array([dist.mean() for dist in self.signal_dists])
        return (1.0 - w) * base + w * self.belief_mean_matrix()

    def init_mean_matrix(self):
        if self.init_dists == "beliefs":
            return self.belief_mean_matrix()
        return np.array([dist.mean() for dist in self.init_dists])

    def sample_beliefs(self, labels, rng):
        n = len(labels)
        out = np.empty((n, self.ell), dtype=float)
        for r in range(self.K):
            mask = labels == r
            cnt = int(mask.sum())
            if cnt:
                out[mask] = self.belief_dists[r].sample(rng, size=cnt)
        return out

    def sample_signals(self, labels, beliefs, rng):
        """One round of media draws for every vertex."""
        n = len(labels)
        out = np.empty((n, self.ell), dtype=float)
        for r in range(self.K):
            mask = labels == r
            cnt = int(mask.sum())
            if cnt:
                out[mask] = self.signal_dists[r].sample(rng, size=cnt)
        w = self.signal_belief_weight
        if w:
            out = (1.0 - w) * out + w * beliefs
        return out

    def sample_initial(self, labels, beliefs, rng):
        if self.init_dists == "beliefs":
            return beliefs.copy()
        n = len(labels)
        out = np.empty((n, self.ell), dtype=float)
        for r in range(self.K):
            mask = labels == r
            cnt = int(mask.sum())
            if cnt:
                out[mask] = self.init_dists[r].sample(rng, size=cnt)
        return out
