"""Closed distribution family for weights, beliefs and media signals.

The lab only admits distributions with closed-form first and second
moments: point masses, uniforms, affinely rescaled betas, and finite
mixtures of those.  Each scalar distribution serializes to a compact
token used by the config format::

    point:0.5
    uniform:-1,1
    beta:2,3            (on [0,1])
    beta:2,3,-1,1       (rescaled to [-1,1])
    mix:0.3*point:0+0.7*uniform:0,1

Vector-valued distributions (beliefs, signals) are products of
independent scalar components, written as space-separated tokens.
"""

from dataclasses import dataclass

import numpy as np


class DistributionError(ValueError):
    pass


@dataclass(frozen=True)
class Point:
    value: float

    def mean(self):
        return self.value

    def second_moment(self):
        return self.value**2

    def sample(self, rng, size=None):
        if size is None:
            return self.value
        return np.full(size, self.value, dtype=float)

    def support(self):
        return (self.value, self.value)

    def token(self):
        return f"point:{_fmt(self.value)}"


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def mean(self):
        return 0.5 * (self.lo + self.hi)

    def second_moment(self):
        # E[X^2] = (lo^2 + lo*hi + hi^2) / 3
        return (self.lo**2 + self.lo * self.hi + self.hi**2) / 3.0

    def sample(self, rng, size=None):
        return rng.uniform(self.lo, self.hi, size=size)

    def support(self):
        return (self.lo, self.hi)

    def token(self):
        return f"uniform:{_fmt(self.lo)},{_fmt(self.hi)}"


@dataclass(frozen=True)
class ScaledBeta:
    a: float
    b: float
    lo: float = 0.0
    hi: float = 1.0

    def mean(self):
        return self.lo + (self.hi - self.lo) * self.a / (self.a + self.b)

    def second_moment(self):
        m1 = self.a / (self.a + self.b)
        m2 = self.a * (self.a + 1.0) / ((self.a + self.b) * (self.a + self.b + 1.0))
        w = self.hi - self.lo
        return self.lo**2 + 2.0 * self.lo * w * m1 + w**2 * m2

    def sample(self, rng, size=None):
        return self.lo + (self.hi - self.lo) * rng.beta(self.a, self.b, size=size)

    def support(self):
        return (self.lo, self.hi)

    def token(self):
        if (self.lo, self.hi) == (0.0, 1.0):
            return f"beta:{_fmt(self.a)},{_fmt(self.b)}"
        return f"beta:{_fmt(self.a)},{_fmt(self.b)},{_fmt(self.lo)},{_fmt(self.hi)}"


@dataclass(frozen=True)
class Mixture:
    weights: tuple
    components: tuple

    def __post_init__(self):
        if len(self.weights) != len(self.components) or not self.components:
            raise DistributionError("mixture needs matching, nonempty weights/components")
        if any(isinstance(comp, Mixture) for comp in self.components):
            raise DistributionError("mixtures do not nest; flatten the components")
        if any(w < 0 for w in self.weights):
            raise DistributionError("mixture weights must be nonnegative")
        total = sum(self.weights)
        if abs(total - 1.0) > 1e-9:
            raise DistributionError(f"mixture weights sum to {total}, expected 1")

    def mean(self):
        return sum(w * comp.mean() for w, comp in zip(self.weights, self.components))

    def second_moment(self):
        return sum(w * comp.second_moment() for w, comp in zip(self.weights, self.components))

    def sample(self, rng, size=None):
        if size is None:
            idx = rng.choice(len(self.components), p=self.weights)
            return self.components[idx].sample(rng)
        idx = rng.choice(len(self.components), size=size, p=self.weights)
        out = np.empty(np.prod(size) if not np.isscalar(size) else size, dtype=float)
        flat_idx = np.asarray(idx).ravel()
        for j, comp in enumerate(self.components):
            mask = flat_idx == j
            cnt = int(mask.sum())
            if cnt:
                out[mask] = comp.sample(rng, size=cnt)
        return out.reshape(np.shape(idx))

    def support(self):
        lows, highs = zip(*(comp.support() for comp in self.components))
        return (min(lows), max(highs))

    def token(self):
        parts = [f"{_fmt(w)}*{comp.token()}" for w, comp in zip(self.weights, self.components)]
        return "mix:" + "+".join(parts)


@dataclass(frozen=True)
class VectorDist:
    """Product of independent scalar components, one per topic."""

    components: tuple

    def mean(self):
        return np.array([comp.mean() for comp in self.components])

    def second_moment(self):
        return np.array([comp.second_moment() for comp in self.components])

    def sample(self, rng, size=None):
        ell = len(self.components)
        if size is None:
            return np.array([comp.sample(rng) for comp in self.components])
        out = np.empty((size, ell), dtype=float)
        for j, comp in enumerate(self.components):
            out[:, j] = comp.sample(rng, size=size)
        return out

    def support(self):
        lows, highs = zip(*(comp.support() for comp in self.components))
        return (min(lows), max(highs))

    def token(self):
        return " ".join(comp.token() for comp in self.components)

    def __len__(self):
        return len(self.components)


def _fmt(x):
    x = float(x)
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def parse_scalar(token):
    """Parse one scalar-distribution token."""
    token = token.strip()
    if ":" not in token:
        raise DistributionError(f"malformed distribution token {token!r}")
    kind, _, body = token.partition(":")
    try:
        if kind == "point":
            return Point(float(body))
        if kind == "uniform":
            lo, hi = (float(p) for p in body.split(","))
            if hi < lo:
                raise DistributionError(f"uniform bounds reversed in {token!r}")
            return Uniform(lo, hi)
        if kind == "beta":
            parts = [float(p) for p in body.split(",")]
            if len(parts) == 2:
                a, b = parts
                lo, hi = 0.0, 1.0
            elif len(parts) == 4:
                a, b, lo, hi = parts
            else:
                raise DistributionError(f"beta takes 2 or 4 parameters, got {token!r}")
            if a <= 0 or b <= 0 or hi < lo:
                raise DistributionError(f"invalid beta parameters in {token!r}")
            return ScaledBeta(a, b, lo, hi)
        if kind == "mix":
            weights, comps = [], []
            for part in body.split("+"):
                wtxt, _, ctok = part.partition("*")
                weights.append(float(wtxt))
                comps.append(parse_scalar(ctok))
            return Mixture(tuple(weights), tuple(comps))
    except DistributionError:
        raise
    except Exception as exc:
        raise DistributionError(f"cannot parse distribution token {token!r}: {exc}") from exc
    raise DistributionError(f"unknown distribution kind {kind!r} in {token!r}")


def parse_vector(text, ell):
    """Parse space-separated scalar tokens into a VectorDist.

    A single token is broadcast across all ``ell`` topics.
    """
    tokens = text.split()
    if len(tokens) == 1:
        tokens = tokens * ell
    if len(tokens) != ell:
        raise DistributionError(f"expected 1 or {ell} component tokens, got {len(tokens)}")
    return VectorDist(tuple(parse_scalar(tok) for tok in tokens))


def supported_in(dist, lo, hi, tol=1e-9):
    dlo, dhi = dist.support()
    return dlo >= lo - tol and dhi <= hi + tol
