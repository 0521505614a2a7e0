"""Synchronous opinion recursion and its solved closed form.

One step of the process is

    R_new = c * C @ R + W + (1 - c - d) * R,

with W the external-signal frame.  Unrolling the recursion expands the
k-step state into powers of C with binomial hop weights

    hop_weight(s, t) = binom(t, s) * (1 - c - d)^(t - s) * c^s,

which is the coefficient of C^s after t steps.  The closed form serves
as an independent oracle for the iterated stepper.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .rng import substream

BOUND_TOL = 1e-12
_LOG_SPACE_T = 200  # direct binomials stay exact well past the identity checks


@dataclass
class OpinionState:
    R: np.ndarray   # n x ell, entries in [-1, 1]
    k: int


@dataclass
class SignalFrame:
    W: np.ndarray   # assembled external signals, n x ell
    Z: np.ndarray   # underlying media draws (kept for diagnostics)


@dataclass
class TrajectoryRecord:
    """Per-vertex trajectories: values[v] is ell x (k+1), column j holding
    the transposed opinion at time j."""

    vertices: np.ndarray
    communities: np.ndarray
    values: np.ndarray  # (len(vertices), ell, k+1)


def hop_weight(s, t, c, d):
    """Weight of the s-hop network term after t steps."""
    if s > t or s < 0:
        raise ValueError(f"need 0 <= s <= t, got s={s}, t={t}")
    a = 1.0 - c - d
    if c == 0.0:
        return a**t if s == 0 else 0.0
    if a == 0.0:
        return c**t if s == t else 0.0
    if t <= _LOG_SPACE_T:
        return math.comb(t, s) * a ** (t - s) * c**s
    logv = (
        math.lgamma(t + 1) - math.lgamma(s + 1) - math.lgamma(t - s + 1)
        + (t - s) * math.log(a) + s * math.log(c)
    )
    return math.exp(logv)


def hop_weight_table(k_max, c, d):
    """(k_max+1) x (k_max+1) array with table[t, s] = hop_weight(s, t)."""
    table = np.zeros((k_max + 1, k_max + 1))
    for t in range(k_max + 1):
        for s in range(t + 1):
            table[t, s] = hop_weight(s, t, c, d)
    return table


def sample_signal_frame(spec, graph, seed, k=None):
    """Draw one round of media signals and assemble the external frame
    W = d * Z + c * q * 1(no inbound neighbors).

    seed is either a running Generator (signals are consumed in step
    order, as simulate does) or a seed; passing the time index k with a
    seed derives an independent per-step stream.
    """
    if isinstance(seed, np.random.Generator):
        rng = seed
    elif k is None:
        rng = substream(seed, rngmod.SIGNALS)
    else:
        rng = substream(seed, int(k), rngmod.SIGNALS)
    Z = spec.sample_signals(graph.labels, graph.beliefs, rng)
    W = spec.d * Z + spec.c * graph.beliefs * graph.no_inbound[:, None]
    return SignalFrame(W=W, Z=Z)


def step(state, influence, frame, c, d):
    """Advance the opinion matrix one step; raises on any bound escape."""
    R = state.R
    if frame.W.shape != R.shape:
        raise ValueError(f"signal frame shape {frame.W.shape} != state shape {R.shape}")
    if influence.matrix.shape[0] != R.shape[0]:
        raise ValueError(
            f"influence matrix is {influence.matrix.shape}, state has {R.shape[0]} rows"
        )
    R_new = c * influence.propagate(R) + frame.W + (1.0 - c - d) * R
    _check_bounds(R_new, state.k + 1)
    return OpinionState(R=R_new, k=state.k + 1)


def _check_bounds(R, k):
    worst = float(np.abs(R).max(initial=0.0))
    if worst > 1.0 + BOUND_TOL:
        raise RuntimeError(f"opinion bound escaped at step {k}: max |entry| = {worst}")


def initial_state(spec, graph, seed):
    rng = seed if isinstance(seed, np.random.Generator) else substream(seed, rngmod.INIT)
    R0 = spec.sample_initial(graph.labels, graph.beliefs, rng)
    _check_bounds(R0, 0)
    return OpinionState(R=R0, k=0)


def simulate(spec, graph, influence, k_max, seed, record=None, keep_signals=False):
    """Iterate the recursion for k_max steps.

    record selects vertex ids whose trajectories are retained.  With
    keep_signals=True the per-step frames are returned as well (oracle
    mode; default streaming mode keeps O(n * ell) memory).
    """
    init_rng = substream(seed, rngmod.INIT)
    signal_rng = substream(seed, rngmod.SIGNALS)
    state = initial_state(spec, graph, init_rng)
    sel = np.asarray(record, dtype=np.int64) if record is not None else None
    traj = None
    if sel is not None:
        traj = np.empty((sel.size, spec.ell, k_max + 1))
        traj[:, :, 0] = state.R[sel]
    history = [] if keep_signals else None
    for k in range(1, k_max + 1):
        frame = sample_signal_frame(spec, graph, signal_rng)
        if keep_signals:
            history.append(frame)
        state = step(state, influence, frame, spec.c, spec.d)
        if sel is not None:
            traj[:, :, k] = state.R[sel]
    record_out = None
    if sel is not None:
        record_out = TrajectoryRecord(
            vertices=sel, communities=graph.labels[sel], values=traj
        )
    if keep_signals:
        return record_out, state, history
    return record_out, state


def closed_form_state(influence, signal_history, R0, c, d, k):
    """Solved k-step state from the signal history W^(1..k) and R^(0):
    sum over t < k of sum over s <= t of hop_weight * C^s W^(k-t), plus
    the same expansion applied to R^(0) at t = k."""
    if len(signal_history) < k:
        raise ValueError(f"need {k} signal frames, got {len(signal_history)}")
    table = hop_weight_table(k, c, d)
    total = np.zeros_like(np.asarray(R0, dtype=float))
    for t in range(k):
        W = signal_history[k - t - 1].W if hasattr(signal_history[k - t - 1], "W") else signal_history[k - t - 1]
        power = np.asarray(W, dtype=float)
        total += table[t, 0] * power
        for s in range(1, t + 1):
            power = influence.propagate(power)
            total += table[t, s] * power
    power = np.asarray(R0, dtype=float)
    total += table[k, 0] * power
    for s in range(1, k + 1):
        power = influence.propagate(power)
        total += table[k, s] * power
    return OpinionState(R=total, k=k)
