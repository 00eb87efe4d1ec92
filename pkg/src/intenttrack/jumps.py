"""Renewal jump process over measurement windows.

Jump times follow a gamma renewal process: inter-arrival gaps are i.i.d.
Gamma(shape, scale). A window (t_start, t_end] between consecutive
measurements either contains no jump (a survival event) or a batch of new
jump times, and both sampling and density evaluation condition correctly on
the history before the window. Jump histories are immutable and share
tails, so particle filters can extend thousands of histories cheaply.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ContractViolationError


@dataclass(frozen=True)
class JumpPrior:
    """Gamma renewal prior on the gaps between consecutive jumps.

    Attributes:
        shape: Gamma shape parameter, > 0.
        scale: Gamma scale parameter in seconds, > 0. Mean gap is
            shape * scale.
    """

    shape: float
    scale: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.shape) and self.shape > 0.0):
            raise ContractViolationError(f"shape must be positive, got {self.shape}")
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise ContractViolationError(f"scale must be positive, got {self.scale}")

    @property
    def mean_gap(self) -> float:
        return self.shape * self.scale

    def gap_log_pdf(self, gap: float) -> float:
        return float(stats.gamma.logpdf(gap, a=self.shape, scale=self.scale))

    def gap_cdf(self, gap: "float | np.ndarray") -> "float | np.ndarray":
        return stats.gamma.cdf(gap, a=self.shape, scale=self.scale)

    def gap_ppf(self, p: "float | np.ndarray") -> "float | np.ndarray":
        return stats.gamma.ppf(p, a=self.shape, scale=self.scale)


class _Node:
    __slots__ = ("time", "indicator", "parent")

    def __init__(self, time: float, indicator: "int | None", parent: "_Node | None"):
        self.time = time
        self.indicator = indicator
        self.parent = parent


class JumpSequence:
    """Immutable jump history anchored at an origin time.

    The origin plays the role of an implicit jump at the start of the track,
    so survival probabilities are always measured from a concrete time.
    ``extend`` returns a new sequence sharing the existing tail.
    """

    __slots__ = ("origin", "c0", "_head", "_count")

    def __init__(self, origin: float, c0: "int | None" = None):
        self.origin = float(origin)
        self.c0 = c0
        self._head: "_Node | None" = None
        self._count = 0

    def extend(self, time: float, indicator: "int | None" = None) -> "JumpSequence":
        """New sequence with one more jump; times must strictly increase."""
        if time <= self.last_jump_time:
            raise ContractViolationError(
                f"jump time {time} does not follow {self.last_jump_time}"
            )
        out = JumpSequence.__new__(JumpSequence)
        out.origin = self.origin
        out.c0 = self.c0
        out._head = _Node(float(time), indicator, self._head)
        out._count = self._count + 1
        return out

    @property
    def events(self) -> "tuple[tuple[float, int | None], ...]":
        """All jumps as (time, indicator) pairs in ascending time order."""
        out = []
        node = self._head
        while node is not None:
            out.append((node.time, node.indicator))
            node = node.parent
        out.reverse()
        return tuple(out)

    @property
    def times(self) -> tuple[float, ...]:
        return tuple(t for t, _ in self.events)

    @property
    def last_jump_time(self) -> float:
        return self._head.time if self._head is not None else self.origin

    @property
    def last_indicator(self) -> "int | None":
        return self._head.indicator if self._head is not None else self.c0

    def events_in(self, t_start: float, t_end: float) -> "list[tuple[float, int | None]]":
        """Jumps with time in (t_start, t_end], ascending."""
        out = []
        node = self._head
        while node is not None and node.time > t_start:
            if node.time <= t_end:
                out.append((node.time, node.indicator))
            node = node.parent
        out.reverse()
        return out

    def state_at(self, t: float) -> "tuple[float, int | None]":
        """Latest (jump time, indicator) at or before t; origin if none."""
        node = self._head
        while node is not None:
            if node.time <= t:
                return node.time, node.indicator
            node = node.parent
        return self.origin, self.c0

    def __len__(self) -> int:
        return self._count

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, JumpSequence):
            return NotImplemented
        return (
            self.origin == other.origin
            and self.c0 == other.c0
            and self.events == other.events
        )

    def __repr__(self) -> str:
        return f"JumpSequence(origin={self.origin}, c0={self.c0}, events={self.events})"


def survival(prior: JumpPrior, t: float, last_jump: float) -> float:
    """Probability of no jump in (last_jump, t] given a jump at last_jump.

    Args:
        prior: Inter-arrival prior.
        t: Query time, must not precede last_jump.
        last_jump: Time of the most recent jump.

    Returns:
        The survival probability; 1.0 when t equals last_jump.
    """
    if t < last_jump:
        raise ContractViolationError(f"query time {t} precedes last jump {last_jump}")
    if t == last_jump:
        return 1.0
    return float(stats.gamma.sf(t - last_jump, a=prior.shape, scale=prior.scale))


def first_arrival_times(
    prior: JumpPrior,
    last_jumps: np.ndarray,
    boundary: float,
    u: np.ndarray,
) -> np.ndarray:
    """Next jump times conditioned on no jump up to ``boundary``, batched.

    Maps uniforms through the inverse CDF of the gamma gap truncated to land
    strictly after the boundary. Entries can be +inf when the conditional
    mass beyond the boundary underflows.
    """
    last_jumps = np.asarray(last_jumps, dtype=float)
    head = prior.gap_cdf(boundary - last_jumps)
    p = head + np.asarray(u) * (1.0 - head)
    return last_jumps + prior.gap_ppf(p)


def sample_window(
    prior: JumpPrior,
    last_jump: float,
    window: tuple[float, float],
    rng: np.random.Generator,
) -> list[float]:
    """Draw the new jump times landing in (t_start, t_end].

    Conditions on the history: given the last jump and no further jump up to
    the window start, the first new gap is drawn truncated beyond the start;
    later gaps are unconditioned. Exactly one uniform is consumed for the
    truncated draw, then one gamma variate per accepted jump.

    Args:
        prior: Inter-arrival prior.
        last_jump: Most recent jump time, at or before the window end.
        window: (t_start, t_end) with t_start < t_end.
        rng: Source of randomness.

    Returns:
        Possibly empty list of strictly increasing times in the window.
    """
    t_start, t_end = window
    if not t_start < t_end:
        raise ContractViolationError(f"window start {t_start} must precede end {t_end}")
    if last_jump > t_end:
        raise ContractViolationError(f"last jump {last_jump} is after the window end {t_end}")
    boundary = max(last_jump, t_start)
    t = first_arrival_times(prior, np.array(last_jump), boundary, rng.random())
    times: list[float] = []
    t = float(t)
    while t <= t_end:
        times.append(t)
        t = t + rng.gamma(prior.shape, prior.scale)
    return times


def window_log_density(
    prior: JumpPrior,
    sequence: JumpSequence,
    window: tuple[float, float],
    indicator_transition: "np.ndarray | None" = None,
) -> float:
    """Log density of the sequence's jumps within one window.

    Combines the survival ratio (no jump from the latest jump to the window
    end, relative to survival up to the window start) with the gap densities
    of each new jump, and with indicator transition probabilities when the
    events carry hypothesis indicators.

    Args:
        prior: Inter-arrival prior.
        sequence: Full history; events at or before the window start set the
            conditioning, events inside the window are scored.
        window: (t_start, t_end) with t_start < t_end, at or after the
            sequence origin.
        indicator_transition: Row-stochastic matrix over indicators; required
            exactly when the scored events carry indicators.

    Returns:
        The log density (0-jump windows score the log survival ratio).
    """
    t_start, t_end = window
    if not t_start < t_end:
        raise ContractViolationError(f"window start {t_start} must precede end {t_end}")
    if t_start < sequence.origin:
        raise ContractViolationError(
            f"window start {t_start} precedes the sequence origin {sequence.origin}"
        )
    prev_time, prev_c = sequence.state_at(t_start)
    new = sequence.events_in(t_start, t_end)
    has_indicators = any(c is not None for _, c in new)
    if has_indicators and indicator_transition is None:
        raise ContractViolationError("events carry indicators but no transition matrix given")
    logp = 0.0
    t_last, c_last = prev_time, prev_c
    for time, c in new:
        logp += prior.gap_log_pdf(time - t_last)
        if c is not None:
            if c_last is None:
                raise ContractViolationError("indicator event follows an unindicated history")
            logp += math.log(indicator_transition[c_last, c])
        t_last, c_last = time, c
    logp += math.log(survival(prior, t_end, t_last))
    logp -= math.log(survival(prior, t_start, prev_time))
    return logp


def sample_indicator(
    transition: np.ndarray, c_prev: int, rng: np.random.Generator
) -> int:
    """Draw the next hypothesis indicator from a row-stochastic matrix.

    Accepts either the matrix itself or any object exposing it as a
    ``transition`` attribute.
    """
    T = np.asarray(getattr(transition, "transition", transition), dtype=float)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ContractViolationError(f"transition matrix must be square, got {T.shape}")
    if not 0 <= c_prev < T.shape[0]:
        raise ContractViolationError(f"indicator {c_prev} outside 0..{T.shape[0] - 1}")
    row = T[c_prev]
    if abs(row.sum() - 1.0) > 1e-9 or np.any(row < 0.0):
        raise ContractViolationError(f"row {c_prev} is not a probability vector")
    return int(rng.choice(T.shape[0], p=row))
