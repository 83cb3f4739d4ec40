"""Two-sided Wiener paths: generation, shifting, evaluation, exponential integrals.

A path is realized once on a uniform grid containing t = 0 and is immutable
afterwards.  All randomness comes from a counter-based Philox generator so a
path is a pure function of (seed, t_min, t_max, dt_path).
"""
from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

__all__ = [
    "SamplePath",
    "ShiftedView",
    "FrozenPath",
    "PathRangeError",
    "generate_path",
    "evaluate",
    "shift",
    "tempered_integral",
    "TemperedIntegral",
    "path_to_csv",
]


class PathRangeError(ValueError):
    """Requested time lies outside the realized path (never extrapolate)."""


# fraction of dt_path within which t is snapped to a grid node (bit-exact value)
_NODE_SNAP = 1e-9
_MAX_NODES = 200_000_000


@dataclass(frozen=True)
class SamplePath:
    """Discrete Brownian path on t_min + i*dt_path with omega(0) = 0 exactly."""

    t_min: float
    t_max: float
    dt_path: float
    values: np.ndarray
    seed: int

    @property
    def t_lo(self) -> float:
        return self.t_min

    @property
    def t_hi(self) -> float:
        return self.t_max

    def node_times(self) -> np.ndarray:
        return self.t_min + self.dt_path * np.arange(len(self.values))

    def evaluate(self, t: float) -> float:
        pos = (t - self.t_min) / self.dt_path
        i = int(round(pos))
        if abs(pos - i) <= _NODE_SNAP and 0 <= i < len(self.values):
            return float(self.values[i])
        if pos < 0.0 or pos > len(self.values) - 1:
            raise PathRangeError(
                f"t={t} outside path range [{self.t_min}, {self.t_max}]")
        j = int(math.floor(pos))
        theta = pos - j
        return float((1.0 - theta) * self.values[j] + theta * self.values[j + 1])

    def evaluate_many(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        lo, hi = ts.min(), ts.max()
        if lo < self.t_min - _NODE_SNAP * self.dt_path or hi > self.t_max + _NODE_SNAP * self.dt_path:
            raise PathRangeError(
                f"times [{lo}, {hi}] outside path range [{self.t_min}, {self.t_max}]")
        return np.interp(ts, self.node_times(), self.values)

    def abs_max(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class ShiftedView:
    """View of a base path under the Wiener shift: theta_s omega(t) = omega(t+s) - omega(s)."""

    base: Union[SamplePath, "FrozenPath"]
    shift_s: float

    def __post_init__(self):
        object.__setattr__(self, "_base_at_s", self.base.evaluate(self.shift_s))

    @property
    def t_lo(self) -> float:
        return self.base.t_lo - self.shift_s

    @property
    def t_hi(self) -> float:
        return self.base.t_hi - self.shift_s

    @property
    def dt_path(self) -> float:
        return self.base.dt_path

    def evaluate(self, t: float) -> float:
        return self.base.evaluate(t + self.shift_s) - self._base_at_s

    def evaluate_many(self, ts: np.ndarray) -> np.ndarray:
        return self.base.evaluate_many(np.asarray(ts, dtype=float) + self.shift_s) - self._base_at_s

    def abs_max(self) -> float:
        return self.base.abs_max() + abs(self._base_at_s)


@dataclass(frozen=True)
class FrozenPath:
    """Deterministic substitute path (e.g. omega(t) = sin t) for smooth-oracle runs."""

    fn: Callable[[float], float]
    t_lo: float = -math.inf
    t_hi: float = math.inf
    dt_path: float = 0.0  # no grid: evaluation is exact

    def __post_init__(self):
        if abs(self.fn(0.0)) > 1e-12:
            raise ValueError("frozen path must satisfy omega(0) = 0")

    def evaluate(self, t: float) -> float:
        if t < self.t_lo or t > self.t_hi:
            raise PathRangeError(f"t={t} outside frozen path range")
        return float(self.fn(t))

    def evaluate_many(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        return np.array([self.evaluate(float(t)) for t in ts])

    def abs_max(self) -> float:
        raise NotImplementedError("frozen paths carry no sampled maximum")


PathLike = Union[SamplePath, ShiftedView, FrozenPath]


def generate_path(seed: int, t_min: float, t_max: float, dt_path: float) -> SamplePath:
    """Sample a two-sided Wiener path on a uniform grid containing t = 0.

    The positive branch is a cumulative sum of N(0, dt) increments; the
    negative branch is walked leftward from 0 with an independent increment
    stream (a jumped Philox state), so the path is two-sided with omega(0) = 0.
    """
    if dt_path <= 0.0:
        raise ValueError("dt_path must be positive")
    if not (t_min <= 0.0 <= t_max):
        raise ValueError("path range must satisfy t_min <= 0 <= t_max")
    n_neg = int(math.ceil(-t_min / dt_path - _NODE_SNAP))
    n_pos = int(math.ceil(t_max / dt_path - _NODE_SNAP))
    total = n_neg + n_pos + 1
    if total > _MAX_NODES:
        raise MemoryError(f"path grid of {total} nodes exceeds the size limit")

    sd = math.sqrt(dt_path)
    # independent branch streams from fresh generators, so each branch is a
    # pure function of (seed, its own length) regardless of the other range
    inc_pos = np.random.Generator(np.random.Philox(key=int(seed))).normal(0.0, sd, n_pos)
    inc_neg = np.random.Generator(
        np.random.Philox(key=int(seed)).jumped(1)).normal(0.0, sd, n_neg)

    values = np.empty(total)
    values[n_neg] = 0.0
    if n_pos:
        values[n_neg + 1:] = np.cumsum(inc_pos)
    if n_neg:
        # values at -dt, -2 dt, ... stored right-to-left
        values[:n_neg] = np.cumsum(inc_neg)[::-1]
    return SamplePath(
        t_min=-n_neg * dt_path,
        t_max=n_pos * dt_path,
        dt_path=dt_path,
        values=values,
        seed=int(seed),
    )


def evaluate(path: PathLike, t: float) -> float:
    """Piecewise-linear evaluation, exact at grid nodes."""
    return path.evaluate(t)


def shift(path: PathLike, s: float) -> PathLike:
    """Wiener shift theta_s.  Composing shifts flattens to a single view."""
    if isinstance(path, ShiftedView):
        return ShiftedView(base=path.base, shift_s=path.shift_s + s)
    return ShiftedView(base=path, shift_s=s)


TemperedIntegral = namedtuple("TemperedIntegral", ["value", "truncation_tail"])


def tempered_integral(path: PathLike, sigma: float, gamma: float, t_cut: float) -> TemperedIntegral:
    """Trapezoidal value of int_{t_cut}^0 e^{sigma xi} (1 + |w|^2 + |w|^{gamma+1}) dxi.

    The improper lower limit is truncated at t_cut; the reported (not added)
    truncation tail is e^{sigma t_cut} (1 + M^2 + M^{gamma+1}) / sigma with
    M the maximum |omega| over the covered range.
    """
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    if not (1.0 <= gamma <= 3.0):
        raise ValueError("gamma must lie in [1, 3]")
    if t_cut > 0.0:
        raise ValueError("t_cut must be <= 0")
    dt = path.dt_path if path.dt_path > 0.0 else 1e-3
    if t_cut < path.t_lo - _NODE_SNAP * dt:
        raise PathRangeError(f"t_cut={t_cut} below path range start {path.t_lo}")

    n = int(math.ceil(-t_cut / dt - _NODE_SNAP))
    ts = np.concatenate(([t_cut], -dt * np.arange(n - 1, -1, -1))) if n > 0 else np.array([0.0])
    ws = path.evaluate_many(ts)
    integrand = np.exp(sigma * ts) * (1.0 + ws ** 2 + np.abs(ws) ** (gamma + 1.0))
    value = float(np.trapezoid(integrand, ts))

    try:
        m = path.abs_max()
    except NotImplementedError:
        m = float(np.max(np.abs(ws)))
    tail = math.exp(sigma * t_cut) * (1.0 + m ** 2 + m ** (gamma + 1.0)) / sigma
    return TemperedIntegral(value=value, truncation_tail=tail)


def path_to_csv(path: SamplePath, stream, header_lines=()) -> None:
    """Write `t,omega` rows at full double precision (shortest round-trip)."""
    for line in header_lines:
        stream.write(f"# {line}\n")
    stream.write("t,omega\n")
    for t, w in zip(path.node_times(), path.values):
        stream.write(f"{float(t)!r},{float(w)!r}\n")
