"""Generalized Brownian motion paths and PWZ stochastic integrals.

A path is kept in two parts: a centered Gaussian part sampled on the grid
(the "noise", with independent increments of variance b(t_j) - b(t_{j-1}))
and a Cameron-Martin shift, which is the drift element unless the path has
been translated. x(t_i) is their sum. The PWZ integral (w, x)~ is the
left-endpoint Stieltjes sum over the noise plus (w, shift)_{C'}.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .cmspace import CMElement, _same_space, drift_of, inner_cm, pair_drift
from .exceptions import DomainError, InvalidFunctionError
from .timefns import SpaceConfig

# paths held in memory at once
CHUNK = 4096


@dataclass(frozen=True)
class RngStream:
    """Keyed randomness: path i draws from SeedSequence(seed, (stream_id, i))."""

    seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        if self.seed < 0 or self.stream_id < 0:
            raise DomainError(
                "seed and stream_id must be non-negative",
                details={"seed": self.seed, "stream_id": self.stream_id},
            )

    def generator(self, path_index: int) -> np.random.Generator:
        sequence = np.random.SeedSequence(
            self.seed, spawn_key=(self.stream_id, path_index)
        )
        return np.random.Generator(np.random.PCG64(sequence))

    def sibling(self, offset: int = 1) -> RngStream:
        return RngStream(self.seed, self.stream_id + offset)


@dataclass(frozen=True, eq=False)
class PathBatch:
    """Paths ``start .. start+count-1`` of one stream, rows of ``noise``."""

    noise: np.ndarray
    shift: CMElement
    cfg: SpaceConfig
    start: int = 0

    @property
    def count(self) -> int:
        return int(self.noise.shape[0])

    @cached_property
    def increments(self) -> np.ndarray:
        return np.diff(self.noise, axis=1)

    @cached_property
    def values(self) -> np.ndarray:
        return self.noise + self.shift.path()[None, :]

    def mirrored(self) -> PathBatch:
        """The antithetic batch 2·mean - x, sharing the shift."""
        return PathBatch(-self.noise, self.shift, self.cfg, self.start)

    def scaled(self, rho: float) -> PathBatch:
        return PathBatch(rho * self.noise, rho * self.shift, self.cfg, self.start)

    def translated(self, g: CMElement) -> PathBatch:
        return PathBatch(self.noise, self.shift + g, self.cfg, self.start)

    def row(self, i: int) -> PathSample:
        return PathSample(self.noise[i], self.shift, self.cfg)


@dataclass(frozen=True, eq=False)
class PathSample:
    noise: np.ndarray
    shift: CMElement
    cfg: SpaceConfig

    @classmethod
    def zero(cls, cfg: SpaceConfig) -> PathSample:
        """The path x ≡ 0."""
        return cls(np.zeros_like(cfg.nodes), CMElement.zero(cfg), cfg)

    @classmethod
    def from_element(cls, g: CMElement) -> PathSample:
        """The deterministic path t ↦ g(t)."""
        return cls(np.zeros_like(g.cfg.nodes), g, g.cfg)

    @classmethod
    def from_values(cls, values: np.ndarray, cfg: SpaceConfig) -> PathSample:
        """A path given only by its grid values (no Cameron-Martin part)."""
        values = np.asarray(values, dtype=float)
        if values.shape != cfg.nodes.shape or values[0] != 0.0:
            raise DomainError(
                "path values must cover the grid and start at 0",
                details={"shape": values.shape},
            )
        return cls(values, CMElement.zero(cfg), cfg)

    @cached_property
    def values(self) -> np.ndarray:
        return self.noise + self.shift.path()

    def scaled(self, rho: float) -> PathSample:
        return PathSample(rho * self.noise, rho * self.shift, self.cfg)

    def translated(self, g: CMElement) -> PathSample:
        """x + g for a Cameron-Martin element g."""
        return PathSample(self.noise, self.shift + g, self.cfg)


def _increment_std(cfg: SpaceConfig) -> np.ndarray:
    db = np.diff(cfg.b_values)
    if np.any(db <= 0):
        j = int(np.flatnonzero(db <= 0)[0])
        raise InvalidFunctionError(
            f"b is not strictly increasing on the grid near node {j + 1}",
            details={"node": j + 1, "t": float(cfg.nodes[j + 1])},
        )
    return np.sqrt(db)


def sample_batch(
    cfg: SpaceConfig, start: int, count: int, rng: RngStream
) -> PathBatch:
    """Sample paths ``start .. start+count-1`` of the stream."""
    std = _increment_std(cfg)
    noise = np.zeros((count, cfg.N + 1))
    for row in range(count):
        draws = rng.generator(start + row).standard_normal(cfg.N)
        noise[row, 1:] = np.cumsum(draws * std)
    return PathBatch(noise, drift_of(cfg), cfg, start)


def sample_paths(cfg: SpaceConfig, count: int, rng: RngStream) -> list[PathSample]:
    """Independent paths with mean a(t) and covariance min{b(s), b(t)}."""
    if count < 1:
        raise DomainError("count must be at least 1", details={"count": count})
    batch = sample_batch(cfg, 0, count, rng)
    return [batch.row(i) for i in range(count)]


def _noise_sum(w: CMElement, increments: np.ndarray) -> np.ndarray | float:
    total = np.zeros(increments.shape[:-1])
    for s, z in w.pieces:
        total = total + increments[..., :s] @ z[:s]
    return total if total.ndim else float(total)


def pwz_noise(w: CMElement, x: PathSample | PathBatch) -> float | np.ndarray:
    """(w, x)~ - (w, shift)_{C'}: the Stieltjes sum over the Gaussian part."""
    _same_space(w.cfg, x.cfg)
    increments = x.increments if isinstance(x, PathBatch) else np.diff(x.noise)
    return _noise_sum(w, increments)


def pwz(w: CMElement, x: PathSample | PathBatch) -> float | np.ndarray:
    """The PWZ integral (w, x)~; a vector of values for a batch.

    Only the Gaussian part of x goes through the left-endpoint Stieltjes sum
    Σ z(t_j)(x(t_{j+1}) - x(t_j)). The Cameron-Martin shift g (the drift,
    plus any translation) is paired exactly as (w, g)_{C'}, which equals
    (w, g)~ for g in C'_{a,b}. A plain Stieltjes sum over the full path
    would differ from this by the quadrature error of that pairing.
    """
    return pwz_noise(w, x) + inner_cm(w, x.shift)


def scale(x: PathSample, rho: float) -> PathSample:
    return x.scaled(rho)


@dataclass
class MomentCheck:
    name: str
    estimate: float
    target: float
    stderr: float

    @property
    def z_score(self) -> float:
        diff = self.estimate - self.target
        if self.stderr == 0.0:
            return 0.0 if abs(diff) <= 1e-12 else float("inf")
        return diff / self.stderr


@dataclass
class PwzMomentReport:
    count: int
    checks: list[MomentCheck]
    skewness: float
    excess_kurtosis: float

    def check(self, name: str) -> MomentCheck:
        return next(c for c in self.checks if c.name == name)

    def within(self, sigmas: float = 4.0) -> bool:
        return all(abs(c.z_score) <= sigmas for c in self.checks)

    def looks_gaussian(self, sigmas: float = 4.0) -> bool:
        """Skewness and excess kurtosis within their large-sample standard errors."""
        n = float(self.count)
        skew_ok = abs(self.skewness) < sigmas * math.sqrt(6.0 / n)
        kurt_ok = abs(self.excess_kurtosis) < sigmas * math.sqrt(24.0 / n)
        return skew_ok and kurt_ok


def pwz_moments(
    w: CMElement,
    u: CMElement,
    cfg: SpaceConfig,
    count: int,
    rng: RngStream,
) -> PwzMomentReport:
    """Sample moments of (w, x)~ and (u, x)~ against their closed forms."""
    if count < 1000:
        raise DomainError("moment checks need at least 1000 paths", {"count": count})
    sw = np.empty(count)
    su = np.empty(count)
    for start in range(0, count, CHUNK):
        batch = sample_batch(cfg, start, min(CHUNK, count - start), rng)
        sw[start : start + batch.count] = pwz(w, batch)
        su[start : start + batch.count] = pwz(u, batch)
    n = float(count)

    mean = float(np.mean(sw))
    var = float(np.var(sw, ddof=1))
    centered = sw - mean
    m4 = float(np.mean(centered**4))
    cross = sw * su

    mean_target = pair_drift(w)
    var_target = inner_cm(w, w)
    cross_target = inner_cm(w, u) + pair_drift(w) * pair_drift(u)

    checks = [
        MomentCheck("mean", mean, mean_target, float(np.sqrt(var / n))),
        MomentCheck(
            "variance", var, var_target, float(np.sqrt(max(m4 - var**2, 0.0) / n))
        ),
        MomentCheck(
            "cross",
            float(np.mean(cross)),
            cross_target,
            float(np.std(cross, ddof=1) / np.sqrt(n)),
        ),
    ]

    if var > 0:
        std = np.sqrt(var)
        skew = float(np.mean((centered / std) ** 3))
        kurt = float(np.mean((centered / std) ** 4) - 3.0)
    else:
        skew = kurt = 0.0
    return PwzMomentReport(count, checks, skew, kurt)


def stack_rows(paths: Sequence[PathSample]) -> np.ndarray:
    """Grid values of several paths as a (count, N+1) array."""
    return np.vstack([p.values for p in paths])
