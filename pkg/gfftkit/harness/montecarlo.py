"""Monte-Carlo expectations over pairs of generalized Brownian paths.

Batches are path-index ranges fanned out to worker threads. Randomness is
keyed by (seed, stream, path index), so an estimate does not depend on
batch size or on how many workers ran.
"""

from __future__ import annotations

import asyncio
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from ..config.manager import worker_cap
from ..core.exceptions import DomainError, InvalidFunctionError
from ..core.gbm import CHUNK, PathBatch, RngStream, sample_batch
from ..core.logging import get_logger
from ..core.timefns import SpaceConfig

logger = get_logger("montecarlo")

BatchIntegrand = Callable[[PathBatch, PathBatch], np.ndarray]

MIN_SAMPLES = 100


@dataclass(frozen=True)
class MCEstimate:
    """Mean of a complex integrand; stderr is the larger of the re/im errors."""

    mean: complex
    stderr: float
    n: int
    seed: int

    def __sub__(self, other: MCEstimate) -> complex:
        return self.mean - other.mean


def _estimate(values: np.ndarray, seed: int) -> MCEstimate:
    n = values.size
    mean = complex(np.mean(values))
    spread = max(float(np.std(values.real, ddof=1)), float(np.std(values.imag, ddof=1)))
    return MCEstimate(mean, spread / float(np.sqrt(n)), n, seed)


def _evaluate_batch(
    integrands: Sequence[BatchIntegrand],
    cfg: SpaceConfig,
    start: int,
    count: int,
    rng: RngStream,
    antithetic: bool,
) -> list[np.ndarray]:
    x1 = sample_batch(cfg, start, count, rng)
    x2 = sample_batch(cfg, start, count, rng.sibling())
    out = []
    for integrand in integrands:
        values = np.asarray(integrand(x1, x2), dtype=complex)
        if antithetic:
            mirrored = np.asarray(
                integrand(x1.mirrored(), x2.mirrored()), dtype=complex
            )
            values = 0.5 * (values + mirrored)
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            index = start + int(bad[0])
            raise InvalidFunctionError(
                f"integrand is not finite on path {index}",
                details={"path_index": index},
            )
        out.append(np.broadcast_to(values, (count,)))
    return out


async def _run_batches(
    integrands: Sequence[BatchIntegrand],
    cfg: SpaceConfig,
    n: int,
    rng: RngStream,
    batch_size: int,
    antithetic: bool,
    workers: int,
) -> list[list[np.ndarray]]:
    semaphore = asyncio.Semaphore(workers)

    async def run(start: int, count: int) -> list[np.ndarray]:
        async with semaphore:
            return await asyncio.to_thread(
                _evaluate_batch, integrands, cfg, start, count, rng, antithetic
            )

    tasks = [
        run(start, min(batch_size, n - start)) for start in range(0, n, batch_size)
    ]
    return await asyncio.gather(*tasks)


def mc_expectations(
    integrands: Sequence[BatchIntegrand],
    cfg: SpaceConfig,
    n: int,
    rng: RngStream,
    *,
    antithetic: bool = False,
    batch_size: int = CHUNK,
    workers: int | None = None,
) -> list[MCEstimate]:
    """Estimate several expectations on the same path pairs.

    x1 is drawn from ``rng`` and x2 from ``rng.sibling()``. With
    ``antithetic`` each sample is the average over (x, 2a - x).
    """
    if n < MIN_SAMPLES:
        raise DomainError(
            f"Monte-Carlo needs at least {MIN_SAMPLES} samples", details={"n": n}
        )
    workers = workers or worker_cap()
    started = time.perf_counter()
    batches = asyncio.run(
        _run_batches(integrands, cfg, n, rng, batch_size, antithetic, workers)
    )
    estimates = [
        _estimate(np.concatenate([b[i] for b in batches]), rng.seed)
        for i in range(len(integrands))
    ]
    logger.info(
        "Monte-Carlo run finished",
        samples=n,
        batches=len(batches),
        workers=workers,
        integrands=len(integrands),
        antithetic=antithetic,
        seconds=round(time.perf_counter() - started, 3),
    )
    return estimates


def mc_expectation(
    integrand: BatchIntegrand,
    cfg: SpaceConfig,
    n: int,
    rng: RngStream,
    *,
    antithetic: bool = False,
    batch_size: int = CHUNK,
    workers: int | None = None,
) -> MCEstimate:
    """E[integrand(x1, x2)] over i.i.d. path pairs."""
    return mc_expectations(
        [integrand],
        cfg,
        n,
        rng,
        antithetic=antithetic,
        batch_size=batch_size,
        workers=workers,
    )[0]
