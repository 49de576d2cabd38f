"""Monte Carlo engine: uniform directions from normalized Gaussian vectors."""
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from dualvol.core.starset import StarSet
from dualvol.utils.logging import get_logger

CHUNK_SIZE = 65_536

logger = get_logger("dmv.engine.mc")


def sample_directions(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """``count`` uniform points of S^{dim-1}."""
    points = rng.standard_normal((count, dim))
    norms = np.linalg.norm(points, axis=1)
    # a zero vector has probability zero; redraw just in case
    while np.any(norms == 0.0):
        bad = norms == 0.0
        points[bad] = rng.standard_normal((int(bad.sum()), dim))
        norms = np.linalg.norm(points, axis=1)
    return points / norms[:, None]


def product_samples(bodies: Sequence[StarSet], samples: int, seed: int) -> np.ndarray:
    """Products ``Π ρ_i(u_j)`` at ``samples`` uniform directions.

    Sampling runs in fixed-size chunks from one generator, so the stream depends
    only on ``seed``.
    """
    dim = bodies[0].dim
    rng = np.random.default_rng(seed)
    out = np.empty(samples, dtype=float)
    for start in range(0, samples, CHUNK_SIZE):
        count = min(CHUNK_SIZE, samples - start)
        points = sample_directions(rng, count, dim)
        product = np.ones(count, dtype=float)
        for body in bodies:
            product *= body.rho.evaluate_many(points)
        out[start:start + count] = product
    return out


def mean_and_stderr(values: np.ndarray) -> Tuple[float, float]:
    """Sample mean and its standard error (two-pass, compensated)."""
    count = len(values)
    data = np.asarray(values, dtype=float).tolist()
    mean = math.fsum(data) / count
    if count and np.ptp(values) == 0.0:
        return float(values[0]), 0.0
    if count < 2:
        return mean, math.inf
    variance = math.fsum((x - mean) ** 2 for x in data) / (count - 1)
    return mean, math.sqrt(variance / count)


def prefix_sizes(samples: int, start: int = 100) -> List[int]:
    """Geometric sample sizes ``start, 10·start, …`` up to and ending at ``samples``."""
    sizes = []
    size = start
    while size < samples:
        sizes.append(size)
        size *= 10
    sizes.append(samples)
    return sizes


def convergence_series(
    bodies: Sequence[StarSet],
    samples: int,
    seed: int,
    scale: float,
    sizes: Optional[Sequence[int]] = None
) -> List[Tuple[int, float, float]]:
    """Estimates ``scale · mean`` with standard errors at growing prefixes of one stream."""
    products = product_samples(bodies, samples, seed)
    series = []
    for size in sizes or prefix_sizes(samples):
        mean, stderr = mean_and_stderr(products[:size])
        series.append((size, scale * mean, scale * stderr))
        logger.debug(f"MC prefix {size}: {scale * mean:.6g} ± {scale * stderr:.3g}")
    return series
