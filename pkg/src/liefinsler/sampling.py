"""Seeded sample points: base points in a box, fiber vectors in a norm shell."""

from __future__ import annotations

import numpy as np

from .config import Sampling


def sample_points(m: int, n: int, sampling: Sampling | None = None, count: int | None = None,
                  stream: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(x, y)`` with shapes ``(P, m)`` and ``(P, n)``.

    ``x`` is uniform in ``box^m``; ``y`` has a uniformly random direction and
    a norm uniform in ``y_norm`` (never below ``min_y_norm``).  ``stream``
    derives independent but reproducible sub-streams from the same seed.
    """
    s = sampling or Sampling()
    P = s.points if count is None else count
    rng = np.random.default_rng([s.seed, stream])
    lo, hi = s.box
    x = rng.uniform(lo, hi, size=(P, m))
    direction = rng.normal(size=(P, n))
    norms = np.linalg.norm(direction, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    rlo = max(s.y_norm[0], s.min_y_norm)
    radius = rng.uniform(rlo, max(s.y_norm[1], rlo), size=(P, 1))
    y = direction / norms * radius
    return x, y


def random_coefficients(shape, seed: int, stream: int, scale: float = 1.0) -> np.ndarray:
    """Seeded uniform coefficients in ``[-scale, scale]`` for random test objects."""
    rng = np.random.default_rng([seed, 1000 + stream])
    return rng.uniform(-scale, scale, size=shape)
