"""Central numerical settings: tolerances, sampling defaults, admissibility limits.

Every residual threshold used by library checks is read from a
:class:`Tolerances` record so that a scenario file, an environment variable or
a CLI flag can override them in one place.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

ENV_SEED = "LIEFINSLER_SEED"
ENV_TOL = "LIEFINSLER_TOL"


@dataclass(frozen=True)
class Tolerances:
    """Residual thresholds.

    ``identity_abs`` / ``identity_rel`` gate every identity check:
    a residual ``r`` against a reference magnitude ``s`` passes when
    ``r <= identity_abs + identity_rel * s``.
    """

    identity_abs: float = 1e-9
    identity_rel: float = 1e-9
    fd_rel: float = 1e-5
    antisymmetry_load: float = 1e-12
    max_condition: float = 1e12
    det_rel: float = 1e-10

    def with_identity(self, tol: float) -> "Tolerances":
        return replace(self, identity_abs=tol, identity_rel=tol)


@dataclass(frozen=True)
class Sampling:
    """Seeded sampling box for base points and fiber vectors."""

    seed: int = 42
    points: int = 8
    box: tuple[float, float] = (-1.0, 1.0)
    y_norm: tuple[float, float] = (0.5, 2.0)
    min_y_norm: float = 0.1


@dataclass(frozen=True)
class Settings:
    tol: Tolerances = field(default_factory=Tolerances)
    sampling: Sampling = field(default_factory=Sampling)


DEFAULT = Settings()


def env_overrides(settings: Settings = DEFAULT) -> Settings:
    """Apply ``LIEFINSLER_SEED`` / ``LIEFINSLER_TOL`` if set."""
    out = settings
    seed = os.environ.get(ENV_SEED)
    if seed:
        out = replace(out, sampling=replace(out.sampling, seed=int(seed)))
    tol = os.environ.get(ENV_TOL)
    if tol:
        out = replace(out, tol=out.tol.with_identity(float(tol)))
    return out
