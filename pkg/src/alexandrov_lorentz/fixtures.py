"""Seeded fixture sets of certified hulls shared by tests, checks and scripts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import HullConfig
from .errors import DegenerateConfiguration, NonSpacelikeFace, UncertifiedHull
from .hull import MarkedSpacetime, PolyhedralSurface, future_hull, random_spacetime

# word radius of the certificate stays within 8
FIXTURE_HULL = HullConfig(word_radius=8, ball_radius=7.0, max_word_radius=8)


@dataclass
class Fixture:
    seed: int
    index: int
    spacetime: MarkedSpacetime
    surface: PolyhedralSurface


def fixture_hulls(count: int = 20, seed: int = 0, n_max: int = 4, genus: int = 2, n_min: int = 1,
                  cfg: HullConfig = FIXTURE_HULL, max_attempts: int | None = None) -> list[Fixture]:
    """Certified random hulls; configurations that are degenerate or fail to certify are skipped."""
    rng = np.random.default_rng(seed)
    out = []
    attempts = 0
    max_attempts = max_attempts or 5 * count
    while len(out) < count:
        attempts += 1
        if attempts > max_attempts:
            raise RuntimeError(f"only {len(out)} certified fixtures in {max_attempts} attempts")
        n = int(rng.integers(n_min, n_max + 1))
        p = random_spacetime(rng, genus, n)
        try:
            surf, _ = future_hull(p, cfg=cfg)
        except (DegenerateConfiguration, NonSpacelikeFace, UncertifiedHull):
            continue
        out.append(Fixture(seed, attempts - 1, surf.spacetime, surf))
    return out


def perturbed(p: MarkedSpacetime, rng, eps: float = 1e-3) -> MarkedSpacetime:
    from .surface_group import Cocycle
    return MarkedSpacetime(p.hol, p.tau + Cocycle(eps * rng.standard_normal(p.tau.values.shape)),
                           p.lifts + eps * rng.standard_normal(p.lifts.shape), p.labels)
