"""Tolerance and solver configuration shared across the package."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace


@dataclass(frozen=True)
class Tolerances:
    geom_eps: float = 1e-12
    hpoint_renorm: float = 1e-6
    lorentz_check: float = 1e-10
    relator: float = 1e-9
    balance: float = 1e-8
    coplanar: float = 1e-9
    planarity: float = 1e-9
    delaunay_tie: float = 1e-8
    rank_rel: float = 1e-8

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class HullConfig:
    word_radius: int = 8
    ball_radius: float = 7.0
    max_word_radius: int = 12
    frontier_gap: float = 1.0   # faces must use elements this far inside the ball
    certify: bool = True


@dataclass(frozen=True)
class SolverConfig:
    sol_tol: float = 1e-9
    max_iter: int = 60
    fd_step: float = 1e-7
    max_flips: int = 200
    churn_limit: int = 25
    continuation_steps: int = 8
    damping_min: float = 1e-4
    seed: int = 0
    hull: HullConfig = field(default_factory=HullConfig)

    def with_(self, **kw) -> "SolverConfig":
        return replace(self, **kw)


DEFAULT_TOL = Tolerances()
