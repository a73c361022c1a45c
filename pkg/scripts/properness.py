"""Sample L_d along rays in Fenchel-Nielsen coordinates starting at the holonomy of a fixture."""

import argparse
import json
from dataclasses import dataclass, field

import numpy as np

from alexandrov_lorentz.fixtures import fixture_hulls
from alexandrov_lorentz.hull import induced_metric
from alexandrov_lorentz.realize import length_along_ray


@dataclass
class Config:
    seed: int = 0
    n: int = 2
    coords: list = field(default_factory=lambda: [0, 3])   # which FN coordinate each ray moves
    sign: float = 1.0
    steps: list = field(default_factory=lambda: [0.0, 0.5, 1.0, 1.5, 2.0])


NAMES = ["l1", "l2", "l3", "t1", "t2", "t3"]


def main(cfg: Config):
    fx = fixture_hulls(1, seed=cfg.seed, n_min=cfg.n, n_max=cfg.n)[0]
    p, d = fx.spacetime, induced_metric(fx.surface)
    for k in cfg.coords:
        e = np.zeros(6)
        e[k] = cfg.sign
        L = length_along_ray(d, p.hol.coords, e, cfg.steps, p)
        print(json.dumps({"ray": NAMES[k], "sign": cfg.sign, "steps": cfg.steps, "L": L.tolist(),
                          "increasing_tail": bool(np.all(np.diff(L[-3:]) > 0))}))


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--coords", type=int, nargs="+", default=[0, 3])
    ap.add_argument("--sign", type=float, default=1.0)
    ap.add_argument("--steps", type=float, nargs="+", default=[0.0, 0.5, 1.0, 1.5, 2.0])
    main(Config(**vars(ap.parse_args())))
