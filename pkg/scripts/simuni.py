"""Simultaneous uniformization of a metric with itself, plus gradient and Hessian of L at the root."""

import argparse
import json
import time
from dataclasses import asdict, dataclass

import numpy as np

from alexandrov_lorentz.fixtures import fixture_hulls
from alexandrov_lorentz.hull import induced_metric
from alexandrov_lorentz.realize import length_gradient_hessian, simultaneous_uniformization


@dataclass
class Config:
    seed: int = 0
    n: int = 2
    tol: float = 1e-7
    hessian: bool = True


def main(cfg: Config):
    fx = fixture_hulls(1, seed=cfg.seed, n_min=cfg.n, n_max=cfg.n)[0]
    p, d = fx.spacetime, induced_metric(fx.surface)
    t = time.perf_counter()
    res = simultaneous_uniformization(d, d, p.hol.coords, inits=(p, p), tol=cfg.tol)
    out = {"start": p.hol.coords.to_dict(), "root": res.coords.to_dict(),
           "tau_norm": res.tau_norm, "iterations": res.iterations,
           "history": [h["F"] for h in res.history],
           "jacobian_singular_values": np.linalg.svd(res.jacobian, compute_uv=False).tolist()}
    L, g, H = length_gradient_hessian([d, d], res.coords, [s.spacetime for s in res.solutions],
                                      hessian=cfg.hessian)
    out.update(L_total=L, gradient=g.tolist())
    if H is not None:
        out["hessian_eigenvalues"] = np.linalg.eigvalsh(H).tolist()
    out["seconds"] = round(time.perf_counter() - t, 2)
    print(json.dumps(out, indent=1))


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--tol", type=float, default=1e-7)
    ap.add_argument("--no-hessian", dest="hessian", action="store_false")
    main(Config(**vars(ap.parse_args())))
