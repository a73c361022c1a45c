"""JSON file formats: holonomy, cocycle, metric, spacetime, cellulation."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InvalidMetric
from .flat_metric import FlatConeMetric
from .hull import MarkedSpacetime
from .surface_group import (Cocycle, Holonomy, TeichCoords, build_holonomy, gen_index,
                            holonomy_from_matrices, octagon_holonomy)


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, repr-exact floats)."""
    return json.dumps(_plain(obj), sort_keys=True, indent=1) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj))


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, float) and not np.isfinite(x):
        return str(x)
    return x


def holonomy_from_dict(d: dict) -> Holonomy:
    """FN coordinates; also accepts {"preset": "octagon"} or explicit "generators" matrices."""
    if d.get("preset") == "octagon":
        return octagon_holonomy()
    if "fn_lengths" in d:
        return build_holonomy(TeichCoords(int(d["genus"]), tuple(d["fn_lengths"]), tuple(d["fn_twists"])))
    if "generators" in d:
        gens = d["generators"]
        mats = [None] * len(gens)
        for name, m in gens.items():
            mats[gen_index(name) - 1] = np.array(m, dtype=float)
        return holonomy_from_matrices(mats, int(d["genus"]))
    raise InvalidMetric("holonomy file needs fn_lengths/fn_twists, generators or a preset")


def holonomy_to_dict(hol: Holonomy) -> dict:
    return hol.to_dict()


def load_holonomy(path) -> Holonomy:
    return holonomy_from_dict(read_json(path))


def load_metric(path) -> FlatConeMetric:
    return FlatConeMetric.from_dict(read_json(path))


def load_cocycle(path) -> Cocycle:
    return Cocycle.from_dict(read_json(path))


def spacetime_to_dict(p: MarkedSpacetime) -> dict:
    return {"genus": p.genus, "labels": list(p.labels), "lifts": p.lifts.tolist(),
            "tau": p.tau.to_dict()["values"], "holonomy": p.hol.to_dict()}


def spacetime_from_dict(d: dict, hol: Holonomy | None = None) -> MarkedSpacetime:
    hol = hol or holonomy_from_dict(d["holonomy"])
    return MarkedSpacetime(hol, Cocycle.from_dict({"values": d["tau"]}), d["lifts"], tuple(d["labels"]))
