"""JSON problem files.

Example::

    {
      "dim": 1, "n": 199,
      "walls": {"kind": "constant", "values": [-0.5, 0.5]},
      "drift": {"kind": "zero"},
      "sigma": {"kind": "linear", "params": {"a": 0.1, "b": 0.05}},
      "v": {"kind": "expression", "values": "4*x*(1-x)"},
      "penalty": {"epsilon0": 0.01, "rho": 0.25, "stages": 8},
      "tol": 1e-9,
      "seed": 12345,
      "picard": {"max_iter": 50, "tol": 1e-8}
    }

Every missing key takes its default and :meth:`ProblemSpec.to_dict` echoes
the effective specification, so a run can be reproduced from its output.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .coefficients import CoefficientPair, Diffusion, Drift
from .expr import diffusion_from_expression, drift_from_expression, spatial_function
from .grid import Grid, build_grid
from .obstacle import PenaltyParams, WallPair


class SpecError(ValueError):
    """Malformed or inconsistent problem file."""


DEFAULTS = {
    "dim": 1,
    "n": 99,
    "walls": {"kind": "constant", "values": [-0.5, 0.5]},
    "drift": {"kind": "zero", "params": {}},
    "sigma": {"kind": "zero", "params": {}},
    "v": {"kind": "zero", "values": None},
    "penalty": {"epsilon0": 1e-2, "rho": 0.25, "stages": 8, "delta_ratio": 1e-2},
    "tol": 1e-9,
    "seed": 0,
    "picard": {"max_iter": 50, "tol": 1e-8},
}

_NESTED_KEYS = {
    "walls": {"kind", "values"},
    "drift": {"kind", "params"},
    "sigma": {"kind", "params"},
    "v": {"kind", "values"},
    "penalty": {"epsilon0", "rho", "stages", "delta_ratio"},
    "picard": {"max_iter", "tol"},
}


def _merge(raw):
    if not isinstance(raw, dict):
        raise SpecError("problem specification must be a JSON object")
    unknown = set(raw) - set(DEFAULTS)
    if unknown:
        raise SpecError(f"unknown keys: {sorted(unknown)}")
    out = copy.deepcopy(DEFAULTS)
    for key, val in raw.items():
        if key in _NESTED_KEYS:
            if not isinstance(val, dict):
                raise SpecError(f"'{key}' must be an object")
            bad = set(val) - _NESTED_KEYS[key]
            if bad:
                raise SpecError(f"unknown keys in '{key}': {sorted(bad)}")
            if "kind" in val and val["kind"] != out[key].get("kind"):
                # a new kind brings its own params/values
                out[key] = {k: v for k, v in out[key].items() if k == "kind"}
            out[key].update(copy.deepcopy(val))
        else:
            out[key] = val
    return out


def _v_from_file(path, grid):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows and "v" in rows[0]:
        col = rows[0].index("v")
        vals = [float(r[col]) for r in rows[1:]]
    else:
        vals = [float(r[-1]) for r in rows if r]
    return grid.check(np.array(vals), "v from file")


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Validated problem description; cheap to pickle (holds only plain data)."""

    data: dict

    def __eq__(self, other):
        return isinstance(other, ProblemSpec) and self.hash() == other.hash()

    def __hash__(self):
        return hash(self.hash())

    @classmethod
    def from_dict(cls, raw) -> "ProblemSpec":
        spec = cls(_merge(raw))
        spec.validate()
        return spec

    @classmethod
    def from_file(cls, path) -> "ProblemSpec":
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise SpecError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(raw)

    def with_overrides(self, **kw) -> "ProblemSpec":
        d = copy.deepcopy(self.data)
        for key, val in kw.items():
            if val is None:
                continue
            if "." in key:
                outer, inner = key.split(".", 1)
                d[outer][inner] = val
            else:
                d[key] = val
        return ProblemSpec.from_dict(d)

    def to_dict(self) -> dict:
        return copy.deepcopy(self.data)

    def hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]

    def canonical_json(self) -> str:
        return json.dumps(self.data, sort_keys=True, separators=(",", ":"))

    def validate(self):
        d = self.data
        try:
            int(d["dim"]), int(d["n"]), float(d["tol"]), int(d["seed"])
        except (TypeError, ValueError) as exc:
            raise SpecError(f"bad scalar setting: {exc}") from None
        for key, kinds in (("walls", {"constant", "expression"}),
                           ("drift", {"zero", "linear", "cubic", "expression"}),
                           ("sigma", {"zero", "constant", "linear", "expression"}),
                           ("v", {"zero", "expression", "file"})):
            if d[key].get("kind") not in kinds:
                raise SpecError(f"{key}.kind must be one of {sorted(kinds)}, got {d[key].get('kind')!r}")
        if len(d["walls"].get("values") or []) != 2:
            raise SpecError("walls.values must hold [lower, upper]")

    # building blocks

    @cached_property
    def grid(self) -> Grid:
        return build_grid(self.data["dim"], self.data["n"])

    def walls(self) -> WallPair:
        w = self.data["walls"]
        lo, hi = w["values"]
        if w["kind"] == "constant":
            return WallPair.constant(self.grid, float(lo), float(hi))
        return WallPair.from_functions(self.grid, spatial_function(str(lo)), spatial_function(str(hi)))

    def drift(self) -> Drift:
        d = self.data["drift"]
        p = d.get("params") or {}
        kind = d["kind"]
        if kind == "zero":
            return Drift.zero()
        if kind == "linear":
            return Drift.linear(float(p.get("c0", 0.0)), float(p.get("c1", 0.0)))
        if kind == "cubic":
            return Drift.cubic(float(p.get("c0", 0.0)), float(p.get("c1", 0.0)), float(p.get("c3", 0.0)))
        return drift_from_expression(str(p["expr"]), self.grid.k)

    def sigma(self) -> Diffusion:
        d = self.data["sigma"]
        p = d.get("params") or {}
        kind = d["kind"]
        if kind == "zero":
            return Diffusion.zero()
        if kind == "constant":
            return Diffusion.constant(float(p.get("c", 1.0)))
        if kind == "linear":
            return Diffusion.linear(float(p.get("a", 0.0)), float(p.get("b", 0.0)))
        if "lipschitz" not in p:
            raise SpecError("sigma expressions need a declared 'lipschitz' constant")
        return diffusion_from_expression(str(p["expr"]), float(p["lipschitz"]), self.grid.k)

    def coefficients(self) -> CoefficientPair:
        return CoefficientPair(self.drift(), self.sigma(), k=self.grid.k)

    def v(self) -> np.ndarray:
        d = self.data["v"]
        if d["kind"] == "zero":
            return np.zeros(self.grid.size)
        if d["kind"] == "expression":
            fn = spatial_function(str(d["values"]))
            return self.grid.check(np.broadcast_to(fn(self.grid.points), (self.grid.size,)), "v")
        return _v_from_file(d["values"], self.grid)

    def penalty(self) -> PenaltyParams:
        p = self.data["penalty"]
        eps = float(p["epsilon0"])
        ratio = float(p.get("delta_ratio", 1e-2))
        return PenaltyParams(epsilon=eps, delta=eps * ratio, rho=float(p["rho"]),
                             stages=int(p["stages"]), delta_ratio=ratio)
