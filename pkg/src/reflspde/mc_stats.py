"""Seeded Monte Carlo ensembles of the Picard solver."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from .config import ProblemSpec
from .green import discrete_green
from .noise import derive_seed
from .picard import picard_solve

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnsembleConfig:
    spec: ProblemSpec
    replicates: int
    base_seed: int = 0
    p_list: tuple = (2.0,)
    workers: int = 1

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("need at least one replicate")
        if any(p <= 1 for p in self.p_list):
            raise ValueError("moment exponents must exceed 1")


@dataclass
class ReplicateRecord:
    r: int
    seed: int
    sup_u: float = math.nan
    iterations: int = 0
    converged: bool = False
    sup_diffs: list = field(default_factory=list)
    v_diffs: list = field(default_factory=list)
    error: str | None = None


@dataclass
class EnsembleSummary:
    records: list
    moments: dict
    decay_rate: float | None
    failures: int
    config_hash: str
    base_seed: int

    def ok_records(self):
        return [r for r in self.records if r.error is None]

    def as_dict(self):
        return {
            "config_hash": self.config_hash,
            "base_seed": self.base_seed,
            "replicates": len(self.records),
            "failures": self.failures,
            "moments": {str(p): {"estimate": e, "standard_error": s} for p, (e, s) in self.moments.items()},
            "decay_rate": self.decay_rate,
        }


@lru_cache(maxsize=4)
def _prepared(spec: ProblemSpec):
    # cached per process: kernel construction dominates small replicates
    grid = spec.grid
    return grid, discrete_green(grid), spec.coefficients(), spec.walls(), spec.penalty()


def run_replicate(spec: ProblemSpec, base_seed: int, r: int) -> ReplicateRecord:
    seed = derive_seed(base_seed, r)
    rec = ReplicateRecord(r=r, seed=seed)
    try:
        grid, kernel, coeff, walls, penalty = _prepared(spec)
        pic = spec.data["picard"]
        triplet, diag = picard_solve(grid, kernel, coeff, walls, seed, penalty,
                                     max_iter=int(pic["max_iter"]), tol=float(pic["tol"]))
        rec.sup_u = float(np.max(np.abs(triplet.u)))
        rec.iterations = diag.iterations
        rec.converged = diag.converged
        rec.sup_diffs = diag.sup_diffs
        rec.v_diffs = diag.v_diffs
    except Exception as exc:  # isolate per-replicate failures
        rec.error = f"{type(exc).__name__}: {exc}"
        logger.warning("replicate %d (seed %d) failed: %s", r, seed, rec.error)
    return rec


def _run_chunk(args):
    spec, base_seed, indices = args
    return [run_replicate(spec, base_seed, r) for r in indices]


def estimate_sup_moment(records, p: float):
    """Sample mean of ``‖u‖∞^p`` and its standard error (sample sd with n-1).

    ``records`` may be :class:`ReplicateRecord` objects or plain sup values.
    """
    vals = np.array([r.sup_u if isinstance(r, ReplicateRecord) else r for r in records], dtype=float)
    if vals.size < 2:
        raise ValueError("need at least two records for a moment estimate")
    powered = np.abs(vals) ** p
    return float(np.mean(powered)), float(np.std(powered, ddof=1) / np.sqrt(powered.size))


def geometric_decay_fit(series, return_flag: bool = False):
    """Rate ``exp(slope)`` of a least-squares line through ``log(series)``.

    The series is cut at its first nonpositive entry; ``return_flag`` also
    returns whether that happened.
    """
    s = np.asarray(series, dtype=float)
    bad = np.flatnonzero(~(s > 0))
    truncated = bool(bad.size)
    if truncated:
        s = s[: bad[0]]
    if s.size < 2 or (s.size < 3 and not truncated):
        raise ValueError(f"need at least 3 positive entries, got {s.size}")
    slope = np.polyfit(np.arange(s.size, dtype=float), np.log(s), 1)[0]
    rate = float(np.exp(slope))
    return (rate, truncated) if return_flag else rate


def _mean_stage_series(records):
    depth = max((len(r.sup_diffs) for r in records), default=0)
    out = []
    for i in range(depth):
        vals = [r.sup_diffs[i] for r in records if len(r.sup_diffs) > i]
        out.append(float(np.mean(vals)))
    return out


def run_ensemble(config: EnsembleConfig) -> EnsembleSummary:
    """Run all replicates; the summary depends only on the config, not on the
    worker count or completion order."""
    idx = list(range(config.replicates))
    if config.workers > 1 and config.replicates > 1:
        chunks = [idx[w::config.workers] for w in range(config.workers)]
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            parts = pool.map(_run_chunk, [(config.spec, config.base_seed, c) for c in chunks if c])
            records = [rec for part in parts for rec in part]
    else:
        records = _run_chunk((config.spec, config.base_seed, idx))
    records.sort(key=lambda rec: rec.r)
    ok = [r for r in records if r.error is None]
    failures = len(records) - len(ok)
    if not ok:
        raise RuntimeError(f"all {len(records)} replicates failed; first error: {records[0].error}")
    moments = {}
    for p in config.p_list:
        if len(ok) >= 2:
            moments[float(p)] = estimate_sup_moment(ok, p)
        else:
            moments[float(p)] = (float(abs(ok[0].sup_u) ** p), math.nan)
    decay = None
    # stage 1 reflects the arbitrary start u_0 = 0
    series = _mean_stage_series(ok)[1:]
    if len(series) >= 3:
        try:
            decay = geometric_decay_fit(series)
        except ValueError:
            decay = None
    return EnsembleSummary(records, moments, decay, failures, config.spec.hash(), config.base_seed)


def record_row(rec: ReplicateRecord):
    return asdict(rec)
