"""Monte Carlo baselines: plain proportion estimates with exact binomial
confidence intervals, and a checkpointed streaming variant for very large
trial counts.

``simple_mc`` estimates P(objective >= level) as the success proportion over
independent trajectories, counted in fixed-size RNG blocks with one derived
substream per block, so the result never depends on worker count or
scheduling.  ``vlmc`` streams batches of trials and persists a small binary
checkpoint after each batch, so a billion-trajectory run survives
interruption and resumes bit-exactly.

Interval estimation uses the Clopper-Pearson construction: the exact
binomial interval obtained by inverting the regularized incomplete beta
function, here by plain bisection.
"""

from __future__ import annotations

import json
import math
import os
import struct
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import betainc

from .last_particle import ModelInterface, as_seed_sequence, substream

__all__ = [
    "McResult",
    "simple_mc",
    "vlmc",
    "clopper_pearson",
    "rmse",
    "quality_ratio",
]


@dataclass(frozen=True)
class McResult:
    """Outcome of a Monte Carlo proportion estimate."""

    successes: int
    trials: int
    p_tilde: float
    ci_low: float
    ci_high: float
    confidence: float
    wall_time: float

    def to_dict(self) -> dict:
        return {
            "successes": self.successes,
            "trials": self.trials,
            "p_tilde": self.p_tilde,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "confidence": self.confidence,
            "wall_time": self.wall_time,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @staticmethod
    def csv_header() -> list[str]:
        return ["p_tilde", "ci_low", "ci_high", "successes", "trials",
                "confidence", "wall_time"]

    def csv_row(self) -> list[str]:
        return [repr(self.p_tilde), repr(self.ci_low), repr(self.ci_high),
                str(self.successes), str(self.trials), repr(self.confidence),
                repr(self.wall_time)]


def _beta_quantile(q: float, a: float, b: float) -> float:
    """Solve I_x(a, b) = q for x by bisection (I = regularized incomplete beta)."""
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if betainc(a, b, mid) < q:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(lo, 1e-300):
            break
    return 0.5 * (lo + hi)


def clopper_pearson(successes: int, trials: int, confidence: float = 0.95,
                    ) -> tuple[float, float]:
    """Exact binomial confidence interval for a success proportion."""
    if trials < 1 or not 0 <= successes <= trials:
        raise ValueError("need 0 <= successes <= trials with trials >= 1")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must be in (0, 1)")
    alpha = 1.0 - confidence
    if successes == 0:
        low = 0.0
    else:
        low = _beta_quantile(alpha / 2.0, successes, trials - successes + 1)
    if successes == trials:
        high = 1.0
    else:
        high = _beta_quantile(1.0 - alpha / 2.0, successes + 1, trials - successes)
    return low, high


def _count_shard(model: ModelInterface, level: float, n: int,
                 rng: np.random.Generator) -> int:
    counter = getattr(model, "count_exceedances", None)
    if counter is not None:
        return int(counter(level, n, rng))
    hits = 0
    for _ in range(n):
        if model.objective(model.sample(rng)) >= level:
            hits += 1
    return hits


# fixed RNG blocking: block j always covers trials [j*B, (j+1)*B) and draws
# from substream (j), so the count never depends on how work is scheduled
_RNG_BLOCK = 1_000_000


def simple_mc(model: ModelInterface, n_trials: int, level: float, seed, *,
              confidence: float = 0.95, n_shards: int = 1) -> McResult:
    """Success-proportion estimate of P(objective >= level) over n_trials.

    Trials are counted in fixed one-million-trial RNG blocks, block j
    drawing from substream (j) of the seed root.  ``n_shards`` sets how
    many threads process blocks concurrently; the estimate is identical
    for every value.  With an integer seed the blocks match ``vlmc``
    batches of the same size, so the two agree count for count.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    if n_shards < 1:
        raise ValueError("n_shards must be >= 1")
    root = as_seed_sequence(seed)
    sizes = [min(_RNG_BLOCK, n_trials - lo)
             for lo in range(0, n_trials, _RNG_BLOCK)]
    def count_block(j: int) -> int:
        return _count_shard(model, level, sizes[j], substream(root, j))

    start = time.perf_counter()
    if n_shards == 1 or len(sizes) == 1:
        successes = sum(count_block(j) for j in range(len(sizes)))
    else:
        with ThreadPoolExecutor(max_workers=n_shards) as pool:
            successes = sum(pool.map(count_block, range(len(sizes))))
    wall = time.perf_counter() - start
    low, high = clopper_pearson(successes, n_trials, confidence)
    return McResult(successes=successes, trials=n_trials,
                    p_tilde=successes / n_trials, ci_low=low, ci_high=high,
                    confidence=confidence, wall_time=wall)


_CKPT_MAGIC = b"VLMC"
_CKPT_VERSION = 1
_CKPT_FMT = "<4sIQQQQQQ"


def _write_checkpoint(path: Path, seed: int, n_trials: int, batch_size: int,
                      next_batch: int, successes: int, trials_done: int) -> None:
    blob = struct.pack(_CKPT_FMT, _CKPT_MAGIC, _CKPT_VERSION, seed, n_trials,
                       batch_size, next_batch, successes, trials_done)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(blob)
    os.replace(tmp, path)


def _read_checkpoint(path: Path) -> dict:
    blob = path.read_bytes()
    magic, version, seed, n_trials, batch_size, next_batch, successes, done = \
        struct.unpack(_CKPT_FMT, blob)
    if magic != _CKPT_MAGIC or version != _CKPT_VERSION:
        raise ValueError(f"{path} is not a recognizable checkpoint")
    return {"seed": seed, "n_trials": n_trials, "batch_size": batch_size,
            "next_batch": next_batch, "successes": successes,
            "trials_done": done}


def vlmc(model: ModelInterface, n_trials: int, level: float, seed: int, *,
         batch_size: int = 10_000_000, checkpoint: str | Path | None = None,
         confidence: float = 0.95, stop_after_batches: int | None = None,
         ) -> McResult:
    """Streaming Monte Carlo for very large trial counts.

    Trials run in batches, batch b drawing from substream (b) of the seed,
    so the accumulated count is identical whether the run completed in one
    call or was interrupted and resumed from the checkpoint file.  With
    ``stop_after_batches`` the call returns early with the partial result
    (``trials`` then reports the completed portion).
    """
    if n_trials < 1 or batch_size < 1:
        raise ValueError("n_trials and batch_size must be >= 1")
    seed = int(seed)
    if not 0 <= seed < 2 ** 64:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    root = np.random.SeedSequence(seed)
    n_batches = (n_trials + batch_size - 1) // batch_size
    next_batch, successes, trials_done = 0, 0, 0
    path = Path(checkpoint) if checkpoint is not None else None
    if path is not None and path.exists():
        state = _read_checkpoint(path)
        if (state["seed"], state["n_trials"], state["batch_size"]) != \
                (seed, n_trials, batch_size):
            raise ValueError(f"{path} belongs to a different run configuration")
        next_batch = state["next_batch"]
        successes = state["successes"]
        trials_done = state["trials_done"]
    start = time.perf_counter()
    ran = 0
    while next_batch < n_batches:
        if stop_after_batches is not None and ran >= stop_after_batches:
            break
        lo = next_batch * batch_size
        n = min(batch_size, n_trials - lo)
        successes += _count_shard(model, level, n, substream(root, next_batch))
        trials_done += n
        next_batch += 1
        ran += 1
        if path is not None:
            _write_checkpoint(path, seed, n_trials, batch_size, next_batch,
                              successes, trials_done)
    wall = time.perf_counter() - start
    low, high = clopper_pearson(successes, trials_done, confidence)
    return McResult(successes=successes, trials=trials_done,
                    p_tilde=successes / trials_done, ci_low=low, ci_high=high,
                    confidence=confidence, wall_time=wall)


def rmse(estimates, p_ref: float) -> float:
    """Root mean square error of a batch of estimates around p_ref."""
    arr = np.asarray(estimates, dtype=float)
    if arr.size == 0:
        raise ValueError("need at least one estimate")
    return float(np.sqrt(np.mean((arr - p_ref) ** 2)))


def quality_ratio(time_mc: float, rmse_mc: float, time_lp: float,
                  rmse_lp: float) -> float:
    """Work-normalized accuracy ratio sqrt(T_mc)*RMSE_mc / (sqrt(T_lp)*RMSE_lp).

    Values above 1 mean the particle method beats plain Monte Carlo at
    equal computation time.
    """
    if min(time_mc, rmse_mc, time_lp, rmse_lp) <= 0:
        raise ValueError("times and errors must be positive")
    return math.sqrt(time_mc) * rmse_mc / (math.sqrt(time_lp) * rmse_lp)
