"""Path-space data model for Markov chains killed in finite time.

A chain of collision points is absorbed (sent to a resting state) after a
random finite number of steps.  The resting state is represented by
truncation: a :class:`Trajectory` stores the collision points up to and
including the absorbing one, so the stored length *is* the absorption
index.  Unabsorbed prefixes are not representable and zero-length
trajectories are rejected, matching the convention that the path law puts
no mass on absorption before the first collision.

The module also provides :func:`log_pdf_absorbed_chain`, the generic
log-density composer for inhomogeneous absorbed chains

    f_n(y) = prod_{i=1..n} [(1 - a_{i-1}(y_{i-1})) * q_i(y_{i-1}, y_i)] * a_n(y_n)

with a_0 = 0, where a_i are per-step absorption probabilities and q_i
per-step transition densities.  Every model density in this package is a
compiled specialization of this product; the model modules expose
``chain_spec_*`` constructors so the test suite can pin the fast
implementations to this reference composer.

All densities are handled in log space.  ``-inf`` is a legal log-density
(a vanishing factor); ``NaN`` is never returned.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "Trajectory",
    "AbsorbedChainSpec",
    "log_pdf_absorbed_chain",
    "trajectory_to_line",
    "trajectory_from_line",
    "save_trajectories",
    "load_trajectories",
    "write_trajectories_csv",
    "read_trajectories_csv",
]


class Trajectory:
    """A finite ordered list of collision points of a killed chain.

    Parameters
    ----------
    points : array_like
        Shape ``(n, d)`` or ``(n,)`` (interpreted as ``(n, 1)``), with
        ``n >= 1`` and ``d`` in {1, 2}.  The last stored point is the
        absorbing collision; from there on the chain rests.

    Notes
    -----
    The points array is stored C-contiguous, float64 and read-only, so a
    Trajectory is immutable and safe to share across threads.  Its length
    identifies the unique partition cell (absorption index) it belongs to.
    """

    __slots__ = ("_points",)

    def __init__(self, points):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise ValueError(f"points must be a (n, d) array, got ndim={pts.ndim}")
        n, d = pts.shape
        if n < 1:
            raise ValueError("a trajectory holds at least its absorbing collision")
        if d not in (1, 2):
            raise ValueError(f"spatial dimension must be 1 or 2, got {d}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("trajectory coordinates must be finite")
        pts = np.ascontiguousarray(pts)
        pts.setflags(write=False)
        self._points = pts

    @property
    def points(self) -> np.ndarray:
        """Read-only ``(n, d)`` array of collision points."""
        return self._points

    @property
    def dim(self) -> int:
        return self._points.shape[1]

    @property
    def length(self) -> int:
        """Number of collisions; equals the absorption index."""
        return self._points.shape[0]

    def __len__(self) -> int:
        return self._points.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return self._points.shape == other._points.shape and bool(
            np.all(self._points == other._points)
        )

    def __hash__(self):
        return hash((self._points.shape, self._points.tobytes()))

    def __repr__(self) -> str:
        with np.printoptions(precision=4, threshold=8):
            return f"Trajectory(n={self.length}, d={self.dim}, points={self._points!r})"


@dataclass(frozen=True)
class AbsorbedChainSpec:
    """Defining data of an inhomogeneous absorbed chain.

    Parameters
    ----------
    source : np.ndarray
        The deterministic birth point y_0, shape ``(d,)``.  Not part of any
        trajectory.
    absorption_prob : callable
        ``absorption_prob(i, y) -> float`` in [0, 1], the probability a_i(y)
        of absorbing at the i-th collision point y (i >= 1).  a_0 = 0 by
        construction and is never queried.
    log_transition_density : callable
        ``log_transition_density(i, prev, y) -> float`` (``-inf`` allowed),
        the log of the i-th transition density q_i evaluated at y given the
        previous point (i >= 1; ``prev`` is the source when i = 1).
    """

    source: np.ndarray
    absorption_prob: Callable[[int, np.ndarray], float]
    log_transition_density: Callable[[int, np.ndarray, np.ndarray], float]

    @property
    def dim(self) -> int:
        return int(np.asarray(self.source).shape[0])


def _checked_prob(spec: AbsorbedChainSpec, i: int, point: np.ndarray) -> float:
    a = float(spec.absorption_prob(i, point))
    if math.isnan(a) or not (0.0 <= a <= 1.0):
        raise ValueError(f"absorption_prob({i}, .) returned {a}, outside [0, 1]")
    return a


def log_pdf_absorbed_chain(spec: AbsorbedChainSpec, x: Trajectory) -> float:
    """Log-density of a trajectory under an inhomogeneous absorbed chain.

    Evaluates the product of survival factors, transition densities and the
    terminal absorption factor entirely in log space.

    Parameters
    ----------
    spec : AbsorbedChainSpec
    x : Trajectory
        Must have the same spatial dimension as ``spec``.

    Returns
    -------
    float
        ``log f_n(x)`` with ``n = len(x)``; exactly ``-inf`` when any factor
        vanishes.  Never NaN.

    Raises
    ------
    ValueError
        On dimension mismatch, or if a callable returns NaN or an
        absorption probability outside [0, 1].
    """
    if x.dim != spec.dim:
        raise ValueError(f"dimension mismatch: spec is {spec.dim}D, trajectory is {x.dim}D")
    pts = x.points
    n = pts.shape[0]
    source = np.asarray(spec.source, dtype=np.float64)

    total = 0.0
    prev = source
    for i in range(1, n + 1):
        point = pts[i - 1]
        if i >= 2:
            # survival factor of the previous collision: 1 - a_{i-1}(y_{i-1})
            a_prev = _checked_prob(spec, i - 1, prev)
            if a_prev >= 1.0:
                return -math.inf
            total += math.log1p(-a_prev)
        lq = float(spec.log_transition_density(i, prev, point))
        if math.isnan(lq):
            raise ValueError(f"log_transition_density({i}, ...) returned NaN")
        if lq == -math.inf:
            return -math.inf
        total += lq
        prev = point

    a_n = _checked_prob(spec, n, prev)
    if a_n <= 0.0:
        return -math.inf
    total += math.log(a_n)
    return total


# --- serialization ---------------------------------------------------------

def trajectory_to_line(x: Trajectory) -> str:
    """Serialize one trajectory to the ``d;x1_1,...,x1_d;x2_1,...`` line format."""
    groups = (",".join(repr(float(c)) for c in point) for point in x.points)
    return f"{x.dim};" + ";".join(groups)


def trajectory_from_line(line: str) -> Trajectory:
    """Parse a trajectory from the line format written by :func:`trajectory_to_line`."""
    parts = line.strip().split(";")
    if len(parts) < 2:
        raise ValueError(f"malformed trajectory line: {line!r}")
    try:
        d = int(parts[0])
    except ValueError as exc:
        raise ValueError(f"malformed dimension field: {parts[0]!r}") from exc
    rows = []
    for group in parts[1:]:
        coords = group.split(",")
        if len(coords) != d:
            raise ValueError(f"point {group!r} does not have {d} coordinates")
        rows.append([float(c) for c in coords])
    return Trajectory(np.asarray(rows, dtype=np.float64))


def save_trajectories(path, trajectories: Iterable[Trajectory]) -> None:
    """Write trajectories to a text file, one line each."""
    with open(path, "w", encoding="ascii") as fh:
        for x in trajectories:
            fh.write(trajectory_to_line(x) + "\n")


def load_trajectories(path) -> list[Trajectory]:
    """Read trajectories from a file written by :func:`save_trajectories`."""
    out = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            if line.strip():
                out.append(trajectory_from_line(line))
    return out


def write_trajectories_csv(path, trajectories: Sequence[Trajectory]) -> None:
    """Write trajectories in columnar CSV form.

    Columns are ``traj_id, step, x1[, x2]``: one row per collision point,
    ``traj_id`` 0-based in input order, ``step`` 1-based (the collision
    index, so the largest step of a trajectory is its absorption index).
    All trajectories in one file share the same dimension.
    """
    trajectories = list(trajectories)
    if not trajectories:
        raise ValueError("no trajectories to write")
    d = trajectories[0].dim
    if any(t.dim != d for t in trajectories):
        raise ValueError("all trajectories in one CSV must share a dimension")
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(["traj_id", "step"] + [f"x{k + 1}" for k in range(d)])
        for tid, x in enumerate(trajectories):
            for step, point in enumerate(x.points, start=1):
                writer.writerow([tid, step] + [repr(float(c)) for c in point])


def read_trajectories_csv(path) -> list[Trajectory]:
    """Read trajectories from a CSV written by :func:`write_trajectories_csv`."""
    with open(path, "r", newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["traj_id", "step"]:
            raise ValueError("not a trajectory CSV: bad header")
        d = len(header) - 2
        rows: dict[int, list[tuple[int, list[float]]]] = {}
        for row in reader:
            if not row:
                continue
            tid, step = int(row[0]), int(row[1])
            rows.setdefault(tid, []).append((step, [float(c) for c in row[2 : 2 + d]]))
    out = []
    for tid in sorted(rows):
        steps = sorted(rows[tid])
        if [s for s, _ in steps] != list(range(1, len(steps) + 1)):
            raise ValueError(f"trajectory {tid} has non-contiguous steps")
        out.append(Trajectory(np.asarray([c for _, c in steps], dtype=np.float64)))
    return out
