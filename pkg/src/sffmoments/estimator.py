"""Streaming estimation of form-factor moments over a time grid.

Samples accumulate into per-batch power sums; batch means supply the error
bars.  Batches are contiguous sample-index ranges fixed by (N_sim, B), so
any partition of whole batches over workers or runs reassembles to the same
sums.  Within a batch, sums are accumulated chunk-by-chunk in fixed chunk
order with numpy's pairwise reduction inside each chunk, keeping the
summation tree independent of how the work was scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analytics import ubar
from .ensembles import CUE, GUE, Spectrum, heisenberg_time
from .errors import InsufficientDataError, InvalidInputError, InvalidParameterError

DEFAULT_BATCHES = 50
DEFAULT_NMAX = 4
# samples per accumulation chunk; capped so a chunk of D x D matrices stays
# modest in memory.  Part of the deterministic summation tree: changing it
# changes low-order bits, so it is a constant, not a tuning knob.
CHUNK_TARGET = 4096
CHUNK_ELEMS = 1 << 24


def chunk_size_for(dim: int) -> int:
    return max(64, min(CHUNK_TARGET, CHUNK_ELEMS // (dim * dim)))


@dataclass(frozen=True)
class TimeGrid:
    """Strictly ascending evaluation times with their scaled counterparts."""

    kind: str
    times: np.ndarray
    dim: int
    heisenberg: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", times)
        if times.size == 0:
            raise InvalidParameterError("time grid must be non-empty")
        if np.any(np.diff(times) <= 0):
            raise InvalidParameterError("time grid must be strictly ascending")
        if np.any(times < 0):
            raise InvalidParameterError("times must be non-negative")
        if self.kind == CUE and np.any(times != np.round(times)):
            raise InvalidParameterError("CUE times must be integers")

    @property
    def taus(self) -> np.ndarray:
        return self.times / self.heisenberg

    def __len__(self):
        return self.times.size


def make_grid(kind: str, times, dim: int, convention: str = "default") -> TimeGrid:
    return TimeGrid(kind, np.asarray(times, dtype=float), dim,
                    heisenberg_time(kind, dim, convention))


def trace_powers(spectrum, grid: TimeGrid):
    """u_t = sum_i exp(i lambda_i t) on the grid.

    ``spectrum`` is a Spectrum (kind-checked against the grid), a plain
    (D,) array, or a stack (n, D); returns (T,) or (n, T) complex traces.
    """
    if isinstance(spectrum, Spectrum):
        if spectrum.kind != grid.kind:
            raise InvalidInputError(
                f"spectrum kind {spectrum.kind!r} does not match grid kind {grid.kind!r}")
        values = spectrum.values
    else:
        values = np.asarray(spectrum, dtype=float)
    if values.shape[-1] != grid.dim:
        raise InvalidInputError(
            f"spectrum length {values.shape[-1]} does not match grid dim {grid.dim}")
    phase = values[..., None, :] * grid.times[:, None]
    return np.exp(1j * phase).sum(axis=-1)


def batch_bounds(n_sim: int, n_batches: int):
    """Half-open sample-index ranges of each batch under floor(i*B/N) assignment."""
    edges = [0]
    for b in range(1, n_batches + 1):
        # first index i with floor(i*B/N) >= b, i.e. i >= ceil(b*N/B)
        edges.append(-(-b * n_sim // n_batches))
    return [(edges[b], edges[b + 1]) for b in range(n_batches)]


class MomentAccumulator:
    """Mergeable per-batch sums of form-factor powers on a time grid."""

    def __init__(self, grid: TimeGrid, n_sim: int, n_batches: int = DEFAULT_BATCHES,
                 n_max: int = DEFAULT_NMAX):
        if not 1 <= n_max <= 4:
            raise InvalidParameterError("n_max must be between 1 and 4")
        if not 2 <= n_batches <= n_sim:
            raise InvalidParameterError("need n_sim >= n_batches >= 2")
        self.grid = grid
        self.n_sim = int(n_sim)
        self.n_batches = int(n_batches)
        self.n_max = int(n_max)
        t = len(grid)
        self.batch_counts = np.zeros(n_batches, dtype=np.int64)
        self.batch_pow_sums = np.zeros((n_batches, n_max, t))
        self.batch_u_sums = np.zeros((n_batches, t), dtype=np.complex128)
        self._next_index = 0

    # -- bookkeeping -------------------------------------------------------

    def batch_of(self, sample_index: int) -> int:
        if not 0 <= sample_index < self.n_sim:
            raise InvalidInputError(f"sample index {sample_index} outside [0, {self.n_sim})")
        return sample_index * self.n_batches // self.n_sim

    @property
    def count(self) -> int:
        return int(self.batch_counts.sum())

    def copy_empty(self) -> "MomentAccumulator":
        return MomentAccumulator(self.grid, self.n_sim, self.n_batches, self.n_max)

    def _powers(self, u_block):
        sff = np.abs(u_block) ** 2
        out = np.empty((u_block.shape[0], self.n_max, u_block.shape[1]))
        out[:, 0] = sff
        for k in range(1, self.n_max):
            out[:, k] = out[:, k - 1] * sff
        return out

    # -- accumulation ------------------------------------------------------

    def accumulate(self, u_series, sample_index: int = None):
        """Add one sample's trace series (length-T complex array)."""
        u = np.asarray(u_series, dtype=np.complex128)
        if u.shape != (len(self.grid),):
            raise InvalidInputError(f"series shape {u.shape} does not match grid {len(self.grid)}")
        idx = self._next_index if sample_index is None else int(sample_index)
        b = self.batch_of(idx)
        self.batch_pow_sums[b] += self._powers(u[None, :])[0]
        self.batch_u_sums[b] += u
        self.batch_counts[b] += 1
        self._next_index = idx + 1

    def accumulate_block(self, batch: int, u_block):
        """Add a block of samples that all belong to one batch.

        The block is reduced with a single pairwise sum, so per-batch sums
        depend only on the block boundaries, not on the caller's schedule.
        """
        u_block = np.asarray(u_block, dtype=np.complex128)
        if u_block.ndim != 2 or u_block.shape[1] != len(self.grid):
            raise InvalidInputError("u_block must have shape (n_samples, n_times)")
        self.batch_pow_sums[batch] += self._powers(u_block).sum(axis=0)
        self.batch_u_sums[batch] += u_block.sum(axis=0)
        self.batch_counts[batch] += u_block.shape[0]

    def merge(self, other: "MomentAccumulator"):
        """Fold another accumulator covering a disjoint set of batches."""
        if (other.n_sim, other.n_batches, other.n_max) != (self.n_sim, self.n_batches, self.n_max):
            raise InvalidInputError("accumulator layouts differ")
        if not np.array_equal(other.grid.times, self.grid.times) or other.grid.kind != self.grid.kind:
            raise InvalidInputError("accumulator grids differ")
        overlap = (self.batch_counts > 0) & (other.batch_counts > 0)
        if np.any(overlap):
            raise InvalidInputError(f"batches {np.where(overlap)[0].tolist()} present on both sides")
        take = other.batch_counts > 0
        self.batch_counts[take] = other.batch_counts[take]
        self.batch_pow_sums[take] = other.batch_pow_sums[take]
        self.batch_u_sums[take] = other.batch_u_sums[take]
        return self


@dataclass(frozen=True)
class MomentTable:
    """Finalized per-time statistics with batch-mean standard errors."""

    grid: TimeGrid
    n_max: int
    count: int
    mean_sff: np.ndarray          # (n_max, T)
    se_sff: np.ndarray            # (n_max, T)
    mean_u: np.ndarray            # (T,) complex
    mean_sff_connected: np.ndarray
    conn2_empirical: np.ndarray   # (T,)
    conn2_se: np.ndarray
    batch_means: np.ndarray       # (B, n_max, T)
    batch_u_means: np.ndarray     # (B, T) complex
    subtract: str

    def batch_statistic(self, fn):
        """Apply fn(batch_means, batch_u_means) per batch; return (mean, se).

        fn receives arrays of shape (n_max, T) and (T,) and must return a
        (T,)-shaped statistic.
        """
        stats = np.stack([fn(self.batch_means[b], self.batch_u_means[b])
                          for b in range(self.batch_means.shape[0])])
        return stats.mean(axis=0), stats.std(axis=0, ddof=1) / np.sqrt(stats.shape[0])


def finalize(acc: MomentAccumulator, subtract: str = "empirical") -> MomentTable:
    """Means, batch-mean standard errors and connected statistics.

    subtract picks the trace average used for the connected parts: the
    empirical mean u_t, or the analytic ensemble average.
    """
    if subtract not in ("empirical", "analytic"):
        raise InvalidParameterError("subtract must be 'empirical' or 'analytic'")
    filled = acc.batch_counts > 0
    n_filled = int(filled.sum())
    if n_filled < 2:
        raise InsufficientDataError("need at least two filled batches for error bars")
    counts = acc.batch_counts[filled]
    total = counts.sum()
    batch_means = acc.batch_pow_sums[filled] / counts[:, None, None]
    batch_u = acc.batch_u_sums[filled] / counts[:, None]
    mean_sff = acc.batch_pow_sums[filled].sum(axis=0) / total
    se = batch_means.std(axis=0, ddof=1) / np.sqrt(n_filled)
    mean_u = acc.batch_u_sums[filled].sum(axis=0) / total

    if subtract == "empirical":
        u_hat = mean_u
        batch_u_hat = batch_u
    else:
        u_hat = np.asarray(ubar(acc.grid.kind, acc.grid.times, acc.grid.dim), dtype=complex)
        batch_u_hat = np.broadcast_to(u_hat, batch_u.shape)
    mean_conn = mean_sff[0] - np.abs(u_hat) ** 2

    dim = acc.grid.dim
    conn_b = batch_means[:, 0] - np.abs(batch_u_hat) ** 2
    conn2_b = (batch_means[:, 1] - 2.0 * conn_b**2) / dim if acc.n_max >= 2 else np.full_like(conn_b, np.nan)
    conn2 = conn2_b.mean(axis=0)
    conn2_se = conn2_b.std(axis=0, ddof=1) / np.sqrt(n_filled)

    return MomentTable(
        grid=acc.grid,
        n_max=acc.n_max,
        count=int(total),
        mean_sff=mean_sff,
        se_sff=se,
        mean_u=mean_u,
        mean_sff_connected=mean_conn,
        conn2_empirical=conn2,
        conn2_se=conn2_se,
        batch_means=batch_means,
        batch_u_means=batch_u,
        subtract=subtract,
    )
