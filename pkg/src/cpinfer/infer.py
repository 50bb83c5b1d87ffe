"""Plugin variance/jump estimates, limiting-law critical values, and
confidence intervals for the located change point.

The limiting law of the scaled location error is the arg-min over v of
|v| - 2 W(v) with W a two-sided Brownian motion.  Critical values are
obtained by Monte Carlo on a discretized grid: each half-line carries a
random walk with independent N(0, h) increments on a step-h grid out to
half-width R, and the arg-min location is recorded per path.

The simulation is hierarchical but exact in law: a coarse walk (step H, a
multiple of h) is drawn first, and the fine grid is filled in by Brownian
bridge resampling only inside cells whose best possible objective value
could beat the coarse minimum.  A cell is skipped only when its objective
cannot come within 2 * DELTA * sqrt(H) of the running minimum; the chance a
skipped cell actually contained the arg-min is below exp(-2 * DELTA^2) per
cell (about 1e-14 at DELTA = 4), far beneath Monte Carlo noise.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .core import (
    ChangePointEstimate,
    DegenerateJumpError,
    MeanPair,
    as_series,
    loss_1d,
    project_series,
    stopped_means,
)

__all__ = [
    "QuantileMCSettings",
    "QuantileTable",
    "InferenceResult",
    "refit_means",
    "plugin_xi_sq",
    "plugin_sigma_sq",
    "simulate_argmin_locations",
    "limit_quantile",
    "quantile_table",
    "confidence_interval",
    "read_quantile_cache",
]

_DELTA = 4.0          # bridge-excursion margin, in units of sqrt(cell length)
_TARGET_CELL = 0.5    # coarse cell length aimed for (multiple of the fine step)
_BATCH_PATHS = 2048   # fixed chunk size; per-chunk RNG substreams keep runs reproducible


@dataclass(frozen=True)
class QuantileMCSettings:
    """Grid and path budget for the arg-min law simulation."""

    grid_half_width: float = 200.0
    grid_step: float = 0.01
    paths: int = 200_000
    seed: int = 171717

    def __post_init__(self):
        if self.grid_half_width <= 0 or self.grid_step <= 0 or self.paths <= 0:
            raise ValueError("grid half-width, step and path count must be positive")
        n = self.grid_half_width / self.grid_step
        if abs(n - round(n)) > 1e-8:
            raise ValueError("grid half-width must be an integer multiple of the step")


@dataclass(frozen=True)
class QuantileTable:
    """Critical values c_alpha with the Monte Carlo settings that produced them."""

    alphas: tuple
    critical_values: tuple
    mc_paths: int
    grid_half_width: float
    grid_step: float
    seed: int


@dataclass(frozen=True)
class InferenceResult:
    """Confidence interval for the change point on the integer and fraction scales."""

    k_tilde: ChangePointEstimate
    xi_sq_hat: float
    sigma_sq_hat: float
    c_alpha: float
    interval_int: tuple
    interval_frac: tuple
    interval_rounded: tuple
    alpha: float


def _as_index_array(support) -> np.ndarray:
    if isinstance(support, (set, frozenset)):
        support = sorted(support)
    return np.asarray(list(support) if not hasattr(support, "ndim") else support, dtype=int).ravel()


def refit_means(Y, k: int, support1, support2) -> MeanPair:
    """Unshrunk stopped-time means restricted to the given supports.

    Coordinates outside the supports are set to zero; the supports are
    0-based column indices (any iterable, including sets).
    """
    Y = as_series(Y)
    left, right = stopped_means(Y, k)
    mu1 = np.zeros_like(left)
    mu2 = np.zeros_like(right)
    s1 = _as_index_array(support1)
    s2 = _as_index_array(support2)
    mu1[s1] = left[s1]
    mu2[s2] = right[s2]
    return MeanPair(mu1, mu2)


def plugin_xi_sq(means: MeanPair) -> float:
    """Plugin squared jump size; equals the difference of the two projected
    levels by the identity theta1 - theta2 = ||mu1 - mu2||^2."""
    eta = means.jump()
    return float(eta @ eta)


def plugin_sigma_sq(Y, k: int, means: MeanPair) -> float:
    """Plugin projected-noise variance ratio at split k.

    Builds the surrogate series from the given (refitted) means and returns
    its two-segment loss at k divided by the plugin squared jump size.
    """
    xi_sq = plugin_xi_sq(means)
    if xi_sq <= 0.0:
        raise DegenerateJumpError("zero jump vector: variance ratio undefined")
    eta = means.jump()
    z = project_series(Y, eta)
    theta1, theta2 = means.projected_levels()
    return loss_1d(z, k, theta1, theta2) / xi_sq


def _refine_factor(n_fine: int, step: float) -> int:
    """Fine steps per coarse cell: near the target length and dividing the grid."""
    m = max(1, int(round(_TARGET_CELL / step)))
    m = min(m, n_fine)
    while n_fine % m:
        m -= 1
    return m


def simulate_argmin_locations(settings: QuantileMCSettings | None = None) -> np.ndarray:
    """Per-path signed locations of the grid arg-min of |v| - 2 W(v).

    Locations are tracked as signed integer grid indices and converted once
    at the end, so every emitted value is exactly ``h * index``.
    """
    s = settings or QuantileMCSettings()
    n_fine = int(round(s.grid_half_width / s.grid_step))
    h = s.grid_step
    m = _refine_factor(n_fine, h)
    n_coarse = n_fine // m
    cell = m * h
    margin = 2.0 * _DELTA * np.sqrt(cell)

    out = np.empty(s.paths, dtype=np.int64)
    fine_v = h * np.arange(1, n_fine + 1)        # canonical grid values
    coarse_v = fine_v[m - 1 :: m]                # v at each cell's right end
    start_v = np.concatenate([[0.0], coarse_v[:-1]])  # v at each cell's left end

    for batch, lo in enumerate(range(0, s.paths, _BATCH_PATHS)):
        nb = min(_BATCH_PATHS, s.paths - lo)
        rng = np.random.default_rng(np.random.SeedSequence(entropy=s.seed, spawn_key=(batch,)))

        inc = rng.standard_normal((nb, 2, n_coarse)) * np.sqrt(cell)
        walk = np.cumsum(inc, axis=2)
        coarse_obj = coarse_v - 2.0 * walk

        flat = coarse_obj.reshape(nb, -1)
        coarse_arg = np.argmin(flat, axis=1)
        coarse_min = flat[np.arange(nb), coarse_arg]
        side = np.where(coarse_arg < n_coarse, 1, -1)
        coarse_idx = side * m * (coarse_arg % n_coarse + 1)
        best0 = np.minimum(coarse_min, 0.0)
        idx0 = np.where(coarse_min < 0.0, coarse_idx, 0)

        if m == 1:
            out[lo : lo + nb] = idx0
            continue

        walk_prev = np.concatenate([np.zeros((nb, 2, 1)), walk[:, :, :-1]], axis=2)
        bound = start_v - 2.0 * (np.maximum(walk_prev, walk) + margin)
        pi, si, ci = np.nonzero(bound < best0[:, None, None])

        if pi.size:
            u = rng.standard_normal((pi.size, m)) * np.sqrt(h)
            u += (inc[pi, si, ci] - u.sum(axis=1))[:, None] / m
            fine_walk = walk_prev[pi, si, ci, None] + np.cumsum(u, axis=1)
            offsets = m * ci[:, None] + np.arange(1, m + 1)  # fine grid indices in cell
            obj = fine_v[offsets - 1] - 2.0 * fine_walk
            pos = np.argmin(obj, axis=1)
            rows = np.arange(pi.size)
            val = obj[rows, pos]
            idx = np.where(si == 0, 1, -1) * offsets[rows, pos]

            order = np.lexsort((np.abs(idx), val, pi))
            first = np.unique(pi[order], return_index=True)[1]
            win_path = pi[order][first]
            win_val = val[order][first]
            win_idx = idx[order][first]

            improve = win_val < best0[win_path]
            idx0[win_path[improve]] = win_idx[improve]

        out[lo : lo + nb] = idx0
    return h * out


def limit_quantile(alpha: float, settings: QuantileMCSettings | None = None,
                   cache_path: str | os.PathLike | None = None) -> float:
    """Critical value c with P(|V| <= c) = 1 - alpha under the arg-min law."""
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"level must lie in (0, 1), got {alpha}")
    s = settings or QuantileMCSettings()
    if cache_path is not None:
        cached = read_quantile_cache(cache_path).get(_cache_key(alpha, s))
        if cached is not None:
            return cached
    c = float(np.quantile(np.abs(simulate_argmin_locations(s)), 1.0 - alpha))
    if cache_path is not None:
        _cache_append(cache_path, _cache_key(alpha, s), c)
    return c


def quantile_table(alphas, settings: QuantileMCSettings | None = None,
                   cache_path: str | os.PathLike | None = None) -> QuantileTable:
    """Critical values for several levels from a single simulated sample."""
    s = settings or QuantileMCSettings()
    alphas = sorted(float(a) for a in alphas)
    if any(not (0.0 < a < 1.0) for a in alphas):
        raise ValueError("levels must lie in (0, 1)")
    cache = read_quantile_cache(cache_path) if cache_path is not None else {}
    missing = [a for a in alphas if _cache_key(a, s) not in cache]
    if missing:
        sample = np.abs(simulate_argmin_locations(s))
        for a in missing:
            c = float(np.quantile(sample, 1.0 - a))
            cache[_cache_key(a, s)] = c
            if cache_path is not None:
                _cache_append(cache_path, _cache_key(a, s), c)
    values = tuple(cache[_cache_key(a, s)] for a in alphas)
    return QuantileTable(
        alphas=tuple(alphas),
        critical_values=values,
        mc_paths=s.paths,
        grid_half_width=s.grid_half_width,
        grid_step=s.grid_step,
        seed=s.seed,
    )


def _cache_key(alpha: float, s: QuantileMCSettings) -> str:
    return (
        f"alpha={float(alpha)!r},R={float(s.grid_half_width)!r},"
        f"h={float(s.grid_step)!r},paths={s.paths},seed={s.seed}"
    )


def read_quantile_cache(path) -> dict:
    """Parse the line-based cache file (``key -> c=value``); missing file is empty."""
    table: dict[str, float] = {}
    if path is None or not os.path.exists(path):
        return table
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or "->" not in line:
                continue
            key, _, rhs = line.partition("->")
            rhs = rhs.strip()
            if rhs.startswith("c="):
                table[key.strip()] = float(rhs[2:])
    return table


def _cache_append(path, key: str, value: float) -> None:
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(f"{key} -> c={value!r}\n")


def confidence_interval(k_tilde: int, xi_sq_hat: float, sigma_sq_hat: float,
                        c_alpha: float, T: int, alpha: float = 0.05) -> InferenceResult:
    """Interval k_tilde +/- c_alpha * sigma_sq_hat / xi_sq_hat on the integer
    scale, clamped to [1, T], with the fraction view divided by T."""
    if xi_sq_hat <= 0.0:
        raise DegenerateJumpError("zero squared jump: interval undefined")
    estimate = ChangePointEstimate(int(k_tilde), int(T))
    half = c_alpha * sigma_sq_hat / xi_sq_hat
    lo = max(1.0, estimate.k - half)
    hi = min(float(T), estimate.k + half)
    return InferenceResult(
        k_tilde=estimate,
        xi_sq_hat=float(xi_sq_hat),
        sigma_sq_hat=float(sigma_sq_hat),
        c_alpha=float(c_alpha),
        interval_int=(lo, hi),
        interval_frac=(lo / T, hi / T),
        interval_rounded=(int(np.floor(lo)), int(np.ceil(hi))),
        alpha=float(alpha),
    )
