"""Ranking, detection metrics, ROC tables, and the exact 2-D depth oracle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._parallel import parallel_map
from .funspace import _frozen_array, fit_fpca
from .outlier import FACTOR_GRID, _apply_fences, _candidate_projections
from .rhd import RegularizationSpec, draw_directions, resolve_lambda
from .simlab import ScenarioSpec, generate_scenario

DEFAULT_QUANTILE_GRID = (0.5, 0.7, 0.9, 0.95)


@dataclass(frozen=True)
class RankTable:
    """Depths with min-rank ties; rank 1 is the least deep curve."""

    depths: np.ndarray
    ranks: np.ndarray
    normalized: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "depths", _frozen_array(self.depths))
        object.__setattr__(self, "ranks", _frozen_array(self.ranks, dtype=np.int64))
        object.__setattr__(self, "normalized", _frozen_array(self.normalized))


@dataclass(frozen=True)
class DetectionMetrics:
    p_c: float
    p_f: float
    n_outliers: int
    n_inliers: int


def normalized_ranks(depths) -> RankTable:
    """Min-rank of each depth value, normalized by the sample size."""
    depths = np.asarray(depths, dtype=float)
    if depths.size == 0:
        raise ValueError("depths must be nonempty")
    order = np.sort(depths)
    # rank = 1 + number of strictly smaller depths (ties share the minimum rank)
    ranks = 1 + np.searchsorted(order, depths, side="left")
    return RankTable(depths=depths, ranks=ranks, normalized=ranks / depths.size)


def detection_metrics(flagged, labels) -> DetectionMetrics:
    """Correct (p_c) and false (p_f) detection proportions.

    `flagged` holds curve indices; `labels` marks each curve 'inlier' or an
    outlier kind. Empty denominators yield a proportion of 0.
    """
    labels = list(labels)
    flagged = set(int(i) for i in flagged)
    if any(i < 0 or i >= len(labels) for i in flagged):
        raise ValueError("flagged index out of range")
    outliers = {i for i, lab in enumerate(labels) if lab != "inlier"}
    inliers = set(range(len(labels))) - outliers
    p_c = len(flagged & outliers) / len(outliers) if outliers else 0.0
    p_f = len(flagged & inliers) / len(inliers) if inliers else 0.0
    return DetectionMetrics(
        p_c=p_c, p_f=p_f, n_outliers=len(outliers), n_inliers=len(inliers)
    )


def tukey_depth_2d_exact(points, x) -> float:
    """Exact halfspace depth of x in a 2-D point cloud, closed halfspaces.

    Angle sweep: the count of points in the closed halfspace with normal at
    angle phi is piecewise constant in phi, changing only where some point
    direction is orthogonal to phi; the minimum is attained on the open arcs
    between such critical angles, evaluated here at arc midpoints via binary
    search over the sorted point angles. O(n log n).
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    x = np.asarray(x, dtype=float).reshape(2)
    n = points.shape[0]
    if n == 0:
        raise ValueError("need at least one point")
    d = points - x
    nonzero = np.any(d != 0.0, axis=1)
    base = int(n - nonzero.sum())  # coincident points lie in every halfspace
    d = d[nonzero]
    if d.shape[0] == 0:
        return 1.0

    alpha = np.sort(np.arctan2(d[:, 1], d[:, 0]))  # in [-pi, pi]
    two_pi = 2.0 * np.pi
    crit = np.unique(np.mod(np.concatenate([alpha + np.pi / 2, alpha - np.pi / 2]), two_pi))
    mids = (crit + np.roll(crit, -1)) / 2.0
    mids[-1] = np.mod(crit[-1] + (crit[0] + two_pi - crit[-1]) / 2.0, two_pi)

    # Point at angle a is in the halfspace of normal phi iff the circular
    # distance between a and phi is at most pi/2.
    best = d.shape[0]
    for phi in mids:
        phi = phi if phi <= np.pi else phi - two_pi  # back to [-pi, pi]
        lo, hi = phi - np.pi / 2, phi + np.pi / 2
        count = 0
        for a, b in ((lo, hi), (lo + two_pi, hi + two_pi), (lo - two_pi, hi - two_pi)):
            left = np.searchsorted(alpha, a, side="left")
            right = np.searchsorted(alpha, b, side="right")
            count += max(0, right - left)
        best = min(best, count)
    return (base + best) / n


def _roc_replicate(args):
    """(u -> factor -> (p_c, p_f)) table for one scenario replicate."""
    spec, J, M, u_grid, factor_grid, child_seed = args
    rng = np.random.default_rng(child_seed)
    scen_seed = int(rng.integers(2**63))
    scenario = ScenarioSpec(
        n_inliers=spec.n_inliers,
        outlier_counts=spec.outlier_counts,
        seed=scen_seed,
        p=spec.p,
        J0=spec.J0,
    )
    sample, labels = generate_scenario(scenario)
    eig = fit_fpca(sample, J)
    dirs = draw_directions(eig, J, M, seed=int(rng.integers(2**63)))
    out = {}
    for u in u_grid:
        lam = resolve_lambda(RegularizationSpec.from_quantile(u), dirs)
        _, candidates, projections = _candidate_projections(eig, dirs, lam)
        for f in factor_grid:
            _, final = _apply_fences(candidates, projections, f)
            metrics = detection_metrics(final, labels)
            out[(u, f)] = (metrics.p_c, metrics.p_f)
    return out


def roc_table(
    spec: ScenarioSpec,
    J: int,
    M: int,
    replicates: int,
    seed: int,
    u_grid=DEFAULT_QUANTILE_GRID,
    factor_grid=FACTOR_GRID,
    threads: int = 1,
) -> list:
    """Averaged (u, f, p_c, p_f, replicates) rows over scenario replicates.

    Deterministic given the master seed; replicates run in parallel with
    per-replicate derived seeds and an order-independent average.
    """
    if replicates < 1:
        raise ValueError("replicates must be at least 1")
    children = np.random.SeedSequence(seed).spawn(replicates)
    jobs = [(spec, J, M, tuple(u_grid), tuple(factor_grid), c) for c in children]
    tables = parallel_map(_roc_replicate, jobs, threads)
    rows = []
    for u in u_grid:
        for f in factor_grid:
            pc = float(np.mean([t[(u, f)][0] for t in tables]))
            pf = float(np.mean([t[(u, f)][1] for t in tables]))
            rows.append({"u": u, "f": f, "p_c": pc, "p_f": pf, "replicates": replicates})
    return rows
