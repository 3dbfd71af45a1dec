"""Constrained random-projection pool and the approximate sample depth.

One direction pool is drawn per analysis and reused for every value of the
regularization parameter: the constraint is applied by filtering directions
on their RKHS norm at depth time, which makes depth exactly nonincreasing
in lambda.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyPoolError, RankError
from .funspace import EigenSystem, FunctionalSample, _frozen_array


@dataclass(frozen=True)
class DirectionSet:
    """M unit coefficient vectors in R^J and their RKHS norms."""

    truncation: int
    coefficients: np.ndarray
    rkhs_norms: np.ndarray
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _frozen_array(self.coefficients))
        object.__setattr__(self, "rkhs_norms", _frozen_array(self.rkhs_norms))

    @property
    def size(self) -> int:
        return self.coefficients.shape[0]

    def accepted(self, lam: float) -> np.ndarray:
        """Indices of pool directions with RKHS norm at most lambda."""
        return np.flatnonzero(self.rkhs_norms <= lam)


@dataclass(frozen=True)
class RegularizationSpec:
    """Either an explicit lambda or a quantile level u of the pool norms."""

    lam: float | None = None
    quantile_level: float | None = None

    def __post_init__(self):
        if (self.lam is None) == (self.quantile_level is None):
            raise ValueError("specify exactly one of lambda and quantile level")
        if self.lam is not None and self.lam <= 0:
            raise ValueError("lambda must be positive")
        if self.quantile_level is not None and not 0 < self.quantile_level < 1:
            raise ValueError("quantile level must lie in (0, 1)")

    @classmethod
    def from_lambda(cls, lam: float) -> "RegularizationSpec":
        return cls(lam=lam)

    @classmethod
    def from_quantile(cls, u: float) -> "RegularizationSpec":
        return cls(quantile_level=u)


@dataclass(frozen=True)
class DepthResult:
    """Approximate depth per evaluation point, in multiples of 1/n."""

    depths: np.ndarray
    minimizing_directions: tuple
    lambda_used: float
    accepted_count: int
    n: int

    def __post_init__(self):
        object.__setattr__(self, "depths", _frozen_array(self.depths))


def draw_directions(eig: EigenSystem, J: int, M: int, seed: int) -> DirectionSet:
    """Draw M directions z/||z|| with z ~ N(0, diag(gamma_1..gamma_J)).

    This is the non-isotropic proposal on the unit sphere; the lambda
    constraint is applied later by norm filtering, so the same pool serves
    every lambda. Deterministic given (eigenvalues, J, M, seed).
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    if J < 1 or J > eig.truncation:
        raise ValueError(f"J must be in [1, {eig.truncation}]")
    gamma = eig.eigenvalues[:J]
    if gamma[-1] <= 0:
        raise RankError(J, int(np.sum(gamma > 0)))
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((M, J)) * np.sqrt(gamma)
    coeff = z / np.linalg.norm(z, axis=1, keepdims=True)
    rkhs_norms = np.sqrt(np.sum(coeff**2 / gamma, axis=1))
    return DirectionSet(truncation=J, coefficients=coeff, rkhs_norms=rkhs_norms, seed=seed)


def resolve_lambda(spec: RegularizationSpec, dirs: DirectionSet) -> float:
    """Resolve a regularization spec against the pool's RKHS norms.

    The quantile form returns the ceil(u*M)-th order statistic, so the
    acceptance fraction at the resolved lambda is exactly ceil(u*M)/M.
    """
    if spec.lam is not None:
        return float(spec.lam)
    m = dirs.size
    k = int(np.ceil(spec.quantile_level * m))
    k = max(k, 1)
    return float(np.sort(dirs.rkhs_norms)[k - 1])


def _min_counts(sample_scores: np.ndarray, eval_scores: np.ndarray, coeff: np.ndarray):
    """Halfspace counts minimized over directions.

    Returns (min_counts, per-point tuple of minimizing direction columns).
    count[q, m] = #{i : (S_i - x_q) @ a_m >= 0}, computed per direction by
    sorting the sample projections once and binary-searching the
    evaluation projections.
    """
    n = sample_scores.shape[0]
    proj_sample = sample_scores @ coeff.T
    proj_eval = eval_scores @ coeff.T
    q, k = proj_eval.shape
    counts = np.empty((q, k), dtype=np.int64)
    for m in range(k):
        col = np.sort(proj_sample[:, m])
        counts[:, m] = n - np.searchsorted(col, proj_eval[:, m], side="left")
    min_counts = counts.min(axis=1)
    argmins = tuple(np.flatnonzero(counts[i] == min_counts[i]) for i in range(q))
    return min_counts, argmins


def depth_from_scores(
    dirs: DirectionSet,
    lam: float,
    sample_scores: np.ndarray,
    eval_scores: np.ndarray,
) -> DepthResult:
    """Approximate depth evaluated directly on score matrices."""
    accepted = dirs.accepted(lam)
    if accepted.size == 0:
        raise EmptyPoolError(lam, float(dirs.rkhs_norms.min()))
    J = dirs.truncation
    min_counts, argmins = _min_counts(
        sample_scores[:, :J], eval_scores[:, :J], dirs.coefficients[accepted]
    )
    n = sample_scores.shape[0]
    return DepthResult(
        depths=min_counts / n,
        minimizing_directions=tuple(accepted[a] for a in argmins),
        lambda_used=float(lam),
        accepted_count=int(accepted.size),
        n=n,
    )


def approximate_rhd(
    eig: EigenSystem, dirs: DirectionSet, lam: float, eval_points: FunctionalSample
) -> DepthResult:
    """Approximate sample depth at each evaluation curve.

    Evaluation curves are projected with the sample's eigenfunctions; the
    depth at x is the minimum over accepted directions of the fraction of
    sample curves i with (scores_i - scores_x) @ a >= 0. Minimizing
    direction indices refer to the full pool; ties are kept.
    """
    eval_scores = eig.project(eval_points)
    return depth_from_scores(dirs, lam, eig.scores, eval_scores)


def naive_tukey_depth(
    eig: EigenSystem, dirs: DirectionSet, eval_points: FunctionalSample
) -> DepthResult:
    """Unregularized depth: every pool direction accepted (lambda = inf)."""
    return approximate_rhd(eig, dirs, np.inf, eval_points)
