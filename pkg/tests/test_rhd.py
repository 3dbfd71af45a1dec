"""Direction pools, lambda resolution, and approximate depth."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rhdepth import (
    DirectionSet,
    EigenSystem,
    EmptyPoolError,
    RegularizationSpec,
    approximate_rhd,
    draw_directions,
    make_uniform_grid,
    naive_tukey_depth,
    resolve_lambda,
)
from rhdepth.funspace import fit_fpca
from rhdepth.rhd import depth_from_scores
from rhdepth.simlab import generate_inliers


def _toy_eigensystem(eigenvalues):
    """EigenSystem stub carrying only what draw_directions consumes."""
    J = len(eigenvalues)
    grid = make_uniform_grid(2)
    return EigenSystem(
        grid=grid,
        mean=np.zeros(2),
        eigenvalues=np.asarray(eigenvalues, dtype=float),
        eigenfunctions=np.zeros((J, 2)),
        scores=np.zeros((1, J)),
        usable_rank=J,
    )


def _pool(coefficients, eigenvalues, seed=0):
    coefficients = np.atleast_2d(np.asarray(coefficients, dtype=float))
    gamma = np.asarray(eigenvalues, dtype=float)
    norms = np.sqrt((coefficients**2 / gamma).sum(axis=1))
    return DirectionSet(
        truncation=coefficients.shape[1],
        coefficients=coefficients,
        rkhs_norms=norms,
        seed=seed,
    )


class TestDrawDirections:
    def test_one_dimensional_pool(self):
        eig = _toy_eigensystem([0.25])
        dirs = draw_directions(eig, 1, 50, seed=1)
        assert set(np.unique(dirs.coefficients)) <= {-1.0, 1.0}
        assert np.allclose(dirs.rkhs_norms, 1.0 / np.sqrt(0.25))

    def test_unit_vectors(self):
        eig = _toy_eigensystem([2.0, 0.5, 0.1])
        dirs = draw_directions(eig, 3, 200, seed=2)
        assert np.allclose(np.linalg.norm(dirs.coefficients, axis=1), 1.0)

    def test_equal_eigenvalues_uniform_on_circle(self):
        # isotropic proposal: the empirical mean direction is O(M^{-1/2})
        eig = _toy_eigensystem([0.7, 0.7])
        M = 100_000
        dirs = draw_directions(eig, 2, M, seed=3)
        assert np.abs(dirs.coefficients.mean(axis=0)).max() < 4.0 / np.sqrt(M)

    def test_seed_determinism(self):
        eig = _toy_eigensystem([1.0, 0.5])
        a = draw_directions(eig, 2, 1000, seed=9)
        b = draw_directions(eig, 2, 1000, seed=9)
        assert np.array_equal(a.coefficients, b.coefficients)
        assert np.array_equal(a.rkhs_norms, b.rkhs_norms)

    def test_truncation_beyond_rank_rejected(self):
        s = generate_inliers(20, seed=0)
        eig = fit_fpca(s, 3)
        with pytest.raises(ValueError):
            draw_directions(eig, 4, 10, seed=0)


class TestResolveLambda:
    @staticmethod
    def _pool_with_norms(norms):
        norms = np.asarray(norms, dtype=float)
        return DirectionSet(
            truncation=1,
            coefficients=np.ones((norms.size, 1)),
            rkhs_norms=norms,
            seed=0,
        )

    def test_median_of_four(self):
        dirs = self._pool_with_norms([3.0, 1.0, 4.0, 2.0])
        spec = RegularizationSpec.from_quantile(0.5)
        assert resolve_lambda(spec, dirs) == 2.0

    def test_near_one_gives_max(self):
        norms = np.random.default_rng(4).uniform(1.0, 5.0, size=1000)
        dirs = self._pool_with_norms(norms)
        spec = RegularizationSpec.from_quantile(0.9999)
        assert resolve_lambda(spec, dirs) == norms.max()

    def test_acceptance_fraction_matches_u(self):
        norms = np.random.default_rng(5).uniform(0.5, 2.0, size=1000)
        dirs = self._pool_with_norms(norms)
        lam = resolve_lambda(RegularizationSpec.from_quantile(0.95), dirs)
        assert lam == np.sort(norms)[949]
        assert (norms <= lam).mean() == 0.95

    def test_explicit_lambda_passthrough(self):
        dirs = _pool(np.ones((3, 1)), [1.0])
        assert resolve_lambda(RegularizationSpec.from_lambda(2.5), dirs) == 2.5


class TestRegularizationSpec:
    def test_requires_exactly_one(self):
        with pytest.raises(ValueError):
            RegularizationSpec(lam=1.0, quantile_level=0.5)
        with pytest.raises(ValueError):
            RegularizationSpec(lam=None, quantile_level=None)

    def test_bounds(self):
        with pytest.raises(ValueError):
            RegularizationSpec.from_quantile(0.0)
        with pytest.raises(ValueError):
            RegularizationSpec.from_quantile(1.0)
        with pytest.raises(ValueError):
            RegularizationSpec.from_lambda(0.0)


class TestDepth:
    def test_scalar_case(self):
        # J=1, sample scores {-1, 0, 1}, pool {+1, -1}, closed halfspaces
        dirs = _pool([[1.0], [-1.0]], [1.0])
        sample = np.array([[-1.0], [0.0], [1.0]])
        queries = np.array([[0.0], [1.0], [2.0]])
        res = depth_from_scores(dirs, 10.0, sample, queries)
        assert np.allclose(res.depths, [2 / 3, 1 / 3, 0.0])

    def test_minimizing_directions_keep_ties(self):
        dirs = _pool([[1.0], [-1.0]], [1.0])
        sample = np.array([[-1.0], [1.0]])
        res = depth_from_scores(dirs, 10.0, sample, np.array([[0.0]]))
        # both directions give depth 1/2 at the center
        assert res.depths[0] == 0.5
        assert set(res.minimizing_directions[0]) == {0, 1}

    def test_empty_pool_raises(self):
        dirs = _pool([[1.0]], [1.0])
        with pytest.raises(EmptyPoolError):
            depth_from_scores(dirs, 0.5, np.zeros((3, 1)), np.zeros((1, 1)))

    def test_sample_point_depth_positive(self):
        # a sample point always lies in its own closed halfspace
        s = generate_inliers(50, seed=11)
        eig = fit_fpca(s, 4)
        dirs = draw_directions(eig, 4, 300, seed=12)
        lam = resolve_lambda(RegularizationSpec.from_quantile(0.95), dirs)
        res = approximate_rhd(eig, dirs, lam, s)
        assert res.depths.min() >= 1.0 / s.n

    def test_naive_equals_full_pool(self):
        s = generate_inliers(40, seed=13)
        eig = fit_fpca(s, 3)
        dirs = draw_directions(eig, 3, 200, seed=14)
        lam = dirs.rkhs_norms.max()
        full = approximate_rhd(eig, dirs, lam, s)
        naive = naive_tukey_depth(eig, dirs, s)
        assert np.array_equal(full.depths, naive.depths)

    def test_depths_nonincreasing_in_nested_pools(self):
        s = generate_inliers(60, seed=15)
        eig = fit_fpca(s, 4)
        big = draw_directions(eig, 4, 2000, seed=16)
        lam = big.rkhs_norms.max() + 1.0
        prev = None
        for M in (100, 500, 2000):
            sub = DirectionSet(
                truncation=4,
                coefficients=big.coefficients[:M],
                rkhs_norms=big.rkhs_norms[:M],
                seed=16,
            )
            depths = approximate_rhd(eig, sub, lam, s).depths
            if prev is not None:
                assert np.all(depths <= prev)
            prev = depths

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=15, deadline=None)
    def test_lambda_monotonicity_property(self, seed):
        rng = np.random.default_rng(seed)
        sample = rng.standard_normal((30, 3))
        dirs = _pool(
            rng.standard_normal((80, 3)), rng.uniform(0.1, 2.0, size=3), seed=seed
        )
        norms = np.sort(dirs.rkhs_norms)
        lam1, lam2 = norms[20], norms[60]
        d1 = depth_from_scores(dirs, lam1, sample, sample).depths
        d2 = depth_from_scores(dirs, lam2, sample, sample).depths
        assert np.all(d1 >= d2)

    def test_accepted_count_reported(self):
        s = generate_inliers(30, seed=17)
        eig = fit_fpca(s, 3)
        dirs = draw_directions(eig, 3, 400, seed=18)
        lam = resolve_lambda(RegularizationSpec.from_quantile(0.7), dirs)
        res = approximate_rhd(eig, dirs, lam, s)
        assert res.accepted_count == int((dirs.rkhs_norms <= lam).sum())
        assert res.lambda_used == lam
        assert res.n == 30
