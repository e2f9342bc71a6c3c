import math

import numpy as np
import pytest

from todex import (
    DimensionMismatchError,
    GridMismatchError,
    assemble,
    bilinear_moment,
    delta_operator,
    identity_star_matrix,
    integrate_from,
    make_grid,
    sample_smooth,
    star_matmul,
    star_power,
    star_product,
    theta_operator,
)
from todex.grid import GridOperator
from todex.matrices import StarMatrix


def random_star_matrix(grid, rng, rows, cols):
    n = grid.n_nodes
    return StarMatrix(
        tuple(
            tuple(GridOperator(grid, np.tril(rng.uniform(-1, 1, (n, n)))) for _ in range(cols))
            for _ in range(rows)
        )
    )


class TestAssemble:
    def test_constant_matrix_entries_are_scaled_steps(self, library):
        spec = library["example1"]
        grid, A, w, v = spec.build(n_nodes=21)
        th = theta_operator(grid).data
        values = [[-1, 1, 1], [1, 0, 1], [1, 1, -1]]
        for k in range(3):
            for l in range(3):
                assert np.array_equal(A[k, l].data, values[k][l] * th)

    def test_time_dependent_entry_samples_row_time(self, library):
        spec = library["example2"]
        grid, A, w, v = spec.build(n_nodes=21)
        ref = sample_smooth(grid, lambda tp, t: np.cos(tp) + 0 * t)
        assert np.allclose(A[0, 0].data, ref.data)

    def test_zero_matrix(self, library):
        grid, A, w, v = library["zero3"].build(n_nodes=11)
        assert all(A[k, l].is_zero for k in range(3) for l in range(3))


class TestStarMatmul:
    def test_identity_matrix(self):
        rng = np.random.default_rng(1)
        g = make_grid(0, 1, 25)
        A = random_star_matrix(g, rng, 3, 3)
        ident = identity_star_matrix(g, 3)
        B = star_matmul(A, ident)
        for k in range(3):
            for l in range(3):
                assert np.allclose(B[k, l].data, A[k, l].data, rtol=0, atol=1e-13)

    def test_constant_matrix_square_entry(self, library):
        # (A*A)[0,0] for the constant 3x3 problem is 3 times the squared step
        grid, A, w, v = library["example1"].build(n_nodes=101)
        sq = star_matmul(A, A)
        ref = star_power(theta_operator(grid), 2) * 3.0
        assert np.allclose(sq[0, 0].data, ref.data, rtol=1e-12, atol=1e-12)
        analytic = sample_smooth(grid, lambda tp, t: 3.0 * (tp - t))
        assert np.max(np.abs(sq[0, 0].data - analytic.data)) <= 3.5 * grid.dt

    def test_one_by_one_reduces_to_star_product(self):
        rng = np.random.default_rng(2)
        g = make_grid(0, 1, 30)
        a = GridOperator(g, np.tril(rng.uniform(-1, 1, (30, 30))))
        b = GridOperator(g, np.tril(rng.uniform(-1, 1, (30, 30))))
        via_matrix = star_matmul(StarMatrix(((a,),)), StarMatrix(((b,),)))
        assert np.array_equal(via_matrix[0, 0].data, star_product(a, b).data)

    def test_dimension_mismatch(self):
        rng = np.random.default_rng(3)
        g = make_grid(0, 1, 10)
        A = random_star_matrix(g, rng, 2, 3)
        B = random_star_matrix(g, rng, 2, 2)
        with pytest.raises(DimensionMismatchError):
            star_matmul(A, B)

    def test_grid_mismatch(self):
        rng = np.random.default_rng(4)
        A = random_star_matrix(make_grid(0, 1, 10), rng, 2, 2)
        B = random_star_matrix(make_grid(0, 1, 11), rng, 2, 2)
        with pytest.raises(GridMismatchError):
            star_matmul(A, B)

    @pytest.mark.parametrize("seed", range(3))
    def test_associativity(self, seed):
        rng = np.random.default_rng(50 + seed)
        g = make_grid(0, 1, 35)
        A = random_star_matrix(g, rng, 3, 3)
        B = random_star_matrix(g, rng, 3, 3)
        C = random_star_matrix(g, rng, 3, 3)
        left = star_matmul(star_matmul(A, B), C)
        right = star_matmul(A, star_matmul(B, C))
        for k in range(3):
            for l in range(3):
                scale = max(left[k, l].frobenius(), 1e-300)
                assert (left[k, l] - right[k, l]).frobenius() / scale <= 1e-10


class TestBilinearMoment:
    def test_zeroth_moment(self, library):
        grid, A, w, v = library["example1"].build(n_nodes=15)
        m0 = bilinear_moment(A, w, v, 0)
        assert np.array_equal(m0.data, delta_operator(grid, 0).data)

    def test_first_moment_constant_matrix(self, library):
        grid, A, w, v = library["example1"].build(n_nodes=31)
        m1 = bilinear_moment(A, w, v, 1)
        assert np.array_equal(m1.data, -theta_operator(grid).data)

    def test_first_moment_time_dependent(self, library):
        grid, A, w, v = library["example2"].build(n_nodes=31)
        m1 = bilinear_moment(A, w, v, 1)
        ref = sample_smooth(grid, lambda tp, t: np.cos(tp) + 0 * t)
        assert np.allclose(m1.data, ref.data)

    def test_constant_matrix_moments_factorize_exactly(self, library):
        # for A = C * step, the j-th moment is (C^j)atwv times the j-th
        # power of the step kernel, exactly in the discrete algebra
        grid, A, w, v = library["example1"].build(n_nodes=41)
        C = np.array([[-1, 1, 1], [1, 0, 1], [1, 1, -1]], dtype=float)
        th = theta_operator(grid)
        for j in range(5):
            m = bilinear_moment(A, w, v, j)
            coeff = (np.linalg.matrix_power(C, j))[0, 0]
            ref = star_power(th, j) * coeff
            assert (m - ref).frobenius() <= 1e-12 * max(ref.frobenius(), 1.0)

    def test_integrated_moment_matches_taylor_term(self, library):
        grid, A, w, v = library["example1"].build(n_nodes=401)
        C = np.array([[-1, 1, 1], [1, 0, 1], [1, 1, -1]], dtype=float)
        for j in (1, 2, 3):
            series = integrate_from(bilinear_moment(A, w, v, j), 0)
            coeff = np.linalg.matrix_power(C, j)[0, 0]
            exact = coeff * grid.nodes**j / math.factorial(j)
            assert np.max(np.abs(series - exact)) <= 6 * abs(coeff) * grid.dt

    def test_dimension_mismatch(self, library):
        grid, A, w, v = library["example1"].build(n_nodes=11)
        with pytest.raises(DimensionMismatchError):
            bilinear_moment(A, [1, 0], [1, 0], 1)
