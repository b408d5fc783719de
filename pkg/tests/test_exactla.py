from fractions import Fraction
import random

import pytest

from sheafdef.exactla import (SparseMatrix, Subspace, column_space,
                              kernel_basis, quotient_basis, rank, solve,
                              scalar_str)


def frac(x):
    return Fraction(x)


def random_matrix(rng, rows, cols, lo=-2, hi=2):
    entries = {}
    for i in range(rows):
        for j in range(cols):
            v = rng.randint(lo, hi)
            if v:
                entries[(i, j)] = Fraction(v)
    return SparseMatrix(rows, cols, entries)


def dense_rank(m):
    # Independent oracle: fraction-free Gaussian elimination on dense rows.
    a = [row[:] for row in m.to_dense()]
    nrows, ncols = m.rows, m.cols
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, nrows):
            if a[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        for i in range(r + 1, nrows):
            if a[i][c] != 0:
                f = a[i][c] / a[r][c]
                for j in range(c, ncols):
                    a[i][j] -= f * a[r][j]
        r += 1
    return r


def test_kernel_single_equation():
    m = SparseMatrix.from_rows([[1, 1]])
    ker = kernel_basis(m)
    assert ker.dim == 1
    assert ker.contains([frac(1), frac(-1)])


def test_kernel_zero_matrix_is_full():
    m = SparseMatrix.zero(3, 4)
    assert kernel_basis(m) == Subspace.full(4)


def test_rank_nullity_random():
    rng = random.Random(20240)
    for _ in range(60):
        m = random_matrix(rng, 4, 6)
        r = dense_rank(m)
        assert rank(m) == r
        assert kernel_basis(m).dim == 6 - r


def test_kernel_invariant_under_row_permutation():
    rng = random.Random(7)
    for _ in range(20):
        m = random_matrix(rng, 5, 5)
        rows = m.to_dense()
        rng.shuffle(rows)
        m2 = SparseMatrix.from_rows(rows)
        assert kernel_basis(m) == kernel_basis(m2)


def test_kernel_basis_is_reduced_echelon():
    m = SparseMatrix.from_rows([[1, 2, 3], [0, 0, 1]])
    ker = kernel_basis(m)
    assert ker.dim == 1
    # leading coefficient normalized to 1, echelon structure canonical
    vec = ker.basis[0]
    lead = next(v for v in vec if v != 0)
    assert lead == 1


def test_solve_identity():
    m = SparseMatrix.identity(2)
    assert solve(m, [frac(3), frac(5)]) == [frac(3), frac(5)]


def test_solve_free_variable_convention():
    m = SparseMatrix.from_rows([[1, 1]])
    assert solve(m, [frac(2)]) == [frac(2), frac(0)]


def test_solve_outside_image_is_none():
    m = SparseMatrix.from_rows([[1, 0], [2, 0]])
    b = [frac(1), frac(1)]
    assert solve(m, b) is None
    # rank comparison oracle
    aug = m.hstack(SparseMatrix.from_rows([[1], [1]]))
    assert rank(aug) > rank(m)


def test_solve_roundtrip_random():
    rng = random.Random(99)
    for _ in range(40):
        m = random_matrix(rng, 4, 5)
        x = [Fraction(rng.randint(-3, 3)) for _ in range(5)]
        b = m.mul_vec(x)
        y = solve(m, b)
        assert y is not None
        assert m.mul_vec(y) == b


def test_quotient_plane_by_axis():
    ambient = Subspace.full(2)
    sub = Subspace(2, [[frac(1), frac(0)]])
    q = quotient_basis(ambient, sub)
    assert q.dim == 1
    assert q.representatives == ((frac(0), frac(1)),)


def test_quotient_by_itself_is_zero():
    s = Subspace(3, [[1, 0, 1], [0, 1, 0]])
    q = quotient_basis(s, s)
    assert q.dim == 0


def test_quotient_dim_additivity_random():
    rng = random.Random(12)
    for _ in range(25):
        big = random_matrix(rng, 4, 6)
        ambient = kernel_basis(big)
        vecs = list(ambient.basis)
        rng.shuffle(vecs)
        sub = Subspace(6, vecs[: max(0, ambient.dim - 1)])
        q = quotient_basis(ambient, sub)
        assert q.dim == ambient.dim - sub.dim
        for rep in q.representatives:
            coords = q.project(rep)
            assert sum(1 for c in coords if c != 0) == 1


def test_quotient_rejects_non_contained():
    ambient = Subspace(2, [[1, 0]])
    sub = Subspace(2, [[0, 1]])
    with pytest.raises(ValueError):
        quotient_basis(ambient, sub)


def test_column_space():
    m = SparseMatrix.from_rows([[1, 2], [2, 4]])
    cs = column_space(m)
    assert cs.dim == 1
    assert cs.contains([frac(1), frac(2)])


def test_scalar_str():
    assert scalar_str(Fraction(3)) == "3"
    assert scalar_str(Fraction(-1, 2)) == "-1/2"


def test_matrix_rejects_out_of_bounds():
    with pytest.raises(ValueError):
        SparseMatrix(1, 1, {(0, 1): Fraction(1)})
