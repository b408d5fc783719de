"""Exact sparse linear algebra over the rationals.

Every other module computes on top of the three primitives here: kernels,
inhomogeneous solves and canonical quotients.  All scalars are
``fractions.Fraction`` (arbitrary precision, always reduced), so equality of
dimensions, subspaces and cohomology classes is decided exactly, never up to
a tolerance.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

Scalar = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def scalar(value) -> Fraction:
    """Coerce ints and 'p/q' strings to an exact rational.

    Floats are rejected: the workbench has no notion of approximate input.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"not an exact scalar: {value!r}")


def scalar_str(value: Fraction) -> str:
    """Serialize as 'p' or 'p/q' with positive denominator."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


class SparseMatrix:
    """Immutable sparse matrix over Q; only nonzero entries are stored.

    Rows are dicts column -> Fraction.  Construction drops explicit zeros and
    checks index bounds, so the invariants hold for every instance.
    """

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int,
                 entries: Optional[Mapping[tuple[int, int], Fraction]] = None):
        if rows < 0 or cols < 0:
            raise ValueError("negative matrix dimension")
        self.rows = rows
        self.cols = cols
        data: dict[int, dict[int, Fraction]] = {}
        if entries:
            for (i, j), v in entries.items():
                if not (0 <= i < rows and 0 <= j < cols):
                    raise ValueError(f"entry ({i},{j}) out of bounds for {rows}x{cols}")
                v = scalar(v)
                if v != 0:
                    data.setdefault(i, {})[j] = v
        self.data = data

    # -- constructors -------------------------------------------------

    @staticmethod
    def from_rows(rows_list: Sequence[Sequence], cols: Optional[int] = None) -> "SparseMatrix":
        nrows = len(rows_list)
        ncols = cols if cols is not None else (len(rows_list[0]) if rows_list else 0)
        entries = {}
        for i, row in enumerate(rows_list):
            if len(row) != ncols:
                raise ValueError("ragged rows")
            for j, v in enumerate(row):
                v = scalar(v)
                if v != 0:
                    entries[(i, j)] = v
        return SparseMatrix(nrows, ncols, entries)

    @staticmethod
    def identity(n: int) -> "SparseMatrix":
        return SparseMatrix(n, n, {(i, i): ONE for i in range(n)})

    @staticmethod
    def zero(rows: int, cols: int) -> "SparseMatrix":
        return SparseMatrix(rows, cols)

    # -- basic accessors ----------------------------------------------

    def entry(self, i: int, j: int) -> Fraction:
        return self.data.get(i, {}).get(j, ZERO)

    def items(self):
        for i in sorted(self.data):
            row = self.data[i]
            for j in sorted(row):
                yield (i, j), row[j]

    def is_zero(self) -> bool:
        return not self.data

    def row_vector(self, i: int) -> dict[int, Fraction]:
        return dict(self.data.get(i, {}))

    def to_dense(self) -> list[list[Fraction]]:
        out = [[ZERO] * self.cols for _ in range(self.rows)]
        for (i, j), v in self.items():
            out[i][j] = v
        return out

    # -- algebra ------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (isinstance(other, SparseMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.data == other.data)

    def __hash__(self):
        return hash((self.rows, self.cols,
                     tuple((k, v) for k, v in self.items())))

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch in matrix sum")
        entries = {k: v for k, v in self.items()}
        for k, v in other.items():
            w = entries.get(k, ZERO) + v
            if w == 0:
                entries.pop(k, None)
            else:
                entries[k] = w
        return SparseMatrix(self.rows, self.cols, entries)

    def __sub__(self, other: "SparseMatrix") -> "SparseMatrix":
        return self + other.scale(Fraction(-1))

    def scale(self, c) -> "SparseMatrix":
        c = scalar(c)
        if c == 0:
            return SparseMatrix(self.rows, self.cols)
        return SparseMatrix(self.rows, self.cols,
                            {k: c * v for k, v in self.items()})

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch in matrix product")
        entries: dict[tuple[int, int], Fraction] = {}
        for i, row in self.data.items():
            acc: dict[int, Fraction] = {}
            for k, a in row.items():
                other_row = other.data.get(k)
                if not other_row:
                    continue
                for j, b in other_row.items():
                    acc[j] = acc.get(j, ZERO) + a * b
            for j, v in acc.items():
                if v != 0:
                    entries[(i, j)] = v
        return SparseMatrix(self.rows, other.cols, entries)

    def mul_vec(self, vec: Sequence[Fraction]) -> list[Fraction]:
        if len(vec) != self.cols:
            raise ValueError("vector length mismatch")
        out = [ZERO] * self.rows
        for i, row in self.data.items():
            s = ZERO
            for j, a in row.items():
                if vec[j] != 0:
                    s += a * vec[j]
            out[i] = s
        return out

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.cols, self.rows,
                            {(j, i): v for (i, j), v in self.items()})

    def hstack(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.rows != other.rows:
            raise ValueError("row mismatch in hstack")
        entries = {k: v for k, v in self.items()}
        for (i, j), v in other.items():
            entries[(i, j + self.cols)] = v
        return SparseMatrix(self.rows, self.cols + other.cols, entries)

    def vstack(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.cols != other.cols:
            raise ValueError("column mismatch in vstack")
        entries = {k: v for k, v in self.items()}
        for (i, j), v in other.items():
            entries[(i + self.rows, j)] = v
        return SparseMatrix(self.rows + other.rows, self.cols, entries)

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={sum(len(r) for r in self.data.values())})"


# -- Gaussian elimination ----------------------------------------------

def _rref_rows(row_dicts: list[dict[int, Fraction]], ncols: int
               ) -> tuple[list[dict[int, Fraction]], list[int]]:
    """Reduced row echelon form of sparse rows; returns (rows, pivot columns).

    Pivots are chosen left to right; among candidate rows the shortest is
    taken to limit fill-in.  Output rows are fully reduced and leading 1.
    """
    work = [dict(r) for r in row_dicts if r]
    done: list[dict[int, Fraction]] = []
    pivots: list[int] = []
    while work:
        col = min(min(r) for r in work)
        cands = [r for r in work if col in r]
        cand = min(cands, key=len)
        work.remove(cand)
        inv = ONE / cand[col]
        if inv != 1:
            cand = {j: v * inv for j, v in cand.items()}
        for r in work:
            c = r.get(col)
            if c is not None:
                for j, v in cand.items():
                    w = r.get(j, ZERO) - c * v
                    if w == 0:
                        r.pop(j, None)
                    else:
                        r[j] = w
        work = [r for r in work if r]
        for r in done:
            c = r.get(col)
            if c is not None:
                for j, v in cand.items():
                    w = r.get(j, ZERO) - c * v
                    if w == 0:
                        r.pop(j, None)
                    else:
                        r[j] = w
        done.append(cand)
        pivots.append(col)
    order = sorted(range(len(pivots)), key=lambda t: pivots[t])
    return [done[t] for t in order], sorted(pivots)


def rank(m: SparseMatrix) -> int:
    _, pivots = _rref_rows(list(m.data.values()), m.cols)
    return len(pivots)


class Subspace:
    """A subspace of Q^n, stored by its unique reduced-echelon basis.

    Two Subspace objects are equal iff they are the same subspace, which is
    what lets downstream tests compare cohomology spaces structurally.
    """

    __slots__ = ("ambient_dim", "basis", "_pivots")

    def __init__(self, ambient_dim: int, vectors: Iterable[Sequence[Fraction]] = ()):
        self.ambient_dim = ambient_dim
        rows = []
        for v in vectors:
            if len(v) != ambient_dim:
                raise ValueError("vector length mismatch")
            row = {j: scalar(c) for j, c in enumerate(v) if c != 0}
            if row:
                rows.append(row)
        reduced, pivots = _rref_rows(rows, ambient_dim)
        self.basis = tuple(
            tuple(r.get(j, ZERO) for j in range(ambient_dim)) for r in reduced)
        self._pivots = tuple(pivots)

    @staticmethod
    def full(n: int) -> "Subspace":
        return Subspace(n, [tuple(ONE if j == i else ZERO for j in range(n))
                            for i in range(n)])

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, vec: Sequence[Fraction]) -> bool:
        return self.coordinates(vec) is not None

    def coordinates(self, vec: Sequence[Fraction]) -> Optional[list[Fraction]]:
        """Coefficients of vec in the echelon basis, or None if outside."""
        if len(vec) != self.ambient_dim:
            raise ValueError("vector length mismatch")
        residue = {j: scalar(c) for j, c in enumerate(vec) if c != 0}
        coords = [ZERO] * self.dim
        for idx, piv in enumerate(self._pivots):
            c = residue.get(piv)
            if c is None:
                continue
            coords[idx] = c
            for j, v in enumerate(self.basis[idx]):
                if v != 0:
                    w = residue.get(j, ZERO) - c * v
                    if w == 0:
                        residue.pop(j, None)
                    else:
                        residue[j] = w
        if residue:
            return None
        return coords

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(self.contains(v) for v in other.basis)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Subspace) and self.ambient_dim == other.ambient_dim
                and self.basis == other.basis)

    def __hash__(self):
        return hash((self.ambient_dim, self.basis))

    def __repr__(self):
        return f"Subspace(dim={self.dim} in Q^{self.ambient_dim})"


def kernel_basis(m: SparseMatrix) -> Subspace:
    """Canonical basis of {v : m v = 0}; dim kernel + rank = cols."""
    reduced, pivots = _rref_rows(list(m.data.values()), m.cols)
    pivot_set = set(pivots)
    piv_row = {}
    for r in reduced:
        piv_row[min(r)] = r
    vectors = []
    for free in range(m.cols):
        if free in pivot_set:
            continue
        vec = [ZERO] * m.cols
        vec[free] = ONE
        for p in pivots:
            c = piv_row[p].get(free)
            if c is not None:
                vec[p] = -c
        vectors.append(vec)
    return Subspace(m.cols, vectors)


def _image_vectors(m: SparseMatrix) -> list[tuple[Fraction, ...]]:
    cols: dict[int, dict[int, Fraction]] = {}
    for (i, j), v in m.items():
        cols.setdefault(j, {})[i] = v
    return [tuple(col.get(i, ZERO) for i in range(m.rows))
            for _, col in sorted(cols.items())]


def column_space(m: SparseMatrix) -> Subspace:
    return Subspace(m.rows, _image_vectors(m))


def solve(m: SparseMatrix, b: Sequence[Fraction]) -> Optional[list[Fraction]]:
    """Some x with m x = b, or None if b is outside the image.

    Deterministic: free variables are set to zero in echelon order, so equal
    inputs always give the same solution.
    """
    if len(b) != m.rows:
        raise ValueError(f"rhs length {len(b)} != rows {m.rows}")
    aug_rows = []
    for i in range(m.rows):
        row = dict(m.data.get(i, {}))
        bv = scalar(b[i])
        if bv != 0:
            row[m.cols] = bv
        if row:
            aug_rows.append(row)
    reduced, pivots = _rref_rows(aug_rows, m.cols + 1)
    if m.cols in pivots:
        return None
    x = [ZERO] * m.cols
    for r in reduced:
        p = min(r)
        x[p] = r.get(m.cols, ZERO)
    return x


def solve_matrix(m: SparseMatrix, b: SparseMatrix) -> Optional[SparseMatrix]:
    """Columnwise solve; returns X with m X = b, or None."""
    if b.rows != m.rows:
        raise ValueError("shape mismatch")
    entries = {}
    bt = b.transpose()
    for j in range(b.cols):
        col = [ZERO] * b.rows
        for i, v in bt.data.get(j, {}).items():
            col[i] = v
        x = solve(m, col)
        if x is None:
            return None
        for i, v in enumerate(x):
            if v != 0:
                entries[(i, j)] = v
    return SparseMatrix(m.cols, b.cols, entries)


class Quotient:
    """A complement presentation of ambient/sub with its projection.

    ``representatives`` span a complement of sub inside ambient;
    ``project`` maps any vector of ambient to its coordinates in the
    representatives modulo sub.
    """

    __slots__ = ("ambient", "sub", "representatives")

    def __init__(self, ambient: Subspace, sub: Subspace):
        if ambient.ambient_dim != sub.ambient_dim:
            raise ValueError("ambient dimension mismatch")
        if not ambient.contains_subspace(sub):
            raise ValueError("sub is not contained in ambient")
        self.ambient = ambient
        self.sub = sub
        reps: list[tuple[Fraction, ...]] = []
        span = list(sub.basis)
        current = Subspace(ambient.ambient_dim, span)
        for v in ambient.basis:
            if not current.contains(v):
                reps.append(v)
                span.append(v)
                current = Subspace(ambient.ambient_dim, span)
        self.representatives = tuple(reps)

    @property
    def dim(self) -> int:
        return len(self.representatives)

    def project(self, vec: Sequence[Fraction]) -> list[Fraction]:
        """Coordinates of vec modulo sub in the representative basis."""
        n = self.ambient.ambient_dim
        span = list(self.sub.basis) + list(self.representatives)
        mat = SparseMatrix(n, len(span),
                           {(i, j): span[j][i]
                            for j in range(len(span)) for i in range(n)
                            if span[j][i] != 0})
        coords = solve(mat, list(vec))
        if coords is None:
            raise ValueError("vector not in ambient subspace")
        return coords[self.sub.dim:]

    def lift(self, coords: Sequence[Fraction]) -> list[Fraction]:
        n = self.ambient.ambient_dim
        out = [ZERO] * n
        for c, rep in zip(coords, self.representatives):
            c = scalar(c)
            if c != 0:
                for i, v in enumerate(rep):
                    out[i] += c * v
        return out


def quotient_basis(ambient: Subspace, sub: Subspace) -> Quotient:
    """Quotient-with-section; dim = dim(ambient) - dim(sub)."""
    return Quotient(ambient, sub)


def vec_add(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    return [x + y for x, y in zip(a, b)]

def vec_sub(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    return [x - y for x, y in zip(a, b)]

def vec_scale(c: Fraction, a: Sequence[Fraction]) -> list[Fraction]:
    return [c * x for x in a]

def vec_is_zero(a: Sequence[Fraction]) -> bool:
    return all(x == 0 for x in a)
