"""Bounded cochain complexes of finite-dimensional rational vector spaces.

Conventions, fixed once for the whole workbench:

* cohomological (upper) indexing, differentials of degree +1;
* Cone(f)^n = target^n (+) source^{n+1} with d(y, x) = (d y + f x, -d x);
* Hom^n(C, D) = prod_p Hom(C^p, D^{p+n}) with (delta f) = d f - (-1)^n f d,
  so closed degree-0 elements are literally chain maps;
* tensor differential with the Koszul sign d(x (x) y) = dx (x) y + (-1)^p x (x) dy.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .exactla import (ONE, ZERO, Quotient, SparseMatrix, column_space,
                      kernel_basis, quotient_basis, scalar, vec_is_zero)


class FinComplex:
    """A bounded complex; dims and differentials indexed by degree.

    d[n] is a dims[n+1] x dims[n] matrix and d(n+1) d(n) = 0 is checked at
    construction, so every FinComplex in the system is a genuine complex.
    """

    __slots__ = ("dims", "d")

    def __init__(self, dims: dict[int, int], d: dict[int, SparseMatrix],
                 check: bool = True):
        self.dims = {n: dim for n, dim in dims.items() if dim != 0}
        diff: dict[int, SparseMatrix] = {}
        for n in sorted(self.dims):
            mat = d.get(n)
            src = self.dims.get(n, 0)
            tgt = self.dims.get(n + 1, 0)
            if mat is None:
                mat = SparseMatrix(tgt, src)
            if (mat.rows, mat.cols) != (tgt, src):
                raise ValueError(
                    f"differential at degree {n} has shape {mat.rows}x{mat.cols},"
                    f" expected {tgt}x{src}")
            if not mat.is_zero():
                diff[n] = mat
        self.d = diff
        if check:
            for n, mat in self.d.items():
                nxt = self.d.get(n + 1)
                if nxt is not None and not (nxt @ mat).is_zero():
                    raise ValueError(f"d^2 != 0 at degree {n}")

    # -- inspection ----------------------------------------------------

    def dim(self, n: int) -> int:
        return self.dims.get(n, 0)

    def diff(self, n: int) -> SparseMatrix:
        mat = self.d.get(n)
        if mat is None:
            mat = SparseMatrix(self.dim(n + 1), self.dim(n))
        return mat

    @property
    def support(self) -> tuple[int, int]:
        if not self.dims:
            return (0, -1)
        return (min(self.dims), max(self.dims))

    def degrees(self) -> list[int]:
        return sorted(self.dims)

    def euler_characteristic(self) -> int:
        return sum((-1) ** n * dim for n, dim in self.dims.items())

    def is_zero(self) -> bool:
        return not self.dims

    def __eq__(self, other):
        return (isinstance(other, FinComplex) and self.dims == other.dims
                and all(self.diff(n) == other.diff(n) for n in self.dims))

    def __repr__(self):
        return "FinComplex({" + ", ".join(
            f"{n}: {self.dims[n]}" for n in sorted(self.dims)) + "})"

    # -- constructions ---------------------------------------------------

    @staticmethod
    def single(degree: int, dim: int = 1) -> "FinComplex":
        return FinComplex({degree: dim}, {})

    @staticmethod
    def zero() -> "FinComplex":
        return FinComplex({}, {})

    def shift(self, k: int) -> "FinComplex":
        """C[k]^n = C^{n+k} with differential scaled by (-1)^k."""
        dims = {n - k: dim for n, dim in self.dims.items()}
        sign = Fraction(-1) ** (k % 2)
        d = {n - k: mat.scale(sign) for n, mat in self.d.items()}
        return FinComplex(dims, d, check=False)

    def direct_sum(self, other: "FinComplex") -> tuple["FinComplex", "ChainMap", "ChainMap"]:
        dims = {}
        d = {}
        inc_self = {}
        inc_other = {}
        degs = sorted(set(self.dims) | set(other.dims))
        for n in degs:
            a, b = self.dim(n), other.dim(n)
            dims[n] = a + b
        for n in degs:
            a, b = self.dim(n), other.dim(n)
            at, bt = self.dim(n + 1), other.dim(n + 1)
            entries = {}
            for (i, j), v in self.diff(n).items():
                entries[(i, j)] = v
            for (i, j), v in other.diff(n).items():
                entries[(i + at, j + a)] = v
            d[n] = SparseMatrix(at + bt, a + b, entries)
            inc_self[n] = SparseMatrix(a + b, a, {(i, i): ONE for i in range(a)})
            inc_other[n] = SparseMatrix(a + b, b, {(i + a, i): ONE for i in range(b)})
        total = FinComplex(dims, d, check=False)
        return total, ChainMap(self, total, inc_self), ChainMap(other, total, inc_other)


class ChainMap:
    """A degreewise linear map commuting with the differentials."""

    __slots__ = ("source", "target", "f")

    def __init__(self, source: FinComplex, target: FinComplex,
                 f: dict[int, SparseMatrix], check: bool = True):
        self.source = source
        self.target = target
        comps: dict[int, SparseMatrix] = {}
        for n in source.degrees():
            mat = f.get(n)
            if mat is None:
                mat = SparseMatrix(target.dim(n), source.dim(n))
            if (mat.rows, mat.cols) != (target.dim(n), source.dim(n)):
                raise ValueError(f"component at degree {n} has wrong shape")
            if not mat.is_zero():
                comps[n] = mat
        self.f = comps
        if check:
            for n in source.degrees():
                left = self.target.diff(n) @ self.component(n)
                right = self.component(n + 1) @ self.source.diff(n)
                if left != right:
                    raise ValueError(f"does not commute with d at degree {n}")

    def component(self, n: int) -> SparseMatrix:
        mat = self.f.get(n)
        if mat is None:
            mat = SparseMatrix(self.target.dim(n), self.source.dim(n))
        return mat

    def compose(self, first: "ChainMap") -> "ChainMap":
        """self o first."""
        if first.target is not self.source and first.target != self.source:
            raise ValueError("composition mismatch")
        f = {n: self.component(n) @ first.component(n)
             for n in first.source.degrees()}
        return ChainMap(first.source, self.target, f, check=False)

    @staticmethod
    def identity(c: FinComplex) -> "ChainMap":
        return ChainMap(c, c, {n: SparseMatrix.identity(c.dim(n))
                               for n in c.degrees()}, check=False)

    @staticmethod
    def zero(source: FinComplex, target: FinComplex) -> "ChainMap":
        return ChainMap(source, target, {}, check=False)

    def __repr__(self):
        return f"ChainMap({self.source!r} -> {self.target!r})"


class Cohomology:
    """Cohomology of a FinComplex with canonical representatives.

    For each degree keeps the kernel, the image of the previous differential
    and a Quotient giving representatives and the class-of map.
    """

    def __init__(self, c: FinComplex):
        self.complex = c
        self.quotients: dict[int, Quotient] = {}
        lo, hi = c.support
        for n in range(lo, hi + 1):
            cycles = kernel_basis(c.diff(n))
            boundaries = column_space(c.diff(n - 1))
            self.quotients[n] = quotient_basis(cycles, boundaries)

    def dim(self, n: int) -> int:
        q = self.quotients.get(n)
        return q.dim if q is not None else 0

    def dims(self) -> dict[int, int]:
        return {n: q.dim for n, q in sorted(self.quotients.items()) if q.dim}

    def representatives(self, n: int) -> tuple:
        q = self.quotients.get(n)
        return q.representatives if q is not None else ()

    def class_of(self, n: int, vec: Sequence[Fraction]) -> list[Fraction]:
        """Coordinates of a cocycle in the canonical representative basis."""
        q = self.quotients.get(n)
        if q is None:
            if not vec_is_zero(vec):
                raise ValueError("nonzero vector in zero degree")
            return []
        if not q.ambient.contains(vec):
            raise ValueError(f"vector is not a cocycle in degree {n}")
        return q.project(vec)

    def total_dim(self) -> int:
        return sum(q.dim for q in self.quotients.values())

    def is_acyclic(self) -> bool:
        return self.total_dim() == 0


def cohomology(c: FinComplex) -> Cohomology:
    return Cohomology(c)


def cohomology_dims(c: FinComplex) -> dict[int, int]:
    return Cohomology(c).dims()


def cone(f: ChainMap) -> FinComplex:
    """Cone(f)^n = target^n (+) source^{n+1}, d(y, x) = (dy + fx, -dx)."""
    src, tgt = f.source, f.target
    degs = sorted(set(tgt.dims) | {n - 1 for n in src.dims})
    dims = {n: tgt.dim(n) + src.dim(n + 1) for n in degs}
    d: dict[int, SparseMatrix] = {}
    for n in degs:
        rows = tgt.dim(n + 1) + src.dim(n + 2)
        cols = tgt.dim(n) + src.dim(n + 1)
        entries = {}
        for (i, j), v in tgt.diff(n).items():
            entries[(i, j)] = v
        for (i, j), v in f.component(n + 1).items():
            entries[(i, j + tgt.dim(n))] = v
        for (i, j), v in src.diff(n + 1).items():
            entries[(i + tgt.dim(n + 1), j + tgt.dim(n))] = -v
        d[n] = SparseMatrix(rows, cols, entries)
    return FinComplex(dims, d)


def cone_with_maps(f: ChainMap) -> tuple[FinComplex, ChainMap, ChainMap]:
    """Cone plus the canonical maps target -> cone -> source[1]."""
    c = cone(f)
    tgt, src = f.target, f.source
    inc = ChainMap(tgt, c, {
        n: SparseMatrix(c.dim(n), tgt.dim(n),
                        {(i, i): ONE for i in range(tgt.dim(n))})
        for n in tgt.degrees()}, check=False)
    shifted = src.shift(-1)
    proj = ChainMap(c, shifted, {
        n: SparseMatrix(src.dim(n + 1), c.dim(n),
                        {(i, i + tgt.dim(n)): ONE for i in range(src.dim(n + 1))})
        for n in c.degrees()}, check=False)
    return c, inc, proj


def is_quasi_iso(f: ChainMap) -> bool:
    """True iff cone(f) is acyclic in every degree."""
    return Cohomology(cone(f)).is_acyclic()


def is_quasi_iso_in_range(f: ChainMap, lo: int, hi: int) -> bool:
    """Quasi-isomorphism verdict restricted to cone degrees [lo-1, hi]."""
    coh = Cohomology(cone(f))
    return all(coh.dim(n) == 0 for n in range(lo - 1, hi + 1))


def hom_complex(c: FinComplex, d: FinComplex) -> FinComplex:
    """Hom^n = prod_p Hom(c^p, d^{p+n}); basis ordered by (p, target, source)."""
    builder = HomComplexBuilder(c, d)
    return builder.complex


class HomComplexBuilder:
    """Hom complex with the (p, i, j) basis bookkeeping exposed.

    Basis element (p, i, j) of Hom^n sends basis vector j of c^p to basis
    vector i of d^{p+n}.
    """

    def __init__(self, c: FinComplex, d: FinComplex):
        self.c = c
        self.d = d
        self.index: dict[int, dict[tuple[int, int, int], int]] = {}
        dims: dict[int, int] = {}
        if not c.is_zero() and not d.is_zero():
            clo, chi = c.support
            dlo, dhi = d.support
            for n in range(dlo - chi, dhi - clo + 1):
                table: dict[tuple[int, int, int], int] = {}
                pos = 0
                for p in c.degrees():
                    if d.dim(p + n) == 0:
                        continue
                    for i in range(d.dim(p + n)):
                        for j in range(c.dim(p)):
                            table[(p, i, j)] = pos
                            pos += 1
                if table:
                    self.index[n] = table
                    dims[n] = pos
        diffs: dict[int, SparseMatrix] = {}
        for n, table in self.index.items():
            target = self.index.get(n + 1, {})
            entries: dict[tuple[int, int], Fraction] = {}
            sign = Fraction(-1) if n % 2 else ONE
            for (p, i, j), col in table.items():
                # d_target o f
                for (i2, i1), v in self.d.diff(p + n).items():
                    if i1 == i:
                        row = target.get((p, i2, j))
                        if row is not None:
                            entries[(row, col)] = entries.get((row, col), ZERO) + v
                # -(-1)^n f o d_source
                for (j2, j1), v in self.c.diff(p - 1).items():
                    if j2 == j:
                        row = target.get((p - 1, i, j1))
                        if row is not None:
                            entries[(row, col)] = entries.get((row, col), ZERO) - sign * v
            rows = dims.get(n + 1, 0)
            diffs[n] = SparseMatrix(rows, dims.get(n, 0), entries)
        self.complex = FinComplex(dims, diffs)

    def pack(self, n: int, components: dict[tuple[int, int, int], Fraction]) -> list[Fraction]:
        vec = [ZERO] * self.complex.dim(n)
        table = self.index.get(n, {})
        for key, v in components.items():
            vec[table[key]] = scalar(v)
        return vec

    def chain_map_from_cocycle(self, vec: Sequence[Fraction]) -> ChainMap:
        """Interpret a closed degree-0 element as a chain map c -> d."""
        table = self.index.get(0, {})
        comps: dict[int, dict[tuple[int, int], Fraction]] = {}
        for (p, i, j), pos in table.items():
            v = vec[pos]
            if v != 0:
                comps.setdefault(p, {})[(i, j)] = v
        f = {p: SparseMatrix(self.d.dim(p), self.c.dim(p), ent)
             for p, ent in comps.items()}
        return ChainMap(self.c, self.d, f)


def tensor(c: FinComplex, d: FinComplex) -> FinComplex:
    return TensorComplexBuilder(c, d).complex


class TensorComplexBuilder:
    """Graded tensor product with Koszul signs; basis (p, i, j) with
    i in c^p, j in d^{n-p}."""

    def __init__(self, c: FinComplex, d: FinComplex):
        self.c = c
        self.d = d
        self.index: dict[int, dict[tuple[int, int, int], int]] = {}
        dims: dict[int, int] = {}
        if not c.is_zero() and not d.is_zero():
            clo, chi = c.support
            dlo, dhi = d.support
            for n in range(clo + dlo, chi + dhi + 1):
                table: dict[tuple[int, int, int], int] = {}
                pos = 0
                for p in c.degrees():
                    q = n - p
                    if d.dim(q) == 0:
                        continue
                    for i in range(c.dim(p)):
                        for j in range(d.dim(q)):
                            table[(p, i, j)] = pos
                            pos += 1
                if table:
                    self.index[n] = table
                    dims[n] = pos
        diffs: dict[int, SparseMatrix] = {}
        for n, table in self.index.items():
            target = self.index.get(n + 1, {})
            entries: dict[tuple[int, int], Fraction] = {}
            for (p, i, j), col in table.items():
                sign = Fraction(-1) if p % 2 else ONE
                for (i2, i1), v in self.c.diff(p).items():
                    if i1 == i:
                        row = target.get((p + 1, i2, j))
                        if row is not None:
                            entries[(row, col)] = entries.get((row, col), ZERO) + v
                for (j2, j1), v in self.d.diff(n - p).items():
                    if j1 == j:
                        row = target.get((p, i, j2))
                        if row is not None:
                            entries[(row, col)] = entries.get((row, col), ZERO) + sign * v
            diffs[n] = SparseMatrix(dims.get(n + 1, 0), dims.get(n, 0), entries)
        self.complex = FinComplex(dims, diffs)


class Square:
    """A strictly commuting square A -> B, A -> C, B -> D, C -> D."""

    __slots__ = ("ab", "ac", "bd", "cd")

    def __init__(self, ab: ChainMap, ac: ChainMap, bd: ChainMap, cd: ChainMap):
        if ab.source is not ac.source:
            raise ValueError("A corner mismatch")
        if bd.target is not cd.target:
            raise ValueError("D corner mismatch")
        if ab.target is not bd.source or ac.target is not cd.source:
            raise ValueError("square corners do not line up")
        self.ab, self.ac, self.bd, self.cd = ab, ac, bd, cd
        left = bd.compose(ab)
        right = cd.compose(ac)
        for n in ab.source.degrees():
            if left.component(n) != right.component(n):
                raise ValueError(f"square does not commute at degree {n}")

    def transpose(self) -> "Square":
        return Square(self.ac, self.ab, self.cd, self.bd)


def is_homotopy_cartesian(s: Square) -> bool:
    """True iff cone(A -> C) -> cone(B -> D) is a quasi-isomorphism."""
    cone_ac = cone(s.ac)
    cone_bd = cone(s.bd)
    comps = {}
    for n in cone_ac.degrees():
        ct = s.ac.target.dim(n)      # C^n block
        bt = s.bd.target.dim(n)      # D^n block
        entries = {}
        for (i, j), v in s.cd.component(n).items():
            entries[(i, j)] = v
        for (i, j), v in s.ab.component(n + 1).items():
            entries[(i + bt, j + ct)] = v
        comps[n] = SparseMatrix(cone_bd.dim(n), cone_ac.dim(n), entries)
    induced = ChainMap(cone_ac, cone_bd, comps)
    return is_quasi_iso(induced)
