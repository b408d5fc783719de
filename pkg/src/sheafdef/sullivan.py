"""Polynomial differential forms on simplices and Thom-Whitney totalization.

Forms on the n-simplex use the coordinates t_1..t_n with t_0 eliminated as
1 - sum t_i, so monomials t^a dt_S are unique normal forms.  The polynomial
degree deg t = deg dt = 1 grades everything: d preserves it, cosimplicial
structure maps do not increase it, so capping the polynomial degree yields
honest subcomplexes of the totalization.  Truncation overflow is always an
error carrying the needed cap, never silent.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import factorial
from typing import Optional, Sequence

from .exactla import ONE, ZERO, SparseMatrix, scalar
from .complexes import ChainMap, Cohomology, FinComplex, is_quasi_iso_in_range
from .site import ValidationReport
from .dglie import (ArtinBase, CapError, DgLie, GVec, abelian_dglie,
                    tensor_nilpotent)

TermKey = tuple  # (exponent tuple, dt index tuple sorted ascending)


class PolyForm:
    """Polynomial differential form on the standard n-simplex."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Optional[dict[TermKey, Fraction]] = None):
        self.n = n
        self.terms = {k: v for k, v in (terms or {}).items() if v != 0}

    # -- constructors ----------------------------------------------------

    @staticmethod
    def zero(n: int) -> "PolyForm":
        return PolyForm(n)

    @staticmethod
    def const(n: int, c) -> "PolyForm":
        c = scalar(c)
        if c == 0:
            return PolyForm(n)
        return PolyForm(n, {(tuple([0] * n), ()): c})

    @staticmethod
    def coordinate(n: int, i: int) -> "PolyForm":
        """t_i for 1 <= i <= n; t_0 is 1 - sum of the others."""
        if i == 0:
            out = PolyForm.const(n, 1)
            for j in range(1, n + 1):
                out = out - PolyForm.coordinate(n, j)
            return out
        exps = [0] * n
        exps[i - 1] = 1
        return PolyForm(n, {(tuple(exps), ()): ONE})

    @staticmethod
    def dt(n: int, i: int) -> "PolyForm":
        if i == 0:
            out = PolyForm.zero(n)
            for j in range(1, n + 1):
                out = out - PolyForm.dt(n, j)
            return out
        return PolyForm(n, {(tuple([0] * n), (i - 1,)): ONE})

    # -- algebra -----------------------------------------------------------

    def __add__(self, other: "PolyForm") -> "PolyForm":
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, ZERO) + v
        return PolyForm(self.n, terms)

    def __sub__(self, other: "PolyForm") -> "PolyForm":
        return self + other.scale(Fraction(-1))

    def scale(self, c) -> "PolyForm":
        c = scalar(c)
        return PolyForm(self.n, {k: c * v for k, v in self.terms.items()})

    def __mul__(self, other: "PolyForm") -> "PolyForm":
        terms: dict[TermKey, Fraction] = {}
        for (e1, s1), c1 in self.terms.items():
            for (e2, s2), c2 in other.terms.items():
                if set(s1) & set(s2):
                    continue
                exps = tuple(a + b for a, b in zip(e1, e2))
                merged = tuple(sorted(s1 + s2))
                inv = sum(1 for x in s1 for y in s2 if x > y)
                sign = Fraction(-1) ** inv
                key = (exps, merged)
                terms[key] = terms.get(key, ZERO) + sign * c1 * c2
        return PolyForm(self.n, terms)

    def d(self) -> "PolyForm":
        terms: dict[TermKey, Fraction] = {}
        for (exps, dts), c in self.terms.items():
            for i, e in enumerate(exps):
                if e == 0 or i in dts:
                    continue
                new_exps = list(exps)
                new_exps[i] -= 1
                sign = Fraction(-1) ** sum(1 for s in dts if s < i)
                key = (tuple(new_exps), tuple(sorted(dts + (i,))))
                terms[key] = terms.get(key, ZERO) + sign * c * e
        return PolyForm(self.n, terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return (isinstance(other, PolyForm) and self.n == other.n
                and self.terms == other.terms)

    def form_degrees(self) -> set[int]:
        return {len(dts) for (_, dts) in self.terms}

    def poly_degree(self) -> int:
        return max((sum(e) + len(dts) for (e, dts) in self.terms), default=0)

    def homogeneous_part(self, form_degree: int) -> "PolyForm":
        return PolyForm(self.n, {k: v for k, v in self.terms.items()
                                 if len(k[1]) == form_degree})

    def substitute(self, target_n: int, images: Sequence["PolyForm"]) -> "PolyForm":
        """Pullback along a simplex map given by the images of t_1..t_n;
        dt images are the differentials of the t images."""
        if len(images) != self.n:
            raise ValueError("need an image for every coordinate")
        d_images = [img.d() for img in images]
        out = PolyForm.zero(target_n)
        for (exps, dts), c in self.terms.items():
            acc = PolyForm.const(target_n, c)
            for i, e in enumerate(exps):
                for _ in range(e):
                    acc = acc * images[i]
            for s in dts:
                acc = acc * d_images[s]
            out = out + acc
        return out

    def evaluate_vertex(self, v: int) -> Fraction:
        """Value of the 0-form part at vertex v (bary t_v = 1)."""
        total = ZERO
        for (exps, dts), c in self.terms.items():
            if dts:
                continue
            if v == 0:
                if all(e == 0 for e in exps):
                    total += c
            else:
                if all(e == 0 for i, e in enumerate(exps) if i != v - 1):
                    total += c
        return total

    def integrate_top(self) -> Fraction:
        """Integral over the simplex of the top form-degree part."""
        total = ZERO
        top = tuple(range(self.n))
        for (exps, dts), c in self.terms.items():
            if dts != top:
                continue
            num = ONE
            for e in exps:
                num *= factorial(e)
            total += c * num / factorial(sum(exps) + self.n)
        return total


def face_pullback(i: int, omega: PolyForm) -> PolyForm:
    """Pullback along the i-th coface, a form on the (n-1)-simplex."""
    n = omega.n
    if not 0 <= i <= n:
        raise ValueError("face index out of range")
    images = []
    for j in range(1, n + 1):
        if j < i:
            images.append(PolyForm.coordinate(n - 1, j))
        elif j == i and i >= 1:
            images.append(PolyForm.zero(n - 1))
        else:
            # j > i: bary coordinate t_{j-1} of the small simplex; j-1 = 0
            # happens only for i = 0
            images.append(PolyForm.coordinate(n - 1, j - 1))
    return omega.substitute(n - 1, images)


def degeneracy_pullback(i: int, omega: PolyForm) -> PolyForm:
    """Pullback along the i-th codegeneracy, a form on the (n+1)-simplex."""
    n = omega.n
    if not 0 <= i <= n:
        raise ValueError("degeneracy index out of range")
    images = []
    for j in range(1, n + 1):
        if j < i:
            images.append(PolyForm.coordinate(n + 1, j))
        elif j == i:
            images.append(PolyForm.coordinate(n + 1, i) +
                          PolyForm.coordinate(n + 1, i + 1))
        else:
            images.append(PolyForm.coordinate(n + 1, j + 1))
    return omega.substitute(n + 1, images)


def pullback_monotone(f: Sequence[int], omega: PolyForm, target_n: int) -> PolyForm:
    """Pullback along the simplex map induced by a monotone f: [n']->[n]."""
    n = omega.n
    if len(f) != target_n + 1 or (f and max(f) > n):
        raise ValueError("monotone map shape mismatch")
    images = []
    for j in range(1, n + 1):
        acc = PolyForm.zero(target_n)
        for l, v in enumerate(f):
            if v == j:
                acc = acc + PolyForm.coordinate(target_n, l)
        images.append(acc)
    return omega.substitute(target_n, images)


def monomial_basis(n: int, max_poly_degree: int) -> list[TermKey]:
    """All monomials t^a dt_S on the n-simplex of polynomial degree <= cap."""
    out = []
    for r in range(0, n + 1):
        for dts in itertools.combinations(range(n), r):
            budget = max_poly_degree - r
            if budget < 0:
                continue
            for exps in _exponents(n, budget):
                out.append((exps, dts))
    return out


def _exponents(n: int, budget: int):
    if n == 0:
        yield ()
        return
    for head in range(budget + 1):
        for rest in _exponents(n - 1, budget - head):
            yield (head,) + rest


def whitney_form(q: int, vertices: Sequence[int]) -> PolyForm:
    """The elementary Whitney form of a strictly increasing vertex tuple,
    normalized so that its integral over the spanned face is 1."""
    p = len(vertices) - 1
    out = PolyForm.zero(q)
    ts = [PolyForm.coordinate(q, v) for v in vertices]
    dts = [PolyForm.dt(q, v) for v in vertices]
    for i in range(p + 1):
        term = ts[i]
        for j in range(p + 1):
            if j != i:
                term = term * dts[j]
        out = out + term.scale(Fraction(-1) ** i)
    return out.scale(Fraction(factorial(p)))


# -- cosimplicial dg Lie algebras -----------------------------------------------------


class CosimplicialDgLie:
    """Levels g^0..g^d with coface and codegeneracy dg Lie maps.

    Maps are dicts degree -> SparseMatrix; cofaces[(p, i)] : g^{p-1} -> g^p
    for 1 <= p <= d, codegens[(p, i)] : g^{p+1} -> g^p for 0 <= p < d.
    """

    def __init__(self, levels: Sequence[DgLie],
                 cofaces: dict[tuple[int, int], dict[int, SparseMatrix]],
                 codegens: dict[tuple[int, int], dict[int, SparseMatrix]]):
        self.levels = list(levels)
        self.cofaces = cofaces
        self.codegens = codegens

    @property
    def top(self) -> int:
        return len(self.levels) - 1

    def level(self, p: int) -> DgLie:
        return self.levels[p]

    def coface_matrix(self, p: int, i: int, degree: int) -> SparseMatrix:
        mats = self.cofaces[(p, i)]
        mat = mats.get(degree)
        if mat is None:
            mat = SparseMatrix(self.levels[p].dim(degree),
                               self.levels[p - 1].dim(degree))
        return mat

    def codegen_matrix(self, p: int, i: int, degree: int) -> SparseMatrix:
        mats = self.codegens[(p, i)]
        mat = mats.get(degree)
        if mat is None:
            mat = SparseMatrix(self.levels[p].dim(degree),
                               self.levels[p + 1].dim(degree))
        return mat

    def monotone_matrix(self, f: Sequence[int], p: int, q: int,
                        degree: int) -> SparseMatrix:
        """g(f): g^p -> g^q for a monotone f: [p] -> [q], composed from
        generators."""
        # factor f = (cofaces) o (codegens); apply codegens first
        mat = SparseMatrix.identity(self.levels[p].dim(degree))
        cur = p
        values = list(f)
        # epi part: repeated values give codegeneracies
        epi_part = []
        seen = []
        for idx in range(1, len(values)):
            if values[idx] == values[idx - 1]:
                epi_part.append(idx - 1 - len(epi_part))
        for i in reversed(sorted(epi_part)):
            # sigma^i : [cur] -> [cur - 1]
            mat = self.codegen_matrix(cur - 1, i, degree) @ mat
            cur -= 1
        image = sorted(set(values))
        missing = [v for v in range(q + 1) if v not in image]
        for v in sorted(missing):
            mat = self.coface_matrix(cur + 1, v, degree) @ mat
            cur += 1
        if cur != q:
            raise ValueError("monotone factorization mismatch")
        return mat

    def degrees(self) -> list[int]:
        out = set()
        for lvl in self.levels:
            out.update(lvl.degrees())
        return sorted(out)

    def validate(self) -> ValidationReport:
        rep = ValidationReport("cosimplicial dg Lie")
        degs = self.degrees()
        # cosimplicial identities on generators, checked via two-step paths
        for p in range(2, self.top + 1):
            for i in range(p + 1):
                for j in range(i + 1, p + 1):
                    for n in degs:
                        left = self.coface_matrix(p, j, n) @ self.coface_matrix(p - 1, i, n)
                        right = self.coface_matrix(p, i, n) @ self.coface_matrix(p - 1, j - 1, n)
                        if left != right:
                            rep.error(f"coface identity fails at p={p}, (i,j)=({i},{j})")
        # sigma^j sigma^i = sigma^i sigma^{j+1} for i <= j, applied to g
        for p in range(0, self.top - 1):
            for i in range(p + 1):
                for j in range(i, p + 1):
                    for n in degs:
                        left = self.codegen_matrix(p, j, n) @ self.codegen_matrix(p + 1, i, n)
                        right = self.codegen_matrix(p, i, n) @ self.codegen_matrix(p + 1, j + 1, n)
                        if left != right:
                            rep.error(f"codegeneracy identity fails at p={p}, (i,j)=({i},{j})")
        # sigma^j delta^i relations
        for p in range(0, self.top):
            for j in range(p + 1):
                for i in range(p + 2):
                    for n in degs:
                        lhs = self.codegen_matrix(p, j, n) @ self.coface_matrix(p + 1, i, n)
                        if i == j or i == j + 1:
                            rhs = SparseMatrix.identity(self.levels[p].dim(n))
                        elif i < j:
                            rhs = self.coface_matrix(p, i, n) @ self.codegen_matrix(p - 1, j - 1, n) \
                                if p >= 1 else None
                        else:
                            rhs = self.coface_matrix(p, i - 1, n) @ self.codegen_matrix(p - 1, j, n) \
                                if p >= 1 else None
                        if rhs is not None and lhs != rhs:
                            rep.error(
                                f"mixed identity fails at p={p}, (i,j)=({i},{j})")
        # structure maps are chain maps and respect brackets where defined
        for (p, i), mats in self.cofaces.items():
            src, tgt = self.levels[p - 1], self.levels[p]
            for n in src.degrees():
                left = tgt.complex.diff(n) @ self.coface_matrix(p, i, n)
                right = self.coface_matrix(p, i, n + 1) @ src.complex.diff(n)
                if left != right:
                    rep.error(f"coface ({p},{i}) is not a chain map at degree {n}")
        return rep


def constant_cosimplicial(g: DgLie, d: int) -> CosimplicialDgLie:
    levels = [g] * (d + 1)
    ident = {n: SparseMatrix.identity(g.dim(n)) for n in g.degrees()}
    cofaces = {(p, i): ident for p in range(1, d + 1) for i in range(p + 1)}
    codegens = {(p, i): ident for p in range(0, d) for i in range(p + 1)}
    return CosimplicialDgLie(levels, cofaces, codegens)


# -- normalized total complex of a cosimplicial dg Lie ------------------------------


class NormalizedTotal:
    """Total complex of the codegeneracy-normalized cochains, with the
    differential sum (-1)^i d^i + (-1)^level d_internal."""

    def __init__(self, g: CosimplicialDgLie):
        self.g = g
        self.normal: dict[tuple[int, int], "KernelSolver"] = {}
        dims: dict[int, int] = {}
        self.layout: dict[int, list[tuple[int, int]]] = {}
        degs = g.degrees()
        if not degs:
            self.complex = FinComplex({}, {})
            return
        lo, hi = min(degs), max(degs)
        for n in range(lo, hi + g.top + 1):
            entries = []
            for p in range(0, g.top + 1):
                m = n - p
                dim = g.level(p).dim(m)
                if dim == 0:
                    continue
                solver = self._normal_solver(p, m)
                if solver.dim == 0:
                    continue
                self.normal[(p, m)] = solver
                entries.append((p, solver.dim))
            if entries:
                self.layout[n] = entries
                dims[n] = sum(d for _, d in entries)
        diffs = {}
        for n, entries in self.layout.items():
            tgt_entries = self.layout.get(n + 1, [])
            tgt_offsets = {}
            pos = 0
            for p, d in tgt_entries:
                tgt_offsets[p] = pos
                pos += d
            rows = dims.get(n + 1, 0)
            mat_entries: dict[tuple[int, int], Fraction] = {}
            col = 0
            for p, d in entries:
                m = n - p
                solver = self.normal[(p, m)]
                for t in range(d):
                    vec = solver.expand_unit(t)
                    # internal differential with sign (-1)^p
                    if (p, m + 1) in self.normal or self.g.level(p).dim(m + 1):
                        dint = self.g.level(p).complex.diff(m).mul_vec(vec)
                        if any(c != 0 for c in dint) and p in tgt_offsets:
                            coords = self._coords(p, m + 1, dint)
                            sgn = Fraction(-1) ** p
                            for r, c in enumerate(coords):
                                if c != 0:
                                    mat_entries[(tgt_offsets[p] + r, col)] = \
                                        mat_entries.get((tgt_offsets[p] + r, col), ZERO) + sgn * c
                    # Cech part into level p+1
                    if p + 1 <= self.g.top and (p + 1) in tgt_offsets:
                        out = [ZERO] * self.g.level(p + 1).dim(m)
                        for i in range(p + 2):
                            img = self.g.coface_matrix(p + 1, i, m).mul_vec(vec)
                            sgn = Fraction(-1) ** i
                            for r, c in enumerate(img):
                                out[r] += sgn * c
                        if any(c != 0 for c in out):
                            coords = self._coords(p + 1, m, out)
                            for r, c in enumerate(coords):
                                if c != 0:
                                    key = (tgt_offsets[p + 1] + r, col)
                                    mat_entries[key] = mat_entries.get(key, ZERO) + c
                    col += 1
            diffs[n] = SparseMatrix(rows, dims.get(n, 0), mat_entries)
        self.complex = FinComplex(dims, diffs)

    def _normal_solver(self, p: int, m: int) -> "KernelSolver":
        g = self.g
        dim = g.level(p).dim(m)
        rows: list[dict[int, Fraction]] = []
        if p >= 1:
            for i in range(p):
                mat = g.codegen_matrix(p - 1, i, m)
                for r in range(mat.rows):
                    row = {c: v for (rr, c), v in mat.items() if rr == r}
                    if row:
                        rows.append(row)
        return KernelSolver(rows, dim)

    def _coords(self, p: int, m: int, vec) -> list[Fraction]:
        solver = self.normal.get((p, m))
        if solver is None:
            if any(c != 0 for c in vec):
                raise ValueError("vector is not normalized")
            return []
        return solver.coords(vec)


class KernelSolver:
    """Kernel of sparse constraint rows with O(1) coordinate extraction via
    the free columns of the reduced echelon form."""

    def __init__(self, rows: list[dict[int, Fraction]], ncols: int):
        from .exactla import _rref_rows
        reduced, pivots = _rref_rows(rows, ncols)
        self.ncols = ncols
        self.pivots = pivots
        pivot_set = set(pivots)
        self.free = [j for j in range(ncols) if j not in pivot_set]
        self.piv_rows = {min(r): r for r in reduced}
        self.dim = len(self.free)

    def expand(self, coords: Sequence[Fraction]) -> list[Fraction]:
        vec = [ZERO] * self.ncols
        for f, c in zip(self.free, coords):
            vec[f] = c
        for p in self.pivots:
            row = self.piv_rows[p]
            s = ZERO
            for j, v in row.items():
                if j != p and vec[j] != 0:
                    s += v * vec[j]
            vec[p] = -s
        return vec

    def expand_unit(self, t: int) -> list[Fraction]:
        return self.expand([ONE if i == t else ZERO for i in range(self.dim)])

    def coords(self, vec: Sequence[Fraction]) -> list[Fraction]:
        coords = [vec[f] for f in self.free]
        check = self.expand(coords)
        if list(vec) != check:
            raise ValueError("vector does not satisfy the constraints")
        return coords


# -- Thom-Whitney totalization --------------------------------------------------------


class TWComplex:
    """Compatible families (omega_p in Omega_p (x) g^p) of polynomial degree
    <= cap, realized as a FinComplex with a partial bracket."""

    def __init__(self, g: CosimplicialDgLie, cap: int):
        self.g = g
        self.cap = cap
        self.ambient: dict[int, list[tuple[int, TermKey, int, int]]] = {}
        degs = g.degrees()
        self._mono: dict[int, list[TermKey]] = {
            q: monomial_basis(q, cap) for q in range(g.top + 1)}
        if degs:
            lo, hi = min(degs), max(degs)
            for n in range(lo, hi + g.top + 1):
                basis = []
                for q in range(g.top + 1):
                    for key in self._mono[q]:
                        r = len(key[1])
                        m = n - r
                        for j in range(g.level(q).dim(m)):
                            basis.append((q, key, m, j))
                if basis:
                    self.ambient[n] = basis
        self.solvers: dict[int, KernelSolver] = {}
        dims = {}
        for n, basis in self.ambient.items():
            rows = self._constraints(n)
            solver = KernelSolver(rows, len(basis))
            if solver.dim:
                self.solvers[n] = solver
                dims[n] = solver.dim
        diffs = {}
        for n in sorted(self.solvers):
            if n + 1 not in self.solvers:
                continue
            src, tgt = self.solvers[n], self.solvers[n + 1]
            entries = {}
            for t in range(src.dim):
                vec = src.expand_unit(t)
                img = self._differential(n, vec)
                coords = tgt.coords(img)
                for r, c in enumerate(coords):
                    if c != 0:
                        entries[(r, t)] = c
            diffs[n] = SparseMatrix(tgt.dim, src.dim, entries)
        self.complex = FinComplex(dims, diffs)

    # the ambient differential d(omega (x) x) = d omega (x) x + (-1)^r omega (x) dx
    def _differential(self, n: int, vec: Sequence[Fraction]) -> list[Fraction]:
        basis = self.ambient[n]
        tgt_basis = self.ambient.get(n + 1, [])
        tgt_pos = {b: i for i, b in enumerate(tgt_basis)}
        out = [ZERO] * len(tgt_basis)
        for idx, c in enumerate(vec):
            if c == 0:
                continue
            q, key, m, j = basis[idx]
            form = PolyForm(q, {key: ONE})
            dform = form.d()
            for k2, c2 in dform.terms.items():
                pos = tgt_pos.get((q, k2, m, j))
                if pos is not None:
                    out[pos] += c * c2
            sgn = Fraction(-1) ** len(key[1])
            for (r2, c2col), v in self.g.level(q).complex.diff(m).items():
                if c2col == j:
                    pos = tgt_pos.get((q, key, m + 1, r2))
                    if pos is not None:
                        out[pos] += sgn * c * v
        return out

    def _constraints(self, n: int) -> list[dict[int, Fraction]]:
        basis = self.ambient[n]
        pos = {b: i for i, b in enumerate(basis)}
        rows: list[dict[int, Fraction]] = []
        g = self.g
        # pullback caches per (q, direction, index, monomial)
        for q in range(1, g.top + 1):
            for i in range(q + 1):
                # row space: Omega_{q-1}^{<=cap} (x) g^q terms
                row_index: dict[tuple[TermKey, int], int] = {}
                row_acc: list[dict[int, Fraction]] = []

                def row_of(key2, jj):
                    keyfull = (key2, jj)
                    if keyfull not in row_index:
                        row_index[keyfull] = len(row_acc)
                        row_acc.append({})
                    return row_acc[row_index[keyfull]]

                for idx, (bq, key, m, j) in enumerate(basis):
                    if bq == q:
                        # Omega(delta^i) applied to the form factor
                        pulled = face_pullback(i, PolyForm(q, {key: ONE}))
                        for k2, c2 in pulled.terms.items():
                            row_of(k2, j)[idx] = row_of(k2, j).get(idx, ZERO) + c2
                    elif bq == q - 1:
                        mat = g.coface_matrix(q, i, m)
                        for (r2, c2col), v in mat.items():
                            if c2col == j:
                                row_of(key, r2)[idx] = \
                                    row_of(key, r2).get(idx, ZERO) - v
                rows.extend(r for r in row_acc if r)
        for q in range(0, g.top):
            for i in range(q + 1):
                row_index2: dict[tuple[TermKey, int], int] = {}
                row_acc2: list[dict[int, Fraction]] = []

                def row_of2(key2, jj):
                    keyfull = (key2, jj)
                    if keyfull not in row_index2:
                        row_index2[keyfull] = len(row_acc2)
                        row_acc2.append({})
                    return row_acc2[row_index2[keyfull]]

                for idx, (bq, key, m, j) in enumerate(basis):
                    if bq == q:
                        pulled = degeneracy_pullback(i, PolyForm(q, {key: ONE}))
                        for k2, c2 in pulled.terms.items():
                            row_of2(k2, j)[idx] = row_of2(k2, j).get(idx, ZERO) + c2
                    elif bq == q + 1:
                        mat = g.codegen_matrix(q, i, m)
                        for (r2, c2col), v in mat.items():
                            if c2col == j:
                                row_of2(key, r2)[idx] = \
                                    row_of2(key, r2).get(idx, ZERO) - v
                rows.extend(r for r in row_acc2 if r)
        return rows

    # -- elements ---------------------------------------------------------------

    def dim(self, n: int) -> int:
        solver = self.solvers.get(n)
        return solver.dim if solver else 0

    def level_component(self, n: int, coords: Sequence[Fraction], q: int
                        ) -> dict[TermKey, list[Fraction]]:
        """The Omega_q (x) g^q component of a TW vector, as form-monomial ->
        g-coefficient list."""
        solver = self.solvers[n]
        vec = solver.expand(coords)
        out: dict[TermKey, list[Fraction]] = {}
        for idx, c in enumerate(vec):
            if c == 0:
                continue
            bq, key, m, j = self.ambient[n][idx]
            if bq != q:
                continue
            comp = out.setdefault(key, [ZERO] * self.g.level(q).dim(m))
            comp[j] += c
        return out

    def bracket_coords(self, n1: int, coords1, n2: int, coords2) -> list[Fraction]:
        """Pointwise bracket of two TW elements; errors if the polynomial
        degree leaves the cap."""
        v1 = self.solvers[n1].expand(coords1)
        v2 = self.solvers[n2].expand(coords2)
        n = n1 + n2
        tgt_basis = self.ambient.get(n, [])
        tgt_pos = {b: i for i, b in enumerate(tgt_basis)}
        out = [ZERO] * len(tgt_basis)
        for i1, c1 in enumerate(v1):
            if c1 == 0:
                continue
            q1, key1, m1, j1 = self.ambient[n1][i1]
            for i2, c2 in enumerate(v2):
                if c2 == 0:
                    continue
                q2, key2, m2, j2 = self.ambient[n2][i2]
                if q1 != q2:
                    continue
                sc = self.g.level(q1).bracket_basis(m1, j1, m2, j2)
                if not sc:
                    continue
                form = PolyForm(q1, {key1: ONE}) * PolyForm(q1, {key2: ONE})
                sign = Fraction(-1) ** (m1 * len(key2[1]))
                for k3, c3 in form.terms.items():
                    if sum(k3[0]) + len(k3[1]) > self.cap:
                        raise CapError(
                            f"bracket needs polynomial degree "
                            f"{sum(k3[0]) + len(k3[1])} > cap {self.cap}")
                    for g3, cg in sc.items():
                        pos = tgt_pos.get((q1, k3, m1 + m2, g3))
                        if pos is not None:
                            out[pos] += sign * c1 * c2 * c3 * cg
        coords = self.solvers[n].coords(out) if n in self.solvers else []
        return coords

    def as_dglie(self) -> DgLie:
        """The TW complex with its (lazily evaluated) bracket."""
        tw = self

        class _TWLie(DgLie):
            def __init__(self):
                super().__init__(tw.complex, {}, name="tw-tot")

            def bracket_basis(self, p, i, q, j):
                coords = tw.bracket_coords(
                    p, [ONE if t == i else ZERO for t in range(tw.dim(p))],
                    q, [ONE if t == j else ZERO for t in range(tw.dim(q))])
                return {k: c for k, c in enumerate(coords) if c != 0}

        return _TWLie()

    def integrate_map(self, target: NormalizedTotal) -> ChainMap:
        """Componentwise simplex integration onto the normalized total
        complex; a chain map by Stokes."""
        comps = {}
        for n in sorted(self.solvers):
            solver = self.solvers[n]
            entries = {}
            tgt_entries = target.layout.get(n, [])
            tgt_offsets = {}
            pos = 0
            for p, d in tgt_entries:
                tgt_offsets[p] = pos
                pos += d
            for t in range(solver.dim):
                vec = solver.expand_unit(t)
                per_level: dict[int, list[Fraction]] = {}
                for idx, c in enumerate(vec):
                    if c == 0:
                        continue
                    q, key, m, j = self.ambient[n][idx]
                    if len(key[1]) != q:
                        continue  # only top forms integrate
                    val = PolyForm(q, {key: c}).integrate_top()
                    if val != 0:
                        comp = per_level.setdefault(
                            q, [ZERO] * self.g.level(q).dim(n - q))
                        comp[j] += val
                for q, comp in per_level.items():
                    if q not in tgt_offsets:
                        if any(c != 0 for c in comp):
                            raise ValueError("integration hit a missing layer")
                        continue
                    coords = target._coords(q, n - q, comp)
                    for r, c in enumerate(coords):
                        if c != 0:
                            entries[(tgt_offsets[q] + r, t)] = c
            comps[n] = SparseMatrix(target.complex.dim(n), solver.dim, entries)
        return ChainMap(self.complex, target.complex, comps)

    def whitney_embed(self, target: NormalizedTotal, p: int, m: int,
                      normal_coords: Sequence[Fraction]) -> list[Fraction]:
        """Whitney embedding of a normalized cochain, as TW coordinates."""
        return self.whitney_coords(target, p, m, normal_coords)

    def integrate(self, target: NormalizedTotal) -> ChainMap:
        """Componentwise simplex integration onto the normalized total."""
        return self.integrate_map(target)

    def whitney_coords(self, target: NormalizedTotal, p: int, m: int,
                       normal_coords: Sequence[Fraction]) -> list[Fraction]:
        """TW coordinates of the Whitney embedding of a normalized cochain."""
        solver = target.normal[(p, m)]
        cvec = solver.expand(normal_coords)
        n = p + m
        basis = self.ambient.get(n, [])
        pos = {b: i for i, b in enumerate(basis)}
        out = [ZERO] * len(basis)
        for q in range(p, self.g.top + 1):
            for vertices in itertools.combinations(range(q + 1), p + 1):
                w = whitney_form(q, vertices)
                if w.poly_degree() > self.cap:
                    raise CapError(
                        f"Whitney embedding needs polynomial degree "
                        f"{w.poly_degree()} > cap {self.cap}")
                mono = tuple(vertices)
                f = _vertex_inclusion(mono, q)
                mat = self.g.monotone_matrix(f, p, q, m)
                gimg = mat.mul_vec(cvec)
                if all(c == 0 for c in gimg):
                    continue
                for key, c in w.terms.items():
                    for j, cj in enumerate(gimg):
                        if cj != 0:
                            idx = pos.get((q, key, m, j))
                            if idx is None:
                                raise CapError(
                                    "Whitney embedding left the capped ambient")
                            out[idx] += c * cj
        return self.solvers[n].coords(out)


def _vertex_inclusion(vertices: Sequence[int], q: int) -> tuple[int, ...]:
    return tuple(vertices)


def tw_tot(g: CosimplicialDgLie, cap: int) -> TWComplex:
    return TWComplex(g, cap)


class TruncationCertificate:
    def __init__(self, cap: int, range_: tuple[int, int], quasi_iso: bool,
                 dims_tw: dict[int, int], dims_normal: dict[int, int]):
        self.cap = cap
        self.range = range_
        self.quasi_iso = quasi_iso
        self.dims_tw = dims_tw
        self.dims_normal = dims_normal

    def as_dict(self) -> dict:
        return {"cap": self.cap, "degree_range": list(self.range),
                "quasi_iso": self.quasi_iso,
                "h_tw": {str(k): v for k, v in self.dims_tw.items()},
                "h_normalized_total": {str(k): v for k, v in self.dims_normal.items()}}


class ProductDgLie(DgLie):
    """Finite product of dg Lie algebras; brackets are componentwise and
    evaluated lazily through the factors."""

    def __init__(self, factors: Sequence[DgLie], name: str = "product"):
        self.factors = list(factors)
        self.offsets: dict[int, list[int]] = {}
        dims: dict[int, int] = {}
        degs = sorted({n for f in factors for n in f.degrees()})
        for n in degs:
            offs = []
            pos = 0
            for f in factors:
                offs.append(pos)
                pos += f.dim(n)
            self.offsets[n] = offs
            dims[n] = pos
        diffs = {}
        for n in degs:
            entries = {}
            for fi, f in enumerate(self.factors):
                for (r, c), v in f.complex.diff(n).items():
                    entries[(self.offsets.get(n + 1, [0] * len(factors))[fi] + r,
                             self.offsets[n][fi] + c)] = v
            diffs[n] = SparseMatrix(dims.get(n + 1, 0), dims.get(n, 0), entries)
        super().__init__(FinComplex(dims, diffs), {}, name=name)

    def locate(self, n: int, t: int) -> tuple[int, int]:
        offs = self.offsets[n]
        for fi in range(len(self.factors) - 1, -1, -1):
            if t >= offs[fi]:
                return fi, t - offs[fi]
        raise IndexError

    def bracket_basis(self, p: int, i: int, q: int, j: int):
        fi, ii = self.locate(p, i)
        fj, jj = self.locate(q, j)
        if fi != fj:
            return {}
        out = {}
        off = self.offsets.get(p + q)
        if off is None:
            return {}
        for k, c in self.factors[fi].bracket_basis(p, ii, q, jj).items():
            out[off[fi] + k] = c
        return out

    def is_abelian(self) -> bool:
        return all(f.is_abelian() for f in self.factors)


def cosimplicial_from_nerve(hc, values: dict[str, DgLie],
                            restrictions: dict[tuple[str, str], dict[int, SparseMatrix]],
                            top: int) -> CosimplicialDgLie:
    """Levels Hom(V_p, L) = product of L(object) over all level-p entries of
    a hypercover, with cofaces/codegeneracies induced by the faces and
    degeneracies."""
    simp = hc.simp
    site = hc.site

    def restriction_matrix(small: str, big: str, degree: int, rows: int,
                           cols: int) -> SparseMatrix:
        if small == big:
            return SparseMatrix.identity(rows)
        mats = restrictions.get((small, big))
        if mats is None:
            raise ValueError(f"missing restriction {big} -> {small}")
        mat = mats.get(degree)
        if mat is None:
            mat = SparseMatrix(rows, cols)
        return mat

    entry_lists = {p: simp.entries(p) for p in range(top + 1)}
    levels = []
    for p in range(top + 1):
        factors = [values[simp.entry_object(e)] for e in entry_lists[p]]
        levels.append(ProductDgLie(factors, name=f"level{p}"))
    cofaces = {}
    for p in range(1, top + 1):
        tgt = levels[p]
        src = levels[p - 1]
        src_pos = {e: t for t, e in enumerate(entry_lists[p - 1])}
        for i in range(p + 1):
            mats: dict[int, SparseMatrix] = {}
            for n in src.degrees():
                entries = {}
                for te, e in enumerate(entry_lists[p]):
                    fe = simp.face(e, i)
                    se = src_pos[fe]
                    small = simp.entry_object(e)
                    big = simp.entry_object(fe)
                    block = restriction_matrix(
                        small, big, n, values[small].dim(n), values[big].dim(n))
                    for (r, c), v in block.items():
                        entries[(tgt.offsets[n][te] + r,
                                 src.offsets[n][se] + c)] = v
                mats[n] = SparseMatrix(tgt.dim(n), src.dim(n), entries)
            cofaces[(p, i)] = mats
    codegens = {}
    for p in range(0, top):
        tgt = levels[p]
        src = levels[p + 1]
        src_pos = {e: t for t, e in enumerate(entry_lists[p + 1])}
        for i in range(p + 1):
            mats = {}
            for n in src.degrees():
                entries = {}
                for te, e in enumerate(entry_lists[p]):
                    de = simp.degeneracy(e, i)
                    se = src_pos[de]
                    dim = values[simp.entry_object(e)].dim(n)
                    for r in range(dim):
                        entries[(tgt.offsets[n][te] + r,
                                 src.offsets[n][se] + r)] = ONE
                mats[n] = SparseMatrix(tgt.dim(n), src.dim(n), entries)
            codegens[(p, i)] = mats
    return CosimplicialDgLie(levels, cofaces, codegens)


class DescentReport:
    def __init__(self):
        self.branch = None
        self.cap = None
        self.pi0_via_tot = None
        self.pi0_via_cech = None
        self.agree = None
        self.witness_checks: list[dict] = []
        self.notes: list[str] = []

    def as_dict(self) -> dict:
        return {"branch": self.branch, "cap": self.cap,
                "pi0_via_tot": self.pi0_via_tot,
                "pi0_via_cech": self.pi0_via_cech,
                "agree": self.agree,
                "witness_checks": self.witness_checks,
                "notes": list(self.notes)}


def descent_compare(g: CosimplicialDgLie, base: ArtinBase,
                    degree_range: tuple[int, int] = (0, 2),
                    max_cap: int = 8,
                    reference_h1: Optional[int] = None) -> DescentReport:
    """Abelian branch: pi0 of the Deligne groupoid of the totalization,
    computed through the Kuranishi chart, against H^1 of the normalized
    total Cech complex tensor the ideal.  General branch: Kuranishi MC
    witnesses map to levelwise MC elements with MC 1-simplices on edges."""
    from .dglie import kuranishi
    rep = DescentReport()
    cap, tw, cert = choose_truncation(g, degree_range, max_cap=max_cap)
    rep.cap = cap
    rep.notes.append(f"truncation certificate: {cert.as_dict()}")
    abelian = all(lvl.is_abelian() for lvl in g.levels)
    target = NormalizedTotal(g)
    if abelian:
        rep.branch = "abelian"
        twlie = abelian_dglie(tw.complex, name="tw-tot")
        kd = kuranishi(twlie, base)
        rep.pi0_via_tot = kd.pi0_dimension_if_abelian()
        h1 = reference_h1 if reference_h1 is not None \
            else Cohomology(target.complex).dim(1)
        rep.pi0_via_cech = h1 * base.dim
        rep.agree = rep.pi0_via_tot == rep.pi0_via_cech
        return rep
    rep.branch = "general"
    twlie = tw.as_dglie()
    kd = kuranishi(twlie, base)
    rep.pi0_via_tot = f"chart of dimension {kd.h1_dim * base.dim} with " \
                      f"{'zero' if kd.obstruction_is_zero() else 'nonzero'} obstruction"
    # map each chart witness to levelwise data; the origin always lies in
    # the vanishing locus
    points = [[ZERO] * kd.nvars]
    if kd.nvars:
        points.append([ONE] + [ZERO] * (kd.nvars - 1))
    for point in points:
        try:
            z = kd.witness(point)
        except ValueError:
            continue
        checks = _witness_to_levels(tw, g, base, kd.nilp, z)
        rep.witness_checks.append(checks)
    rep.agree = all(c["all_mc"] for c in rep.witness_checks)
    return rep


def _witness_to_levels(tw: TWComplex, g: CosimplicialDgLie, base: ArtinBase,
                       nilp_tw, z: GVec) -> dict:
    """Decompose an MC element of m (x) Tot into levelwise vertex values and
    edge 1-simplices, checking the MC equation for each."""
    from .dglie import is_mc as _mc
    from itertools import combinations as _comb
    nilp_levels = {q: tensor_nilpotent(base, g.level(q)) for q in range(g.top + 1)}
    comp = z.parts.get(1, [])
    per_base: dict[int, list[Fraction]] = {
        bi: [ZERO] * tw.dim(1) for bi in range(base.dim)}
    for col, c in enumerate(comp):
        if c == 0:
            continue
        bi, twn, twi = nilp_tw.index[1][col]
        if twn != 1:
            raise ValueError("witness has components outside TW degree 1")
        per_base[bi][twi] = c
    vertex_checks = []
    edge_checks = []
    for q in range(g.top + 1):
        nl = nilp_levels[q]
        for v in range(q + 1):
            parts: dict[int, list[Fraction]] = {}
            for bi in range(base.dim):
                coords = per_base[bi]
                if all(c == 0 for c in coords):
                    continue
                for key, gvec in tw.level_component(1, coords, q).items():
                    if key[1]:
                        continue  # positive form degree dies at vertices
                    val = PolyForm(q, {key: ONE}).evaluate_vertex(v)
                    if val == 0:
                        continue
                    vec = parts.setdefault(1, [ZERO] * nl.dim(1))
                    for j, cj in enumerate(gvec):
                        if cj != 0:
                            vec[nl.pos[1][(bi, 1, j)]] += val * cj
            vertex_checks.append({"level": q, "vertex": v,
                                  "mc": _mc(nl, GVec(parts))})
        for (v, w) in _comb(range(q + 1), 2):
            ok = _edge_is_mc(tw, base, nl, per_base, q, (v, w))
            edge_checks.append({"level": q, "edge": [v, w], "mc": ok})
    all_mc = all(c["mc"] for c in vertex_checks + edge_checks)
    return {"vertices": vertex_checks, "edges": edge_checks, "all_mc": all_mc}


def _edge_is_mc(tw: TWComplex, base: ArtinBase, nl, per_base: dict,
                q: int, edge: tuple[int, int]) -> bool:
    """Restrict the level-q component to an edge and check the 1-simplex MC
    equation; the 0-form part feeds zeta (g-degree 1), the dt part feeds
    eta (g-degree 0)."""
    from .dglie import PathSimplex
    max_deg = tw.cap + 2
    zeta = [GVec() for _ in range(max_deg)]
    eta = [GVec() for _ in range(max_deg)]
    for bi, coords in per_base.items():
        if all(c == 0 for c in coords):
            continue
        for key, gvec in tw.level_component(1, coords, q).items():
            m = 1 - len(key[1])  # g-degree of this component
            pulled = pullback_monotone(tuple(edge), PolyForm(q, {key: ONE}), 1)
            for (exps, dts), c in pulled.terms.items():
                power = exps[0] if exps else 0
                for j, cj in enumerate(gvec):
                    if cj == 0:
                        continue
                    if dts == ():
                        row = nl.pos[1][(bi, 1, j)]
                        add = GVec({1: [c * cj if t == row else ZERO
                                        for t in range(nl.dim(1))]})
                        zeta[power] = zeta[power] + add
                    else:
                        if m != 0:
                            raise ValueError(
                                "dt component with unexpected internal degree")
                        row = nl.pos[0][(bi, 0, j)]
                        add = GVec({0: [c * cj if t == row else ZERO
                                        for t in range(nl.dim(0))]})
                        eta[power] = eta[power] + add
    path = PathSimplex(nl, zeta, eta)
    return path.is_mc()


def choose_truncation(g: CosimplicialDgLie, degree_range: tuple[int, int],
                      max_cap: int = 8) -> tuple[int, TWComplex, TruncationCertificate]:
    """Smallest polynomial-degree cap whose integration map is a
    quasi-isomorphism onto the normalized total complex in the given degree
    range; raises CapError with a report when the bound is exhausted."""
    target = NormalizedTotal(g)
    h_normal = Cohomology(target.complex)
    last = None
    for cap in range(0, max_cap + 1):
        tw = TWComplex(g, cap)
        integ = tw.integrate_map(target)
        ok = is_quasi_iso_in_range(integ, degree_range[0], degree_range[1])
        h_tw = Cohomology(tw.complex)
        cert = TruncationCertificate(
            cap, degree_range, ok,
            {n: h_tw.dim(n) for n in range(degree_range[0], degree_range[1] + 1)},
            {n: h_normal.dim(n) for n in range(degree_range[0], degree_range[1] + 1)})
        last = cert
        if ok:
            return cap, tw, cert
    raise CapError(
        f"no stabilization up to cap {max_cap}; last certificate: {last.as_dict()}")
