"""Hochschild cochains of finite-dimensional associative algebras, the
Gerstenhaber bracket, the deformation dg Lie algebra and an independent
first-order oracle.

Degree conventions: cochains of arity p sit in complex degree p; the
deformation dg Lie algebra shifts, putting arity p+1 in degree p so that
Maurer-Cartan elements are multiplications.  Its differential is [mu, -],
which matches the bar differential up to the sign (-1)^degree (tested).

All cochain bookkeeping happens in a unit-adapted basis (first basis vector
= the unit), so the normalized subcomplex is a coordinate subspace.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Optional, Sequence

from .exactla import (ONE, ZERO, SparseMatrix, Subspace, kernel_basis,
                      column_space, quotient_basis, solve_matrix)
from .complexes import ChainMap, Cohomology, FinComplex, cone
from .site import ValidationReport
from .dglie import ArtinBase, DgLie, GVec, NilpDgLie, dglie_from_bracket
from .models import AlgebraSpec


class FinAssoc:
    """Finite-dimensional unital associative algebra in a unit-adapted basis.

    ``mult[(i, j)]`` holds the coefficients of b_i b_j; b_0 is the unit.
    """

    def __init__(self, spec: AlgebraSpec):
        self.name = spec.name
        self.dim = spec.dim
        change = self._unit_adapted_change(spec)
        self.change = change  # columns: new basis in the original coordinates
        inv = solve_matrix(change, SparseMatrix.identity(spec.dim))
        if inv is None:
            raise ValueError("unit completion is not a basis")
        self.mult: dict[tuple[int, int], dict[int, Fraction]] = {}
        for i in range(self.dim):
            for j in range(self.dim):
                bi = [change.entry(r, i) for r in range(self.dim)]
                bj = [change.entry(r, j) for r in range(self.dim)]
                prod_old = _mult_in_spec(spec, bi, bj)
                prod_new = inv.mul_vec(prod_old)
                entry = {k: c for k, c in enumerate(prod_new) if c != 0}
                if entry:
                    self.mult[(i, j)] = entry

    @staticmethod
    def _unit_adapted_change(spec: AlgebraSpec) -> SparseMatrix:
        cols = [list(spec.unit)]
        current = Subspace(spec.dim, [spec.unit])
        for i in range(spec.dim):
            cand = [ONE if t == i else ZERO for t in range(spec.dim)]
            if not current.contains(cand):
                cols.append(cand)
                current = Subspace(spec.dim, [list(v) for v in cols])
        if len(cols) != spec.dim:
            raise ValueError("could not complete the unit to a basis")
        return SparseMatrix(spec.dim, spec.dim,
                            {(i, j): cols[j][i] for j in range(spec.dim)
                             for i in range(spec.dim) if cols[j][i] != 0})

    def product(self, i: int, j: int) -> dict[int, Fraction]:
        return self.mult.get((i, j), {})

    def mult_vec(self, x: Sequence[Fraction], y: Sequence[Fraction]) -> list[Fraction]:
        out = [ZERO] * self.dim
        for i, cx in enumerate(x):
            if cx == 0:
                continue
            for j, cy in enumerate(y):
                if cy == 0:
                    continue
                for k, c in self.product(i, j).items():
                    out[k] += cx * cy * c
        return out

    def validate(self) -> ValidationReport:
        rep = ValidationReport(f"algebra {self.name}")
        unit = [ONE] + [ZERO] * (self.dim - 1)
        for i in range(self.dim):
            e = [ONE if t == i else ZERO for t in range(self.dim)]
            if self.mult_vec(unit, e) != e or self.mult_vec(e, unit) != e:
                rep.error(f"unit law fails on basis vector {i}")
        for i in range(self.dim):
            for j in range(self.dim):
                for k in range(self.dim):
                    ei = [ONE if t == i else ZERO for t in range(self.dim)]
                    ej = [ONE if t == j else ZERO for t in range(self.dim)]
                    ek = [ONE if t == k else ZERO for t in range(self.dim)]
                    left = self.mult_vec(self.mult_vec(ei, ej), ek)
                    right = self.mult_vec(ei, self.mult_vec(ej, ek))
                    if left != right:
                        rep.error(f"associativity fails on ({i},{j},{k})")
                        return rep
        return rep

    def multiplication_cochain(self) -> "Cochain":
        entries = {}
        for (i, j), out in self.mult.items():
            for k, c in out.items():
                entries[(k, (i, j))] = c
        return Cochain(2, self.dim, entries)


def _mult_in_spec(spec: AlgebraSpec, x: Sequence[Fraction],
                  y: Sequence[Fraction]) -> list[Fraction]:
    out = [ZERO] * spec.dim
    for i, cx in enumerate(x):
        if cx == 0:
            continue
        for j, cy in enumerate(y):
            if cy == 0:
                continue
            for k, c in spec.mult.get((i, j), {}).items():
                out[k] += cx * cy * c
    return out


class Cochain:
    """Multilinear map A^{(x) arity} -> A, sparse over basis tuples."""

    __slots__ = ("arity", "dim", "entries")

    def __init__(self, arity: int, dim: int,
                 entries: Optional[dict[tuple[int, tuple[int, ...]], Fraction]] = None):
        self.arity = arity
        self.dim = dim
        self.entries = {k: v for k, v in (entries or {}).items() if v != 0}

    def is_zero(self) -> bool:
        return not self.entries

    def __add__(self, other: "Cochain") -> "Cochain":
        entries = dict(self.entries)
        for k, v in other.entries.items():
            entries[k] = entries.get(k, ZERO) + v
        return Cochain(self.arity, self.dim, entries)

    def scale(self, c: Fraction) -> "Cochain":
        return Cochain(self.arity, self.dim,
                       {k: c * v for k, v in self.entries.items()})

    def __sub__(self, other: "Cochain") -> "Cochain":
        return self + other.scale(Fraction(-1))

    def is_normalized(self) -> bool:
        return all(0 not in tup for (_, tup) in self.entries)

    def evaluate(self, inputs: Sequence[Sequence[Fraction]]) -> list[Fraction]:
        out = [ZERO] * self.dim
        for (k, tup), c in self.entries.items():
            coeff = c
            for slot, vec in zip(tup, inputs):
                coeff *= vec[slot]
                if coeff == 0:
                    break
            if coeff != 0:
                out[k] += coeff
        return out


def compose_at(f: Cochain, g: Cochain, i: int) -> Cochain:
    """f o_i g: plug g into the i-th slot of f (1-based)."""
    entries: dict[tuple[int, tuple[int, ...]], Fraction] = {}
    for (out, ftup), cf in f.entries.items():
        slot_val = ftup[i - 1]
        for (k, gtup), cg in g.entries.items():
            if k != slot_val:
                continue
            tup = ftup[:i - 1] + gtup + ftup[i:]
            entries[(out, tup)] = entries.get((out, tup), ZERO) + cf * cg
    return Cochain(f.arity + g.arity - 1, f.dim, entries)


def circle(f: Cochain, g: Cochain) -> Cochain:
    """Pre-Lie composition sum with the Gerstenhaber signs."""
    m = f.arity - 1
    n = g.arity - 1
    total = Cochain(f.arity + g.arity - 1, f.dim)
    for i in range(1, f.arity + 1):
        sign = Fraction(-1) ** ((i - 1) * n)
        total = total + compose_at(f, g, i).scale(sign)
    return total


def gerstenhaber(f: Cochain, g: Cochain) -> Cochain:
    m = f.arity - 1
    n = g.arity - 1
    return circle(f, g) - circle(g, f).scale(Fraction(-1) ** (m * n))


def bar_differential(a: FinAssoc, f: Cochain) -> Cochain:
    """(df)(a_1..a_{p+1}) = a_1 f(..) + sum (-1)^i f(.. a_i a_{i+1} ..)
    + (-1)^{p+1} f(..) a_{p+1}."""
    p = f.arity
    dim = a.dim
    entries: dict[tuple[int, tuple[int, ...]], Fraction] = {}

    def add(key, val):
        if val != 0:
            entries[key] = entries.get(key, ZERO) + val

    for tup in itertools.product(range(dim), repeat=p + 1):
        # a_1 . f(a_2 ...)
        for (out, ftup), cf in f.entries.items():
            if ftup == tup[1:]:
                for k, c in a.product(tup[0], out).items():
                    add((k, tup), cf * c)
            if ftup == tup[:-1]:
                for k, c in a.product(out, tup[-1]).items():
                    add((k, tup), cf * c * Fraction(-1) ** (p + 1))
        for i in range(1, p + 1):
            sign = Fraction(-1) ** i
            for k, c in a.product(tup[i - 1], tup[i]).items():
                inner = tup[:i - 1] + (k,) + tup[i + 1:]
                for (out, ftup), cf in f.entries.items():
                    if ftup == inner:
                        add((out, tup), sign * c * cf)
    return Cochain(p + 1, dim, entries)


# -- complexes -------------------------------------------------------------------


class HochschildComplexData:
    """The Hochschild complex in degrees 0..n_max with basis bookkeeping."""

    def __init__(self, a: FinAssoc, n_max: int, normalized: bool = False):
        self.algebra = a
        self.n_max = n_max
        self.normalized = normalized
        dim = a.dim
        self.tuples: dict[int, list[tuple[int, ...]]] = {}
        self.pos: dict[int, dict[tuple[int, tuple[int, ...]], int]] = {}
        dims = {}
        rng = range(1, dim) if normalized else range(dim)
        for p in range(n_max + 1):
            tuples = list(itertools.product(rng, repeat=p))
            self.tuples[p] = tuples
            table = {}
            pos = 0
            for tup in tuples:
                for out in range(dim):
                    table[(out, tup)] = pos
                    pos += 1
            self.pos[p] = table
            dims[p] = pos
        diffs = {}
        for p in range(n_max):
            entries: dict[tuple[int, int], Fraction] = {}
            for tup in self.tuples[p]:
                for out in range(dim):
                    col = self.pos[p][(out, tup)]
                    f = Cochain(p, dim, {(out, tup): ONE})
                    df = bar_differential(a, f)
                    for (k, ttup), c in df.entries.items():
                        row = self.pos[p + 1].get((k, ttup))
                        if row is not None:
                            entries[(row, col)] = entries.get((row, col), ZERO) + c
            diffs[p] = SparseMatrix(dims[p + 1], dims[p], entries)
        self.complex = FinComplex(dims, diffs)

    def pack(self, f: Cochain) -> list[Fraction]:
        vec = [ZERO] * self.complex.dim(f.arity)
        for key, c in f.entries.items():
            pos = self.pos[f.arity].get(key)
            if pos is None:
                raise ValueError("cochain has components outside the "
                                 "normalized subspace")
            vec[pos] = c
        return vec

    def unpack(self, p: int, vec: Sequence[Fraction]) -> Cochain:
        entries = {}
        for key, pos in self.pos[p].items():
            if vec[pos] != 0:
                entries[key] = vec[pos]
        return Cochain(p, self.algebra.dim, entries)


def hochschild_complex(a: FinAssoc, n_max: int,
                       normalized: bool = False) -> FinComplex:
    return HochschildComplexData(a, n_max, normalized).complex


def hochschild_cohomology_dims(a: FinAssoc, n_max: int,
                               normalized: bool = True) -> dict[int, int]:
    """HH^i for i < n_max (the top degree of the truncation is not a genuine
    cohomology group and is omitted)."""
    data = HochschildComplexData(a, n_max, normalized)
    coh = Cohomology(data.complex)
    return {i: coh.dim(i) for i in range(n_max)}


# -- deformation dg Lie algebra ----------------------------------------------------


class DeformationDgLie(DgLie):
    """Normalized Hochschild cochains shifted: arity p+1 in degree p, with
    the Gerstenhaber bracket and differential [mu, -]."""

    def __init__(self, a: FinAssoc, n_max: int):
        self.algebra = a
        self.data = HochschildComplexData(a, n_max, normalized=True)
        mu = a.multiplication_cochain()
        dims = {p: self.data.complex.dim(p + 1) for p in range(n_max)}
        diffs = {}
        for p in range(n_max - 1):
            entries = {}
            for tup in self.data.tuples[p + 1]:
                for out in range(a.dim):
                    col = self.data.pos[p + 1][(out, tup)]
                    f = Cochain(p + 1, a.dim, {(out, tup): ONE})
                    df = gerstenhaber(mu, f)
                    for key, c in df.entries.items():
                        row = self.data.pos[p + 2].get(key)
                        if row is None:
                            # classical closure: [mu, normalized] is normalized
                            raise ValueError(
                                "bracket with mu left the normalized subspace")
                        entries[(row, col)] = entries.get((row, col), ZERO) + c
            diffs[p] = SparseMatrix(dims[p + 1], dims[p], entries)
        cx = FinComplex(dims, diffs)
        data = self.data

        def bracket(p, i, q, j):
            if p + q not in dims or dims[p + q] == 0:
                return {}
            f = data.unpack(p + 1, _unit_vec(dims[p], i))
            g = data.unpack(q + 1, _unit_vec(dims[q], j))
            br = gerstenhaber(f, g)
            out = {}
            for key, c in br.entries.items():
                pos = data.pos[p + q + 1].get(key)
                if pos is None:
                    raise ValueError("Gerstenhaber bracket of normalized "
                                     "cochains left the normalized subspace")
                out[pos] = out.get(pos, ZERO) + c
            return out

        materialized = dglie_from_bracket(cx, bracket,
                                          name=f"def({a.name})")
        super().__init__(cx, materialized.table, name=materialized.name)

    def cochain_of(self, degree: int, vec: Sequence[Fraction]) -> Cochain:
        return self.data.unpack(degree + 1, vec)


def _unit_vec(dim: int, i: int) -> list[Fraction]:
    v = [ZERO] * dim
    v[i] = ONE
    return v


def deformation_dglie(a: FinAssoc, n_max: int) -> DeformationDgLie:
    return DeformationDgLie(a, n_max)


def deformed_associativity_residuals(a: FinAssoc, base: ArtinBase,
                                     nilp: NilpDgLie, z: GVec) -> dict:
    """Substitute an MC element back into symbolic associativity of
    mu_t = mu + sum m_s (x) z_s over A (x) R; returns the nonzero residuals.

    Elements of A (x) R are dicts: None -> A-part over 1, s -> A-part over
    the ideal basis element s.
    """
    g: DeformationDgLie = nilp.g  # type: ignore[assignment]
    dim = a.dim
    comp = z.parts.get(1, [ZERO] * nilp.dim(1))
    per_base: dict[int, Cochain] = {}
    for col, (bi, gn, gi) in enumerate(nilp.index[1]):
        c = comp[col]
        if c == 0:
            continue
        if gn != 1:
            raise ValueError("MC element has components outside arity 2")
        f = g.cochain_of(1, _unit_vec(nilp.g.dim(1), gi)).scale(c)
        per_base[bi] = per_base.get(bi, Cochain(2, dim)) + f

    def mult_t(x: dict, y: dict) -> dict:
        out: dict = {}

        def add(key, vec):
            if any(v != 0 for v in vec):
                cur = out.get(key, [ZERO] * dim)
                out[key] = [u + v for u, v in zip(cur, vec)]

        for kx, vx in x.items():
            for ky, vy in y.items():
                prod = a.mult_vec(vx, vy)
                if kx is None and ky is None:
                    add(None, prod)
                elif kx is None:
                    add(ky, prod)
                elif ky is None:
                    add(kx, prod)
                else:
                    for rk, rc in base.product(kx, ky).items():
                        add(rk, [rc * t for t in prod])
                # deformation terms: coefficient m_bi times the R-parts
                for bi, f in per_base.items():
                    if kx is None and ky is None:
                        extra = {bi: ONE}
                    elif kx is None:
                        extra = dict(base.product(bi, ky))
                    elif ky is None:
                        extra = dict(base.product(bi, kx))
                    else:
                        extra = {}
                        for mk, mc in base.product(kx, ky).items():
                            for mk2, mc2 in base.product(bi, mk).items():
                                extra[mk2] = extra.get(mk2, ZERO) + mc * mc2
                    if extra:
                        val = f.evaluate([vx, vy])
                        for ek, ec in extra.items():
                            add(ek, [ec * t for t in val])
        return out

    residuals = {}
    for i in range(dim):
        for j in range(dim):
            for k in range(dim):
                ei = {None: _unit_vec(dim, i)}
                ej = {None: _unit_vec(dim, j)}
                ek = {None: _unit_vec(dim, k)}
                left = mult_t(mult_t(ei, ej), ek)
                right = mult_t(ei, mult_t(ej, ek))
                keys = set(left) | set(right)
                for key in keys:
                    diff = [u - v for u, v in zip(left.get(key, [ZERO] * dim),
                                                  right.get(key, [ZERO] * dim))]
                    if any(c != 0 for c in diff):
                        residuals[(i, j, k, key)] = diff
    return residuals


# -- cone of the arity-zero projection and its long exact sequence ------------------


class ObstructionLES:
    """Cone(pi: C^* -> A) with the long exact sequence relating truncated
    Hochschild cohomology, sections and the cone."""

    def __init__(self, a: FinAssoc, n_max: int):
        self.algebra = a
        self.n_max = n_max
        self.data = HochschildComplexData(a, n_max, normalized=True)
        c = self.data.complex
        a_conc = FinComplex({0: a.dim}, {})
        proj = {0: SparseMatrix.identity(a.dim)}
        self.pi = ChainMap(c, a_conc, proj)
        self.cone = cone(self.pi)
        self.h_c = Cohomology(c)
        self.h_a = Cohomology(a_conc)
        self.h_cone = Cohomology(self.cone)
        self.a_conc = a_conc

    def _induced(self, coh_src: Cohomology, coh_tgt: Cohomology, deg_src: int,
                 deg_tgt: int, matrix: SparseMatrix) -> SparseMatrix:
        cols = []
        for rep in coh_src.representatives(deg_src):
            img = matrix.mul_vec(list(rep))
            cols.append(coh_tgt.class_of(deg_tgt, img))
        entries = {(i, j): cols[j][i] for j in range(len(cols))
                   for i in range(coh_tgt.dim(deg_tgt)) if cols[j][i] != 0}
        return SparseMatrix(coh_tgt.dim(deg_tgt), len(cols), entries)

    def maps(self, i: int) -> dict[str, SparseMatrix]:
        """alpha: HH^i -> H^i(A), beta: H^i(A) -> H^i(cone),
        gamma: H^i(cone) -> HH^{i+1} (connecting)."""
        c = self.data.complex
        alpha = self._induced(self.h_c, self.h_a, i, i, self.pi.component(i))
        inc = SparseMatrix(self.cone.dim(i), self.a_conc.dim(i),
                           {(t, t): ONE for t in range(self.a_conc.dim(i))})
        beta = self._induced(self.h_a, self.h_cone, i, i, inc)
        # connecting map: project cone representatives to the shifted C part
        proj = SparseMatrix(c.dim(i + 1), self.cone.dim(i),
                            {(t, t + self.a_conc.dim(i)): ONE
                             for t in range(c.dim(i + 1))})
        gamma = self._induced(self.h_cone, self.h_c, i, i + 1, proj)
        return {"alpha": alpha, "beta": beta, "gamma": gamma}

    def exactness_report(self, up_to: int) -> dict:
        """Exactness verdicts at every node H^i(A), H^i(cone), HH^{i+1} for
        i <= up_to; connecting maps are included as matrices."""
        verdicts = {}
        dims = {"hochschild": {i: self.h_c.dim(i) for i in range(self.n_max)},
                "sections": {i: self.h_a.dim(i) for i in range(0, up_to + 1)},
                "cone": {i: self.h_cone.dim(i) for i in range(-1, up_to + 1)}}
        for i in range(0, up_to + 1):
            maps_i = self.maps(i)
            alpha, beta, gamma = maps_i["alpha"], maps_i["beta"], maps_i["gamma"]
            at_a = column_space(alpha) == kernel_basis(beta)
            at_cone = column_space(beta) == kernel_basis(gamma)
            if i + 1 <= up_to:
                alpha_next = self.maps(i + 1)["alpha"]
                at_next = column_space(gamma) == kernel_basis(alpha_next)
            else:
                at_next = None
            verdicts[i] = {"at_sections": at_a, "at_cone": at_cone,
                           "at_next_hochschild": at_next}
        return {"dims": dims, "verdicts": verdicts,
                "all_exact": all(v for node in verdicts.values()
                                 for v in node.values() if v is not None)}


def tangent_cone_complex(a: FinAssoc, n_max: int) -> ObstructionLES:
    return ObstructionLES(a, n_max)


# -- independent first-order oracle ---------------------------------------------------


def brute_first_order(a: FinAssoc, bound: int = 6
                      ) -> tuple[int, list[Cochain]]:
    """Solve the linearized associativity equations for mu_1 directly and
    quotient by the linearized (1 + eps phi) conjugation; independent of the
    complex-based route."""
    dim = a.dim
    if dim > bound:
        raise ValueError(f"oracle bound exceeded: dim {dim} > {bound}")
    nvars = dim * dim * dim  # (out, (i, j))
    def var(out, i, j):
        return (i * dim + j) * dim + out
    rows = []
    for i in range(dim):
        for j in range(dim):
            for k in range(dim):
                for out in range(dim):
                    row: dict[int, Fraction] = {}
                    # m1(ij, k) + m1(i,j).k - m1(i, jk) - i.m1(j,k) = 0
                    for s, c in a.product(i, j).items():
                        row[var(out, s, k)] = row.get(var(out, s, k), ZERO) + c
                    for s in range(dim):
                        for t, c in a.product(s, k).items():
                            if t == out:
                                row[var(s, i, j)] = row.get(var(s, i, j), ZERO) + c
                    for s, c in a.product(j, k).items():
                        row[var(out, i, s)] = row.get(var(out, i, s), ZERO) - c
                    for s in range(dim):
                        for t, c in a.product(i, s).items():
                            if t == out:
                                row[var(s, j, k)] = row.get(var(s, j, k), ZERO) - c
                    if row:
                        rows.append(row)
    mat = SparseMatrix(len(rows), nvars,
                       {(r, cidx): v for r, row in enumerate(rows)
                        for cidx, v in row.items()})
    cocycles = kernel_basis(mat)
    # linearized gauge: phi |-> phi(a) b + a phi(b) - phi(ab)
    gauge_vecs = []
    for pout in range(dim):
        for pin in range(dim):
            vec = [ZERO] * nvars
            for i in range(dim):
                for j in range(dim):
                    if i == pin:
                        for k, c in a.product(pout, j).items():
                            vec[var(k, i, j)] += c
                    if j == pin:
                        for k, c in a.product(i, pout).items():
                            vec[var(k, i, j)] += c
                    for s, c in a.product(i, j).items():
                        if s == pin:
                            vec[var(pout, i, j)] -= c
            gauge_vecs.append(vec)
    boundaries = Subspace(nvars, gauge_vecs)
    quo = quotient_basis(cocycles, boundaries)
    reps = []
    for rep in quo.representatives:
        entries = {}
        for pos, c in enumerate(rep):
            if c != 0:
                out = pos % dim
                ij = pos // dim
                entries[(out, (ij // dim, ij % dim))] = c
        reps.append(Cochain(2, dim, entries))
    return quo.dim, reps
