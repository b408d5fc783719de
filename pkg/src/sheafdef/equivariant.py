"""Finite group actions, Reynolds averaging, quotient sites and the
equivariant deformation pipeline.

Only discrete finite groups in characteristic zero: derived invariants
collapse to the image of the Reynolds projector by Maschke, and every
report states that this is the justification.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .exactla import ONE, ZERO, SparseMatrix, Subspace
from .complexes import FinComplex
from .site import FinSite, ValidationReport
from .dglie import ArtinBase, DgLie, GVec, KuranishiData, kuranishi
from .hochschild import FinAssoc


class FinGroup:
    """Finite group by element list and multiplication table."""

    def __init__(self, elements: Sequence[str], table: dict[tuple[str, str], str],
                 identity: str):
        self.elements = tuple(elements)
        self.table = dict(table)
        self.identity = identity

    def mul(self, a: str, b: str) -> str:
        return self.table[(a, b)]

    @property
    def order(self) -> int:
        return len(self.elements)

    def validate(self) -> ValidationReport:
        rep = ValidationReport("group")
        if self.identity not in self.elements:
            rep.error("identity not among the elements")
            return rep
        for a in self.elements:
            for b in self.elements:
                if (a, b) not in self.table:
                    rep.error(f"missing product ({a},{b})")
                    return rep
                if self.table[(a, b)] not in self.elements:
                    rep.error(f"product ({a},{b}) leaves the element set")
        for a in self.elements:
            if self.mul(self.identity, a) != a or self.mul(a, self.identity) != a:
                rep.error(f"identity law fails on {a}")
        for a in self.elements:
            for b in self.elements:
                for c in self.elements:
                    if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)):
                        rep.error(f"associativity fails on ({a},{b},{c})")
                        return rep
        for a in self.elements:
            if not any(self.mul(a, b) == self.identity for b in self.elements):
                rep.error(f"no inverse for {a}")
        return rep

    def inverse(self, a: str) -> str:
        for b in self.elements:
            if self.mul(a, b) == self.identity:
                return b
        raise ValueError(f"no inverse for {a}")


def cyclic_group(n: int) -> FinGroup:
    els = [f"g{i}" for i in range(n)]
    table = {(f"g{i}", f"g{j}"): f"g{(i + j) % n}"
             for i in range(n) for j in range(n)}
    return FinGroup(els, table, "g0")


class DgLieAction:
    """Action of a finite group on a dg Lie algebra by per-degree matrices."""

    def __init__(self, group: FinGroup, g: DgLie,
                 matrices: dict[str, dict[int, SparseMatrix]]):
        self.group = group
        self.g = g
        self.matrices = matrices

    def matrix(self, gamma: str, degree: int) -> SparseMatrix:
        mat = self.matrices.get(gamma, {}).get(degree)
        if mat is None:
            dim = self.g.dim(degree)
            mat = SparseMatrix.identity(dim)
        return mat

    def apply(self, gamma: str, v: GVec) -> GVec:
        parts = {}
        for n, comp in v.parts.items():
            img = self.matrix(gamma, n).mul_vec(comp)
            if any(c != 0 for c in img):
                parts[n] = img
        return GVec(parts)

    def validate(self) -> ValidationReport:
        rep = ValidationReport("dg Lie action")
        g = self.g
        degs = g.degrees()
        ident = self.group.identity
        for n in degs:
            if self.matrix(ident, n) != SparseMatrix.identity(g.dim(n)):
                rep.error(f"identity does not act as identity at degree {n}")
        for a in self.group.elements:
            for b in self.group.elements:
                ab = self.group.mul(a, b)
                for n in degs:
                    left = self.matrix(a, n) @ self.matrix(b, n)
                    if left != self.matrix(ab, n):
                        rep.error(f"composition law fails on ({a},{b}) at degree {n}")
        for a in self.group.elements:
            for n in degs:
                left = g.complex.diff(n) @ self.matrix(a, n)
                right = self.matrix(a, n + 1) @ g.complex.diff(n)
                if left != right:
                    rep.error(f"{a} does not commute with d at degree {n}")
        # bracket equivariance on basis pairs
        for a in self.group.elements:
            for p in degs:
                for q in degs:
                    if g.dim(p + q) == 0:
                        continue
                    for i in range(g.dim(p)):
                        for j in range(g.dim(q)):
                            x = GVec.basis_vector(p, g.dim(p), i)
                            y = GVec.basis_vector(q, g.dim(q), j)
                            try:
                                lhs = self.apply(a, g.bracket(x, y))
                                rhs = g.bracket(self.apply(a, x), self.apply(a, y))
                            except Exception:
                                continue
                            if lhs != rhs:
                                rep.error(
                                    f"{a} does not respect the bracket on "
                                    f"({p},{i}),({q},{j})")
                                return rep
        return rep

    def reynolds(self, degree: int) -> SparseMatrix:
        dim = self.g.dim(degree)
        acc = SparseMatrix(dim, dim)
        for a in self.group.elements:
            acc = acc + self.matrix(a, degree)
        return acc.scale(Fraction(1, self.group.order))


class InvariantDgLie(DgLie):
    """Image of the Reynolds projector, as a dg Lie algebra with the
    inclusion back into the ambient one."""

    def __init__(self, action: DgLieAction):
        g = action.g
        self.ambient = g
        self.action = action
        self.bases: dict[int, Subspace] = {}
        dims = {}
        for n in g.degrees():
            proj = action.reynolds(n)
            cols = []
            for j in range(proj.cols):
                col = [proj.entry(i, j) for i in range(proj.rows)]
                cols.append(col)
            basis = Subspace(g.dim(n), cols)
            self.bases[n] = basis
            dims[n] = basis.dim
        diffs = {}
        for n in g.degrees():
            src = self.bases[n]
            tgt = self.bases.get(n + 1)
            if src.dim == 0 or not tgt or tgt.dim == 0:
                continue
            cols = []
            for vec in src.basis:
                img = g.complex.diff(n).mul_vec(list(vec))
                coords = tgt.coordinates(img)
                if coords is None:
                    raise ValueError("invariants not closed under d")
                cols.append(coords)
            entries = {(i, j): cols[j][i] for j in range(len(cols))
                       for i in range(tgt.dim) if cols[j][i] != 0}
            diffs[n] = SparseMatrix(tgt.dim, src.dim, entries)
        cx = FinComplex(dims, diffs)

        def bracket(p, i, q, j):
            x = GVec({p: list(self.bases[p].basis[i])})
            y = GVec({q: list(self.bases[q].basis[j])})
            br = g.bracket(x, y)
            comp = br.parts.get(p + q)
            if comp is None:
                return {}
            tgt = self.bases.get(p + q)
            coords = tgt.coordinates(comp) if tgt else None
            if coords is None:
                raise ValueError("invariants not closed under the bracket")
            return {k: c for k, c in enumerate(coords) if c != 0}

        from .dglie import dglie_from_bracket
        materialized = dglie_from_bracket(cx, bracket, name=f"{g.name}^G")
        super().__init__(cx, materialized.table, name=materialized.name)

    def include(self, v: GVec) -> GVec:
        """Coordinates in the invariant basis -> ambient coordinates."""
        parts = {}
        for n, comp in v.parts.items():
            amb = [ZERO] * self.ambient.dim(n)
            for j, c in enumerate(comp):
                if c != 0:
                    for i, b in enumerate(self.bases[n].basis[j]):
                        amb[i] += c * b
            parts[n] = amb
        return GVec(parts)


def invariants(g: DgLie, action: DgLieAction) -> InvariantDgLie:
    if action.g is not g:
        raise ValueError("action is not an action on the given dg Lie algebra")
    return InvariantDgLie(action)


def algebra_action_to_dglie(group: FinGroup, a: FinAssoc,
                            matrices: dict[str, SparseMatrix],
                            deformation, n_max: int) -> DgLieAction:
    """Lift an algebra action (per-element automorphism matrices in the
    unit-adapted basis) to the deformation dg Lie algebra:
    (gamma . f)(a_1..a_p) = gamma f(gamma^{-1} a_1, ..., gamma^{-1} a_p)."""
    data = deformation.data
    lifted: dict[str, dict[int, SparseMatrix]] = {}
    for gamma in group.elements:
        mat = matrices[gamma]
        inv_name = group.inverse(gamma)
        inv = matrices[inv_name]
        per_degree = {}
        for degree in deformation.degrees():
            p = degree + 1
            entries: dict[tuple[int, int], Fraction] = {}
            for tup in data.tuples[p]:
                for out in range(a.dim):
                    col = data.pos[p][(out, tup)]
                    # gamma . basis cochain: sum over images
                    out_img = [(i, mat.entry(i, out)) for i in range(a.dim)
                               if mat.entry(i, out) != 0]
                    slots = []
                    for s in tup:
                        slots.append([(t, inv.entry(s, t)) for t in range(a.dim)
                                      if inv.entry(s, t) != 0])
                    def expand(idx, prefix, coeff):
                        if idx == len(slots):
                            for i_out, c_out in out_img:
                                key = (i_out, tuple(prefix))
                                row = data.pos[p].get(key)
                                if row is None:
                                    if coeff * c_out != 0:
                                        raise ValueError(
                                            "action does not preserve the "
                                            "normalized subspace")
                                    continue
                                entries[(row, col)] = entries.get((row, col), ZERO) \
                                    + coeff * c_out
                            return
                        for t, c in slots[idx]:
                            expand(idx + 1, prefix + [t], coeff * c)
                    expand(0, [], ONE)
            per_degree[degree] = SparseMatrix(dims_of(deformation, degree),
                                              dims_of(deformation, degree),
                                              entries)
        lifted[gamma] = per_degree
    return DgLieAction(group, deformation, lifted)


def dims_of(g: DgLie, degree: int) -> int:
    return g.dim(degree)


def validate_algebra_action(group: FinGroup, a: FinAssoc,
                            matrices: dict[str, SparseMatrix]) -> ValidationReport:
    rep = ValidationReport("algebra action")
    ident = group.identity
    if matrices[ident] != SparseMatrix.identity(a.dim):
        rep.error("identity does not act as the identity")
    for g1 in group.elements:
        for g2 in group.elements:
            if matrices[g1] @ matrices[g2] != matrices[group.mul(g1, g2)]:
                rep.error(f"composition law fails on ({g1},{g2})")
    unit = [ONE] + [ZERO] * (a.dim - 1)
    for g1 in group.elements:
        mat = matrices[g1]
        if mat.mul_vec(unit) != unit:
            rep.error(f"{g1} does not fix the unit")
        for i in range(a.dim):
            for j in range(a.dim):
                ei = [ONE if t == i else ZERO for t in range(a.dim)]
                ej = [ONE if t == j else ZERO for t in range(a.dim)]
                lhs = mat.mul_vec(a.mult_vec(ei, ej))
                rhs = a.mult_vec(mat.mul_vec(ei), mat.mul_vec(ej))
                if lhs != rhs:
                    rep.error(f"{g1} is not an algebra automorphism")
                    return rep
    return rep


# -- site actions and the quotient category ------------------------------------------


class SiteAction:
    """Order- and cover-preserving permutation action on a finite site."""

    def __init__(self, group: FinGroup, site: FinSite,
                 permutations: dict[str, dict[str, str]]):
        self.group = group
        self.site = site
        self.permutations = permutations

    def apply(self, gamma: str, obj: str) -> str:
        return self.permutations[gamma][obj]

    def validate(self) -> ValidationReport:
        rep = ValidationReport("site action")
        site = self.site
        ident = self.group.identity
        for u in site.objects:
            if self.apply(ident, u) != u:
                rep.error("identity does not act as the identity")
        for g1 in self.group.elements:
            perm = self.permutations[g1]
            if sorted(perm.values()) != list(site.objects):
                rep.error(f"{g1} is not a permutation of the objects")
                continue
            for a in site.objects:
                for b in site.objects:
                    if site.leq(a, b) and not site.leq(perm[a], perm[b]):
                        rep.error(f"{g1} does not preserve the order on ({a},{b})")
            for u, fams in site.covers.items():
                images = {frozenset(perm[v] for v in fam)
                          for fam in site.covers.get(perm[u], ())}
                for fam in fams:
                    if frozenset(perm[v] for v in fam) not in images:
                        rep.error(f"{g1} does not preserve the covers of {u}")
        for g1 in self.group.elements:
            for g2 in self.group.elements:
                comp = self.group.mul(g1, g2)
                for u in site.objects:
                    if self.apply(g1, self.apply(g2, u)) != self.apply(comp, u):
                        rep.error(f"composition law fails on ({g1},{g2})")
        return rep


class QuotientCategory:
    """The category X/G: objects of X, morphisms (gamma, U, V) whenever
    U <= gamma V, composed through the group."""

    def __init__(self, action: SiteAction):
        self.action = action
        self.site = action.site
        self.group = action.group
        self.objects = self.site.objects
        self.morphisms = []
        for gamma in self.group.elements:
            for u in self.objects:
                for v in self.objects:
                    if self.site.leq(u, self.action.apply(gamma, v)):
                        self.morphisms.append((gamma, u, v))

    def hom(self, u: str, v: str) -> list[tuple[str, str, str]]:
        return [m for m in self.morphisms if m[1] == u and m[2] == v]

    def compose(self, second: tuple[str, str, str],
                first: tuple[str, str, str]) -> tuple[str, str, str]:
        """first: U -> V then second: V -> W gives (gamma delta, U, W)."""
        gamma, u, v = first
        delta, v2, w = second
        if v != v2:
            raise ValueError("morphisms are not composable")
        return (self.group.mul(gamma, delta), u, w)

    def identity_morphism(self, u: str) -> tuple[str, str, str]:
        return (self.group.identity, u, u)

    def validate(self) -> ValidationReport:
        rep = ValidationReport("quotient category")
        morphs = set(self.morphisms)
        for m in self.morphisms:
            gamma, u, v = m
            left = self.compose(m, self.identity_morphism(u))
            right = self.compose(self.identity_morphism(v), m)
            if left != m or right != m:
                rep.error(f"identity law fails on {m}")
        for m1 in self.morphisms:
            for m2 in self.morphisms:
                if m1[2] != m2[1]:
                    continue
                comp = self.compose(m2, m1)
                if comp not in morphs:
                    rep.error(f"composition {m2} o {m1} leaves the category")
                    return rep
                for m3 in self.morphisms:
                    if m2[2] != m3[1]:
                        continue
                    if self.compose(m3, self.compose(m2, m1)) != \
                            self.compose(self.compose(m3, m2), m1):
                        rep.error("associativity fails")
                        return rep
        return rep

    def report(self) -> dict:
        hom_counts = {}
        for u in self.objects:
            for v in self.objects:
                c = len(self.hom(u, v))
                if c:
                    hom_counts[f"{u}->{v}"] = c
        covers = {}
        for u, fams in self.site.covers.items():
            for gamma in self.group.elements:
                gu = self.action.apply(gamma, u)
                covers.setdefault(u, set()).update(
                    tuple(sorted(self.action.apply(gamma, v) for v in fam))
                    for fam in self.site.covers.get(gu, ()))
        return {
            "objects": list(self.objects),
            "morphism_count": len(self.morphisms),
            "hom_counts": hom_counts,
            "topology": {u: sorted(map(list, fams)) for u, fams in covers.items()},
            "laws": self.validate().as_dict(),
        }


def quotient_site(site: FinSite, action: SiteAction) -> QuotientCategory:
    return QuotientCategory(action)


# -- equivariant deformations ---------------------------------------------------------


class EquivariantKuranishi:
    """Kuranishi data of the invariant dg Lie algebra, with the forgetful
    comparison to the plain chart."""

    def __init__(self, g: DgLie, action: DgLieAction, base: ArtinBase):
        self.action = action
        self.invariant = invariants(g, action)
        self.data = kuranishi(self.invariant, base)
        self.plain = kuranishi(g, base)

    def witness_is_invariant(self, point) -> bool:
        """Every ideal-component of the witness is fixed by the action."""
        z = self.data.witness(point)
        per_base = z_components_per_base(self.data, z)
        for gvec in per_base.values():
            amb = self.invariant.include(gvec)
            for gamma in self.action.group.elements:
                if self.action.apply(gamma, amb) != amb:
                    return False
        return True

    def report(self) -> dict:
        return {
            "justification": "finite group in characteristic zero: derived "
                             "invariants computed by the Reynolds projector "
                             "(Maschke)",
            "equivariant": self.data.report(),
            "forgetful": {
                "h1_equivariant": self.data.h1_dim,
                "h1_plain": self.plain.h1_dim,
            },
        }


def z_components_per_base(kd: KuranishiData, z: GVec) -> dict[int, GVec]:
    """Split an element of m (x) g into its g-valued components per ideal
    basis element."""
    per_base: dict[int, dict[int, list[Fraction]]] = {}
    for deg, comp in z.parts.items():
        for col, c in enumerate(comp):
            if c == 0:
                continue
            bi, gn, gi = kd.nilp.index[deg][col]
            vec = per_base.setdefault(bi, {}).setdefault(
                gn, [ZERO] * kd.g.dim(gn))
            vec[gi] += c
    return {bi: GVec(parts) for bi, parts in per_base.items()}


def equivariant_kuranishi(g: DgLie, action: DgLieAction,
                          base: ArtinBase) -> EquivariantKuranishi:
    return EquivariantKuranishi(g, action, base)
