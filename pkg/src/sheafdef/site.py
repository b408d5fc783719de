"""Finite sites, presheaves of complexes, sheafification and descent tests.

A site here is a finite poset with registered covering families.  The
Grothendieck topology it generates is materialized as the full set of
covering sieves per object, computed by a saturation fixpoint.  On a finite
site every object has a minimum covering sieve, so the plus construction is
an honest finite limit and sheafification is plus applied twice.

Weak equivalences follow the sheaf-level notion: a map is a weak
equivalence iff the cohomology presheaves of its cone die after
sheafification.  Since sheafification is exact this is exactly
"quasi-isomorphism of sheafifications" at the level of cohomology sheaves,
and it is the formulation under which the nerve-vs-base comparison for
hypercovers holds on the nose.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .exactla import ONE, ZERO, SparseMatrix, Subspace, kernel_basis
from .complexes import ChainMap, Cohomology, FinComplex, cone

FINAL = "*"  # sentinel base for hypercovers of the final presheaf


class SiteError(ValueError):
    pass


class CapError(SiteError):
    """A computation exceeded its declared truncation cap or window; the
    message carries what would be needed."""


class ValidationReport:
    """Collected validation verdicts; bool() is overall success."""

    def __init__(self, subject: str):
        self.subject = subject
        self.errors: list[str] = []
        self.notes: list[str] = []

    def error(self, msg: str):
        self.errors.append(msg)

    def note(self, msg: str):
        self.notes.append(msg)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self):
        return self.ok

    def as_dict(self) -> dict:
        return {"subject": self.subject, "ok": self.ok,
                "errors": list(self.errors), "notes": list(self.notes)}

    def raise_if_failed(self):
        if self.errors:
            raise SiteError(f"{self.subject}: " + "; ".join(self.errors))


class FinSite:
    """Finite poset with covering families and optional meets.

    ``leq_pairs`` is closed up reflexively and transitively at construction;
    validate_site() re-checks the axioms and the saturation properties needed
    for sheafification (intersection-closed, pullback-stable sieves).
    """

    def __init__(self, objects: Sequence[str],
                 leq_pairs: Iterable[tuple[str, str]] = (),
                 covers: Optional[dict[str, Sequence[Sequence[str]]]] = None,
                 meets: Optional[dict[tuple[str, str], str]] = None,
                 global_covers: Sequence[Sequence[str]] = ()):
        self.objects = tuple(sorted(dict.fromkeys(objects)))
        rel = {(a, a) for a in self.objects}
        for a, b in leq_pairs:
            rel.add((a, b))
        changed = True
        while changed:
            changed = False
            for a, b in list(rel):
                for c, d in list(rel):
                    if b == c and (a, d) not in rel:
                        rel.add((a, d))
                        changed = True
        self._leq = frozenset(rel)
        self.covers = {u: tuple(tuple(f) for f in fams)
                       for u, fams in (covers or {}).items()}
        self.meets = dict(meets or {})
        for (a, b), m in list(self.meets.items()):
            self.meets[(b, a)] = m
        self.global_covers = tuple(tuple(f) for f in global_covers)
        self._sieves: Optional[dict[str, set[frozenset[str]]]] = None

    # -- order helpers ---------------------------------------------------

    def leq(self, a: str, b: str) -> bool:
        return (a, b) in self._leq

    def down(self, u: str) -> tuple[str, ...]:
        return tuple(v for v in self.objects if self.leq(v, u))

    def meet(self, a: str, b: str) -> Optional[str]:
        if self.leq(a, b):
            return a
        if self.leq(b, a):
            return b
        return self.meets.get((a, b))

    def meet_family(self, objs: Sequence[str]) -> Optional[str]:
        it = iter(objs)
        m = next(it)
        for o in it:
            m = self.meet(m, o)
            if m is None:
                return None
        return m

    # -- topology ----------------------------------------------------------

    def _downset_sieves(self, u: str) -> list[frozenset[str]]:
        down = self.down(u)
        out = []
        for mask in range(1 << len(down)):
            s = frozenset(down[i] for i in range(len(down)) if mask >> i & 1)
            if all(w in s for v in s for w in self.down(v)):
                out.append(s)
        return out

    def sieve_generated(self, u: str, family: Sequence[str]) -> frozenset[str]:
        return frozenset(v for v in self.down(u)
                         if any(self.leq(v, w) for w in family))

    def covering_sieves(self, u: str) -> set[frozenset[str]]:
        if self._sieves is None:
            self._compute_sieves()
        return self._sieves[u]

    def _compute_sieves(self):
        all_sieves = {u: self._downset_sieves(u) for u in self.objects}
        j: dict[str, set[frozenset[str]]] = {}
        for u in self.objects:
            gen = [self.sieve_generated(u, (u,))]
            for fam in self.covers.get(u, ()):
                gen.append(self.sieve_generated(u, fam))
            j[u] = {s for s in all_sieves[u] if any(s >= g for g in gen)}
        changed = True
        while changed:
            changed = False
            for u in self.objects:
                for s in all_sieves[u]:
                    if s in j[u]:
                        continue
                    for t in j[u]:
                        if all(frozenset(s & set(self.down(v))) in j[v] for v in t):
                            j[u].add(s)
                            changed = True
                            break
        self._sieves = j

    def min_sieve(self, u: str) -> frozenset[str]:
        sieves = self.covering_sieves(u)
        out = frozenset(self.down(u))
        for s in sieves:
            out = out & s
        if out not in sieves:
            raise SiteError(
                f"covering sieves of {u} are not intersection-closed; "
                "register common refinements of the covers")
        return out

    # -- validation ----------------------------------------------------------

    def validate_site(self) -> ValidationReport:
        rep = ValidationReport("site")
        for a in self.objects:
            for b in self.objects:
                if self.leq(a, b) and self.leq(b, a) and a != b:
                    rep.error(f"antisymmetry fails on {a}, {b}")
        for u, fams in self.covers.items():
            if u not in self.objects:
                rep.error(f"cover registered for unknown object {u}")
                continue
            for fam in fams:
                for v in fam:
                    if v not in self.objects:
                        rep.error(f"cover of {u} names unknown object {v}")
                    elif not self.leq(v, u):
                        rep.error(f"cover member {v} is not <= {u}")
        for fam in self.global_covers:
            for v in fam:
                if v not in self.objects:
                    rep.error(f"global cover names unknown object {v}")
        for (a, b), m in self.meets.items():
            if not (self.leq(m, a) and self.leq(m, b)):
                rep.error(f"meet {m} of ({a},{b}) is not a lower bound")
            else:
                for c in self.objects:
                    if self.leq(c, a) and self.leq(c, b) and not self.leq(c, m):
                        rep.error(f"meet {m} of ({a},{b}) misses lower bound {c}")
        if rep.ok:
            try:
                for u in self.objects:
                    self.min_sieve(u)
            except SiteError as exc:
                rep.error(str(exc))
        if rep.ok:
            # pullback stability of the saturated topology
            for u in self.objects:
                for s in self.covering_sieves(u):
                    for v in self.down(u):
                        if frozenset(s & set(self.down(v))) not in self.covering_sieves(v):
                            rep.error(
                                f"cover of {u} does not restrict to a cover of {v};"
                                " register a refining cover")
        return rep


# -- presheaves of complexes -------------------------------------------------


class PresheafC:
    """Assignment of a FinComplex to each object with restriction chain maps.

    Restrictions are stored for every strict pair V < U; functoriality is
    checked by validate().
    """

    def __init__(self, site: FinSite, values: dict[str, FinComplex],
                 restrictions: dict[tuple[str, str], ChainMap]):
        self.site = site
        self.values = dict(values)
        for u in site.objects:
            if u not in self.values:
                self.values[u] = FinComplex.zero()
        self.restrictions = dict(restrictions)

    def value(self, u: str) -> FinComplex:
        return self.values[u]

    def restriction(self, small: str, big: str) -> ChainMap:
        """Restriction map value(big) -> value(small) for small <= big."""
        if small == big:
            return ChainMap.identity(self.values[big])
        r = self.restrictions.get((small, big))
        if r is None:
            raise SiteError(f"missing restriction {big} -> {small}")
        return r

    def support(self) -> tuple[int, int]:
        lo, hi = 0, -1
        first = True
        for c in self.values.values():
            if c.is_zero():
                continue
            clo, chi = c.support
            if first:
                lo, hi = clo, chi
                first = False
            else:
                lo, hi = min(lo, clo), max(hi, chi)
        return (lo, hi)

    def validate(self) -> ValidationReport:
        rep = ValidationReport("presheaf")
        for (small, big), r in self.restrictions.items():
            if not self.site.leq(small, big):
                rep.error(f"restriction registered for non-pair {small} <= {big}")
                continue
            if r.source is not self.values[big] and r.source != self.values[big]:
                rep.error(f"restriction {big}->{small} has wrong source")
            if r.target is not self.values[small] and r.target != self.values[small]:
                rep.error(f"restriction {big}->{small} has wrong target")
        for w in self.site.objects:
            for v in self.site.objects:
                if not self.site.leq(w, v):
                    continue
                for u in self.site.objects:
                    if not self.site.leq(v, u) or u == v or v == w:
                        continue
                    try:
                        left = self.restriction(w, u)
                        via = self.restriction(w, v).compose(self.restriction(v, u))
                    except SiteError as exc:
                        rep.error(str(exc))
                        continue
                    for n in self.values[u].degrees():
                        if left.component(n) != via.component(n):
                            rep.error(
                                f"functoriality fails on {w} <= {v} <= {u} at degree {n}")
                            break
        return rep


class PresheafMap:
    """Map of presheaves of complexes: per-object chain maps commuting with
    restrictions."""

    def __init__(self, source: PresheafC, target: PresheafC,
                 components: dict[str, ChainMap], check: bool = True):
        self.source = source
        self.target = target
        self.components = {}
        for u in source.site.objects:
            comp = components.get(u)
            if comp is None:
                comp = ChainMap.zero(source.value(u), target.value(u))
            self.components[u] = comp
        if check:
            rep = self.validate()
            rep.raise_if_failed()

    def component(self, u: str) -> ChainMap:
        return self.components[u]

    def validate(self) -> ValidationReport:
        rep = ValidationReport("presheaf map")
        site = self.source.site
        for v in site.objects:
            for u in site.objects:
                if not site.leq(v, u) or u == v:
                    continue
                left = self.component(v).compose(self.source.restriction(v, u))
                right = self.target.restriction(v, u).compose(self.component(u))
                for n in self.source.value(u).degrees():
                    if left.component(n) != right.component(n):
                        rep.error(f"naturality fails on {v} <= {u} at degree {n}")
                        break
        return rep


def presheaf_identity(m: PresheafC) -> PresheafMap:
    return PresheafMap(m, m, {u: ChainMap.identity(m.value(u))
                              for u in m.site.objects}, check=False)


def zero_presheaf(site: FinSite) -> PresheafC:
    return PresheafC(site, {}, {})


def constant_presheaf(site: FinSite, dim: int = 1, degree: int = 0) -> PresheafC:
    values = {u: FinComplex({degree: dim}, {}) for u in site.objects}
    rest = {}
    for v in site.objects:
        for u in site.objects:
            if site.leq(v, u) and v != u:
                rest[(v, u)] = ChainMap(values[u], values[v],
                                        {degree: SparseMatrix.identity(dim)},
                                        check=False)
    return PresheafC(site, values, rest)


def representable_presheaf(site: FinSite, obj: str, degree: int = 0) -> PresheafC:
    """k . obj: value k at every V <= obj, zero elsewhere."""
    values = {}
    for u in site.objects:
        values[u] = FinComplex({degree: 1}, {}) if site.leq(u, obj) else FinComplex.zero()
    rest = {}
    for v in site.objects:
        for u in site.objects:
            if site.leq(v, u) and v != u:
                if site.leq(u, obj):
                    rest[(v, u)] = ChainMap(values[u], values[v],
                                            {degree: SparseMatrix.identity(1)},
                                            check=False)
                else:
                    rest[(v, u)] = ChainMap.zero(values[u], values[v])
    return PresheafC(site, values, rest)


def cone_presheaf(f: PresheafMap) -> PresheafC:
    """Pointwise cone with the diagonal restriction maps."""
    site = f.source.site
    values = {u: cone(f.component(u)) for u in site.objects}
    rest = {}
    for v in site.objects:
        for u in site.objects:
            if not site.leq(v, u) or v == u:
                continue
            src = values[u]
            tgt = values[v]
            rn = f.target.restriction(v, u)
            rm = f.source.restriction(v, u)
            comps = {}
            for n in src.degrees():
                entries = {}
                for (i, j), val in rn.component(n).items():
                    entries[(i, j)] = val
                off_t_src = f.target.value(u).dim(n)
                off_t_tgt = f.target.value(v).dim(n)
                for (i, j), val in rm.component(n + 1).items():
                    entries[(i + off_t_tgt, j + off_t_src)] = val
                comps[n] = SparseMatrix(tgt.dim(n), src.dim(n), entries)
            rest[(v, u)] = ChainMap(src, tgt, comps)
    return PresheafC(site, values, rest)


# -- plus construction and sheafification -------------------------------------


class _PlusData:
    """Limit-over-minimal-sieve data for one object and one presheaf.

    Layouts and compatibility kernels are computed per degree on demand, so
    presheaves of different supports can be compared through their plusses.
    """

    def __init__(self, m: PresheafC, u: str):
        self.m = m
        self.site = m.site
        self.members = tuple(sorted(m.site.min_sieve(u)))
        self._kernels: dict[int, Subspace] = {}
        self._offsets: dict[int, dict[str, int]] = {}

    def layout(self, n: int) -> dict[str, int]:
        offs = self._offsets.get(n)
        if offs is None:
            offs = {}
            pos = 0
            for v in self.members:
                offs[v] = pos
                pos += self.m.value(v).dim(n)
            self._offsets[n] = offs
        return offs

    def total(self, n: int) -> int:
        return sum(self.m.value(v).dim(n) for v in self.members)

    def kernel(self, n: int) -> Subspace:
        ker = self._kernels.get(n)
        if ker is not None:
            return ker
        m, site = self.m, self.site
        offs = self.layout(n)
        rows: list[dict[int, Fraction]] = []
        for w in self.members:
            for v in self.members:
                if w == v or not site.leq(w, v):
                    continue
                r = m.restriction(w, v).component(n)
                for i in range(m.value(w).dim(n)):
                    row: dict[int, Fraction] = {offs[w] + i: Fraction(-1)}
                    for (ri, rj), val in r.items():
                        if ri == i:
                            row[offs[v] + rj] = row.get(offs[v] + rj, ZERO) + val
                    if row:
                        rows.append(row)
        total = self.total(n)
        if rows:
            mat = SparseMatrix(len(rows), total,
                               {(i, j): val for i, row in enumerate(rows)
                                for j, val in row.items()})
            ker = kernel_basis(mat)
        else:
            ker = Subspace.full(total)
        self._kernels[n] = ker
        return ker

    def dim(self, n: int) -> int:
        return self.kernel(n).dim

    def family_to_coords(self, n: int, family: Sequence[Fraction]) -> list[Fraction]:
        coords = self.kernel(n).coordinates(family)
        if coords is None:
            raise SiteError("family is not compatible over the sieve")
        return coords

    def coords_to_family(self, n: int, coords: Sequence[Fraction]) -> list[Fraction]:
        ker = self.kernel(n)
        out = [ZERO] * ker.ambient_dim
        for c, basis_vec in zip(coords, ker.basis):
            if c != 0:
                for i, v in enumerate(basis_vec):
                    out[i] += c * v
        return out


class PlusConstruction:
    """One application of the plus construction, with unit and functoriality."""

    def __init__(self, m: PresheafC):
        self.source = m
        site = m.site
        self.data = {u: _PlusData(m, u) for u in site.objects}
        lo, hi = m.support()
        values = {}
        for u in site.objects:
            pd = self.data[u]
            dims = {n: pd.dim(n) for n in range(lo, hi + 1)}
            diffs = {}
            for n in range(lo, hi + 1):
                if pd.dim(n) == 0 or pd.dim(n + 1) == 0:
                    continue
                cols = []
                for k in range(pd.dim(n)):
                    fam = pd.coords_to_family(n, [ONE if t == k else ZERO
                                                  for t in range(pd.dim(n))])
                    big = [ZERO] * sum(m.value(v).dim(n + 1) for v in pd.members)
                    for v in pd.members:
                        dmat = m.value(v).diff(n)
                        off_n = pd.layout(n)[v]
                        off_n1 = pd.layout(n + 1)[v]
                        seg = fam[off_n: off_n + m.value(v).dim(n)]
                        img = dmat.mul_vec(seg)
                        for i, val in enumerate(img):
                            big[off_n1 + i] = val
                    cols.append(pd.family_to_coords(n + 1, big))
                entries = {(i, j): cols[j][i] for j in range(len(cols))
                           for i in range(pd.dim(n + 1)) if cols[j][i] != 0}
                diffs[n] = SparseMatrix(pd.dim(n + 1), pd.dim(n), entries)
            values[u] = FinComplex(dims, diffs)
        rest = {}
        for w in site.objects:
            for u in site.objects:
                if not site.leq(w, u) or w == u:
                    continue
                pu, pw = self.data[u], self.data[w]
                comps = {}
                for n in values[u].degrees():
                    cols = []
                    for k in range(pu.dim(n)):
                        fam = pu.coords_to_family(n, [ONE if t == k else ZERO
                                                      for t in range(pu.dim(n))])
                        big = [ZERO] * sum(m.value(v).dim(n) for v in pw.members)
                        for v in pw.members:
                            src_off = pu.layout(n)[v]
                            tgt_off = pw.layout(n)[v]
                            for i in range(m.value(v).dim(n)):
                                big[tgt_off + i] = fam[src_off + i]
                        cols.append(pw.family_to_coords(n, big))
                    entries = {(i, j): cols[j][i] for j in range(len(cols))
                               for i in range(pw.dim(n)) if cols[j][i] != 0}
                    comps[n] = SparseMatrix(pw.dim(n), pu.dim(n), entries)
                rest[(w, u)] = ChainMap(values[u], values[w], comps)
        self.presheaf = PresheafC(site, values, rest)

    def unit(self) -> PresheafMap:
        m = self.source
        comps = {}
        for u in m.site.objects:
            pd = self.data[u]
            src = m.value(u)
            mats = {}
            for n in src.degrees():
                cols = []
                for k in range(src.dim(n)):
                    vec = [ONE if t == k else ZERO for t in range(src.dim(n))]
                    big = [ZERO] * sum(m.value(v).dim(n) for v in pd.members)
                    for v in pd.members:
                        r = m.restriction(v, u).component(n)
                        off = pd.layout(n)[v]
                        img = r.mul_vec(vec)
                        for i, val in enumerate(img):
                            big[off + i] = val
                    cols.append(pd.family_to_coords(n, big))
                entries = {(i, j): cols[j][i] for j in range(len(cols))
                           for i in range(pd.dim(n)) if cols[j][i] != 0}
                mats[n] = SparseMatrix(pd.dim(n), src.dim(n), entries)
            comps[u] = ChainMap(src, self.presheaf.value(u), mats)
        return PresheafMap(m, self.presheaf, comps)

    def map(self, f: PresheafMap, target_plus: "PlusConstruction") -> PresheafMap:
        """Induced map on plus constructions (f: self.source -> target source)."""
        m, n_ = self.source, target_plus.source
        comps = {}
        for u in m.site.objects:
            pd_m, pd_n = self.data[u], target_plus.data[u]
            mats = {}
            for deg in self.presheaf.value(u).degrees():
                cols = []
                for k in range(pd_m.dim(deg)):
                    fam = pd_m.coords_to_family(deg, [ONE if t == k else ZERO
                                                      for t in range(pd_m.dim(deg))])
                    big = [ZERO] * sum(n_.value(v).dim(deg) for v in pd_n.members)
                    for v in pd_n.members:
                        comp = f.component(v).component(deg)
                        src_off = pd_m.layout(deg)[v]
                        seg = fam[src_off: src_off + m.value(v).dim(deg)]
                        img = comp.mul_vec(seg)
                        tgt_off = pd_n.layout(deg)[v]
                        for i, val in enumerate(img):
                            big[tgt_off + i] = val
                    cols.append(pd_n.family_to_coords(deg, big))
                entries = {(i, j): cols[j][i] for j in range(len(cols))
                           for i in range(pd_n.dim(deg)) if cols[j][i] != 0}
                mats[deg] = SparseMatrix(pd_n.dim(deg), pd_m.dim(deg), entries)
            comps[u] = ChainMap(self.presheaf.value(u),
                                target_plus.presheaf.value(u), mats)
        return PresheafMap(self.presheaf, target_plus.presheaf, comps)


class Sheafification:
    """Plus construction applied twice, with the unit M -> M^a."""

    def __init__(self, m: PresheafC):
        self.source = m
        self.first = PlusConstruction(m)
        self.second = PlusConstruction(self.first.presheaf)
        self.presheaf = self.second.presheaf

    def unit(self) -> PresheafMap:
        u1 = self.first.unit()
        u2 = self.second.unit()
        comps = {u: u2.component(u).compose(u1.component(u))
                 for u in self.source.site.objects}
        return PresheafMap(self.source, self.presheaf, comps)

    def map(self, f: PresheafMap, target: "Sheafification") -> PresheafMap:
        g = self.first.map(f, target.first)
        return self.second.map(g, target.second)


def sheafify(m: PresheafC) -> PresheafC:
    return Sheafification(m).presheaf


def presheaf_is_zero(m: PresheafC) -> bool:
    return all(m.value(u).is_zero() for u in m.site.objects)


def pointwise_cohomology_presheaf(m: PresheafC, i: int) -> PresheafC:
    """Presheaf U -> H^i(M(U)) with the induced restriction maps, placed in
    degree 0."""
    site = m.site
    cohs = {u: Cohomology(m.value(u)) for u in site.objects}
    values = {u: FinComplex({0: cohs[u].dim(i)}, {}) for u in site.objects}
    rest = {}
    for v in site.objects:
        for u in site.objects:
            if not site.leq(v, u) or v == u:
                continue
            r = m.restriction(v, u).component(i)
            cols = []
            for rep in cohs[u].representatives(i):
                img = r.mul_vec(list(rep))
                cols.append(cohs[v].class_of(i, img))
            entries = {(ri, j): cols[j][ri] for j in range(len(cols))
                       for ri in range(cohs[v].dim(i)) if cols[j][ri] != 0}
            mat = SparseMatrix(cohs[v].dim(i), cohs[u].dim(i), entries)
            rest[(v, u)] = ChainMap(values[u], values[v], {0: mat}, check=False)
    return PresheafC(site, values, rest)


def sheaf_cohomology_dims(m: PresheafC, i: int) -> dict[str, int]:
    """Dimensions of the i-th cohomology sheaf (sheafified cohomology
    presheaf) at every object."""
    h = pointwise_cohomology_presheaf(m, i)
    sh = sheafify(h)
    return {u: sh.value(u).dim(0) for u in m.site.objects}


def is_weak_equivalence(f: PresheafMap) -> bool:
    """True iff the sheafification of f is a quasi-isomorphism of complexes
    of sheaves, i.e. all cohomology sheaves of the cone vanish."""
    cn = cone_presheaf(f)
    lo, hi = cn.support()
    for i in range(lo, hi + 1):
        dims = sheaf_cohomology_dims(cn, i)
        if any(dims.values()):
            return False
    return True


def cokernel_presheaf(f: PresheafMap) -> PresheafC:
    """Degreewise cokernel with induced differentials and restrictions."""
    from .exactla import Quotient, Subspace as _Sub, column_space
    site = f.source.site
    quos: dict[str, dict[int, "Quotient"]] = {}
    values = {}
    for u in site.objects:
        tgt = f.target.value(u)
        per = {}
        dims = {}
        for n in tgt.degrees():
            amb = _Sub.full(tgt.dim(n))
            img = column_space(f.component(u).component(n))
            per[n] = Quotient(amb, img)
            dims[n] = per[n].dim
        quos[u] = per
        diffs = {}
        for n in tgt.degrees():
            qn, qn1 = per.get(n), per.get(n + 1)
            if not qn or not qn1 or qn.dim == 0 or qn1.dim == 0:
                continue
            cols = []
            for rep in qn.representatives:
                img = tgt.diff(n).mul_vec(list(rep))
                cols.append(qn1.project(img))
            entries = {(i, j): cols[j][i] for j in range(len(cols))
                       for i in range(qn1.dim) if cols[j][i] != 0}
            diffs[n] = SparseMatrix(qn1.dim, qn.dim, entries)
        values[u] = FinComplex(dims, diffs)
    rest = {}
    for v in site.objects:
        for u in site.objects:
            if not site.leq(v, u) or v == u:
                continue
            comps = {}
            for n in values[u].degrees():
                qu, qv = quos[u].get(n), quos[v].get(n)
                if not qu or qu.dim == 0:
                    continue
                r = f.target.restriction(v, u).component(n)
                cols = [qv.project(r.mul_vec(list(rep)))
                        for rep in qu.representatives]
                entries = {(i, j): cols[j][i] for j in range(len(cols))
                           for i in range(qv.dim) if cols[j][i] != 0}
                comps[n] = SparseMatrix(qv.dim, qu.dim, entries)
            rest[(v, u)] = ChainMap(values[u], values[v], comps)
    return PresheafC(site, values, rest)


def kernel_presheaf(f: PresheafMap) -> PresheafC:
    """Degreewise kernel with induced differentials and restrictions."""
    site = f.source.site
    kers: dict[str, dict[int, Subspace]] = {}
    values = {}
    for u in site.objects:
        src = f.source.value(u)
        per = {}
        dims = {}
        for n in src.degrees():
            per[n] = kernel_basis(f.component(u).component(n))
            dims[n] = per[n].dim
        kers[u] = per
        diffs = {}
        for n in src.degrees():
            kn, kn1 = per.get(n), per.get(n + 1)
            if not kn or not kn1 or kn.dim == 0 or kn1.dim == 0:
                continue
            cols = []
            for vec in kn.basis:
                img = src.diff(n).mul_vec(list(vec))
                coords = kn1.coordinates(img)
                if coords is None:
                    raise SiteError("kernel not preserved by differential")
                cols.append(coords)
            entries = {(i, j): cols[j][i] for j in range(len(cols))
                       for i in range(kn1.dim) if cols[j][i] != 0}
            diffs[n] = SparseMatrix(kn1.dim, kn.dim, entries)
        values[u] = FinComplex(dims, diffs)
    rest = {}
    for v in site.objects:
        for u in site.objects:
            if not site.leq(v, u) or v == u:
                continue
            comps = {}
            for n in values[u].degrees():
                ku, kv = kers[u].get(n), kers[v].get(n)
                if not ku or ku.dim == 0:
                    continue
                r = f.source.restriction(v, u).component(n)
                cols = []
                for vec in ku.basis:
                    img = r.mul_vec(list(vec))
                    coords = kv.coordinates(img) if kv else None
                    if coords is None:
                        raise SiteError("kernel not preserved by restriction")
                    cols.append(coords)
                entries = {(i, j): cols[j][i] for j in range(len(cols))
                           for i in range(kv.dim) if cols[j][i] != 0}
                comps[n] = SparseMatrix(kv.dim, ku.dim, entries)
            rest[(v, u)] = ChainMap(values[u], values[v], comps)
    return PresheafC(site, values, rest)


# -- free presheaf complexes ---------------------------------------------------


class FreePresheafComplex:
    """Complex of free presheaves: each degree a coproduct of representables.

    ``gens[n]`` lists the generating objects in degree n; the differential
    entry (r, c) may be nonzero only when obj(c) <= obj(r), since a map
    k.O_c -> k.O_r of representables is a scalar supported on that relation.
    """

    def __init__(self, site: FinSite, gens: dict[int, Sequence[str]],
                 d: dict[int, SparseMatrix]):
        self.site = site
        self.gens = {n: tuple(g) for n, g in gens.items() if g}
        self.d = {}
        for n in sorted(self.gens):
            mat = d.get(n)
            tgt = self.gens.get(n + 1, ())
            if mat is None:
                mat = SparseMatrix(len(tgt), len(self.gens[n]))
            if (mat.rows, mat.cols) != (len(tgt), len(self.gens[n])):
                raise ValueError(f"differential shape mismatch at degree {n}")
            for (r, c), v in mat.items():
                if not site.leq(self.gens[n][c], tgt[r]):
                    raise ValueError(
                        f"differential entry at degree {n} violates the order:"
                        f" {self.gens[n][c]} is not <= {tgt[r]}")
            if not mat.is_zero():
                self.d[n] = mat
        for n, mat in self.d.items():
            nxt = self.d.get(n + 1)
            if nxt is not None and not (nxt @ mat).is_zero():
                raise ValueError(f"free presheaf complex has d^2 != 0 at {n}")

    def degrees(self):
        return sorted(self.gens)

    def gen_count(self, n: int) -> int:
        return len(self.gens.get(n, ()))

    def diff(self, n: int) -> SparseMatrix:
        mat = self.d.get(n)
        if mat is None:
            mat = SparseMatrix(self.gen_count(n + 1), self.gen_count(n))
        return mat

    def value_indices(self, u: str, n: int) -> list[int]:
        return [i for i, o in enumerate(self.gens.get(n, ())) if self.site.leq(u, o)]

    def to_presheaf(self) -> PresheafC:
        site = self.site
        values = {}
        idx: dict[str, dict[int, list[int]]] = {}
        for u in site.objects:
            per = {n: self.value_indices(u, n) for n in self.degrees()}
            idx[u] = per
            dims = {n: len(ix) for n, ix in per.items()}
            diffs = {}
            for n in self.degrees():
                src_ix, tgt_ix = per.get(n, []), per.get(n + 1, [])
                if not src_ix or not tgt_ix:
                    continue
                pos_t = {g: i for i, g in enumerate(tgt_ix)}
                entries = {}
                for (r, c), v in self.diff(n).items():
                    if c in set(src_ix) and r in pos_t:
                        entries[(pos_t[r], src_ix.index(c))] = v
                diffs[n] = SparseMatrix(len(tgt_ix), len(src_ix), entries)
            values[u] = FinComplex(dims, diffs)
        rest = {}
        for v in site.objects:
            for u in site.objects:
                if not site.leq(v, u) or v == u:
                    continue
                comps = {}
                for n in self.degrees():
                    src_ix = idx[u].get(n, [])
                    tgt_ix = idx[v].get(n, [])
                    pos_t = {g: i for i, g in enumerate(tgt_ix)}
                    entries = {(pos_t[g], j): ONE for j, g in enumerate(src_ix)}
                    comps[n] = SparseMatrix(len(tgt_ix), len(src_ix), entries)
                rest[(v, u)] = ChainMap(values[u], values[v], comps)
        return PresheafC(site, values, rest)

    def shifted(self, k: int) -> "FreePresheafComplex":
        gens = {n - k: g for n, g in self.gens.items()}
        sign = Fraction(-1) ** (k % 2)
        d = {n - k: mat.scale(sign) for n, mat in self.d.items()}
        return FreePresheafComplex(self.site, gens, d)


class HomFromFree:
    """chom(F, M) for a free presheaf complex F: the total Hom complex whose
    degree-n part is prod over generators g in F-degree m of M^{n+m}(obj g),
    with (delta f) = d_M o f - (-1)^n f o d_F."""

    def __init__(self, free: FreePresheafComplex, m: PresheafC):
        self.free = free
        self.m = m
        self.index: dict[int, dict[tuple[int, int, int], int]] = {}
        dims: dict[int, int] = {}
        mlo, mhi = m.support()
        if free.gens and mhi >= mlo:
            flo = min(free.gens)
            fhi = max(free.gens)
            for n in range(mlo - fhi, mhi - flo + 1):
                table: dict[tuple[int, int, int], int] = {}
                pos = 0
                for fm in free.degrees():
                    for g, obj in enumerate(free.gens[fm]):
                        dim = m.value(obj).dim(n + fm)
                        for i in range(dim):
                            table[(fm, g, i)] = pos
                            pos += 1
                if table:
                    self.index[n] = table
                    dims[n] = pos
        diffs: dict[int, SparseMatrix] = {}
        for n, table in self.index.items():
            target = self.index.get(n + 1, {})
            entries: dict[tuple[int, int], Fraction] = {}
            sign = Fraction(-1) if n % 2 else ONE
            for (fm, g, i), col in table.items():
                obj = free.gens[fm][g]
                # d_M o f
                for (i2, i1), v in self.m.value(obj).diff(n + fm).items():
                    if i1 == i:
                        row = target.get((fm, g, i2))
                        if row is not None:
                            entries[(row, col)] = entries.get((row, col), ZERO) + v
                # -(-1)^n f o d_F : components at generators c of degree fm-1
                dmat = free.diff(fm - 1)
                for (r, c), v in dmat.items():
                    if r == g:
                        src_obj = free.gens[fm - 1][c]
                        res = self.m.restriction(src_obj, obj).component(n + fm)
                        for (ri, rj), rv in res.items():
                            if rj == i:
                                row = target.get((fm - 1, c, ri))
                                if row is not None:
                                    entries[(row, col)] = (entries.get((row, col), ZERO)
                                                           - sign * v * rv)
            diffs[n] = SparseMatrix(dims.get(n + 1, 0), dims.get(n, 0), entries)
        self.complex = FinComplex(dims, diffs)

    def augmentation_from(self, u: str) -> ChainMap:
        """The canonical map M(u) -> chom(F, M) for an augmented F whose
        degree-0 generators all lie below u."""
        src = self.m.value(u)
        comps = {}
        for n in src.degrees():
            table = self.index.get(n, {})
            entries = {}
            for g, obj in enumerate(self.free.gens.get(0, ())):
                res = self.m.restriction(obj, u).component(n)
                for (i, j), v in res.items():
                    row = table.get((0, g, i))
                    if row is not None:
                        entries[(row, j)] = v
            comps[n] = SparseMatrix(self.complex.dim(n), src.dim(n), entries)
        return ChainMap(src, self.complex, comps)

    def map_on_hom(self, f: PresheafMap, target_hom: "HomFromFree") -> ChainMap:
        """chom(F, f): induced map chom(F, M) -> chom(F, N)."""
        comps = {}
        for n, table in self.index.items():
            entries = {}
            t_table = target_hom.index.get(n, {})
            for (fm, g, i), col in table.items():
                obj = self.free.gens[fm][g]
                comp = f.component(obj).component(n + fm)
                for (i2, i1), v in comp.items():
                    if i1 == i:
                        row = t_table.get((fm, g, i2))
                        if row is not None:
                            entries[(row, col)] = v
            comps[n] = SparseMatrix(target_hom.complex.dim(n),
                                    self.complex.dim(n), entries)
        return ChainMap(self.complex, target_hom.complex, comps)
