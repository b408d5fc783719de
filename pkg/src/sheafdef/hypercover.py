"""Semi-representable simplicial presheaves, Cech nerves and hypercovers.

Simplicial objects are stored split: only nondegenerate cells are
materialized per level (up to a bound), every other simplex is a pair
(surjection, nondegenerate cell), and simplicial operators act through the
epi-mono factorization calculus.  Degenerate bookkeeping is therefore exact
and the normalized chain complex falls out by dropping non-identity pairs.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

from .exactla import SparseMatrix
from .site import (FINAL, CapError, FinSite, FreePresheafComplex, SiteError,
                   ValidationReport)


# -- monotone map calculus ----------------------------------------------------

Mono = tuple  # a monotone map [a] -> [b] as the value tuple of length a+1


def compose(f: Mono, g: Mono) -> Mono:
    """f o g for g: [a]->[b], f: [b]->[c]."""
    return tuple(f[v] for v in g)


def face_map(n: int, i: int) -> Mono:
    """delta^i: [n-1] -> [n], skipping i."""
    return tuple(j if j < i else j + 1 for j in range(n))


def degeneracy_map(n: int, i: int) -> Mono:
    """sigma^i: [n+1] -> [n], repeating i."""
    return tuple(j if j <= i else j - 1 for j in range(n + 2))


def identity_map(n: int) -> Mono:
    return tuple(range(n + 1))


def epi_mono_factor(f: Mono) -> tuple[Mono, Mono]:
    """f = mono o epi with epi surjective onto the image."""
    image = sorted(set(f))
    rank = {v: r for r, v in enumerate(image)}
    epi = tuple(rank[v] for v in f)
    mono = tuple(image)
    return epi, mono


@lru_cache(maxsize=None)
def surjections(n: int, m: int) -> tuple[Mono, ...]:
    """All monotone surjections [n] -> [m]."""
    if m > n or m < 0:
        return ()
    if n == 0:
        return ((0,),) if m == 0 else ()
    if m == 0:
        return (tuple([0] * (n + 1)),)
    out = []
    for prev in surjections(n - 1, m):
        out.append(prev + (m,))
    for prev in surjections(n - 1, m - 1):
        out.append(prev + (m,))
    return tuple(out)


Entry = tuple  # (alpha: epi value-tuple, idx: int); level = len(alpha) - 1


class SimpPresheaf:
    """Split semi-representable simplicial presheaf on a finite poset site.

    ``nondeg[m]`` holds (object, faces) pairs; faces are Entry references one
    level down.  ``skeletal_promise`` is the declared level above which all
    simplices are degenerate (None when no such promise is made, e.g. for
    materialized-to-a-bound Cech nerves).
    """

    def __init__(self, site: FinSite, bound: int,
                 nondeg: dict[int, list[tuple[str, tuple[Entry, ...]]]],
                 skeletal_promise: Optional[int] = None,
                 nerve_family: Optional[tuple[str, ...]] = None):
        self.site = site
        self.bound = bound
        self.nondeg = {m: list(cells) for m, cells in nondeg.items() if cells}
        self.skeletal_promise = skeletal_promise
        self.nerve_family = nerve_family

    # -- entry bookkeeping --------------------------------------------------

    def nondeg_count(self, m: int) -> int:
        return len(self.nondeg.get(m, ()))

    def entries(self, n: int) -> list[Entry]:
        if n > self.bound:
            raise SiteError(f"level {n} above materialized bound {self.bound}")
        out = []
        for m in range(0, n + 1):
            count = self.nondeg_count(m)
            if count == 0:
                continue
            for alpha in surjections(n, m):
                for idx in range(count):
                    out.append((alpha, idx))
        return out

    def entry_level(self, e: Entry) -> int:
        return len(e[0]) - 1

    def entry_object(self, e: Entry) -> str:
        alpha, idx = e
        m = max(alpha) if alpha else 0
        return self.nondeg[m][idx][0]

    def is_nondegenerate(self, e: Entry) -> bool:
        alpha, _ = e
        return alpha == identity_map(len(alpha) - 1)

    def stored_face(self, m: int, idx: int, j: int) -> Entry:
        return self.nondeg[m][idx][1][j]

    def apply_monotone(self, e: Entry, f: Mono) -> Entry:
        """e o f: the action of a monotone map, via epi-mono factoring."""
        alpha, idx = e
        comp = compose(alpha, f)
        epi, mono = epi_mono_factor(comp)
        m = max(alpha)
        cell = self._apply_mono_to_nondeg(m, idx, mono)
        calpha, cidx = cell
        return (compose(calpha, epi), cidx)

    def _apply_mono_to_nondeg(self, m: int, idx: int, mono: Mono) -> Entry:
        if mono == identity_map(m):
            return (identity_map(m), idx)
        missing = max(v for v in range(m + 1) if v not in mono)
        inner = tuple(v if v < missing else v - 1 for v in mono)
        face = self.stored_face(m, idx, missing)
        return self.apply_monotone(face, inner)

    def face(self, e: Entry, i: int) -> Entry:
        n = self.entry_level(e)
        return self.apply_monotone(e, face_map(n, i))

    def degeneracy(self, e: Entry, i: int) -> Entry:
        n = self.entry_level(e)
        return self.apply_monotone(e, degeneracy_map(n, i))

    def sections(self, n: int, u: str) -> list[Entry]:
        return [e for e in self.entries(n) if self.site.leq(u, self.entry_object(e))]

    # -- validation -----------------------------------------------------------

    def validate_structure(self) -> ValidationReport:
        rep = ValidationReport("simplicial presheaf")
        for m, cells in sorted(self.nondeg.items()):
            for idx, (obj, faces) in enumerate(cells):
                if obj not in self.site.objects:
                    rep.error(f"level {m} cell {idx}: unknown object {obj}")
                    continue
                if m == 0:
                    if faces:
                        rep.error(f"level 0 cell {idx} has faces")
                    continue
                if len(faces) != m + 1:
                    rep.error(f"level {m} cell {idx}: expected {m+1} faces")
                    continue
                for j, f in enumerate(faces):
                    if self.entry_level(f) != m - 1:
                        rep.error(f"level {m} cell {idx}: face {j} has wrong level")
                        continue
                    if not self.site.leq(obj, self.entry_object(f)):
                        rep.error(
                            f"level {m} cell {idx}: object {obj} not <= face object"
                            f" {self.entry_object(f)}")
        if rep.ok:
            for m, cells in sorted(self.nondeg.items()):
                if m < 2:
                    continue
                for idx in range(len(cells)):
                    e = (identity_map(m), idx)
                    for j in range(m + 1):
                        for i in range(j):
                            left = self.face(self.face(e, j), i)
                            right = self.face(self.face(e, i), j - 1)
                            if left != right:
                                rep.error(
                                    f"simplicial identity d_{i} d_{j} fails on level"
                                    f" {m} cell {idx}")
        return rep

    def matching_tuples(self, n: int, u: str) -> list[tuple[Entry, ...]]:
        """Sections of (cosk_n)_{n+1} at u: (n+2)-tuples with d_i x_j = d_{j-1} x_i."""
        secs = self.sections(n, u)
        faces = {e: tuple(self.face(e, i) for i in range(n + 1)) if n > 0 else ()
                 for e in secs}
        results: list[tuple[Entry, ...]] = []

        def extend(partial: list[Entry]):
            j = len(partial)
            if j == n + 2:
                results.append(tuple(partial))
                return
            for cand in secs:
                ok = True
                if n > 0:
                    for i in range(j):
                        if faces[cand][i] != faces[partial[i]][j - 1]:
                            ok = False
                            break
                if ok:
                    extend(partial + [cand])

        extend([])
        return results


class Coskeleton:
    """Pointwise n-coskeleton of a split simplicial presheaf, as sets.

    Levels <= n agree with the input; level n+1 is the matching object.
    Higher levels are not materialized.
    """

    def __init__(self, simp: SimpPresheaf, n: int):
        self.simp = simp
        self.n = n

    def sections(self, p: int, u: str):
        if p <= self.n:
            return self.simp.sections(p, u)
        if p == self.n + 1:
            return self.simp.matching_tuples(self.n, u)
        raise SiteError(f"coskeleton sections only materialized up to level {self.n + 1}")

    def section_count(self, p: int, u: str) -> int:
        return len(self.sections(p, u))


def coskeleton(simp: SimpPresheaf, n: int) -> Coskeleton:
    return Coskeleton(simp, n)


class Hypercover:
    """Augmented simplicial semi-representable presheaf over an object or the
    final presheaf."""

    def __init__(self, simp: SimpPresheaf, base: str, name: str = "hypercover"):
        self.simp = simp
        self.base = base
        self.name = name

    @property
    def site(self) -> FinSite:
        return self.simp.site

    @property
    def is_nerve(self) -> bool:
        return self.simp.nerve_family is not None

    def relevant_objects(self) -> tuple[str, ...]:
        if self.base == FINAL:
            return self.site.objects
        return self.site.down(self.base)

    # -- structural predicates ----------------------------------------------

    def is_finite_dimensional(self) -> bool:
        """Coincides with its n-th skeleton for some n."""
        if self.is_nerve:
            return len(self.simp.nerve_family) <= 1
        return self.simp.skeletal_promise is not None

    def dimension(self) -> Optional[int]:
        if not self.is_finite_dimensional():
            return None
        return max((m for m, cells in self.simp.nondeg.items() if cells), default=0)

    def is_split(self) -> bool:
        # the representation keeps degenerate and nondegenerate parts apart
        return True

    # -- validation ------------------------------------------------------------

    def validate(self) -> ValidationReport:
        rep = ValidationReport(f"hypercover {self.name}")
        srep = self.simp.validate_structure()
        rep.errors.extend(srep.errors)
        if not rep.ok:
            return rep
        if self.base != FINAL and self.base not in self.site.objects:
            rep.error(f"unknown base object {self.base}")
            return rep
        if self.base != FINAL:
            for m, cells in self.simp.nondeg.items():
                for idx, (obj, _) in enumerate(cells):
                    if not self.site.leq(obj, self.base):
                        rep.error(f"level {m} cell {idx} object {obj} is not <= base")
        if not rep.ok:
            return rep
        relevant = self.relevant_objects()
        # HC2: the augmentation to the base is a cover
        for y in relevant:
            sieve = frozenset(
                z for z in self.site.down(y)
                if any(self.site.leq(z, obj) for obj, _ in self.simp.nondeg.get(0, ())))
            if sieve not in self.site.covering_sieves(y):
                rep.error(f"HC2 fails: level 0 does not cover {y}")
        # HC1 up to the materialized bound
        for n in range(0, self.simp.bound):
            lift_table: dict[tuple, list[str]] = {}
            for z in self.simp.entries(n + 1):
                key = tuple(self.simp.face(z, i) for i in range(n + 2))
                lift_table.setdefault(key, []).append(self.simp.entry_object(z))
            for y in relevant:
                for tau in self.simp.matching_tuples(n, y):
                    objs = lift_table.get(tau, [])
                    sieve = frozenset(
                        z for z in self.site.down(y)
                        if any(self.site.leq(z, o) for o in objs))
                    if sieve not in self.site.covering_sieves(y):
                        rep.error(
                            f"HC1 fails at level {n + 1} over {y}: matching section"
                            f" {tau} does not lift locally")
        rep.note(f"HC1 checked for levels 1..{self.simp.bound}; behavior above the"
                 f" bound is {'implied by the skeletal promise' if self.is_finite_dimensional() else 'not checked'}")
        return rep

    # -- chain complexes ---------------------------------------------------------

    def normalized_chains(self, cap: Optional[int] = None
                          ) -> tuple[FreePresheafComplex, bool]:
        """Normalized chains as a free presheaf complex in degrees <= 0.

        Returns (complex, truncated).  For a non-finite-dimensional
        hypercover a cap must be supplied; the truncation is reported, never
        silent.
        """
        if self.is_finite_dimensional():
            top = self.dimension()
            cap = top if cap is None else min(cap, top)
            truncated = False
        else:
            if cap is None:
                raise CapError(
                    "normalized chains of a non-finite-dimensional hypercover "
                    "need an explicit cap")
            if cap > self.simp.bound:
                raise CapError(
                    f"cap {cap} above materialized bound {self.simp.bound}")
            truncated = self.simp.nondeg_count(cap + 1) > 0 if cap + 1 <= self.simp.bound else True
        gens = {}
        for m in range(0, cap + 1):
            cells = self.simp.nondeg.get(m, [])
            if cells:
                gens[-m] = [obj for obj, _ in cells]
        d = {}
        for m in range(1, cap + 1):
            cells = self.simp.nondeg.get(m, [])
            tgt = self.simp.nondeg.get(m - 1, [])
            if not cells or not tgt:
                continue
            entries: dict[tuple[int, int], Fraction] = {}
            for idx in range(len(cells)):
                e = (identity_map(m), idx)
                for i in range(m + 1):
                    f = self.simp.face(e, i)
                    if self.simp.is_nondegenerate(f):
                        key = (f[1], idx)
                        entries[key] = entries.get(key, Fraction(0)) + Fraction(-1) ** i
            mat = SparseMatrix(len(tgt), len(cells),
                               {k: v for k, v in entries.items() if v != 0})
            d[-m] = mat
        return FreePresheafComplex(self.site, gens, d), truncated

    def alternating_chains(self) -> FreePresheafComplex:
        """Ordered-tuple chains of a Cech nerve: finite, quasi-isomorphic to
        the normalized chains."""
        if not self.is_nerve:
            raise SiteError("alternating chains are defined for Cech nerves only")
        family = self.simp.nerve_family
        site = self.site
        from itertools import combinations
        gens: dict[int, list[str]] = {}
        index: dict[int, dict[tuple[int, ...], int]] = {}
        for p in range(len(family)):
            tuples = list(combinations(range(len(family)), p + 1))
            objs = []
            table = {}
            for t in tuples:
                obj = site.meet_family([family[i] for i in t])
                if obj is None:
                    raise SiteError("missing meet while forming alternating chains")
                table[t] = len(objs)
                objs.append(obj)
            gens[-p] = objs
            index[p] = table
        d: dict[int, SparseMatrix] = {}
        for p in range(1, len(family)):
            entries = {}
            for t, col in index[p].items():
                for k in range(p + 1):
                    sub = t[:k] + t[k + 1:]
                    row = index[p - 1][sub]
                    entries[(row, col)] = entries.get((row, col), Fraction(0)) + Fraction(-1) ** k
            d[-p] = SparseMatrix(len(gens[-(p - 1)]), len(gens[-p]),
                                 {k: v for k, v in entries.items() if v != 0})
        return FreePresheafComplex(site, gens, d)

    def chains(self, cap: Optional[int] = None) -> tuple[FreePresheafComplex, bool, str]:
        """The finite chain model used for executable statements: alternating
        for nerves, normalized otherwise."""
        if self.is_nerve and len(self.simp.nerve_family) > 1:
            return self.alternating_chains(), False, "alternating"
        free, truncated = self.normalized_chains(cap)
        return free, truncated, "normalized"


# -- constructors -----------------------------------------------------------------


def _collapse(tup: Sequence[int]) -> tuple[Mono, tuple[int, ...]]:
    """Collapse adjacent duplicates; returns (epi, reduced tuple)."""
    reduced = [tup[0]]
    alpha = [0]
    for v in tup[1:]:
        if v != reduced[-1]:
            reduced.append(v)
        alpha.append(len(reduced) - 1)
    return tuple(alpha), tuple(reduced)


def cech_nerve(site: FinSite, family: Sequence[str], base: str,
               bound: int = 3, name: Optional[str] = None) -> Hypercover:
    """The Cech nerve of a covering family; level n is the coproduct of the
    meets over (n+1)-tuples, materialized up to ``bound``."""
    family = tuple(family)
    if not family:
        raise SiteError("empty covering family")
    for v in family:
        if v not in site.objects:
            raise SiteError(f"unknown object {v} in covering family")
        if base != FINAL and not site.leq(v, base):
            raise SiteError(f"family member {v} is not <= base {base}")
    nondeg: dict[int, list[tuple[str, tuple[Entry, ...]]]] = {}
    index: dict[int, dict[tuple[int, ...], int]] = {}

    def tuples_no_adjacent(m: int):
        if m == 0:
            return [(i,) for i in range(len(family))]
        out = []
        for t in tuples_no_adjacent(m - 1):
            for i in range(len(family)):
                if i != t[-1]:
                    out.append(t + (i,))
        return out

    for m in range(bound + 1):
        cells = []
        table = {}
        for t in tuples_no_adjacent(m):
            obj = site.meet_family([family[i] for i in t])
            if obj is None:
                raise SiteError(
                    f"missing meet for tuple {tuple(family[i] for i in t)}")
            table[t] = len(cells)
            cells.append((obj, t))
        nondeg[m] = cells
        index[m] = table
    built: dict[int, list[tuple[str, tuple[Entry, ...]]]] = {}
    for m in range(bound + 1):
        out = []
        for obj, t in nondeg[m]:
            faces = []
            if m > 0:
                for i in range(m + 1):
                    sub = t[:i] + t[i + 1:]
                    alpha, reduced = _collapse(sub)
                    faces.append((alpha, index[len(reduced) - 1][reduced]))
            out.append((obj, tuple(faces)))
        built[m] = out
    simp = SimpPresheaf(site, bound, built, skeletal_promise=None, nerve_family=family)
    return Hypercover(simp, base, name or f"nerve({','.join(family)})/{base}")


def constant_hypercover(site: FinSite, u: str, bound: int = 3) -> Hypercover:
    """The identity cover's nerve: constant simplicial presheaf on u."""
    return cech_nerve(site, [u], u, bound=bound, name=f"id({u})")


def validate_hypercover(v: Hypercover) -> ValidationReport:
    return v.validate()


def normalized_chains(v: Hypercover, cap: Optional[int] = None):
    return v.normalized_chains(cap)


def is_finite_dimensional(v: Hypercover) -> bool:
    return v.is_finite_dimensional()


def is_split(v: Hypercover) -> bool:
    return v.is_split()


def hypercover_from_cells(site: FinSite, base: str,
                          cells: dict[int, list[tuple[str, list]]],
                          bound: Optional[int] = None,
                          skeletal: bool = True,
                          name: str = "custom") -> Hypercover:
    """Hand-built hypercover; faces given as [alpha list, idx] entry pairs.

    ``skeletal`` declares that everything above the top supplied level is
    degenerate.
    """
    top = max(cells) if cells else 0
    bound = bound if bound is not None else top + 1
    nondeg: dict[int, list[tuple[str, tuple[Entry, ...]]]] = {}
    for m, lst in cells.items():
        out = []
        for obj, faces in lst:
            refs = tuple((tuple(alpha), idx) for alpha, idx in faces)
            out.append((obj, refs))
        nondeg[m] = out
    simp = SimpPresheaf(site, bound, nondeg,
                        skeletal_promise=top if skeletal else None)
    return Hypercover(simp, base, name)
