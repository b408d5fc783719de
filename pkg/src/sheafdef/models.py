"""Built-in example generators: two-chart projective-line models with
windowed Laurent sections, small test sites, and small associative algebras.

Window honesty: every windowed model is meant to be recomputed at window
D+2; pipelines report the window so the stability certificate is explicit.
"""

from __future__ import annotations

from fractions import Fraction
from .exactla import ONE, SparseMatrix
from .complexes import ChainMap, FinComplex
from .site import FinSite, PresheafC


# -- sites -------------------------------------------------------------------


def p1_site() -> FinSite:
    """Affine-objects site of the two-chart projective line: only identity
    covers on objects, the two charts cover the final presheaf."""
    return FinSite(
        ["U0", "U1", "U01"],
        [("U01", "U0"), ("U01", "U1")],
        meets={("U0", "U1"): "U01"},
        global_covers=[["U0", "U1"]],
    )


def wuvp_site() -> FinSite:
    """W covered by {U, V} with meet P: the smallest site with a nontrivial
    cover of an object."""
    return FinSite(
        ["W", "U", "V", "P"],
        [("U", "W"), ("V", "W"), ("P", "U"), ("P", "V")],
        covers={"W": [["U", "V"]]},
        meets={("U", "V"): "P"},
    )


def chain_site() -> FinSite:
    """Two objects B <= A with {B} registered as a cover of A."""
    return FinSite(["A", "B"], [("B", "A")], covers={"A": [["B"]]})


def disjoint_cover_site() -> FinSite:
    """W covered by {U, V} with no meet: U and V have no common lower bound,
    so the Cech nerve cannot be formed."""
    return FinSite(["W", "U", "V"], [("U", "W"), ("V", "W")],
                   covers={"W": [["U", "V"]]})


def p1_three_chart_site() -> FinSite:
    """Three affine charts with pairwise and triple meets."""
    return FinSite(
        ["U0", "U1", "U2", "U01", "U02", "U12", "U012"],
        [("U01", "U0"), ("U01", "U1"), ("U02", "U0"), ("U02", "U2"),
         ("U12", "U1"), ("U12", "U2"),
         ("U012", "U01"), ("U012", "U02"), ("U012", "U12")],
        meets={("U0", "U1"): "U01", ("U0", "U2"): "U02", ("U1", "U2"): "U12",
               ("U01", "U02"): "U012", ("U01", "U12"): "U012",
               ("U02", "U12"): "U012", ("U01", "U2"): "U012",
               ("U02", "U1"): "U012", ("U12", "U0"): "U012",
               ("U012", "U0"): "U012", ("U012", "U1"): "U012",
               ("U012", "U2"): "U012"},
        global_covers=[["U0", "U1", "U2"]],
    )


# -- windowed Laurent models ----------------------------------------------------


class LaurentWindows:
    """Exponent windows per object of the P1 site, with inclusion
    restrictions; sections of twist(m) over the charts are x^0..x^D and
    x^{m-D}..x^m."""

    def __init__(self, windows: dict[str, range]):
        self.windows = {u: list(rng) for u, rng in windows.items()}

    def presheaf(self, site: FinSite) -> PresheafC:
        values = {u: FinComplex({0: len(exps)}, {})
                  for u, exps in self.windows.items()}
        rest = {}
        for v in site.objects:
            for u in site.objects:
                if not site.leq(v, u) or v == u:
                    continue
                src = self.windows[u]
                tgt = self.windows[v]
                pos = {e: i for i, e in enumerate(tgt)}
                entries = {}
                for j, e in enumerate(src):
                    if e not in pos:
                        raise ValueError(
                            f"window of {v} does not contain exponent {e} from {u}")
                    entries[(pos[e], j)] = ONE
                rest[(v, u)] = ChainMap(values[u], values[v],
                                        {0: SparseMatrix(len(tgt), len(src), entries)},
                                        check=False)
        return PresheafC(site, values, rest)


def p1_structure(window: int = 4) -> tuple[PresheafC, LaurentWindows]:
    site = p1_site()
    lw = LaurentWindows({
        "U0": range(0, window + 1),
        "U1": range(-window, 1),
        "U01": range(-window, window + 1),
    })
    return lw.presheaf(site), lw


def p1_twist(m: int, window: int = 4) -> tuple[PresheafC, LaurentWindows]:
    site = p1_site()
    lo = min(0, m - window)
    hi = max(window, m)
    lw = LaurentWindows({
        "U0": range(0, window + 1),
        "U1": range(m - window, m + 1),
        "U01": range(lo, hi + 1),
    })
    return lw.presheaf(site), lw


def p1_tangent(window: int = 4) -> tuple[PresheafC, LaurentWindows]:
    """Vector fields x^a d/dx: chart windows a in 0..D and a in 2-D..2."""
    site = p1_site()
    lw = LaurentWindows({
        "U0": range(0, window + 1),
        "U1": range(2 - window, 3),
        "U01": range(2 - window, window + 1),
    })
    return lw.presheaf(site), lw


def vector_field_bracket(a: int, b: int) -> tuple[int, Fraction]:
    """[x^a d, x^b d] = (b - a) x^{a+b-1} d."""
    return a + b - 1, Fraction(b - a)


def _abelian_window_dglie(exps: list[int], name: str):
    from .complexes import FinComplex
    from .dglie import abelian_dglie
    return abelian_dglie(FinComplex({0: len(exps)}, {}), name=name)


def _vector_field_window_dglie(exps: list[int], name: str):
    """Vector fields x^a d spanned by a window of exponents; bracket pairs
    that leave the window are marked missing, never truncated."""
    from .complexes import FinComplex
    from .dglie import DgLie
    pos = {e: i for i, e in enumerate(exps)}
    table = {}
    missing = set()
    block = {}
    for i, a in enumerate(exps):
        for j, b in enumerate(exps):
            target, coeff = vector_field_bracket(a, b)
            if coeff == 0:
                continue
            if target in pos:
                block[(i, j)] = {pos[target]: coeff}
            else:
                missing.add((i, j))
    if block:
        table[(0, 0)] = block
    return DgLie(FinComplex({0: len(exps)}, {}), table,
                 missing={(0, 0): missing} if missing else None, name=name)


def _window_restrictions(lw: LaurentWindows, site: FinSite):
    from .exactla import SparseMatrix as _SM
    rest = {}
    for v in site.objects:
        for u in site.objects:
            if not site.leq(v, u) or v == u:
                continue
            src = lw.windows[u]
            tgt = lw.windows[v]
            pos = {e: i for i, e in enumerate(tgt)}
            entries = {(pos[e], j): ONE for j, e in enumerate(src)}
            rest[(v, u)] = {0: _SM(len(tgt), len(src), entries)}
    return rest


def p1_twist_dglie(m: int, window: int = 4):
    """Abelian dg Lie presheaf data of the twist model: (values,
    restrictions, windows)."""
    _, lw = p1_twist(m, window)
    site = p1_site()
    values = {u: _abelian_window_dglie(lw.windows[u], f"O({m})|{u}")
              for u in site.objects}
    return values, _window_restrictions(lw, site), lw


def p1_tangent_dglie(window: int = 4):
    """Windowed vector-field dg Lie presheaf data of the tangent model."""
    _, lw = p1_tangent(window)
    site = p1_site()
    values = {u: _vector_field_window_dglie(lw.windows[u], f"T|{u}")
              for u in site.objects}
    return values, _window_restrictions(lw, site), lw


# -- small associative algebras ---------------------------------------------------


class AlgebraSpec:
    """Dimension, structure constants and unit of a small associative
    algebra, in a fixed ordered basis."""

    def __init__(self, name: str, dim: int,
                 mult: dict[tuple[int, int], dict[int, Fraction]],
                 unit: list[Fraction], basis_names: list[str]):
        self.name = name
        self.dim = dim
        self.mult = mult
        self.unit = unit
        self.basis_names = basis_names


def algebra_k() -> AlgebraSpec:
    return AlgebraSpec("k", 1, {(0, 0): {0: ONE}}, [ONE], ["1"])


def algebra_k_times_k() -> AlgebraSpec:
    mult = {(0, 0): {0: ONE}, (1, 1): {1: ONE}}
    return AlgebraSpec("kxk", 2, mult, [ONE, ONE], ["e0", "e1"])


def algebra_truncated_poly(n: int) -> AlgebraSpec:
    """k[x]/(x^n) in the basis 1, x, ..., x^{n-1}."""
    mult: dict[tuple[int, int], dict[int, Fraction]] = {}
    for i in range(n):
        for j in range(n):
            if i + j < n:
                mult[(i, j)] = {i + j: ONE}
    unit = [ONE] + [Fraction(0)] * (n - 1)
    return AlgebraSpec(f"k[x]/(x^{n})", n, mult, unit,
                       [f"x^{i}" if i else "1" for i in range(n)])


def algebra_m2() -> AlgebraSpec:
    """2x2 matrices in the basis e11, e12, e21, e22."""
    idx = {(1, 1): 0, (1, 2): 1, (2, 1): 2, (2, 2): 3}
    mult: dict[tuple[int, int], dict[int, Fraction]] = {}
    for (a, b), i in idx.items():
        for (c, d), j in idx.items():
            if b == c:
                mult[(i, j)] = {idx[(a, d)]: ONE}
    unit = [ONE, Fraction(0), Fraction(0), ONE]
    return AlgebraSpec("m2", 4, mult, unit, ["e11", "e12", "e21", "e22"])


SMALL_ALGEBRAS = {
    "k": algebra_k,
    "kxk": algebra_k_times_k,
    "dual": lambda: algebra_truncated_poly(2),
    "x3": lambda: algebra_truncated_poly(3),
    "m2": algebra_m2,
}
