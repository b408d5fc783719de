from fractions import Fraction

import pytest

from sheafdef.exactla import SparseMatrix
from sheafdef.complexes import ChainMap, Cohomology, FinComplex
from sheafdef.site import (FINAL, FinSite, PresheafC, PresheafMap,
                           Sheafification, constant_presheaf, cone_presheaf,
                           is_weak_equivalence, pointwise_cohomology_presheaf,
                           representable_presheaf, sheaf_cohomology_dims,
                           sheafify, kernel_presheaf, zero_presheaf)


def one_object_site():
    return FinSite(["U"], [])


def wuvp_site():
    # W covered by {U, V} with meet P
    return FinSite(
        ["W", "U", "V", "P"],
        [("U", "W"), ("V", "W"), ("P", "U"), ("P", "V")],
        covers={"W": [["U", "V"]]},
        meets={("U", "V"): "P"},
    )


def p1_site():
    return FinSite(
        ["U0", "U1", "U01"],
        [("U01", "U0"), ("U01", "U1")],
        meets={("U0", "U1"): "U01"},
        global_covers=[["U0", "U1"]],
    )


def line_presheaf(site, dims, restriction_entries):
    """Degree-0 presheaf from dim dict and dense restriction matrices."""
    values = {u: FinComplex({0: d}, {}) if d else FinComplex.zero()
              for u, d in dims.items()}
    rest = {}
    for v in site.objects:
        for u in site.objects:
            if site.leq(v, u) and v != u:
                mat = restriction_entries.get((v, u))
                if mat is None:
                    mat = SparseMatrix(dims.get(v, 0), dims.get(u, 0))
                else:
                    mat = SparseMatrix.from_rows(mat) if not isinstance(mat, SparseMatrix) else mat
                rest[(v, u)] = ChainMap(values[u], values[v], {0: mat}, check=False)
    return PresheafC(site, values, rest)


def test_validate_one_object_site():
    assert one_object_site().validate_site().ok


def test_validate_p1_site():
    assert p1_site().validate_site().ok


def test_validate_bad_cover_member():
    s = FinSite(["A", "B"], [], covers={"A": [["B"]]})
    rep = s.validate_site()
    assert not rep.ok
    assert any("not <=" in e for e in rep.errors)


def test_min_sieve_wuvp():
    s = wuvp_site()
    assert s.min_sieve("W") == frozenset({"U", "V", "P"})
    assert s.min_sieve("U") == frozenset({"U", "P"})


def test_sheafify_trivial_topology_unchanged():
    s = one_object_site()
    m = line_presheaf(s, {"U": 2}, {})
    sh = Sheafification(m)
    assert sh.presheaf.value("U").dims == {0: 2}
    unit = sh.unit()
    assert unit.component("U").component(0) == SparseMatrix.identity(2)


def test_sheafify_equalizer_example():
    # M(W)=0, M(U)=M(V)=M(P)=k with identity restrictions U,V -> P:
    # sheafification has value k at W.
    s = wuvp_site()
    m = line_presheaf(s, {"W": 0, "U": 1, "V": 1, "P": 1},
                      {("P", "U"): [[1]], ("P", "V"): [[1]]})
    sh = sheafify(m)
    assert sh.value("W").dim(0) == 1
    assert sh.value("U").dim(0) == 1
    assert sh.value("P").dim(0) == 1


def test_sheafify_idempotent():
    s = wuvp_site()
    m = line_presheaf(s, {"W": 0, "U": 1, "V": 1, "P": 1},
                      {("P", "U"): [[1]], ("P", "V"): [[1]]})
    once = sheafify(m)
    twice = sheafify(once)
    for u in s.objects:
        assert once.value(u).dims == twice.value(u).dims


def test_representable_presheaf_values():
    s = wuvp_site()
    ku = representable_presheaf(s, "U")
    assert ku.value("U").dim(0) == 1
    assert ku.value("P").dim(0) == 1
    assert ku.value("W").dim(0) == 0
    assert ku.value("V").dim(0) == 0


def test_sheafify_exactness_on_kernels():
    # sheafification commutes with degreewise kernels (dims compared)
    s = wuvp_site()
    m = line_presheaf(s, {"W": 1, "U": 1, "V": 1, "P": 1},
                      {("U", "W"): [[1]], ("V", "W"): [[1]], ("P", "W"): [[1]],
                       ("P", "U"): [[1]], ("P", "V"): [[1]]})
    n = line_presheaf(s, {"W": 1, "U": 0, "V": 0, "P": 0}, {})
    comps = {"W": ChainMap(m.value("W"), n.value("W"),
                           {0: SparseMatrix.identity(1)}, check=False)}
    f = PresheafMap(m, n, {**{u: ChainMap.zero(m.value(u), n.value(u))
                              for u in s.objects}, **comps})
    ker = kernel_presheaf(f)
    sh_of_ker = sheafify(ker)
    sh_m = Sheafification(m)
    sh_n = Sheafification(n)
    sh_f = sh_m.map(f, sh_n)
    ker_of_sh = kernel_presheaf(sh_f)
    for u in s.objects:
        assert sh_of_ker.value(u).dims == ker_of_sh.value(u).dims


def test_sheafify_exactness_on_cokernels():
    from sheafdef.site import cokernel_presheaf
    s = wuvp_site()
    m = line_presheaf(s, {"W": 1, "U": 1, "V": 1, "P": 1},
                      {("U", "W"): [[1]], ("V", "W"): [[1]], ("P", "W"): [[1]],
                       ("P", "U"): [[1]], ("P", "V"): [[1]]})
    n = line_presheaf(s, {"W": 1, "U": 2, "V": 2, "P": 2},
                      {("U", "W"): [[1], [0]], ("V", "W"): [[1], [0]],
                       ("P", "W"): [[1], [0]],
                       ("P", "U"): [[1, 0], [0, 1]], ("P", "V"): [[1, 0], [0, 1]]})
    comps = {}
    for u in s.objects:
        entries = {(0, 0): SparseMatrix.identity(1).entry(0, 0)}
        comps[u] = ChainMap(m.value(u), n.value(u),
                            {0: SparseMatrix(n.value(u).dim(0),
                                             m.value(u).dim(0), entries)},
                            check=False)
    f = PresheafMap(m, n, comps)
    coker = cokernel_presheaf(f)
    sh_of_coker = sheafify(coker)
    sh_m = Sheafification(m)
    sh_n = Sheafification(n)
    sh_f = sh_m.map(f, sh_n)
    coker_of_sh = cokernel_presheaf(sh_f)
    for u in s.objects:
        assert sh_of_coker.value(u).dims == coker_of_sh.value(u).dims


def test_weak_equivalence_identity():
    s = p1_site()
    m = constant_presheaf(s)
    ident = PresheafMap(m, m, {u: ChainMap.identity(m.value(u))
                               for u in s.objects})
    assert is_weak_equivalence(ident)


def test_weak_equivalence_unit_into_sheafification():
    s = wuvp_site()
    m = line_presheaf(s, {"W": 0, "U": 1, "V": 1, "P": 1},
                      {("P", "U"): [[1]], ("P", "V"): [[1]]})
    sh = Sheafification(m)
    assert is_weak_equivalence(sh.unit())


def test_weak_equivalence_false_on_trivial_topology():
    s = one_object_site()
    a = line_presheaf(s, {"U": 1}, {})
    b = zero_presheaf(s)
    f = PresheafMap(a, b, {"U": ChainMap.zero(a.value("U"), b.value("U"))},
                    check=False)
    assert not is_weak_equivalence(f)


def test_pointwise_cohomology_presheaf_restrictions():
    s = wuvp_site()
    m = line_presheaf(s, {"W": 1, "U": 1, "V": 1, "P": 1},
                      {("U", "W"): [[1]], ("V", "W"): [[1]], ("P", "W"): [[1]],
                       ("P", "U"): [[1]], ("P", "V"): [[1]]})
    h0 = pointwise_cohomology_presheaf(m, 0)
    assert h0.value("W").dim(0) == 1
    assert h0.restriction("P", "W").component(0) == SparseMatrix.identity(1)


def test_cone_presheaf_supports_weak_equivalence_check():
    s = wuvp_site()
    m = line_presheaf(s, {"W": 0, "U": 1, "V": 1, "P": 1},
                      {("P", "U"): [[1]], ("P", "V"): [[1]]})
    ident = PresheafMap(m, m, {u: ChainMap.identity(m.value(u))
                               for u in s.objects})
    cn = cone_presheaf(ident)
    for i in range(-1, 1):
        assert not any(sheaf_cohomology_dims(cn, i).values())
