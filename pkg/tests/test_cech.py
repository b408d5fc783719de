from fractions import Fraction

import pytest

from sheafdef.exactla import SparseMatrix
from sheafdef.complexes import ChainMap, FinComplex
from sheafdef.site import FINAL, FinSite, PresheafC, PresheafMap, zero_presheaf
from sheafdef.hypercover import cech_nerve, constant_hypercover, hypercover_from_cells
from sheafdef.cech import (HypercoverRegistry, cech_complex, cohomology_presheaf,
                           default_registry, generating_acyclic_cofibration,
                           is_fibrant, is_fibration, rgamma, chains_base_comparison)
from sheafdef.models import (chain_site, disjoint_cover_site, p1_site,
                             p1_structure, p1_tangent, p1_three_chart_site,
                             p1_twist, wuvp_site)


def comparison_corpus():
    """>= 5 validated hypercovers: nerves in several shapes plus one
    hand-built non-nerve hypercover on a meet-free site."""
    corpus = []
    s1 = p1_site()
    corpus.append(cech_nerve(s1, ["U0", "U1"], FINAL, bound=3))
    s2 = wuvp_site()
    corpus.append(cech_nerve(s2, ["U", "V"], "W", bound=3))
    corpus.append(constant_hypercover(s2, "U", bound=3))
    s3 = chain_site()
    corpus.append(cech_nerve(s3, ["B"], "A", bound=3))
    s4 = disjoint_cover_site()
    corpus.append(hypercover_from_cells(
        s4, "W", {0: [("U", []), ("V", [])]}, bound=2, skeletal=True,
        name="disjoint-cover"))
    s5 = p1_three_chart_site()
    corpus.append(cech_nerve(s5, ["U0", "U1", "U2"], FINAL, bound=2))
    s6 = wuvp_site()
    corpus.append(cech_nerve(s6, ["U", "U"], "W", bound=2,
                             name="doubled") if False else
                  cech_nerve(FinSite(["A", "B"], [("B", "A")],
                                     covers={"A": [["B", "B"]]}),
                             ["B", "B"], "A", bound=2, name="multiset"))
    return corpus


def test_comparison_corpus_validates_and_compares():
    corpus = comparison_corpus()
    assert len(corpus) >= 5
    assert any(not hc.is_nerve for hc in corpus)
    for hc in corpus:
        assert hc.validate().ok, hc.name
        assert chains_base_comparison(hc), hc.name


def test_cech_identity_cover_is_sections():
    s = wuvp_site()
    m, _ = p1_structure(3)
    sp = p1_site()
    hc = constant_hypercover(sp, "U0", bound=2)
    cc = cech_complex(hc, m)
    assert cc.complex.dims == m.value("U0").dims
    assert cc.cohomology().dims() == {0: m.value("U0").dim(0)}


@pytest.mark.parametrize("window", [4, 6])
def test_p1_structure_cech_numbers(window):
    m, _ = p1_structure(window)
    hc = cech_nerve(m.site, ["U0", "U1"], FINAL, bound=2)
    cc = cech_complex(hc, m, mode="alternating")
    h = cc.cohomology().dims()
    assert h.get(0, 0) == 1
    assert h.get(1, 0) == 0


@pytest.mark.parametrize("window", [4, 6])
def test_p1_twist_minus2_cech_numbers(window):
    m, _ = p1_twist(-2, window)
    hc = cech_nerve(m.site, ["U0", "U1"], FINAL, bound=2)
    cc = cech_complex(hc, m, mode="alternating")
    h = cc.cohomology().dims()
    assert h.get(0, 0) == 0
    assert h.get(1, 0) == 1


@pytest.mark.parametrize("window", [4, 6])
def test_p1_tangent_cech_numbers(window):
    m, _ = p1_tangent(window)
    hc = cech_nerve(m.site, ["U0", "U1"], FINAL, bound=2)
    cc = cech_complex(hc, m, mode="alternating")
    h = cc.cohomology().dims()
    assert h.get(0, 0) == 3
    assert h.get(1, 0) == 0


def test_rgamma_identity_hypercover_final_object():
    # a site with a final object: RGamma over the identity hypercover of it
    s = FinSite(["X", "V"], [("V", "X")], global_covers=[["X"]])
    from sheafdef.site import constant_presheaf
    m = constant_presheaf(s, dim=2)
    hc = cech_nerve(s, ["X"], FINAL, bound=2)
    cc, warnings = rgamma(m, hc, registry=default_registry(s))
    assert cc.cohomology().dims() == {0: 2}
    assert not warnings


def test_rgamma_independent_of_hypercover():
    m, _ = p1_structure(4)
    s = m.site
    h1 = cech_nerve(s, ["U0", "U1"], FINAL, bound=2)
    h2 = cech_nerve(s, ["U0", "U1", "U01"], FINAL, bound=2)
    c1 = cech_complex(h1, m, mode="alternating").cohomology().dims()
    c2 = cech_complex(h2, m, mode="alternating").cohomology().dims()
    assert c1 == c2
    t, _ = p1_twist(-2, 4)
    c1 = cech_complex(h1, t, mode="alternating").cohomology().dims()
    c2 = cech_complex(h2, t, mode="alternating").cohomology().dims()
    assert c1 == c2


def flat_presheaf(site, dims, rest_mats):
    values = {u: FinComplex({0: d}, {}) if d else FinComplex.zero()
              for u, d in dims.items()}
    rest = {}
    for v in site.objects:
        for u in site.objects:
            if site.leq(v, u) and v != u:
                mat = rest_mats.get((v, u), SparseMatrix(dims.get(v, 0), dims.get(u, 0)))
                if not isinstance(mat, SparseMatrix):
                    mat = SparseMatrix.from_rows(mat)
                rest[(v, u)] = ChainMap(values[u], values[v], {0: mat}, check=False)
    return PresheafC(site, values, rest)


def test_cohomology_presheaf_trivial_topology():
    s = FinSite(["U"])
    m = flat_presheaf(s, {"U": 2}, {})
    reg = default_registry(s)
    assert cohomology_presheaf(m, 0, reg) == {"U": 2}
    assert cohomology_presheaf(m, 1, reg) == {"U": 0}


def test_cohomology_presheaf_p1_pointwise():
    # affine-objects P1 site has only identity covers: pointwise cohomology
    m, _ = p1_structure(3)
    reg = default_registry(m.site)
    h0 = cohomology_presheaf(m, 0, reg)
    assert h0 == {u: m.value(u).dim(0) for u in m.site.objects}


def test_cohomology_presheaf_detects_wrong_sections():
    # M(W) = 0 but the cover computes k
    s = wuvp_site()
    m = flat_presheaf(s, {"W": 0, "U": 1, "V": 1, "P": 1},
                      {("P", "U"): [[1]], ("P", "V"): [[1]]})
    reg = default_registry(s)
    h0 = cohomology_presheaf(m, 0, reg)
    assert h0["W"] == 1
    assert h0["U"] == 1


def test_fibrant_p1_quasicoherent():
    m, _ = p1_structure(3)
    reg = default_registry(m.site)
    ok, details = is_fibrant(m, reg)
    assert ok, details


def test_not_fibrant_wuvp_counterexample():
    s = wuvp_site()
    m = flat_presheaf(s, {"W": 0, "U": 1, "V": 1, "P": 1},
                      {("P", "U"): [[1]], ("P", "V"): [[1]]})
    reg = default_registry(s)
    ok, details = is_fibrant(m, reg)
    assert not ok
    assert any(f["kind"] == "homotopy-cartesian" and f["object"] == "W"
               for f in details["failures"])


def test_pointwise_surjection_trivial_topology_is_fibration():
    s = FinSite(["U"])
    a = flat_presheaf(s, {"U": 2}, {})
    b = flat_presheaf(s, {"U": 1}, {})
    f = PresheafMap(a, b, {"U": ChainMap(a.value("U"), b.value("U"),
                                         {0: SparseMatrix.from_rows([[1, 0]])},
                                         check=False)})
    ok, _ = is_fibration(f, default_registry(s))
    assert ok
    g = PresheafMap(a, b, {"U": ChainMap.zero(a.value("U"), b.value("U"))},
                    check=False)
    ok2, details = is_fibration(g, default_registry(s))
    assert not ok2
    assert details["failures"][0]["kind"] == "surjectivity"


def test_fibration_kernel_criterion():
    # surjective f is a fibration iff ker f is fibrant against the registry
    s = wuvp_site()
    # M = constant k (+) "wrong at W" presheaf, f = projection onto constant k
    from sheafdef.site import constant_presheaf
    bad = flat_presheaf(s, {"W": 0, "U": 1, "V": 1, "P": 1},
                        {("P", "U"): [[1]], ("P", "V"): [[1]]})
    good = constant_presheaf(s)
    values = {u: FinComplex({0: bad.value(u).dim(0) + 1}, {}) for u in s.objects}
    rest = {}
    for v in s.objects:
        for u in s.objects:
            if s.leq(v, u) and v != u:
                bm = bad.restriction(v, u).component(0)
                entries = {(i, j): val for (i, j), val in bm.items()}
                entries[(bad.value(v).dim(0), bad.value(u).dim(0))] = Fraction(1)
                rest[(v, u)] = ChainMap(values[u], values[v],
                                        {0: SparseMatrix(values[v].dim(0),
                                                         values[u].dim(0), entries)},
                                        check=False)
    m = PresheafC(s, values, rest)
    comps = {}
    for u in s.objects:
        entries = {(0, bad.value(u).dim(0)): Fraction(1)}
        comps[u] = ChainMap(m.value(u), good.value(u),
                            {0: SparseMatrix(1, m.value(u).dim(0), entries)},
                            check=False)
    f = PresheafMap(m, good, comps)
    reg = default_registry(s)
    ok_f, _ = is_fibration(f, reg)
    from sheafdef.site import kernel_presheaf
    ok_k, _ = is_fibrant(kernel_presheaf(f), reg)
    assert ok_f == ok_k
    assert not ok_f  # kernel is the non-fibrant counterexample


def test_gac_identity_hypercover():
    s = p1_site()
    hc = constant_hypercover(s, "U0", bound=2)
    gac = generating_acyclic_cofibration(hc, 0)
    assert gac.K.gens == {0: ("U0",), -1: ("U0",)}
    kp = gac.K.to_presheaf()
    from sheafdef.complexes import Cohomology
    # acyclic even before sheafification
    for u in s.objects:
        assert Cohomology(kp.value(u)).is_acyclic()
    checks = gac.verify()
    assert checks["sheafified_K_acyclic"]
    assert checks["j_weak_equivalence"]


def test_gac_wuvp_dims():
    s = wuvp_site()
    hc = cech_nerve(s, ["U", "V"], "W", bound=2)
    gac = generating_acyclic_cofibration(hc, 0)
    assert [len(gac.K.gens.get(d, ())) for d in (0, -1, -2)] == [1, 2, 1]
    checks = gac.verify()
    assert checks["sheafified_K_acyclic"]
    assert checks["j_weak_equivalence"]


def test_gac_degree_shift():
    s = wuvp_site()
    hc = cech_nerve(s, ["U", "V"], "W", bound=2)
    gac = generating_acyclic_cofibration(hc, 2)
    assert [len(gac.K.gens.get(d, ())) for d in (2, 1, 0)] == [1, 2, 1]
