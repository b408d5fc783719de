"""Pipeline execution: every CLI command and service endpoint runs through
the functions here, so reports are byte-identical across both fronts.

Reports are deterministic: structured output is canonical JSON (sorted
keys), text output is rendered from sorted iterations, and every limitation
(truncation cap, window, registered-hypercover list) is echoed.
"""

from __future__ import annotations

import json
from typing import Optional

from .exactla import ZERO, SparseMatrix, scalar_str
from .complexes import Cohomology
from .site import FINAL, SiteError
from .hypercover import CapError, cech_nerve
from .cech import (cech_complex, chains_base_comparison,
                   cohomology_presheaf, default_registry,
                   generating_acyclic_cofibration, is_fibrant, rgamma)
from .dglie import (abelian_dglie, gauge_act, gauge_to_path, is_mc,
                    kuranishi, mc_residual, parse_base, tensor_nilpotent,
                    validate_dglie)
from .hochschild import (brute_first_order, deformation_dglie,
                         deformed_associativity_residuals,
                         hochschild_cohomology_dims, tangent_cone_complex)
from .sullivan import (choose_truncation, cosimplicial_from_nerve,
                       descent_compare)
from .equivariant import (algebra_action_to_dglie, equivariant_kuranishi,
                          quotient_site, validate_algebra_action)
from .docio import DocumentError, WorkbenchDoc
from . import models

SCHEMA = "sheafdef-report/1"


class Report:
    def __init__(self, command: str, status: str, body: dict,
                 limitations: Optional[list[str]] = None):
        self.command = command
        self.status = status
        self.body = body
        self.limitations = limitations or []

    @property
    def exit_code(self) -> int:
        return {"ok": 0, "invalid": 1, "cap": 2}[self.status]

    def structured(self) -> str:
        payload = {"schema": SCHEMA, "command": self.command,
                   "status": self.status, "body": self.body,
                   "limitations": sorted(self.limitations)}
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def text(self) -> str:
        lines = [f"[{SCHEMA}] {self.command}: {self.status}"]
        lines.extend(_render("", self.body))
        for lim in sorted(self.limitations):
            lines.append(f"limitation: {lim}")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        return self.structured() if fmt == "structured" else self.text()


def _render(prefix: str, value) -> list[str]:
    if isinstance(value, dict):
        out = []
        for key in sorted(value, key=str):
            out.extend(_render(f"{prefix}{key}.", value[key]))
        return out
    if isinstance(value, (list, tuple)):
        return [f"{prefix[:-1]}: {json.dumps(value, sort_keys=True)}"]
    return [f"{prefix[:-1]}: {value}"]


def invalid(command: str, message: str) -> Report:
    return Report(command, "invalid", {"error": message})


class Options:
    """Normalized command options shared by CLI and service."""

    def __init__(self, **kw):
        self.target = kw.get("target")
        self.presheaf = kw.get("presheaf")
        self.hypercover = kw.get("hypercover")
        self.base = kw.get("base")
        self.algebra = kw.get("algebra")
        self.group_action = kw.get("group_action")
        self.element = kw.get("element")
        self.gauge = kw.get("gauge")
        self.mode = kw.get("mode", "auto")
        self.cap = kw.get("cap")
        self.window = kw.get("window", 4)
        self.degree = kw.get("degree", 0)
        self.n_max = kw.get("n_max", 3)
        self.top = kw.get("top", 2)
        self.max_cap = kw.get("max_cap", 6)
        self.registry = kw.get("registry")
        self.name = kw.get("name")

    @staticmethod
    def from_dict(data: dict) -> "Options":
        return Options(**data)


def _registry_for(doc: WorkbenchDoc, site, options: Options):
    reg = default_registry(site)
    for hc in doc.hypercovers.values():
        if hc.site is site:
            reg.register(hc)
    if options.registry:
        reg = reg.select(options.registry)
    return reg


def _resolve_base(doc: WorkbenchDoc, options: Options):
    if options.base is None:
        raise DocumentError("a base is required; pass --base")
    if options.base in doc.artin_bases:
        return doc.artin_bases[options.base]
    return parse_base(options.base)


def _single(table: dict, kind: str, name: Optional[str]):
    if name is not None:
        if name not in table:
            raise DocumentError(f"unresolved {kind} reference: {name!r}")
        return name, table[name]
    if len(table) == 1:
        return next(iter(table.items()))
    raise DocumentError(
        f"document has {len(table)} {kind} blocks; select one explicitly")


# -- commands ---------------------------------------------------------------------


def run_validate(doc: WorkbenchDoc, options: Options) -> Report:
    reports = {}
    ok = True
    for name, site in sorted(doc.sites.items()):
        rep = site.validate_site()
        reports[f"site:{name}"] = rep.as_dict()
        ok = ok and rep.ok
    for name, p in sorted(doc.presheaves.items()):
        rep = p.validate()
        reports[f"presheaf:{name}"] = rep.as_dict()
        ok = ok and rep.ok
    for name, hc in sorted(doc.hypercovers.items()):
        rep = hc.validate()
        reports[f"hypercover:{name}"] = rep.as_dict()
        ok = ok and rep.ok
    for name, g in sorted(doc.dglies.items()):
        rep = validate_dglie(g)
        reports[f"dglie:{name}"] = rep.as_dict()
        ok = ok and rep.ok
    for name, base in sorted(doc.artin_bases.items()):
        rep = base.validate()
        reports[f"artin_base:{name}"] = rep.as_dict()
        ok = ok and rep.ok
    for name, a in sorted(doc.algebras.items()):
        rep = a.validate()
        reports[f"algebra:{name}"] = rep.as_dict()
        ok = ok and rep.ok
    for name, grp in sorted(doc.groups.items()):
        rep = grp.validate()
        reports[f"group:{name}"] = rep.as_dict()
        ok = ok and rep.ok
    for name, act in sorted(doc.site_actions.items()):
        rep = act.validate()
        reports[f"site_action:{name}"] = rep.as_dict()
        ok = ok and rep.ok
    for name, act in sorted(doc.algebra_actions.items()):
        rep = validate_algebra_action(act["group"], act["algebra"],
                                      act["matrices"])
        reports[f"algebra_action:{name}"] = rep.as_dict()
        ok = ok and rep.ok
    return Report("validate", "ok" if ok else "invalid", {"blocks": reports})


def run_cohomology(doc: WorkbenchDoc, options: Options) -> Report:
    if options.target in doc.complexes:
        cx = doc.complexes[options.target]
        coh = Cohomology(cx)
        return Report("cohomology", "ok", {
            "target": options.target,
            "dims": {str(n): d for n, d in coh.dims().items()},
            "euler_characteristic": cx.euler_characteristic(),
        })
    name, p = _single(doc.presheaves, "presheaf", options.target)
    reg = _registry_for(doc, p.site, options)
    lo, hi = p.support()
    dims = {}
    for i in range(lo, hi + 2):
        dims[str(i)] = cohomology_presheaf(p, i, reg, cap=options.cap)
    return Report("cohomology", "ok", {
        "target": name, "presheaf_dims_per_object": dims,
        "registry": reg.names()},
        limitations=["cohomology presheaf computed over registered "
                     "hypercovers, not a genuine fibrant replacement"])


def run_cech(doc: WorkbenchDoc, options: Options) -> Report:
    pname, p = _single(doc.presheaves, "presheaf", options.presheaf)
    hname, hc = _single(doc.hypercovers, "hypercover", options.hypercover)
    try:
        cc = cech_complex(hc, p, mode=options.mode, cap=options.cap)
    except CapError as exc:
        return Report("cech", "cap", {"error": str(exc)})
    coh = cc.cohomology()
    body = {
        "presheaf": pname, "hypercover": hname,
        "dims": {str(n): d for n, d in coh.dims().items()},
        "certificate": cc.certificate()}
    if doc.raw.get("window") is not None:
        body["window"] = doc.raw["window"]
    return Report("cech", "ok", body)


def run_rgamma(doc: WorkbenchDoc, options: Options) -> Report:
    pname, p = _single(doc.presheaves, "presheaf", options.presheaf)
    reg = _registry_for(doc, p.site, options)
    finals = reg.final
    if not finals:
        return invalid("rgamma", "no hypercover of the final presheaf registered")
    try:
        cc, warnings = rgamma(p, finals[0], registry=reg, cap=options.cap)
    except CapError as exc:
        return Report("rgamma", "cap", {"error": str(exc)})
    body = {
        "presheaf": pname,
        "hypercover": finals[0].name,
        "dims": {str(n): d for n, d in cc.cohomology().dims().items()},
        "certificate": cc.certificate(),
        "registry": reg.names(),
    }
    if doc.raw.get("window") is not None:
        body["window"] = doc.raw["window"]
    if len(finals) > 1:
        other = cech_complex(finals[1], p, cap=options.cap)
        agree = other.cohomology().dims() == cc.cohomology().dims()
        body["independence_check"] = {
            "second_hypercover": finals[1].name, "dims_agree": agree}
    return Report("rgamma", "ok", body, limitations=warnings)


def run_fibrancy(doc: WorkbenchDoc, options: Options) -> Report:
    pname, p = _single(doc.presheaves, "presheaf", options.presheaf or options.target)
    reg = _registry_for(doc, p.site, options)
    ok, details = is_fibrant(p, reg, cap=options.cap)
    return Report("fibrancy", "ok", {
        "presheaf": pname, "fibrant": ok, "details": details},
        limitations=["fibration criterion checked against the registered "
                     "hypercovers only: " + ", ".join(details["registry"])])


def run_hypercheck(doc: WorkbenchDoc, options: Options) -> Report:
    hname, hc = _single(doc.hypercovers, "hypercover", options.hypercover
                        or options.target)
    rep = hc.validate()
    body = {
        "hypercover": hname,
        "validation": rep.as_dict(),
        "is_nerve": hc.is_nerve,
        "finite_dimensional": hc.is_finite_dimensional(),
        "split": hc.is_split(),
    }
    limitations = [f"HC1 checked up to the materialized bound {hc.simp.bound}"]
    if rep.ok:
        try:
            body["chains_vs_base_weak_equivalence"] = chains_base_comparison(hc, cap=options.cap)
        except CapError as exc:
            body["chains_vs_base_weak_equivalence"] = f"not checkable: {exc}"
    return Report("hypercheck", "ok" if rep.ok else "invalid", body,
                  limitations=limitations)


def run_gac(doc: WorkbenchDoc, options: Options) -> Report:
    hname, hc = _single(doc.hypercovers, "hypercover", options.hypercover
                        or options.target)
    n = int(options.degree)
    try:
        gac = generating_acyclic_cofibration(hc, n, cap=options.cap)
    except (CapError, SiteError) as exc:
        status = "cap" if isinstance(exc, CapError) else "invalid"
        return Report("gac", status, {"error": str(exc)})
    checks = gac.verify()
    return Report("gac", "ok", {
        "hypercover": hname, "degree": n,
        "K_generators": {str(d): len(g) for d, g in sorted(gac.K.gens.items())},
        "L_generators": {str(d): len(g) for d, g in sorted(gac.L.gens.items())},
        "checks": checks})


def run_mc(doc: WorkbenchDoc, options: Options) -> Report:
    gname, g = _single(doc.dglies, "dglie", options.target)
    base = _resolve_base(doc, options)
    nilp = tensor_nilpotent(base, g)
    if options.element is None:
        return invalid("mc", "an element block is required")
    z = doc.element_gvec(options.element, nilp)
    residual = mc_residual(nilp, z)
    body = {
        "dglie": gname, "base": base.name, "element": options.element,
        "is_mc": residual.is_zero(),
        "residual_is_zero": residual.is_zero(),
    }
    if not residual.is_zero():
        body["residual_components"] = {
            str(deg): [scalar_str(c) for c in comp]
            for deg, comp in sorted(residual.parts.items())}
    if options.gauge is not None and residual.is_zero():
        gamma = doc.element_gvec(options.gauge, nilp)
        moved = gauge_act(nilp, gamma, z)
        path = gauge_to_path(nilp, gamma, z)
        body["gauge"] = {
            "element": options.gauge,
            "moved_is_mc": is_mc(nilp, moved),
            "path_polynomial_degree": path.polynomial_degree(),
            "path_is_mc": path.is_mc(),
            "orientation": "path runs from z at t=0 to gamma.z at t=1 with "
                           "dt-component -gamma",
        }
    return Report("mc", "ok", body)


def _kuranishi_body(kd) -> dict:
    return kd.report()


def run_kuranishi(doc: WorkbenchDoc, options: Options) -> Report:
    gname, g = _single(doc.dglies, "dglie", options.target)
    base = _resolve_base(doc, options)
    try:
        kd = kuranishi(g, base)
    except ValueError as exc:
        return invalid("kuranishi", str(exc))
    return Report("kuranishi", "ok", {
        "dglie": gname, **_kuranishi_body(kd)},
        limitations=["pi0 for nonabelian inputs is presented as obstruction "
                     "equations plus residual gauge, not an enumerated set"])


def run_deform_algebra(doc: WorkbenchDoc, options: Options) -> Report:
    aname, a = _single(doc.algebras, "algebra", options.algebra or options.target)
    base = _resolve_base(doc, options)
    n_max = int(options.n_max)
    hh = hochschild_cohomology_dims(a, n_max)
    g = deformation_dglie(a, n_max)
    kd = kuranishi(g, base)
    point = [ZERO] * kd.nvars
    witness = kd.witness(point)
    residuals = deformed_associativity_residuals(a, base, kd.nilp, witness)
    body = {
        "algebra": aname, "base": base.name,
        "hochschild": {str(i): d for i, d in hh.items()},
        "rigid": kd.h1_dim == 0,
        "kuranishi": _kuranishi_body(kd),
        "trivial_witness_associative": not residuals,
    }
    return Report("deform-algebra", "ok", body,
                  limitations=[f"Hochschild complex truncated at arity {n_max}"])


def run_deform_sheaf(doc: WorkbenchDoc, options: Options) -> Report:
    tname, block = _single(doc.dglie_presheaves, "dglie_presheaf", options.target)
    site = block["site"]
    base = _resolve_base(doc, options)
    if not site.global_covers:
        return invalid("deform-sheaf", "the site has no global cover")
    hc = cech_nerve(site, site.global_covers[0], FINAL,
                    bound=max(3, options.top + 1))
    g = cosimplicial_from_nerve(hc, block["values"], block["restrictions"],
                                options.top)
    try:
        cap, tw, cert = choose_truncation(g, (0, 1), max_cap=options.max_cap)
    except CapError as exc:
        return Report("deform-sheaf", "cap", {"error": str(exc)})
    twlie = tw.as_dglie() if not all(l.is_abelian() for l in g.levels) \
        else abelian_dglie(tw.complex, name="tw-tot")
    try:
        kd = kuranishi(twlie, base)
    except CapError as exc:
        return Report("deform-sheaf", "cap", {"error": str(exc)})
    coh = Cohomology(tw.complex)
    body = {
        "tangent_presheaf": tname, "base": base.name,
        "cover": list(site.global_covers[0]),
        "window": doc.raw.get("window"),
        "h0": coh.dim(0), "h1": coh.dim(1),
        "kuranishi_domain": "a point" if kd.h1_dim == 0
        else f"chart of dimension {kd.h1_dim * base.dim}",
        "kuranishi": _kuranishi_body(kd),
        "truncation_certificate": cert.as_dict(),
    }
    return Report("deform-sheaf", "ok", body,
                  limitations=[f"cosimplicial levels truncated at {options.top}; "
                               f"cohomology reliable in degrees < {options.top}",
                               f"Thom-Whitney polynomial degree cap {cap}"])


def run_descent(doc: WorkbenchDoc, options: Options) -> Report:
    tname, block = _single(doc.dglie_presheaves, "dglie_presheaf", options.target)
    site = block["site"]
    base = _resolve_base(doc, options)
    if not site.global_covers:
        return invalid("descent", "the site has no global cover")
    hc = cech_nerve(site, site.global_covers[0], FINAL,
                    bound=max(3, options.top + 1))
    g = cosimplicial_from_nerve(hc, block["values"], block["restrictions"],
                                options.top)
    reference_h1 = None
    if options.presheaf and options.presheaf in doc.presheaves:
        p = doc.presheaves[options.presheaf]
        reference_h1 = cech_complex(hc, p, mode="alternating").cohomology().dim(1)
    try:
        rep = descent_compare(g, base, degree_range=(0, 1),
                              max_cap=options.max_cap,
                              reference_h1=reference_h1)
    except CapError as exc:
        return Report("descent", "cap", {"error": str(exc)})
    status = "ok" if rep.agree else "invalid"
    return Report("descent", status, {
        "tangent_presheaf": tname, "base": base.name, **rep.as_dict()},
        limitations=[f"cosimplicial levels truncated at {options.top}"])


def run_equivariant(doc: WorkbenchDoc, options: Options) -> Report:
    if options.mode == "site" or (doc.site_actions and not doc.algebra_actions):
        name, act = _single(doc.site_actions, "site_action", options.group_action)
        q = quotient_site(act.site, act)
        rep = q.report()
        status = "ok" if rep["laws"]["ok"] else "invalid"
        return Report("equivariant", status, {"quotient_site": rep,
                                              "action": name})
    name, act = _single(doc.algebra_actions, "algebra_action", options.group_action)
    base = _resolve_base(doc, options)
    arep = validate_algebra_action(act["group"], act["algebra"], act["matrices"])
    if not arep.ok:
        return Report("equivariant", "invalid", {"action": arep.as_dict()})
    defl = deformation_dglie(act["algebra"], int(options.n_max))
    lifted = algebra_action_to_dglie(act["group"], act["algebra"],
                                     act["matrices"], defl, int(options.n_max))
    ek = equivariant_kuranishi(defl, lifted, base)
    point = [ZERO] * ek.data.nvars
    return Report("equivariant", "ok", {
        "action": name, "base": base.name,
        "report": ek.report(),
        "trivial_witness_invariant": ek.witness_is_invariant(point),
    })


def run_oracle(doc: WorkbenchDoc, options: Options) -> Report:
    aname, a = _single(doc.algebras, "algebra", options.algebra or options.target)
    try:
        dim, reps = brute_first_order(a)
    except ValueError as exc:
        return Report("oracle", "cap", {"error": str(exc)})
    hh = hochschild_cohomology_dims(a, 3)
    return Report("oracle", "ok", {
        "algebra": aname,
        "first_order_dimension": dim,
        "matches_hochschild_h2": dim == hh[2],
        "representatives": len(reps)})


def run_obstruction_les(doc: WorkbenchDoc, options: Options) -> Report:
    aname, a = _single(doc.algebras, "algebra", options.algebra or options.target)
    les = tangent_cone_complex(a, max(int(options.n_max), 4))
    report = les.exactness_report(2)
    return Report("obstruction-les", "ok" if report["all_exact"] else "invalid",
                  {"algebra": aname, **{k: _jsonable(v) for k, v in report.items()}})


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


COMMANDS = {
    "validate": run_validate,
    "cohomology": run_cohomology,
    "cech": run_cech,
    "rgamma": run_rgamma,
    "fibrancy": run_fibrancy,
    "hypercheck": run_hypercheck,
    "gac": run_gac,
    "mc": run_mc,
    "kuranishi": run_kuranishi,
    "deform-algebra": run_deform_algebra,
    "deform-sheaf": run_deform_sheaf,
    "descent": run_descent,
    "equivariant": run_equivariant,
    "oracle": run_oracle,
    "obstruction-les": run_obstruction_les,
}


def run_command(command: str, doc: WorkbenchDoc, options: Options) -> Report:
    handler = COMMANDS.get(command)
    if handler is None:
        return invalid(command, f"unknown command {command!r}")
    try:
        return handler(doc, options)
    except DocumentError as exc:
        return invalid(command, str(exc))
    except CapError as exc:
        return Report(command, "cap", {"error": str(exc)})
    except SiteError as exc:
        return invalid(command, str(exc))


# -- built-in example documents -------------------------------------------------------


def _matrix_json(mat: SparseMatrix) -> dict:
    return {"rows": mat.rows, "cols": mat.cols,
            "entries": [[i, j, scalar_str(v)] for (i, j), v in mat.items()]}


def _complex_json(cx) -> dict:
    return {"dims": {str(n): d for n, d in sorted(cx.dims.items())},
            "d": {str(n): _matrix_json(m) for n, m in sorted(cx.d.items())}}


def _presheaf_json(p) -> dict:
    out = {"site": None, "values": {}, "restrictions": {}}
    for u in p.site.objects:
        out["values"][u] = _complex_json(p.value(u))
    for (small, big), r in sorted(p.restrictions.items()):
        out["restrictions"][f"{small}<{big}"] = {
            str(n): _matrix_json(r.component(n))
            for n in p.value(big).degrees()}
    return out


def _p1_site_json() -> dict:
    return {"objects": ["U0", "U1", "U01"],
            "leq": [["U01", "U0"], ["U01", "U1"]],
            "meets": [["U0", "U1", "U01"]],
            "global_covers": [["U0", "U1"]]}


def _dglie_json(g) -> dict:
    out = _complex_json(g.complex)
    brackets = []
    for (p, q), block in sorted(g.table.items()):
        for (i, j), val in sorted(block.items()):
            brackets.append({"p": p, "q": q, "i": i, "j": j,
                             "value": {str(k): scalar_str(c)
                                       for k, c in sorted(val.items())}})
    out["brackets"] = brackets
    missing = []
    for (p, q), pairs in sorted(g.missing.items()):
        for (i, j) in sorted(pairs):
            missing.append([p, q, i, j])
    if missing:
        out["window_missing"] = missing
    return out


def example_document(name: str, window: int = 4) -> dict:
    if name == "p1-structure":
        p, _ = models.p1_structure(window)
        block = _presheaf_json(p)
        block["site"] = "p1"
        return {"sites": {"p1": _p1_site_json()},
                "presheaves": {"O": block},
                "hypercovers": {
                    "global": {"site": "p1", "kind": "nerve",
                               "family": ["U0", "U1"], "base": "*", "bound": 3},
                    "global-redundant": {"site": "p1", "kind": "nerve",
                                         "family": ["U0", "U1", "U01"],
                                         "base": "*", "bound": 2}},
                "window": window}
    if name.startswith("p1-twist"):
        parts = name.split(":")
        m = int(parts[1]) if len(parts) > 1 else -2
        p, _ = models.p1_twist(m, window)
        block = _presheaf_json(p)
        block["site"] = "p1"
        values, restrictions, _lw = models.p1_twist_dglie(m, window)
        dglies = {f"T{u}": _dglie_json(g) for u, g in sorted(values.items())}
        return {"sites": {"p1": _p1_site_json()},
                "presheaves": {"O": block},
                "dglies": dglies,
                "dglie_presheaves": {
                    "T": {"site": "p1",
                          "values": {u: f"T{u}" for u in values},
                          "restrictions": {
                              f"{small}<{big}": {str(n): _matrix_json(m2)
                                                 for n, m2 in mats.items()}
                              for (small, big), mats in sorted(restrictions.items())}}},
                "hypercovers": {
                    "global": {"site": "p1", "kind": "nerve",
                               "family": ["U0", "U1"], "base": "*", "bound": 3}},
                "window": window}
    if name == "p1-tangent":
        p, _ = models.p1_tangent(window)
        block = _presheaf_json(p)
        block["site"] = "p1"
        values, restrictions, _lw = models.p1_tangent_dglie(window)
        dglies = {f"T{u}": _dglie_json(g) for u, g in sorted(values.items())}
        return {"sites": {"p1": _p1_site_json()},
                "presheaves": {"T": block},
                "dglies": dglies,
                "dglie_presheaves": {
                    "T": {"site": "p1",
                          "values": {u: f"T{u}" for u in values},
                          "restrictions": {
                              f"{small}<{big}": {str(n): _matrix_json(m2)
                                                 for n, m2 in mats.items()}
                              for (small, big), mats in sorted(restrictions.items())}}},
                "hypercovers": {
                    "global": {"site": "p1", "kind": "nerve",
                               "family": ["U0", "U1"], "base": "*", "bound": 3}},
                "window": window}
    if name == "small-algebras":
        out = {"algebras": {}}
        for key, builder in sorted(models.SMALL_ALGEBRAS.items()):
            spec = builder()
            out["algebras"][key] = {
                "dim": spec.dim,
                "mult": [[i, j, k, scalar_str(c)]
                         for (i, j), row in sorted(spec.mult.items())
                         for k, c in sorted(row.items())],
                "unit": [scalar_str(c) for c in spec.unit],
                "basis_names": spec.basis_names,
            }
        return out
    if name == "wuvp":
        site = {"objects": ["W", "U", "V", "P"],
                "leq": [["U", "W"], ["V", "W"], ["P", "U"], ["P", "V"]],
                "covers": {"W": [["U", "V"]]},
                "meets": [["U", "V", "P"]]}
        presheaf = {
            "site": "wuvp",
            "values": {"W": {"dims": {}}, "U": {"dims": {"0": 1}},
                       "V": {"dims": {"0": 1}}, "P": {"dims": {"0": 1}}},
            "restrictions": {
                "P<U": {"0": [["1"]]},
                "P<V": {"0": [["1"]]},
                "U<W": {}, "V<W": {}, "P<W": {},
            }}
        return {"sites": {"wuvp": site},
                "presheaves": {"M": presheaf},
                "hypercovers": {"cover": {"site": "wuvp", "kind": "nerve",
                                          "family": ["U", "V"], "base": "W",
                                          "bound": 3}}}
    if name == "c2-x3":
        spec = models.algebra_truncated_poly(3)
        return {
            "algebras": {"x3": {
                "dim": 3,
                "mult": [[i, j, k, scalar_str(c)]
                         for (i, j), row in sorted(spec.mult.items())
                         for k, c in sorted(row.items())],
                "unit": ["1", "0", "0"],
            }},
            "groups": {"C2": {"elements": ["g0", "g1"],
                              "table": [["g0", "g0", "g0"], ["g0", "g1", "g1"],
                                        ["g1", "g0", "g1"], ["g1", "g1", "g0"]],
                              "identity": "g0"}},
            "algebra_actions": {"sign": {
                "group": "C2", "algebra": "x3",
                "matrices": {
                    "g0": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]],
                    "g1": [["1", "0", "0"], ["0", "-1", "0"], ["0", "0", "1"]],
                }}},
        }
    if name == "mc-demo":
        # x in degree 0; y, z in degree 1; w in degree 2;
        # [x, y] = z and [y, y] = 2w
        return {
            "dglies": {"heis": {
                "dims": {"0": 1, "1": 2, "2": 1},
                "d": {},
                "brackets": [
                    {"p": 0, "q": 1, "i": 0, "j": 0, "value": {"1": "1"}},
                    {"p": 1, "q": 0, "i": 0, "j": 0, "value": {"1": "-1"}},
                    {"p": 1, "q": 1, "i": 0, "j": 0, "value": {"0": "2"}},
                ]}},
            "elements": {
                "z": {"components": [["t", 1, 1, "1"]]},
                "gamma": {"components": [["t", 0, 0, "1"]]},
                "bad": {"components": [["t", 1, 0, "1"]]},
            }}
    if name == "c2-p1":
        return {"sites": {"p1": _p1_site_json()},
                "groups": {"C2": {"elements": ["g0", "g1"],
                                  "table": [["g0", "g0", "g0"], ["g0", "g1", "g1"],
                                            ["g1", "g0", "g1"], ["g1", "g1", "g0"]],
                                  "identity": "g0"}},
                "site_actions": {"swap": {
                    "group": "C2", "site": "p1",
                    "permutations": {"g0": {"U0": "U0", "U1": "U1", "U01": "U01"},
                                     "g1": {"U0": "U1", "U1": "U0",
                                            "U01": "U01"}}}}}
    raise DocumentError(f"unknown example {name!r}; available: "
                        + ", ".join(sorted(EXAMPLES)))


EXAMPLES = ("p1-structure", "p1-twist", "p1-tangent", "small-algebras",
            "wuvp", "c2-x3", "c2-p1", "mc-demo")


def run_examples(name: str, window: int = 4) -> str:
    doc = example_document(name, window=window)
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"
