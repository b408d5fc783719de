"""Workbench document parsing: JSON-syntax blocks, exact scalars only.

Scalars are strings 'p/q' (or 'p', or plain integers); any float literal
anywhere in the document is rejected with its line and column.  Block
references are resolved at load time and every block passes its module
validator before a pipeline may run.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Optional

from .exactla import SparseMatrix, scalar
from .complexes import ChainMap, FinComplex
from .site import FINAL, FinSite, PresheafC, PresheafMap
from .hypercover import Hypercover, cech_nerve, hypercover_from_cells
from .dglie import ArtinBase, DgLie, GVec, parse_base
from .hochschild import FinAssoc
from .models import AlgebraSpec
from .equivariant import FinGroup, SiteAction


class DocumentError(ValueError):
    """Parse or resolution failure; message carries the position when the
    underlying JSON error has one."""


def _scan_for_floats(text: str):
    """Reject bare float literals outside strings, with line/column."""
    line, col = 1, 0
    in_string = False
    escape = False
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        col += 1
        if ch == "\n":
            line += 1
            col = 0
            i += 1
            continue
        if in_string:
            if escape:
                escape = False
            elif ch == "\\":
                escape = True
            elif ch == '"':
                in_string = False
            i += 1
            continue
        if ch == '"':
            in_string = True
            i += 1
            continue
        if ch.isdigit() or (ch == '-' and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1 if ch == '-' else i
            k = j
            while k < n and text[k].isdigit():
                k += 1
            if k < n and text[k] in '.eE':
                raise DocumentError(
                    f"float literal at line {line}, column {col}: exact "
                    f"rationals must be written as strings like \"1/2\"")
            i = k
            col += (k - i)
            continue
        i += 1


def parse_document_text(text: str) -> dict:
    _scan_for_floats(text)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(
            f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    if not isinstance(doc, dict):
        raise DocumentError("document root must be an object")
    return doc


def _matrix(data: Any, rows: Optional[int] = None,
            cols: Optional[int] = None) -> SparseMatrix:
    """Dense row-lists or {'rows': r, 'cols': c, 'entries': [[i,j,'c'],...]}"""
    if isinstance(data, list):
        return SparseMatrix.from_rows(
            [[scalar(v) for v in row] for row in data],
            cols=cols if not data else None)
    if isinstance(data, dict):
        r = data.get("rows", rows)
        c = data.get("cols", cols)
        if r is None or c is None:
            raise DocumentError("sparse matrix needs explicit rows and cols")
        entries = {}
        for item in data.get("entries", []):
            i, j, v = item
            entries[(int(i), int(j))] = scalar(v)
        return SparseMatrix(int(r), int(c), entries)
    raise DocumentError(f"not a matrix: {data!r}")


def _complex(data: dict) -> FinComplex:
    dims = {int(k): int(v) for k, v in data.get("dims", {}).items()}
    d = {}
    for k, mat in data.get("d", {}).items():
        n = int(k)
        d[n] = _matrix(mat, rows=dims.get(n + 1, 0), cols=dims.get(n, 0))
    try:
        return FinComplex(dims, d)
    except ValueError as exc:
        raise DocumentError(f"invalid complex: {exc}")


class WorkbenchDoc:
    """Resolved blocks of one workbench document."""

    def __init__(self, raw: dict):
        self.raw = raw
        self.sites: dict[str, FinSite] = {}
        self.complexes: dict[str, FinComplex] = {}
        self.presheaves: dict[str, PresheafC] = {}
        self.presheaf_maps: dict[str, PresheafMap] = {}
        self.hypercovers: dict[str, Hypercover] = {}
        self.dglies: dict[str, DgLie] = {}
        self.artin_bases: dict[str, ArtinBase] = {}
        self.algebras: dict[str, FinAssoc] = {}
        self.groups: dict[str, FinGroup] = {}
        self.site_actions: dict[str, SiteAction] = {}
        self.algebra_actions: dict[str, dict] = {}
        self.dglie_presheaves: dict[str, dict] = {}
        self.elements: dict[str, dict] = {}
        self._build()

    def _build(self):
        raw = self.raw
        for name, block in raw.get("sites", {}).items():
            self.sites[name] = FinSite(
                block["objects"],
                [tuple(p) for p in block.get("leq", [])],
                covers={u: fams for u, fams in block.get("covers", {}).items()},
                meets={(a, b): m for a, b, m in block.get("meets", [])},
                global_covers=block.get("global_covers", []),
            )
        for name, block in raw.get("complexes", {}).items():
            self.complexes[name] = _complex(block)
        for name, block in raw.get("presheaves", {}).items():
            self.presheaves[name] = self._presheaf(name, block)
        for name, block in raw.get("hypercovers", {}).items():
            self.hypercovers[name] = self._hypercover(name, block)
        for name, block in raw.get("dglies", {}).items():
            self.dglies[name] = self._dglie(name, block)
        for name, block in raw.get("artin_bases", {}).items():
            self.artin_bases[name] = self._artin_base(name, block)
        for name, block in raw.get("algebras", {}).items():
            spec = AlgebraSpec(
                name, int(block["dim"]),
                {(int(i), int(j)): {int(k): scalar(c)}
                 for i, j, k, c in block.get("mult", [])} if
                isinstance(block.get("mult", []), list) else {},
                [scalar(c) for c in block["unit"]],
                block.get("basis_names", [str(i) for i in range(int(block["dim"]))]))
            # merge repeated (i, j) rows
            mult: dict[tuple[int, int], dict[int, Fraction]] = {}
            for i, j, k, c in block.get("mult", []):
                mult.setdefault((int(i), int(j)), {})[int(k)] = scalar(c)
            spec.mult = mult
            self.algebras[name] = FinAssoc(spec)
        for name, block in raw.get("groups", {}).items():
            self.groups[name] = FinGroup(
                block["elements"],
                {(a, b): c for a, b, c in block["table"]},
                block["identity"])
        for name, block in raw.get("site_actions", {}).items():
            group = self._ref(self.groups, block["group"], "group")
            site = self._ref(self.sites, block["site"], "site")
            self.site_actions[name] = SiteAction(group, site,
                                                 block["permutations"])
        for name, block in raw.get("algebra_actions", {}).items():
            group = self._ref(self.groups, block["group"], "group")
            algebra = self._ref(self.algebras, block["algebra"], "algebra")
            matrices = {el: _matrix(m, rows=algebra.dim, cols=algebra.dim)
                        for el, m in block["matrices"].items()}
            self.algebra_actions[name] = {"group": group, "algebra": algebra,
                                          "algebra_name": block["algebra"],
                                          "matrices": matrices}
        for name, block in raw.get("dglie_presheaves", {}).items():
            self.dglie_presheaves[name] = self._dglie_presheaf(name, block)
        self.elements = dict(raw.get("elements", {}))

    def _ref(self, table: dict, name: str, kind: str):
        if name not in table:
            raise DocumentError(f"unresolved {kind} reference: {name!r}")
        return table[name]

    def _presheaf(self, name: str, block: dict) -> PresheafC:
        site = self._ref(self.sites, block["site"], "site")
        values = {}
        for u, cx in block.get("values", {}).items():
            if u not in site.objects:
                raise DocumentError(f"presheaf {name}: unknown object {u}")
            values[u] = _complex(cx)
        for u in site.objects:
            values.setdefault(u, FinComplex({}, {}))
        rest = {}
        for key, mats in block.get("restrictions", {}).items():
            small, big = [s.strip() for s in key.split("<")]
            comps = {int(k): _matrix(m, rows=values[small].dim(int(k)),
                                     cols=values[big].dim(int(k)))
                     for k, m in mats.items()}
            try:
                rest[(small, big)] = ChainMap(values[big], values[small], comps)
            except ValueError as exc:
                raise DocumentError(f"presheaf {name}, restriction {key}: {exc}")
        p = PresheafC(site, values, rest)
        rep = p.validate()
        if not rep.ok:
            raise DocumentError(f"presheaf {name}: " + "; ".join(rep.errors))
        return p

    def _hypercover(self, name: str, block: dict) -> Hypercover:
        site = self._ref(self.sites, block["site"], "site")
        kind = block.get("kind", "nerve")
        base = block.get("base", FINAL)
        bound = int(block.get("bound", 3))
        if kind == "nerve":
            return cech_nerve(site, block["family"], base, bound=bound,
                              name=name)
        if kind == "cells":
            cells = {int(level): [(obj, faces) for obj, faces in items]
                     for level, items in block["cells"].items()}
            return hypercover_from_cells(site, base, cells, bound=bound,
                                         skeletal=block.get("skeletal", True),
                                         name=name)
        raise DocumentError(f"hypercover {name}: unknown kind {kind!r}")

    def _dglie(self, name: str, block: dict) -> DgLie:
        cx = _complex(block)
        table: dict = {}
        for item in block.get("brackets", []):
            p, i, q, j = int(item["p"]), int(item["i"]), int(item["q"]), int(item["j"])
            val = {int(k): scalar(c) for k, c in item["value"].items()}
            table.setdefault((p, q), {})[(i, j)] = val
        missing = {}
        for p, q, i, j in block.get("window_missing", []):
            missing.setdefault((int(p), int(q)), set()).add((int(i), int(j)))
        return DgLie(cx, table, missing=missing or None, name=name)

    def _artin_base(self, name: str, block: dict) -> ArtinBase:
        if isinstance(block, str):
            return parse_base(block)
        mult = {}
        for i, j, k, c in block.get("mult", []):
            mult.setdefault((int(i), int(j)), {})[int(k)] = scalar(c)
        diff = {}
        for i, k, c in block.get("d", []):
            diff.setdefault(int(i), {})[int(k)] = scalar(c)
        return ArtinBase(block["names"], [int(d) for d in block["degrees"]],
                         mult, diff=diff, name=name)

    def _dglie_presheaf(self, name: str, block: dict) -> dict:
        site = self._ref(self.sites, block["site"], "site")
        values = {u: self._ref(self.dglies, ref, "dglie")
                  for u, ref in block["values"].items()}
        restrictions = {}
        for key, mats in block.get("restrictions", {}).items():
            small, big = [s.strip() for s in key.split("<")]
            restrictions[(small, big)] = {
                int(k): _matrix(m, rows=values[small].dim(int(k)),
                                cols=values[big].dim(int(k)))
                for k, m in mats.items()}
        return {"site": site, "values": values, "restrictions": restrictions}

    def element_gvec(self, name: str, nilp) -> GVec:
        """An element block [[base_name, g_degree, g_index, coeff], ...]
        interpreted in a nilpotent dg Lie algebra."""
        block = self.elements.get(name)
        if block is None:
            raise DocumentError(f"unresolved element reference: {name!r}")
        base = nilp.base
        name_to_bi = {nm: i for i, nm in enumerate(base.names)}
        parts: dict[int, list] = {}
        for bname, gdeg, gidx, coeff in block["components"]:
            bi = name_to_bi.get(bname)
            if bi is None:
                raise DocumentError(f"element {name}: unknown ideal element {bname}")
            gdeg, gidx = int(gdeg), int(gidx)
            deg = base.degrees[bi] + gdeg
            row = nilp.pos.get(deg, {}).get((bi, gdeg, gidx))
            if row is None:
                raise DocumentError(f"element {name}: component out of range")
            vec = parts.setdefault(deg, [Fraction(0)] * nilp.dim(deg))
            vec[row] += scalar(coeff)
        return GVec(parts)


def load_document(text: str) -> WorkbenchDoc:
    return WorkbenchDoc(parse_document_text(text))
