"""Structural comparison of models modulo ``tmp_N`` numbering and ordering of
methods inside interfaces and classes."""

from __future__ import annotations

import re

from .ir import AbsModel
from .printer import print_class, print_expr, print_method, print_sig, print_stmts

_TMP = re.compile(r"\btmp_\d+\b")


def _alpha(text: str) -> str:
    seen: dict[str, str] = {}

    def sub(m):
        return seen.setdefault(m.group(), f"tmp#{len(seen) + 1}")

    return " ".join(_TMP.sub(sub, text).split())


def canonical(model: AbsModel) -> dict:
    """A comparable summary: each method is text with temporaries renamed in
    order of first occurrence."""
    out = {
        "data": sorted(" ".join(d.split()) for d in model.data_decls),
        "functions": sorted(f"{f.ret} {f.name}({', '.join(p.type + ' ' + p.name for p in f.params)}) = "
                            f"{print_expr(f.body)}" for f in model.functions),
        "interfaces": {},
        "classes": {},
        "main": _alpha("\n".join(print_stmts(model.main, 0))),
    }
    for i in model.interfaces:
        out["interfaces"][i.name] = {m.name: " ".join("\n".join(print_sig(m, 0)).split()) for m in i.methods}
    for c in model.classes:
        head = print_class(type(c)(c.name, c.params, c.implements, c.fields, [], c.specs))
        out["classes"][c.name] = {
            "head": " ".join("\n".join(head).split()),
            "methods": {m.name: _alpha("\n".join(print_method(m, 0))) for m in c.methods},
        }
    return out


def differences(a: AbsModel, b: AbsModel) -> list[str]:
    """Human-readable list of structural differences (empty iff alpha-equivalent)."""
    ca, cb = canonical(a), canonical(b)
    diffs = []
    for key in ("data", "functions", "main"):
        if ca[key] != cb[key]:
            diffs.append(f"{key}: {ca[key]!r} != {cb[key]!r}")
    for kind in ("interfaces", "classes"):
        for name in sorted(set(ca[kind]) | set(cb[kind])):
            if name not in ca[kind] or name not in cb[kind]:
                diffs.append(f"{kind[:-1]} {name} present on one side only")
                continue
            x, y = ca[kind][name], cb[kind][name]
            if kind == "classes":
                if x["head"] != y["head"]:
                    diffs.append(f"class {name}: {x['head']!r} != {y['head']!r}")
                x, y = x["methods"], y["methods"]
            for m in sorted(set(x) | set(y)):
                if x.get(m) != y.get(m):
                    diffs.append(f"{name}.{m}: {x.get(m)!r} != {y.get(m)!r}")
    return diffs


def alpha_equivalent(a: AbsModel, b: AbsModel) -> bool:
    return not differences(a, b)
