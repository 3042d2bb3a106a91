"""Serializers producing .robtl text that parses back to equal trees."""
from __future__ import annotations

from ..arith import format_number, to_text as arith_text
from ..expressions import to_text as expr_text
from ..logic import to_text as formula_text
from ..model import FiniteDomain
from ..perturbation import to_text as pert_text
from ..sim import UpdateProgram
from .resolver import ModelDocument

__all__ = ["arith_text", "expr_text", "formula_text", "pert_text", "program_text", "print_document"]


def program_text(prog: UpdateProgram, indent: str = "    ") -> list[str]:
    lines = [f"{indent}let {x.name} = {arith_text(x.value)};" for x in prog.lets]
    for r in prog.rules:
        guard = "" if r.guard is None else f" when {arith_text(r.guard)}"
        lines.append(f"{indent}{r.target}' = {arith_text(r.value)}{guard};")
    return lines


def print_document(doc: ModelDocument) -> str:
    out: list[str] = []
    for name, value in doc.constants.items():
        out.append(f"const {name} = {format_number(value)};")
    if doc.constants:
        out.append("")
    for v in doc.space.variables:
        if isinstance(v.domain, FiniteDomain):
            dom = "{" + ", ".join(v.domain.levels) + "}"
        else:
            dom = f"[{format_number(v.domain.lo)}, {format_number(v.domain.hi)}]"
        out.append(f"var {v.name} : {dom};")
    out.append("")
    out.append("init {")
    out.extend(f"    {name} = {arith_text(node)};" for name, node in doc.init_exprs)
    out.append("}")
    out.append("")
    out.append("kernel {")
    out.extend(program_text(doc.kernel))
    out.append("}")
    for name, f in doc.effects.items():
        out.append("")
        out.append(f"effect {name} {{")
        out.extend(program_text(f.program))
        out.append("}")
    if doc.penalties:
        out.append("")
    for name, rho in doc.penalties.items():
        out.append(f"penalty {name} = {arith_text(rho.body)};")
    for kind, table, show in (("perturbation", doc.perturbations, pert_text),
                              ("expression", doc.expressions, expr_text),
                              ("formula", doc.formulas, formula_text)):
        if table:
            out.append("")
        for name, obj in table.items():
            out.append(f"{kind} {name} = {show(obj)};")
    return "\n".join(out) + "\n"
