"""The analysis pipeline: parse, bind annotations, lower, map, translate, check."""

from __future__ import annotations

import os
import sys
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..errors import FlnError
from ..frontend import cast as C
from ..frontend.annotate import AnnotatedDecl, attach_annotations
from ..frontend.includes import DependencyGraph, resolve_includes
from ..frontend.parser import parse_unit
from ..lattice import RelabelCapability
from ..mapper.lower import LoweredProgram, lower_units
from ..mapper.mapper import BaseTypeMismatch, Mapper, RecursiveTypeWarning, recursive_records, register_de
from ..mapper.spec import AFun, AnnotContexts
from ..muc.checker import MucProgram, collect_muc_errors
from ..polc import syntax as S
from ..polc.types import TypingContexts
from ..translate.exprs import ExprTranslator
from ..translate.types import ANONYMOUS, TypeTranslator
from .diagnostics import Diagnostic, from_error

RECURSION_LIMIT = 50000
STAGES = ("Parse Files", "Generate Header", "Build AST", "Transform")


@dataclass
class Analysis:
    root: Path
    files: list[Path] = field(default_factory=list)  # dependencies first
    names: dict[Path, str] = field(default_factory=dict)  # path -> display name
    sources: dict[str, str] = field(default_factory=dict)  # display name -> text
    units: dict[str, C.TranslationUnit] = field(default_factory=dict)
    annotated: dict[str, list[AnnotatedDecl]] = field(default_factory=dict)
    graph: Optional[DependencyGraph] = None
    lowered: Optional[LoweredProgram] = None
    functions: dict[str, AFun] = field(default_factory=dict)  # after d&e registration
    capabilities: list[RelabelCapability] = field(default_factory=list)
    ctx: Optional[TypingContexts] = None
    code: dict[str, S.FunDef] = field(default_factory=dict)
    main_code: object = None  # mapped global initializers
    tt: Optional[TypeTranslator] = None
    program: Optional[MucProgram] = None
    diagnostics: list[Diagnostic] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=lambda: {s: 0.0 for s in STAGES})

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]


@contextmanager
def _timed(a: Analysis, stage: str):
    t0 = time.perf_counter()
    try:
        yield
    finally:
        a.timings[stage] += time.perf_counter() - t0


def _deep():
    if sys.getrecursionlimit() < RECURSION_LIMIT:
        sys.setrecursionlimit(RECURSION_LIMIT)


def load(root: str | Path) -> Analysis:
    """Resolve includes from `root` and parse every project file."""
    root = Path(root).resolve()
    a = Analysis(root)
    with _timed(a, "Parse Files"):
        a.graph = resolve_includes(root)
        a.files = a.graph.topological()
        for path in a.files:
            name = os.path.relpath(path, root.parent)
            a.names[path] = name
            text = path.read_text(encoding="utf-8")
            a.sources[name] = text
            unit, dirs = parse_unit(text, name)
            a.units[name] = unit
            a.annotated[name] = attach_annotations(unit, dirs)
            for p in unit.problems:
                a.diagnostics.append(Diagnostic(p.severity, p.code, p.loc, p.message))
    return a


def load_sources(sources: dict[str, str]) -> Analysis:
    """Parse in-memory files given in dependency order (used by tests and benchmarks)."""
    a = Analysis(Path(next(iter(sources))))
    with _timed(a, "Parse Files"):
        for name, text in sources.items():
            a.files.append(Path(name))
            a.names[Path(name)] = name
            a.sources[name] = text
            unit, dirs = parse_unit(text, name)
            a.units[name] = unit
            a.annotated[name] = attach_annotations(unit, dirs)
            for p in unit.problems:
                a.diagnostics.append(Diagnostic(p.severity, p.code, p.loc, p.message))
    return a


def _display(lowered: LoweredProgram, key: str) -> tuple[str, Optional[str]]:
    spelled = lowered.display.get(key, f"struct {key}")
    if spelled.startswith(("struct ", "union ")):
        return spelled, None
    tags = [t for t, k in lowered.record_keys.items() if k == key and not t.startswith("__anon_")]
    return spelled, (f"struct {tags[0]}" if tags else ANONYMOUS)


def analyze_loaded(a: Analysis, feature_rules: bool = True) -> Analysis:
    """Lower, map, translate and check an already parsed project."""
    _deep()
    with _timed(a, "Build AST"):
        lowered = lower_units([(a.units[a.names[p]], a.annotated[a.names[p]]) for p in a.files])
        a.lowered = lowered
        for exc in lowered.diagnostics:
            a.diagnostics.append(from_error(exc))
        functions = {}
        for name, spec in lowered.actx.functions.items():
            loc = None
            decls = lowered.fun_decls.get(name)
            if decls:
                loc = decls[0].loc
            try:
                spec2, cap = register_de(name, spec, loc)
            except BaseTypeMismatch as exc:
                a.diagnostics.append(from_error(exc))
                spec2, cap = spec, None
            functions[name] = spec2
            if cap is not None:
                a.capabilities.append(cap)
        a.functions = functions
        actx = AnnotContexts(lowered.actx.records, functions, lowered.actx.variables)
        for name in recursive_records(actx):
            a.diagnostics.append(from_error(RecursiveTypeWarning(
                f"annotated record '{name}' refers to itself; relabeling a smaller type may "
                "weaken the sequencing guarantee")))
        ctx = actx.labeled()
        a.ctx = ctx
    with _timed(a, "Transform"):
        mapper = Mapper(ctx)
        for name, fdef in lowered.code.items():
            try:
                a.code[name] = mapper.map_fundef(fdef, ctx.functions[name])
            except FlnError as exc:
                a.diagnostics.append(from_error(exc))
        try:
            main, _ = mapper.map_expr(lowered.main)
            a.main_code = main
        except FlnError as exc:
            a.diagnostics.append(from_error(exc))
            main = None
    with _timed(a, "Generate Header"):
        tt = TypeTranslator(dict(ctx.records), "nest")
        for key in ctx.records:
            if key not in lowered.derived:
                tt.display[key] = _display(lowered, key)
        for d in lowered.derived.values():
            tt.register_derived(d.name, d.base, d.policy)
        a.tt = tt
        try:
            functions_m = {n: tt.type(f) for n, f in ctx.functions.items()}
            globals_m = {n: tt.type(s) for n, s in ctx.variables.items()}
        except FlnError as exc:
            a.diagnostics.append(from_error(exc))
            return a
    with _timed(a, "Transform"):
        xt = ExprTranslator(tt, dict(ctx.functions), dict(ctx.variables))
        out_code = {}
        for name, fdef in a.code.items():
            xt.env = {**ctx.variables, **dict(zip(fdef.params, ctx.functions[name].params))}
            try:
                out_code[name] = S.FunDef(name, fdef.params, xt.expr(fdef.body))
            except FlnError as exc:
                a.diagnostics.append(from_error(exc))
        xt.env = dict(ctx.variables)
        out_main = None
        if main is not None:
            try:
                out_main = xt.expr(main)
            except FlnError as exc:
                a.diagnostics.append(from_error(exc))
        try:
            records = tt.typedefs()
        except FlnError as exc:
            a.diagnostics.append(from_error(exc))
            return a
        a.program = MucProgram(records, functions_m, out_code, globals_m, {})
        for exc in collect_muc_errors(a.program, out_main, c_compat=True):
            a.diagnostics.append(from_error(exc))
        if feature_rules:
            from ..codegen.rules import enforce_feature_rules

            rule_diags = enforce_feature_rules(a)
            taken = {(d.loc.file, d.loc.line, d.loc.col) for d in rule_diags if d.loc}
            a.diagnostics = [d for d in a.diagnostics
                             if not (d.loc and (d.loc.file, d.loc.line, d.loc.col) in taken
                                     and d.code in ("PolicyViolation", "TypeMismatch"))]
            a.diagnostics.extend(rule_diags)
    a.diagnostics = _dedupe(sorted(a.diagnostics, key=Diagnostic.sort_key))
    return a


def _dedupe(diags: list[Diagnostic]) -> list[Diagnostic]:
    seen = set()
    out = []
    for d in diags:
        key = (d.sort_key(), d.message)
        if key not in seen:
            seen.add(key)
            out.append(d)
    return out


def analyze(root: str | Path, feature_rules: bool = True) -> Analysis:
    return analyze_loaded(load(root), feature_rules)


def analyze_sources(sources: dict[str, str], feature_rules: bool = True) -> Analysis:
    return analyze_loaded(load_sources(sources), feature_rules)
