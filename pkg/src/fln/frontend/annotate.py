"""Binding annotation directives to the declarations that follow them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from ..errors import FlnError
from . import cast as C
from .parser import Problem
from .pragma import PragmaDirective, PragmaKind


class AnnotationError(FlnError):
    code = "AnnotationError"


class DanglingDirective(AnnotationError):
    code = "DanglingDirective"


class KindMismatch(AnnotationError):
    code = "KindMismatch"


class VoidReturnAnnotation(AnnotationError):
    code = "VoidReturnAnnotation"


class VariadicAnnotation(AnnotationError):
    code = "VariadicAnnotation"


@dataclass(eq=False)
class AnnotatedDecl:
    node: Union[C.Declaration, C.FunctionDef]
    bound: list[PragmaDirective] = field(default_factory=list)

    @property
    def declarators(self) -> list[C.Declarator]:
        if isinstance(self.node, C.FunctionDef):
            return [self.node.declarator]
        return self.node.declarators

    @property
    def is_function(self) -> bool:
        return isinstance(self.node, C.FunctionDef) or any(d.is_function for d in self.node.declarators)


def _function_declarator(node) -> C.Declarator | None:
    if isinstance(node, C.FunctionDef):
        return node.declarator
    fns = [d for d in node.declarators if d.is_function]
    return fns[0] if fns else None


def _check(decl: AnnotatedDecl, d: PragmaDirective) -> None:
    fn = _function_declarator(decl.node)
    loc = d.location
    if d.kind is PragmaKind.REQUIRES:
        if fn is not None:
            raise KindMismatch("'requires' annotates objects; use 'param' or 'return' on functions", loc)
        if d.field_set is not None:
            target = decl.node.spec.ctype
            while isinstance(target, C.CPointer):
                target = target.target
            if not isinstance(target, (C.CRecord, C.CNamed)) or (
                isinstance(target, C.CNamed) and target.name in C.ARITHMETIC
            ):
                raise KindMismatch("a field set requires a record-typed declaration", loc)
        for other in decl.bound:
            if other.kind is PragmaKind.REQUIRES:
                raise KindMismatch("declaration already carries a 'requires' annotation", loc)
        return
    if fn is None:
        raise KindMismatch(f"'{d.kind.value}' annotates functions; use 'requires' on objects", loc)
    ftype = fn.ctype
    assert isinstance(ftype, C.CFunction)
    if d.kind is PragmaKind.RETURN:
        if isinstance(ftype.ret, C.CVoid):
            raise VoidReturnAnnotation(f"'return' annotation on void function '{fn.name}'", loc)
        if any(o.kind is PragmaKind.RETURN for o in decl.bound):
            raise KindMismatch(f"function '{fn.name}' already carries a 'return' annotation", loc)
        return
    nparams = len(fn.params or [])
    if d.index is None:
        if nparams == 0:
            if fn.variadic:
                raise VariadicAnnotation(
                    f"only named parameters of '{fn.name}' can be annotated", loc)
            raise KindMismatch(f"function '{fn.name}' has no parameters to annotate", loc)
    elif d.index > nparams:
        if fn.variadic:
            raise VariadicAnnotation(
                f"parameter {d.index} of '{fn.name}' is in the variadic tail; "
                f"only the first {nparams} can be annotated", loc)
        raise KindMismatch(f"function '{fn.name}' has only {nparams} parameter(s)", loc)
    targets = set(range(1, nparams + 1)) if d.index is None else {d.index}
    for other in decl.bound:
        if other.kind is PragmaKind.PARAM:
            taken = set(range(1, nparams + 1)) if other.index is None else {other.index}
            if taken & targets:
                raise KindMismatch(f"parameter of '{fn.name}' annotated twice", loc)


def attach_annotations(ast: C.TranslationUnit, dirs: list[PragmaDirective],
                       strict: bool = False) -> list[AnnotatedDecl]:
    """Bind each directive to the declaration right after it.

    Binding errors are appended to `ast.problems` (or raised when `strict`).
    """
    result: list[AnnotatedDecl] = []
    seen: set[int] = set()
    errors: list[AnnotationError] = []

    def fail(exc: AnnotationError) -> None:
        if strict:
            raise exc
        errors.append(exc)

    for seq in _sequences(ast.items):
        pending: list[PragmaDirective] = []
        for item in seq:
            if isinstance(item, C.PragmaItem):
                pending.append(item.directive)
                seen.add(id(item.directive))
                continue
            if isinstance(item, C.Directive):
                continue
            bindable = (isinstance(item, C.FunctionDef) or (
                isinstance(item, C.Declaration) and not item.is_typedef and item.declarators))
            if pending and bindable:
                decl = AnnotatedDecl(item)
                for d in pending:
                    try:
                        _check(decl, d)
                    except AnnotationError as exc:
                        fail(exc)
                        continue
                    decl.bound.append(d)
                if decl.bound:
                    result.append(decl)
            else:
                for d in pending:
                    fail(DanglingDirective("annotation is not followed by a declaration", d.location))
            pending = []
        for d in pending:
            fail(DanglingDirective("annotation is not followed by a declaration", d.location))
    for d in dirs:
        if id(d) not in seen:
            fail(DanglingDirective("annotation is not followed by a declaration", d.location))
    for exc in errors:
        ast.problems.append(Problem("error", exc.code, exc.message, exc.loc))
    return result


def _sequences(items: list[C.Stmt]):
    """Every statement list in the unit, outermost first, in source order."""
    out = [items]
    i = 0
    while i < len(out):
        for item in out[i]:
            out.extend(C._child_blocks(item))
        i += 1
    return out
