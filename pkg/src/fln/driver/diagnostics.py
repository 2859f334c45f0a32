"""Compiler-style diagnostics: construction from checker errors and rendering."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..errors import FlnError, SourceLoc
from ..muc.types import MPtr, MRecord, MucType, describe

GENERATED_PREFIX = "__fln__"


@dataclass
class Diagnostic:
    severity: str  # "error" or "warning"
    code: str
    loc: Optional[SourceLoc]
    message: str
    expected: Optional[str] = None
    found: Optional[str] = None
    notes: list[str] = field(default_factory=list)

    def sort_key(self) -> tuple:
        loc = self.loc or SourceLoc("", 0, 0)
        return (loc.file, loc.line, loc.col, self.code)


def _q(t: MucType) -> str:
    return f"`{describe(t)}`"


def _policy_related(*types: MucType) -> bool:
    return any(GENERATED_PREFIX in describe(t) for t in types)


def mismatch_message(exc) -> tuple[str, list[str]]:
    """Message and notes for a target-checker TypeMismatch, in compiler wording."""
    ctx = exc.context or ()
    kind = ctx[0] if ctx else None
    exp, found = exc.expected, exc.found
    both_ptr = isinstance(exp, MPtr) and isinstance(found, MPtr)
    if kind == "arg":
        fname, i = ctx[1], ctx[2]
        note = f"expected {_q(exp)} but argument is of type {_q(found)}"
        if both_ptr:
            return f"passing argument {i} of '{fname}' from incompatible pointer type", [note]
        return f"incompatible type for argument {i} of '{fname}'", [note]
    if kind == "assign":
        origin = ctx[1] if len(ctx) > 1 else "assign"
        if origin == "init":
            if both_ptr:
                return f"initialization of {_q(exp)} from incompatible pointer type {_q(found)}", []
            if isinstance(exp, MRecord):
                return "invalid initializer", [f"expected {_q(exp)} but initializer is of type {_q(found)}"]
            return f"incompatible types when initializing type {_q(exp)} using type {_q(found)}", []
        if origin == "return":
            return f"incompatible types when returning type {_q(found)} but {_q(exp)} was expected", []
        if both_ptr:
            return f"assignment to {_q(exp)} from incompatible pointer type {_q(found)}", []
        return f"incompatible types when assigning to type {_q(exp)} from type {_q(found)}", []
    if kind == "field":
        return f"incompatible types when initializing type {_q(exp)} using type {_q(found)}", []
    if kind == "let" and isinstance(ctx[1], tuple) and ctx[1][:1] == ("return",):
        fname = ctx[1][1]
        return (f"result of '{fname}' does not continue the policy of its argument: "
                f"expected {_q(exp)}, found {_q(found)}", [])
    if kind == "let" and isinstance(ctx[1], tuple) and ctx[1][:1] == ("arg",):
        _, fname, i = ctx[1]
        return f"incompatible type for argument {i} of '{fname}'", [
            f"expected {_q(exp)} but argument is of type {_q(found)}"]
    if kind == "return":
        return f"incompatible types when returning type {_q(found)} but {_q(exp)} was expected", []
    if exc.message and not exc.message.startswith("expected '"):
        return exc.message, []
    return f"incompatible types: expected {_q(exp)}, found {_q(found)}", []


def from_error(exc: FlnError, severity: Optional[str] = None) -> Diagnostic:
    """A diagnostic for any pipeline error."""
    sev = severity or getattr(exc, "severity", "error")
    if hasattr(exc, "expected") and hasattr(exc, "found") and hasattr(exc, "context"):
        msg, notes = mismatch_message(exc)
        code = "PolicyViolation" if _policy_related(exc.expected, exc.found) else "TypeMismatch"
        return Diagnostic(sev, code, exc.loc, msg, describe(exc.expected), describe(exc.found), notes)
    return Diagnostic(sev, exc.code, exc.loc, exc.message)


def render_diagnostic(d: Diagnostic, sources: Optional[dict[str, str]] = None) -> str:
    """`file:line:col: severity: message`, then the source line with a caret."""
    head = f"{d.loc.file}:{d.loc.line}:{d.loc.col}: " if d.loc else ""
    lines = [f"{head}{d.severity}: {d.message}"]
    text = (sources or {}).get(d.loc.file) if d.loc else None
    if text is not None:
        src = text.splitlines()
        if 1 <= d.loc.line <= len(src):
            line = src[d.loc.line - 1]
            lines.append(f"  {line}")
            pad = "".join(c if c == "\t" else " " for c in line[:max(d.loc.col - 1, 0)])
            lines.append(f"  {pad}^")
    for n in d.notes:
        lines.append(f"{head}note: {n}")
    return "\n".join(lines)
