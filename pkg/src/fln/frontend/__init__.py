"""C-subset frontend: tokens, syntax tree, annotation directives, include graph."""

from .annotate import AnnotatedDecl, attach_annotations
from .includes import DependencyGraph, resolve_includes
from .parser import ParseError, Problem, parse_type, parse_unit
from .pragma import PragmaDirective, PragmaKind, Projection, parse_pragma, render_pragma

__all__ = [
    "AnnotatedDecl", "attach_annotations", "DependencyGraph", "resolve_includes",
    "ParseError", "Problem", "parse_type", "parse_unit",
    "PragmaDirective", "PragmaKind", "Projection", "parse_pragma", "render_pragma",
]
