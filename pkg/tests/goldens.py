"""Shared helpers for the golden emission files."""

from pathlib import Path

from fln.codegen.program import emit_program
from fln.driver.pipeline import analyze

GOLDEN_DIR = Path(__file__).parent / "golden"
CASES = ("simple_typedef", "whole_struct", "field_struct", "member_access", "initializer")
PREFIX = "__fln__"


def render_case(name: str) -> str:
    """Rewritten source followed by its generated header, as one text."""
    a = analyze(GOLDEN_DIR / f"{name}.c")
    em = emit_program(a)
    rf = em.files[f"{name}.c"]
    hname, htext = em.headers[f"{name}.c"]
    return f"{rf.text}/* ==== {hname} ==== */\n{htext}"


def normalize(text: str) -> str:
    """Drop the generated-name prefix to compare with the unprefixed listings."""
    return text.replace(PREFIX, "")
