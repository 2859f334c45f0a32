import pytest
from hypothesis import given
from hypothesis import strategies as st

from fln.errors import SourceLoc
from fln.frontend import cast as C
from fln.frontend.annotate import KindMismatch, VoidReturnAnnotation, attach_annotations
from fln.frontend.includes import IncludeCycle, MissingInclude, resolve_includes
from fln.frontend.lexer import LexError, token_texts, tokenize
from fln.frontend.parser import parse_type, parse_unit
from fln.frontend.pragma import (
    PragmaDirective,
    PragmaKind,
    PragmaSyntaxError,
    Projection,
    is_annotation,
    parse_pragma,
    render_pragma,
)

S, I, B = Projection.SECRECY, Projection.INTEGRITY, Projection.BOTH


@pytest.mark.parametrize("text, kind, seq, index", [
    ("#pragma requires AlicePriv:secrecy", PragmaKind.REQUIRES, [("AlicePriv", S)], None),
    ("#pragma requires l1:secrecy then l2:secrecy", PragmaKind.REQUIRES, [("l1", S), ("l2", S)], None),
    ("#pragma param(2) EncodedBal:integrity", PragmaKind.PARAM, [("EncodedBal", I)], 2),
    ("#pragma return valid_gate:(secrecy, integrity)", PragmaKind.RETURN, [("valid_gate", B)], None),
])
def test_parse_pragma_examples(text, kind, seq, index):
    d = parse_pragma(text)
    assert (d.kind, d.sequence, d.index) == (kind, seq, index)


def test_field_set_directive():
    d = parse_pragma("#pragma requires {f1: int, f2: char *} l1:secrecy")
    assert d.field_set == [("f1", "int"), ("f2", "char *")]


@pytest.mark.parametrize("text", [
    "#pragma requires",
    "#pragma requires a:secret",
    "#pragma requires a:secrecy then",
    "#pragma param(0) a:integrity",
    "#pragma return {f: int} a:secrecy",
    "#pragma bogus a:secrecy",
])
def test_parse_pragma_rejects(text):
    with pytest.raises(PragmaSyntaxError):
        parse_pragma(text, SourceLoc("f.c", 3, 1))


def test_syntax_error_carries_column():
    with pytest.raises(PragmaSyntaxError) as exc:
        parse_pragma("#pragma requires a:secret", SourceLoc("f.c", 3, 1))
    assert exc.value.loc.line == 3 and exc.value.loc.col > 1


def test_foreign_pragmas_are_not_annotations():
    assert is_annotation("#pragma requires a:secrecy")
    assert not is_annotation("#pragma once")
    assert not is_annotation("#pragma GCC diagnostic push")


atom = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,6}", fullmatch=True).filter(
    lambda s: s not in ("then", "secrecy", "integrity"))
directive = st.builds(
    lambda kind, seq, idx: PragmaDirective(kind, seq, idx if kind is PragmaKind.PARAM else None),
    st.sampled_from(list(PragmaKind)),
    st.lists(st.tuples(atom, st.sampled_from(list(Projection))), min_size=1, max_size=4),
    st.one_of(st.none(), st.integers(1, 9)),
)


@given(directive)
def test_pragma_round_trip(d):
    assert parse_pragma(render_pragma(d)) == d


def test_parse_simple_declaration():
    unit, dirs = parse_unit("int x;")
    assert len(unit.items) == 1 and dirs == []
    decl = unit.items[0]
    assert isinstance(decl, C.Declaration) and decl.declarators[0].name == "x"


def test_parse_bank_handler():
    src = (
        "int bankHandler(void) {\n"
        "    int bal = get_alice_balance();\n"
        "    postBalance(bal);\n"
        "    return 0;\n"
        "}\n"
    )
    unit, _ = parse_unit(src)
    (fn,) = unit.items
    assert isinstance(fn, C.FunctionDef)
    locals_ = [s for s in fn.body.items if isinstance(s, C.Declaration)]
    calls = [e for s in fn.body.items for root in _exprs(s) for e in C.iter_expr(root)
             if isinstance(e, C.Call)]
    assert len(locals_) == 1 and len(calls) == 2


def _exprs(s):
    if isinstance(s, C.Declaration):
        return [d.init for d in s.declarators if d.init is not None]
    if isinstance(s, (C.ExprStmt, C.Return)):
        return [s.expr if isinstance(s, C.ExprStmt) else s.value]
    return []


def test_comment_only_file_is_empty():
    unit, dirs = parse_unit("/* nothing */\n// here\n")
    assert unit.items == [] and dirs == []


def test_parse_type_spelling():
    assert C.spelling(parse_type("int *")) == "int *"
    assert isinstance(parse_type("struct foo"), C.CRecord)


def test_token_texts_ignore_layout():
    assert token_texts("int  x /* c */ = 1;") == token_texts("int x=1;")


def test_lexer_rejects_stray_characters():
    with pytest.raises(LexError):
        tokenize("int x = `1`;")


def test_unknown_construct_is_kept_as_opaque():
    unit, _ = parse_unit("asm(\"nop\");\nint x;\n")
    assert any(isinstance(i, C.Declaration) for i in unit.items)


def test_attach_binds_requires():
    unit, dirs = parse_unit("#pragma requires AlicePriv:secrecy\nint balA;\n")
    (ad,) = attach_annotations(unit, dirs)
    assert ad.declarators[0].name == "balA" and ad.bound[0].sequence == [("AlicePriv", S)]


def test_attach_binds_param_and_return_to_one_function():
    unit, dirs = parse_unit(
        "#pragma param AlicePriv:secrecy\n#pragma return EncodedBal:integrity\nint encodeA(int);\n")
    (ad,) = attach_annotations(unit, dirs)
    assert [d.kind for d in ad.bound] == [PragmaKind.PARAM, PragmaKind.RETURN]


def test_return_annotation_on_void_function():
    unit, dirs = parse_unit("#pragma return t:integrity\nvoid f();\n")
    with pytest.raises(VoidReturnAnnotation):
        attach_annotations(unit, dirs, strict=True)
    unit, dirs = parse_unit("#pragma return t:integrity\nvoid f();\n")
    assert attach_annotations(unit, dirs) == []
    assert [p.code for p in unit.problems] == ["VoidReturnAnnotation"]


def test_requires_on_function_is_a_kind_mismatch():
    unit, dirs = parse_unit("#pragma requires t:integrity\nint f(int x);\n")
    with pytest.raises(KindMismatch):
        attach_annotations(unit, dirs, strict=True)


def test_includes_single(tmp_path):
    (tmp_path / "a.c").write_text("#include <stdio.h>\nint x;\n")
    g = resolve_includes(tmp_path / "a.c")
    assert len(g.nodes) == 1 and g.edges == []


def test_includes_chain_order(tmp_path):
    (tmp_path / "a.c").write_text('#include "b.h"\n')
    (tmp_path / "b.h").write_text('#include "c.h"\n')
    (tmp_path / "c.h").write_text("int c;\n")
    g = resolve_includes(tmp_path / "a.c")
    assert len(g.nodes) == 3 and len(g.edges) == 2
    assert [p.name for p in g.topological()] == ["c.h", "b.h", "a.c"]


def test_include_cycle(tmp_path):
    (tmp_path / "a.c").write_text('#include "b.h"\n')
    (tmp_path / "b.h").write_text('#include "a.c"\n')
    with pytest.raises(IncludeCycle):
        resolve_includes(tmp_path / "a.c")


def test_missing_include(tmp_path):
    (tmp_path / "a.c").write_text('#include "nope.h"\n')
    with pytest.raises(MissingInclude) as exc:
        resolve_includes(tmp_path / "a.c")
    assert exc.value.loc.line == 1
