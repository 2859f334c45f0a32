import subprocess

import pytest

from conftest import CASES_DIR, FIXTURES, GCC, expected_line, needs_gcc
from goldens import CASES, GOLDEN_DIR, normalize, render_case
from fln.codegen.header import HeaderPlan, PlanEntry, emit_policy_typedef, emit_relabel_fns, \
    generate_header, header_name
from fln.codegen.program import WriteFailure, emit_program, reconstruct_program
from fln.driver.pipeline import analyze, analyze_sources


@pytest.mark.parametrize("case", CASES)
def test_golden(case):
    assert render_case(case) == (GOLDEN_DIR / f"{case}.golden").read_text()


def test_emit_policy_typedef_examples():
    assert emit_policy_typedef("__fln__l1S_l2S_int", "int") == \
        "typedef struct {int d;} __fln__l1S_l2S_int;"
    assert emit_policy_typedef("__fln__l1S_l2S_foo", "struct foo") == \
        "typedef struct {struct foo d;} __fln__l1S_l2S_foo;"
    fields = [("__fln__l1S_l2S_int", "f1"), ("__fln__l1S_l2S_int", "f2")]
    assert emit_policy_typedef("__fln__l1S_l2S_foo", "foo", fields) == \
        "typedef struct { __fln__l1S_l2S_int f1; __fln__l1S_l2S_int f2; foo d; } __fln__l1S_l2S_foo;"


def test_relabel_fns_pair():
    w, r = emit_relabel_fns("__fln__AlicePrivS_int", "int")
    assert "__fln__AlicePrivS_int __fln__AlicePrivS_int_w(int x)" in w
    assert "int __fln__AlicePrivS_int_r(__fln__AlicePrivS_int x) { return x.d; }" in r


def test_header_shapes():
    plan = HeaderPlan()
    name, text = generate_header(plan, "a.c")
    assert name == "a__fln.h" and "typedef" not in text and text.startswith("#ifndef FLN_")
    entry = PlanEntry("__fln__tS_int", "int")
    plan.add(entry, None)
    plan.add(PlanEntry("__fln__tS_int", "int"), None)
    _, text = generate_header(plan, "a.c")
    assert text.count("typedef") == 1
    assert text.count("_w(") == 1 and text.count("_r(") == 1
    assert header_name("dir/x.c") == "x__fln.h"


def test_listings_after_prefix_normalization():
    text = normalize(render_case("simple_typedef"))
    assert "typedef struct {int d;} l1S_l2S_int;" in text
    assert "typedef struct {struct foo d;} l1S_l2S_foo;" in normalize(render_case("whole_struct"))
    assert "return x.d.f2;" in render_case("member_access")
    assert "{.f1 = {1}, .d={.f2 = 2}}" in render_case("initializer")


def test_header_is_deduplicated_across_uses():
    a = analyze(FIXTURES / "sequencing.c")
    plan = emit_program(a).plans["sequencing.c"]
    assert len({e.name for e in plan}) == len(plan)


def test_unannotated_file_is_identity(tmp_path):
    src = "int add(int a, int b)\n{\n    return a + b;\n}\n"
    (tmp_path / "plain.c").write_text(src)
    a = analyze(tmp_path / "plain.c")
    em = emit_program(a)
    assert em.text("plain.c") == src
    assert "typedef" not in em.headers["plain.c"][1]
    written = reconstruct_program(a, em, tmp_path / "out")
    assert sorted(p.name for p in written) == ["plain.c", "plain__fln.h"]


def test_reconstruct_refuses_to_overwrite_inputs(tmp_path):
    (tmp_path / "plain.c").write_text("int x;\n")
    a = analyze(tmp_path / "plain.c")
    with pytest.raises(WriteFailure):
        reconstruct_program(a, emit_program(a), tmp_path)


def _project(tmp_path):
    (tmp_path / "lib.h").write_text(
        "#ifndef LIB_H\n#define LIB_H\n#pragma return t:secrecy\nint lib_get(void);\n"
        "#pragma param t:secrecy\nvoid lib_put(int v);\n#endif\n")
    (tmp_path / "main.c").write_text(
        '#include "lib.h"\n\nint main(void)\n{\n    lib_put(lib_get());\n    return 0;\n}\n')
    return tmp_path / "main.c"


def test_header_included_where_annotations_live(tmp_path):
    a = analyze(_project(tmp_path))
    em = emit_program(a)
    assert em.files["lib.h"].includes and not em.files["main.c"].includes
    assert em.text("main.c") == (tmp_path / "main.c").read_text()


@pytest.mark.parametrize("rule, src", [
    ("CastOnAnnotated", "#pragma requires s:secrecy\nint y;\nlong f(void) { return (long)y; }\n"),
    ("PointerArithOnAnnotated",
     "#pragma requires s:secrecy\nint *p;\nint *f(void) { return p + 1; }\n"),
    ("OperatorOnAnnotated",
     "#pragma requires s:secrecy\nint x;\n#pragma requires s:secrecy\nint y;\n"
     "int f(void) { return x + y; }\n"),
])
def test_feature_rules(rule, src):
    a = analyze_sources({"r.c": src})
    codes = [d.code for d in a.diagnostics]
    assert rule in codes
    (d,) = [d for d in a.diagnostics if d.code == rule]
    assert d.loc.line == src.count("\n")


def test_pointer_cast_is_not_caught():
    src = "#pragma requires s:secrecy\nint *p;\nlong *f(void) { return (long *)p; }\n"
    a = analyze_sources({"r.c": src})
    assert "CastOnAnnotated" not in [d.code for d in a.diagnostics]


def _compile(path, *extra):
    return subprocess.run([GCC, "-fsyntax-only", "-Wno-unknown-pragmas",
                           "-Werror=incompatible-pointer-types", *extra, str(path)],
                          capture_output=True, text=True)


AGREEMENT = sorted(FIXTURES.glob("*.c")) + sorted(CASES_DIR.glob("*.c")) + \
    sorted(GOLDEN_DIR.glob("*.c"))


@needs_gcc
@pytest.mark.parametrize("path", AGREEMENT, ids=lambda p: p.name)
def test_compiler_agrees_with_internal_check(path, tmp_path):
    a = analyze(path)
    reconstruct_program(a, emit_program(a), tmp_path)
    r = _compile(tmp_path / a.names[a.files[-1]])
    assert (r.returncode == 0) == (not a.errors), r.stderr
    if a.errors:
        line = expected_line(path)
        assert f"{path.name}:{line}:" in r.stderr
        assert [d.loc.line for d in a.errors] == [line]


@needs_gcc
def test_compiler_accepts_multi_file_output(tmp_path):
    a = analyze(_project(tmp_path))
    out = tmp_path / "out"
    reconstruct_program(a, emit_program(a), out)
    assert not a.errors
    r = _compile(out / "main.c")
    assert r.returncode == 0, r.stderr


@needs_gcc
def test_writer_reader_round_trip(tmp_path):
    a = analyze(FIXTURES / "roundtrip.c")
    em = emit_program(a)
    reconstruct_program(a, em, tmp_path)
    checks = []
    for e in em.plans["roundtrip.c"]:
        if not e.functions():
            continue
        checks.append(
            f"    {{ {e.base} v; memset(&v, 0x5a, sizeof v); {e.base} u = {e.name}_r({e.name}_w(v));\n"
            f"      if (memcmp(&u, &v, sizeof v) != 0) return 1; }}")
    assert len(checks) >= 6
    harness = tmp_path / "harness.c"
    harness.write_text('#include <string.h>\n#include "roundtrip.c"\n\nint main(void)\n{\n'
                       + "\n".join(checks) + "\n    return 0;\n}\n")
    exe = tmp_path / "harness"
    r = subprocess.run([GCC, "-Wno-unknown-pragmas", "-o", str(exe), str(harness)],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert subprocess.run([str(exe)]).returncode == 0
