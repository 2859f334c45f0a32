import io
import subprocess
import sys

import pytest

from conftest import FIXTURES
from fln.driver.bench import bench_generate
from fln.driver.cli import EXIT_ERRORS, EXIT_FAILURE, EXIT_OK, ConfigError, RunConfig, main, run
from fln.driver.diagnostics import Diagnostic, render_diagnostic
from fln.driver.pipeline import analyze, analyze_sources
from fln.errors import SourceLoc
from fln.frontend.lexer import token_texts


def go(root, **kw):
    out, err = io.StringIO(), io.StringIO()
    code = run(RunConfig(root, **kw), out, err)
    return code, out.getvalue(), err.getvalue()


def test_clean_fixture_summary(tmp_path):
    (tmp_path / "a.c").write_text(
        "#pragma requires A:secrecy\nint a;\n#pragma requires B:integrity\nint b;\n")
    code, out, _ = go(tmp_path / "a.c", mode="check")
    assert code == EXIT_OK
    assert out.splitlines()[0] == \
        "1 file, 2 annotated declarations, 2 policies (1 sec, 1 int, 0 seq)"
    assert out.splitlines()[1] == "0 errors, 0 warnings"


def test_sequencing_counts_as_seq():
    code, out, _ = go(FIXTURES / "sequencing.c", mode="check")
    assert code == EXIT_OK
    assert "5 policies (1 sec, 2 int, 2 seq)" in out


def test_secrecy_violation_exit_and_message():
    code, out, err = go(FIXTURES / "secrecy.c", mode="check")
    assert code == EXIT_ERRORS
    assert "1 error, 0 warnings" in out
    assert "secrecy.c:12:" in err and "__fln__AlicePrivS_int" in err and "`int`" in err


def test_missing_root_is_a_tool_failure(tmp_path):
    code, _, err = go(tmp_path / "nope.c")
    assert code == EXIT_FAILURE and "does not exist" in err


def test_check_mode_rejects_output_dir(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig(FIXTURES / "secrecy.c", mode="check", out=tmp_path).validate()


def test_warnings_only_fail_on_request(tmp_path):
    (tmp_path / "w.c").write_text("int f(void)\n{\n    return g();\n}\n")
    code, out, err = go(tmp_path / "w.c", mode="check")
    assert code == EXIT_OK and "1 warning" in out and "warning:" in err
    code, _, _ = go(tmp_path / "w.c", mode="check", fail_on_warning=True)
    assert code == EXIT_ERRORS


def test_emit_mode_writes_next_to_root(tmp_path):
    src = (FIXTURES / "sequencing.c").read_text()
    (tmp_path / "s.c").write_text(src)
    code, out, _ = go(tmp_path / "s.c", mode="emit")
    assert code == EXIT_OK
    assert (tmp_path / "_fln_out" / "s.c").is_file()
    assert (tmp_path / "_fln_out" / "s__fln.h").is_file()
    assert "wrote 2 files under" in out


def test_unwritable_output_is_a_tool_failure(tmp_path):
    (tmp_path / "a.c").write_text("int x;\n")
    (tmp_path / "blocker").write_text("")
    code, _, err = go(tmp_path / "a.c", out=tmp_path / "blocker" / "sub")
    assert code == EXIT_FAILURE and "WriteFailure" not in err and "cannot write" in err


def test_profile_prints_stage_timings():
    _, out, _ = go(FIXTURES / "sequencing.c", mode="check", profile=True)
    for stage in ("Parse Files", "Generate Header", "Build AST", "Transform"):
        assert f"{stage}: " in out


def test_render_template():
    d = Diagnostic("error", "PolicyViolation", SourceLoc("f.c", 2, 5), "bad thing", notes=["why"])
    text = render_diagnostic(d, {"f.c": "int a;\nint bad;\n"})
    assert text.splitlines() == [
        "f.c:2:5: error: bad thing",
        "  int bad;",
        "      ^",
        "f.c:2:5: note: why",
    ]


def test_diagnostics_are_deterministic():
    runs = [[(d.code, d.loc, d.message) for d in analyze(FIXTURES / "cases" / "gate_pool.c").diagnostics]
            for _ in range(3)]
    assert runs[0] == runs[1] == runs[2]


def test_bench_identity_when_unannotated():
    files = bench_generate(10, 0, seed=3)
    a = analyze_sources(files)
    from fln.codegen.program import emit_program
    em = emit_program(a)
    (name, text), = files.items()
    assert token_texts(em.text(name)) == token_texts(text)


def test_bench_counts_directives():
    files = bench_generate(500, 16, seed=1)
    text = files["bench.c"]
    assert text.count("#pragma ") == 16
    assert len(text.splitlines()) >= 500
    a = analyze_sources(files)
    assert not a.diagnostics
    assert bench_generate(500, 16, seed=1) == files


def test_main_entry_point_bench(capsys):
    assert main(["--bench", "60", "4", "--mode", "check"]) == EXIT_OK
    assert "4 policies" in capsys.readouterr().out


def test_console_script_runs():
    r = subprocess.run([sys.executable, "-m", "fln.driver.cli", str(FIXTURES / "secrecy.c"),
                        "--mode", "check"], capture_output=True, text=True)
    assert r.returncode == EXIT_ERRORS
    assert "error:" in r.stderr
