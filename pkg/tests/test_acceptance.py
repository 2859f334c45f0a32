"""Acceptance criteria 1 to 10, one PASS/FAIL line each.

Tolerances are pinned below.  The lines are printed in the pytest terminal
summary and when this file is run as a script.
"""

import io
import re
import time

from conftest import CASES_DIR, FIXTURES, expected_line
from goldens import CASES, GOLDEN_DIR, render_case
from fln.codegen.program import emit_program
from fln.driver.bench import bench_generate
from fln.driver.cli import EXIT_OK, RunConfig, run
from fln.driver.diagnostics import render_diagnostic
from fln.driver.pipeline import analyze, analyze_sources
from fln.frontend.lexer import token_texts
from fln.lattice import BOTTOM, BOTTOM_I, BOTTOM_LABEL, BOTTOM_S, Label, Policy, \
    RelabelCapability, in_high, integrity_atom, secrecy_atom
from fln.mapper.generate import soundness_trial
from fln.polc.checker import IllTyped
from fln.polc.generate import ATTACKER, generate_ni_program
from fln.polc.noninterference import high_predicate, noninterference_trial, paired_agreement
from fln.polc.semantics import FuelExhausted
from fln.errors import FlnError

END_TO_END_LIMIT = 1.0  # seconds, criteria 1 and 2
SOUNDNESS_SEEDS, SOUNDNESS_LIMIT = 1000, 60.0
NI_TRIALS, NI_LIMIT = 500, 60.0
PAIRED_TRIALS = 500
TRIAL_FUEL = 20_000
BENCH_LARGE, BENCH_LARGE_LIMIT = (4000, 128), 10.0
BENCH_SMALL, BENCH_SMALL_LIMIT = (500, 16), 2.0
IDENTITY_LINES = 200
MAX_FIXTURE_LINES = 60

RESULTS: list[str] = []


def report(n: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def violations(a):
    return [d for d in a.diagnostics if d.code in ("PolicyViolation", "TypeMismatch")]


def test_criterion_1_secrecy_end_to_end():
    path = FIXTURES / "secrecy.c"
    a, t = timed(lambda: analyze(path))
    again = analyze(path)
    fixed = analyze(FIXTURES / "secrecy_trusted.c")
    v = violations(a)
    same = [(d.loc, d.message) for d in a.diagnostics] == [(d.loc, d.message) for d in again.diagnostics]
    ok = (len(a.diagnostics) == 1 and len(v) == 1 and v[0].loc.line == expected_line(path)
          and not fixed.diagnostics and same and t < END_TO_END_LIMIT)
    report(1, ok, f"{len(v)} violation at line {v[0].loc.line if v else '-'}, "
                  f"{len(fixed.diagnostics)} after annotating the callee, {t:.3f} s (< {END_TO_END_LIMIT} s)")


def test_criterion_2_sequencing_end_to_end():
    good, t1 = timed(lambda: analyze(FIXTURES / "sequencing.c"))
    bad_path = FIXTURES / "sequencing_wrong_order.c"
    bad, t2 = timed(lambda: analyze(bad_path))
    ok = (not good.diagnostics and len(bad.diagnostics) == 1
          and bad.diagnostics[0].loc.line == expected_line(bad_path)
          and max(t1, t2) < END_TO_END_LIMIT)
    report(2, ok, f"right order {len(good.diagnostics)} diagnostics, wrong order "
                  f"{len(bad.diagnostics)}, {max(t1, t2):.3f} s (< {END_TO_END_LIMIT} s)")


def test_criterion_3_high_membership():
    alice = Label(secrecy_atom("AlicePrivate"), BOTTOM_I)
    enc = Label(BOTTOM_S, integrity_atom("EncodedBal"))
    f1 = [RelabelCapability(alice, enc, "encodeA")]
    f2 = f1 + [RelabelCapability(enc, BOTTOM_LABEL, "yao_execA")]
    got = (in_high(BOTTOM, [], Policy((alice, enc))),
           in_high(BOTTOM, f1, Policy((enc,))),
           in_high(BOTTOM, f2, Policy((enc,))))
    report(3, got == (True, True, False), f"(empty, F1, F2) -> {got}, expected (True, True, False)")


def test_criterion_4_golden_emission():
    matched = [c for c in CASES if render_case(c) == (GOLDEN_DIR / f"{c}.golden").read_text()]
    report(4, len(matched) == len(CASES) == 5, f"{len(matched)}/5 golden files match byte-for-byte")


def test_criterion_5_translation_soundness():
    def campaign():
        return [soundness_trial(seed) for seed in range(SOUNDNESS_SEEDS)]

    outcomes, t = timed(campaign)
    bad = [o for o in outcomes if o.verdict == "counterexample"]
    accepted = sum(o.verdict == "ok" for o in outcomes)
    ok = not bad and t < SOUNDNESS_LIMIT and accepted > 0
    report(5, ok, f"{SOUNDNESS_SEEDS} seeds, {accepted} accepted by the target checker, "
                  f"{len(bad)} counterexamples, {t:.1f} s (< {SOUNDNESS_LIMIT:.0f} s)")


def _ni_campaign():
    passed = failed = seed = differing = 0
    while passed + failed < NI_TRIALS:
        c, code, main, result = generate_ni_program(seed)
        seed += 1
        try:
            v = noninterference_trial(main, c, code, ATTACKER, [], seed, result, fuel=TRIAL_FUEL)
        except (FlnError, FuelExhausted):
            continue  # rejected by the checker or not terminating: not a trial
        passed += v.passed
        failed += not v.passed
        differing += v.differing_inputs
    return passed, failed, seed, differing


def test_criterion_6_noninterference():
    (passed, failed, seeds, differing), t = timed(_ni_campaign)
    ok = failed == 0 and passed >= NI_TRIALS and differing > 0 and t < NI_LIMIT
    report(6, ok, f"{passed}/{passed + failed} trials with equal low outputs, {differing} with "
                  f"differing high inputs ({seeds} seeds drawn), {t:.1f} s (< {NI_LIMIT:.0f} s)")


def test_criterion_7_paired_semantics():
    high = high_predicate(ATTACKER, [])
    agree = mismatch = seed = 0
    first = ""
    while agree + mismatch < PAIRED_TRIALS:
        c, code, main, _ = generate_ni_program(seed)
        seed += 1
        try:
            ok, why = paired_agreement(main, c, code, seed, high, fuel=TRIAL_FUEL)
        except FuelExhausted:
            continue  # only terminating programs count
        agree += ok
        mismatch += not ok
        first = first or why
    report(7, mismatch == 0, f"{agree}/{agree + mismatch} programs: paired run projects to both "
                             f"single runs{'' if not first else ' (' + first + ')'}")


CASE_MESSAGES = {
    "oblivious_bit.c": "passing argument 1 of '__obliv_c__flipBit' from incompatible pointer type",
    "gate_pool.c": "incompatible type for argument 4 of 'Gate_Copy'",
    "pointer_check.c": "passing argument 2 of 'copy_do_1' from incompatible pointer type",
    "length_check.c": "incompatible types when assigning to type `__fln__check_lenI_int` "
                      "from type `uint8_t`",
}


def _without_aka(text: str) -> str:
    return re.sub(r" \{aka [^}]*\}", "", text)


def test_criterion_8_case_studies():
    good = 0
    details = []
    for name, message in CASE_MESSAGES.items():
        path = CASES_DIR / name
        a = analyze(path)
        lines = len(path.read_text().splitlines())
        ds = a.diagnostics
        hit = (len(ds) == 1 and ds[0].loc.line == expected_line(path)
               and _without_aka(ds[0].message) == message and lines <= MAX_FIXTURE_LINES)
        rendered = render_diagnostic(ds[0], a.sources) if ds else ""
        hit = hit and f"{name}:{expected_line(path)}:" in rendered
        good += hit
        details.append(f"{name}={'ok' if hit else 'wrong'}")
    report(8, good == 4, f"{good}/4 fixtures with one diagnostic at the expected line and the "
                         f"expected message ({', '.join(details)})")


def _bench(loc, ann):
    files = bench_generate(loc, ann, seed=0)
    a, t = timed(lambda: analyze_sources(files))
    return a, t


def test_criterion_9_performance():
    large, t_large = _bench(*BENCH_LARGE)
    small, t_small = _bench(*BENCH_SMALL)
    ok = (not large.errors and not small.errors
          and t_large < BENCH_LARGE_LIMIT and t_small < BENCH_SMALL_LIMIT)
    report(9, ok, f"bench{BENCH_LARGE} {t_large:.2f} s (< {BENCH_LARGE_LIMIT:.0f} s), "
                  f"bench{BENCH_SMALL} {t_small:.2f} s (< {BENCH_SMALL_LIMIT:.0f} s)")


def test_criterion_10_identity(tmp_path):
    files = bench_generate(IDENTITY_LINES, 0, seed=5)
    src = files["bench.c"]
    root = tmp_path / "plain.c"
    root.write_text(src)
    a = analyze(root)
    em = emit_program(a)
    out, err = io.StringIO(), io.StringIO()
    code = run(RunConfig(root, out=tmp_path / "out"), out, err)
    emitted = (tmp_path / "out" / "plain.c").read_text()
    header = (tmp_path / "out" / "plain__fln.h").read_text()
    ok = (len(src.splitlines()) >= IDENTITY_LINES and token_texts(emitted) == token_texts(src)
          and emitted == em.text("plain.c") and "typedef" not in header
          and "static" not in header and code == EXIT_OK)
    report(10, ok, f"{len(src.splitlines())}-line unannotated file: tokens "
                   f"{'equal' if token_texts(emitted) == token_texts(src) else 'differ'}, "
                   f"bytes {'equal' if emitted == src else 'differ'}, "
                   f"header {'guard-only' if 'typedef' not in header else 'not empty'}, exit {code}")


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                if "tmp_path" in fn.__code__.co_varnames[:fn.__code__.co_argcount]:
                    fn(Path(tempfile.mkdtemp()))
                else:
                    fn()
            except AssertionError:
                pass
