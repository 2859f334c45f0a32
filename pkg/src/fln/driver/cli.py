"""Command-line driver: check a project, emit wrapper-typed C, report."""

from __future__ import annotations

import argparse
import shutil
import subprocess
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, TextIO

from ..errors import FlnError
from ..frontend.pragma import Projection
from ..codegen.program import default_out_dir, emit_program, reconstruct_program
from .bench import bench_generate
from .diagnostics import Diagnostic, render_diagnostic
from .pipeline import STAGES, Analysis, analyze

MODES = ("check", "emit", "both")
EXIT_OK, EXIT_ERRORS, EXIT_FAILURE = 0, 1, 2


class ConfigError(FlnError):
    code = "ConfigError"


@dataclass
class RunConfig:
    root: Path
    mode: str = "both"
    out: Optional[Path] = None
    fuel: int = 1_000_000  # step limit for evaluator-backed checks; the C pipeline never evaluates
    seed: int = 0
    fail_on_warning: bool = False
    verify_cc: Optional[str] = None
    profile: bool = False

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode '{self.mode}'")
        if self.mode == "check" and self.out is not None:
            raise ConfigError("--out has no effect in check mode")
        if not Path(self.root).is_file():
            raise ConfigError(f"root file '{self.root}' does not exist")
        if self.fuel <= 0:
            raise ConfigError("fuel must be positive")


def policy_kind(directive) -> str:
    """Counting convention of the summary: sequences, integrity-only labels, the rest."""
    if len(directive.sequence) > 1:
        return "seq"
    return "int" if directive.sequence[0][1] is Projection.INTEGRITY else "sec"


def policy_counts(a: Analysis) -> dict[str, int]:
    seen, counts = set(), {"sec": 0, "int": 0, "seq": 0}
    for decls in a.annotated.values():
        for ad in decls:
            for d in ad.bound:
                if id(d) not in seen:
                    seen.add(id(d))
                    counts[policy_kind(d)] += 1
    return counts


def summary_line(a: Analysis) -> str:
    c = policy_counts(a)
    n = sum(c.values())
    annotated = sum(len(v) for v in a.annotated.values())
    return (f"{_count(len(a.files), 'file')}, {_count(annotated, 'annotated declaration')}, "
            f"{_count(n, 'policy', 'policies')} ({c['sec']} sec, {c['int']} int, {c['seq']} seq)")


def _count(n: int, one: str, many: Optional[str] = None) -> str:
    return f"{n} {one if n == 1 else (many or one + 's')}"


def verify_with_compiler(cc: str, root_out: Path) -> tuple[bool, str]:
    """(accepted, compiler output) for the emitted root file."""
    exe = shutil.which(cc)
    if exe is None:
        raise ConfigError(f"compiler '{cc}' not found")
    r = subprocess.run([exe, "-fsyntax-only", "-Wno-unknown-pragmas",
                        "-Werror=incompatible-pointer-types", str(root_out)],
                       capture_output=True, text=True)
    return r.returncode == 0, r.stderr


def run(config: RunConfig, stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    stdout, stderr = stdout or sys.stdout, stderr or sys.stderr
    try:
        config.validate()
        a = analyze(config.root)
        diags = list(a.diagnostics)
        out_dir = None
        if config.mode in ("emit", "both"):
            emitted = emit_program(a)
            out_dir = Path(config.out) if config.out else default_out_dir(a.root)
            written = reconstruct_program(a, emitted, out_dir)
            if config.verify_cc:
                root_out = out_dir / a.names[a.files[-1]]
                accepted, text = verify_with_compiler(config.verify_cc, root_out)
                if accepted == bool(a.errors):
                    diags.append(Diagnostic(
                        "warning", "CompilerDisagreement", None,
                        f"'{config.verify_cc}' {'accepts' if accepted else 'rejects'} the emitted "
                        f"code but the internal check {'does not' if accepted else 'does'}"))
    except FlnError as exc:
        print(f"fln: error: {exc}", file=stderr)
        return EXIT_FAILURE
    except Exception as exc:  # a tool failure, reported with its cause chain
        print(f"fln: internal error: {type(exc).__name__}: {exc}", file=stderr)
        cause = exc.__cause__
        while cause is not None:
            print(f"  caused by {type(cause).__name__}: {cause}", file=stderr)
            cause = cause.__cause__
        return EXIT_FAILURE
    for d in diags:
        print(render_diagnostic(d, a.sources), file=stderr)
    errors = sum(d.severity == "error" for d in diags)
    warnings = len(diags) - errors
    print(summary_line(a), file=stdout)
    print(f"{_count(errors, 'error')}, {_count(warnings, 'warning')}", file=stdout)
    if out_dir is not None:
        print(f"wrote {len(written)} files under {out_dir}", file=stdout)
    if config.profile:
        for stage in STAGES:
            print(f"{stage}: {a.timings[stage]:.3f} s", file=stdout)
    if errors or (config.fail_on_warning and warnings):
        return EXIT_ERRORS
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fln", description="Check and emit policy-annotated C.")
    p.add_argument("root", nargs="?", help="root C file; included project files are followed")
    p.add_argument("--mode", choices=MODES, default="both")
    p.add_argument("--out", type=Path, help="output directory (default: _fln_out next to the root)")
    p.add_argument("--seed", type=int, default=0, help="seed for --bench")
    p.add_argument("--fuel", type=int, default=1_000_000)
    p.add_argument("--verify-cc", metavar="CC", help="compile the emitted root with CC and compare")
    p.add_argument("--profile", action="store_true", help="print per-stage timings")
    p.add_argument("--fail-on-warning", action="store_true")
    p.add_argument("--bench", nargs=2, type=int, metavar=("LOC", "ANN"),
                   help="run on a generated project of LOC lines and ANN annotations")
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    root = args.root
    if args.bench:
        loc, ann = args.bench
        work = Path(tempfile.mkdtemp(prefix="fln_bench_"))
        for name, text in bench_generate(loc, ann, args.seed).items():
            (work / name).write_text(text, encoding="utf-8")
            root = root or str(work / name)
    if root is None:
        print("fln: error: a root file or --bench is required", file=sys.stderr)
        return EXIT_FAILURE
    config = RunConfig(Path(root), args.mode, args.out, args.fuel, args.seed,
                       args.fail_on_warning, args.verify_cc, args.profile)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
