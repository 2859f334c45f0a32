"""Whole-program emission: rewrite every file and write the results out."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..errors import FlnError
from .header import HeaderPlan, Namer, generate_header
from .rewrite import FileEmitter, literal_tags

OUT_DIR = "_fln_out"


class WriteFailure(FlnError):
    code = "WriteFailure"


@dataclass
class RewrittenFile:
    path: str  # display name of the original
    text: str
    includes: list[str] = field(default_factory=list)  # injected include lines
    diagnostics: list = field(default_factory=list)


@dataclass
class Emitted:
    files: dict[str, RewrittenFile] = field(default_factory=dict)
    headers: dict[str, tuple[str, str]] = field(default_factory=dict)  # display name -> (name, text)
    plans: dict[str, HeaderPlan] = field(default_factory=dict)

    def text(self, name: str) -> str:
        return self.files[name].text


def emit_program(analysis) -> Emitted:
    """Rewritten text and generated header for every project file."""
    out = Emitted()
    if analysis.lowered is None or analysis.tt is None:
        return out
    namer = Namer(analysis.tt, analysis.lowered)
    lits = literal_tags(analysis)
    for path in analysis.files:
        name = analysis.names[path]
        fe = FileEmitter(analysis, name, namer, lits)
        text, plan = fe.run()
        out.files[name] = RewrittenFile(name, text, fe.includes)
        out.plans[name] = plan
        out.headers[name] = generate_header(plan, name)
    return out


def default_out_dir(root: Path) -> Path:
    return Path(root).resolve().parent / OUT_DIR


def reconstruct_program(analysis, emitted: Emitted, out_dir: Optional[Path] = None) -> list[Path]:
    """Write rewritten files and headers under `out_dir`; originals stay untouched."""
    out_dir = Path(out_dir) if out_dir is not None else default_out_dir(analysis.root)
    originals = {Path(p).resolve() for p in analysis.files}
    written: list[Path] = []
    try:
        for name, rf in emitted.files.items():
            target = (out_dir / name).resolve()
            hname, htext = emitted.headers[name]
            header = target.parent / hname
            for p in (target, header):
                if p in originals:
                    raise WriteFailure(f"refusing to overwrite input file '{p}'")
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(rf.text, encoding="utf-8")
            header.write_text(htext, encoding="utf-8")
            written += [target, header]
    except OSError as exc:
        raise WriteFailure(f"cannot write output under '{out_dir}': {exc.strerror or exc}") from exc
    return written


def relative(paths: list[Path], base: Path) -> list[str]:
    return [os.path.relpath(p, base) for p in paths]
