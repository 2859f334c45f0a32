"""Synthetic annotated C projects for timing the pipeline.

Programs are assembled from a few templates, most of them sequencing
chains (a two-label global, the function that relabels it and a consumer of
the second label), with single-label primitives, pointers and records mixed
in.  Unannotated filler functions bring the file up to the requested size.
Every generated program checks clean.
"""

from __future__ import annotations

import random

BENCH_FILE = "bench.c"


def _sequencing(k: int) -> list[str]:
    return [
        f"#pragma requires s{k}:secrecy then e{k}:integrity",
        f"int g{k};",
        f"#pragma param s{k}:secrecy",
        f"#pragma return e{k}:integrity",
        f"int enc{k}(int v);",
        f"#pragma param e{k}:integrity",
        f"int use{k}(int v);",
        f"int run{k}(void)",
        "{",
        f"    int r = use{k}(enc{k}(g{k}));",
        "    return r;",
        "}",
        "",
    ]


def _pointer(k: int) -> list[str]:
    return [
        f"#pragma requires p{k}:integrity",
        f"int *ptr{k};",
        f"#pragma param p{k}:integrity",
        f"void sink{k}(int *p);",
        f"void ptr_run{k}(void)",
        "{",
        f"    sink{k}(ptr{k});",
        "}",
        "",
    ]


def _record(k: int) -> list[str]:
    return [
        f"struct rec{k} {{",
        "    int a;",
        "    int b;",
        "};",
        f"#pragma requires r{k}:secrecy",
        f"struct rec{k} rv{k};",
        f"#pragma param r{k}:secrecy",
        f"void rsink{k}(struct rec{k} v);",
        f"void rec_run{k}(void)",
        "{",
        f"    rsink{k}(rv{k});",
        "}",
        "",
    ]


def _primitive(k: int) -> list[str]:
    return [
        f"#pragma requires q{k}:secrecy",
        f"int qv{k};",
        f"#pragma return q{k}:secrecy",
        f"int qsrc{k}(void);",
        f"void prim_run{k}(void)",
        "{",
        f"    qv{k} = qsrc{k}();",
        "}",
        "",
    ]


def _single(k: int) -> list[str]:
    return [f"#pragma requires z{k}:integrity", f"int zv{k};", ""]


def _filler(k: int, rng: random.Random, prev: int) -> list[str]:
    call = f"    acc = acc + fill{prev}(i);" if prev >= 0 and rng.random() < 0.5 else \
        f"    acc = acc + i * {rng.randint(2, 9)};"
    return [
        f"int fill{k}(int n)",
        "{",
        "    int acc = 0;",
        "    int i;",
        "    for (i = 0; i < n; i++) {",
        call,
        f"        if (acc > {rng.randint(100, 5000)}) {{",
        f"            acc = acc - {rng.randint(50, 99)};",
        "        }",
        "    }",
        "    return acc;",
        "}",
        "",
    ]


def bench_generate(loc: int, annotations: int, seed: int = 0) -> dict[str, str]:
    """A one-file project of about `loc` lines carrying exactly `annotations` directives."""
    if loc < annotations:
        raise ValueError("a benchmark needs at least one line per annotation")
    rng = random.Random(seed)
    blocks: list[list[str]] = []
    left, k = annotations, 0
    while left > 0:
        k += 1
        if left >= 4 and rng.random() < 0.7:
            blocks.append(_sequencing(k))
            left -= 4
        elif left >= 2:
            blocks.append(rng.choice([_pointer, _record, _primitive])(k))
            left -= 2
        else:
            blocks.append(_single(k))
            left -= 1
    rng.shuffle(blocks)
    lines = [f"/* synthetic benchmark: {loc} lines, {annotations} annotations, seed {seed} */", ""]
    for b in blocks:
        lines.extend(b)
    j = 0
    while len(lines) < loc:
        lines.extend(_filler(j, rng, j - 1))
        j += 1
    return {BENCH_FILE: "\n".join(lines) + "\n"}
