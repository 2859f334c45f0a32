"""Project include graph, discovered from `#include "..."` lines."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import FlnError, SourceLoc

_INCLUDE = re.compile(r'^\s*#\s*include\s*(?:"(?P<local>[^"]+)"|<(?P<system>[^>]+)>)', re.M)


class MissingInclude(FlnError):
    code = "MissingInclude"


class IncludeCycle(FlnError):
    code = "IncludeCycle"


@dataclass
class DependencyGraph:
    root: Path
    nodes: list[Path] = field(default_factory=list)
    edges: list[tuple[Path, Path]] = field(default_factory=list)
    system: dict[Path, list[str]] = field(default_factory=dict)

    def children(self, node: Path) -> list[Path]:
        return [b for a, b in self.edges if a == node]

    def topological(self) -> list[Path]:
        """Dependencies before dependents; ties broken by discovery order."""
        order: list[Path] = []
        done: set[Path] = set()

        def visit(n: Path) -> None:
            if n in done:
                return
            done.add(n)
            for c in self.children(n):
                visit(c)
            order.append(n)

        visit(self.root)
        return order


def scan_includes(text: str) -> list[tuple[str, bool, int]]:
    """(path, is_local, line) for every include line in `text`."""
    out = []
    for m in _INCLUDE.finditer(text):
        line = text.count("\n", 0, m.start()) + 1
        if m.group("local") is not None:
            out.append((m.group("local"), True, line))
        else:
            out.append((m.group("system"), False, line))
    return out


def resolve_includes(root: str | Path) -> DependencyGraph:
    root = Path(root).resolve()
    if not root.is_file():
        raise MissingInclude(f"root file {root} does not exist")
    graph = DependencyGraph(root)
    state: dict[Path, str] = {}
    stack: list[Path] = []

    def visit(path: Path) -> None:
        state[path] = "active"
        stack.append(path)
        graph.nodes.append(path)
        text = path.read_text(encoding="utf-8")
        locals_: list[tuple[Path, int]] = []
        for name, is_local, line in scan_includes(text):
            if not is_local:
                graph.system.setdefault(path, []).append(name)
                continue
            target = (path.parent / name).resolve()
            if not target.is_file():
                raise MissingInclude(f'included file "{name}" not found', SourceLoc(str(path), line, 1))
            locals_.append((target, line))
        for target, line in sorted(set(locals_), key=lambda p: str(p[0])):
            if (path, target) not in graph.edges:
                graph.edges.append((path, target))
            if state.get(target) == "active":
                cycle = stack[stack.index(target):] + [target]
                raise IncludeCycle("include cycle: " + " -> ".join(p.name for p in cycle),
                                   SourceLoc(str(path), line, 1))
            if target not in state:
                visit(target)
        stack.pop()
        state[path] = "done"

    visit(root)
    return graph
