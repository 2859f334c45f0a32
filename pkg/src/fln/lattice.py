"""Security labels, policies and the operations over them.

A label pairs a secrecy tag with an integrity tag.  Each component is a
flat lattice: a bottom, a top and pairwise incomparable programmer atoms in
between.  The flow order on integrity runs from the most trusted tag (TopI)
up to the least trusted (BottomI), so that (BottomS, TopI) is the least
label and (TopS, BottomI) the greatest.

A policy is a finite sequence of labels closed by a terminal.  For ordering
and joining, a terminal Bottom behaves as the bottom label repeated forever
and a terminal Top as the top label repeated forever.  The unlabeled
terminal marks types the programmer did not annotate; it is not part of the
lattice.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Optional, Sequence

from .errors import FlnError


class UnlabeledComparison(FlnError):
    code = "UnlabeledComparison"


class IncomparableAtoms(FlnError):
    code = "IncomparableAtoms"


class NoLabel(FlnError):
    code = "NoLabel"


class TagKind(Enum):
    BOTTOM = "bottom"
    TOP = "top"
    ATOM = "atom"


def _check_atom(kind: TagKind, name: Optional[str]) -> None:
    if kind is TagKind.ATOM:
        if not name or not (name[0].isalpha() or name[0] == "_") or not all(
            ch.isalnum() or ch == "_" for ch in name
        ):
            raise ValueError(f"invalid atom name {name!r}")
    elif name is not None:
        raise ValueError("only atoms carry a name")


@dataclass(frozen=True)
class SecrecyTag:
    kind: TagKind
    name: Optional[str] = None

    def __post_init__(self) -> None:
        _check_atom(self.kind, self.name)

    def __str__(self) -> str:
        if self.kind is TagKind.ATOM:
            return self.name  # type: ignore[return-value]
        return "⊥S" if self.kind is TagKind.BOTTOM else "⊤S"


@dataclass(frozen=True)
class IntegrityTag:
    kind: TagKind
    name: Optional[str] = None

    def __post_init__(self) -> None:
        _check_atom(self.kind, self.name)

    def __str__(self) -> str:
        if self.kind is TagKind.ATOM:
            return self.name  # type: ignore[return-value]
        return "⊥I" if self.kind is TagKind.BOTTOM else "⊤I"


BOTTOM_S = SecrecyTag(TagKind.BOTTOM)
TOP_S = SecrecyTag(TagKind.TOP)
BOTTOM_I = IntegrityTag(TagKind.BOTTOM)
TOP_I = IntegrityTag(TagKind.TOP)


def secrecy_atom(name: str) -> SecrecyTag:
    return SecrecyTag(TagKind.ATOM, name)


def integrity_atom(name: str) -> IntegrityTag:
    return IntegrityTag(TagKind.ATOM, name)


def secrecy_leq(a: SecrecyTag, b: SecrecyTag) -> bool:
    return a.kind is TagKind.BOTTOM or b.kind is TagKind.TOP or a == b


def integrity_leq(a: IntegrityTag, b: IntegrityTag) -> bool:
    # Trusted data may flow to less trusted places: TopI is the least tag.
    return a.kind is TagKind.TOP or b.kind is TagKind.BOTTOM or a == b


@dataclass(frozen=True)
class Label:
    secrecy: SecrecyTag
    integrity: IntegrityTag

    def __str__(self) -> str:
        return f"({self.secrecy},{self.integrity})"


BOTTOM_LABEL = Label(BOTTOM_S, TOP_I)
TOP_LABEL = Label(TOP_S, BOTTOM_I)


def label_leq(a: Label, b: Label) -> bool:
    return secrecy_leq(a.secrecy, b.secrecy) and integrity_leq(a.integrity, b.integrity)


def label_join(a: Label, b: Label, strict: bool = False) -> Label:
    if secrecy_leq(a.secrecy, b.secrecy):
        sec = b.secrecy
    elif secrecy_leq(b.secrecy, a.secrecy):
        sec = a.secrecy
    else:
        if strict:
            raise IncomparableAtoms(f"cannot join secrecy atoms {a.secrecy} and {b.secrecy}")
        sec = TOP_S
    if integrity_leq(a.integrity, b.integrity):
        integ = b.integrity
    elif integrity_leq(b.integrity, a.integrity):
        integ = a.integrity
    else:
        if strict:
            raise IncomparableAtoms(
                f"cannot join integrity atoms {a.integrity} and {b.integrity}"
            )
        integ = BOTTOM_I
    return Label(sec, integ)


class Terminal(Enum):
    BOTTOM = "bottom"
    TOP = "top"
    UNLABELED = "unlabeled"


@dataclass(frozen=True)
class Policy:
    labels: tuple[Label, ...] = ()
    terminal: Terminal = Terminal.BOTTOM

    def __post_init__(self) -> None:
        if not isinstance(self.labels, tuple):
            object.__setattr__(self, "labels", tuple(self.labels))
        if self.terminal is Terminal.UNLABELED and self.labels:
            raise ValueError("the unlabeled marker never carries labels")

    @staticmethod
    def of(*labels: Label, terminal: Terminal = Terminal.BOTTOM) -> "Policy":
        return Policy(tuple(labels), terminal)

    @property
    def is_unlabeled(self) -> bool:
        return self.terminal is Terminal.UNLABELED

    @property
    def is_bottom(self) -> bool:
        return not self.labels and self.terminal is Terminal.BOTTOM

    @property
    def is_top(self) -> bool:
        return not self.labels and self.terminal is Terminal.TOP

    @property
    def is_meaningful(self) -> bool:
        """False for the unlabeled marker and the bare bottom policy."""
        return not (self.is_unlabeled or self.is_bottom)

    def terminal_label(self) -> Label:
        if self.terminal is Terminal.UNLABELED:
            raise UnlabeledComparison("the unlabeled marker has no label")
        return BOTTOM_LABEL if self.terminal is Terminal.BOTTOM else TOP_LABEL

    def at(self, index: int) -> Label:
        """Label at `index` of the infinite expansion."""
        if index < len(self.labels):
            return self.labels[index]
        return self.terminal_label()

    def suffix(self, start: int) -> "Policy":
        return Policy(self.labels[start:], self.terminal)

    def cons(self, label: Label) -> "Policy":
        return Policy((label,) + self.labels, self.terminal)

    def head(self) -> Label:
        return self.at(0)

    def tail(self) -> "Policy":
        return self.suffix(1) if self.labels else self

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self) -> Iterator[Label]:
        return iter(self.labels)

    def __str__(self) -> str:
        end = {Terminal.BOTTOM: "⊥", Terminal.TOP: "⊤", Terminal.UNLABELED: "U"}[self.terminal]
        return "::".join([str(lab) for lab in self.labels] + [end])


BOTTOM = Policy((), Terminal.BOTTOM)
TOP = Policy((), Terminal.TOP)
UNLABELED = Policy((), Terminal.UNLABELED)


def _require_labeled(*policies: Policy) -> None:
    for p in policies:
        if p.is_unlabeled:
            raise UnlabeledComparison("the unlabeled marker cannot be ordered or joined")


def policy_leq(p: Policy, q: Policy) -> bool:
    _require_labeled(p, q)
    for i in range(max(len(p), len(q))):
        if not label_leq(p.at(i), q.at(i)):
            return False
    return label_leq(p.terminal_label(), q.terminal_label())


def policy_join(p: Policy, q: Policy, strict: bool = False) -> Policy:
    _require_labeled(p, q)
    prefix: list[Label] = []
    while True:
        if p.is_top or q.is_top:
            return Policy(tuple(prefix), Terminal.TOP) if prefix else TOP
        if p.is_bottom:
            return Policy(tuple(prefix) + q.labels, q.terminal)
        if q.is_bottom:
            return Policy(tuple(prefix) + p.labels, p.terminal)
        prefix.append(label_join(p.labels[0], q.labels[0], strict))
        p, q = p.suffix(1), q.suffix(1)


def policy_join_all(policies: Iterable[Policy]) -> Policy:
    out = BOTTOM
    for p in policies:
        out = policy_join(out, p)
    return out


def flow_leq(p: Policy, q: Policy) -> bool:
    """Ordering used by the checker, extended to the unlabeled marker.

    The marker is related only to itself, to the bottom policy below it and
    to the top policy above it; every other comparison with it is false.
    """
    if p.is_unlabeled or q.is_unlabeled:
        return p == q or p.is_bottom or q.is_top
    return policy_leq(p, q)


def flow_join(p: Policy, q: Policy) -> Policy:
    """Join used by the checker; the marker joins only with itself, Bottom and Top."""
    if p.is_unlabeled or q.is_unlabeled:
        if p.is_top or q.is_top:
            return TOP
        if p == q or q.is_bottom:
            return p
        if p.is_bottom:
            return q
        raise UnlabeledComparison(f"cannot join {p} with {q}")
    return policy_join(p, q)


def lab_of(s) -> Policy:
    """Outermost policy of a security type."""
    if getattr(s, "is_unit", False):
        raise NoLabel("unit carries no label")
    return s.outer_policy()


def guards(p: Policy, s) -> bool:
    if getattr(s, "is_unit", False):
        return True
    return flow_leq(p, lab_of(s))


@dataclass(frozen=True)
class RelabelCapability:
    from_label: Label
    to_label: Label
    function: Optional[str] = None  # None stands for an explicit relabel

    def __str__(self) -> str:
        who = self.function or "reLab"
        return f"{who}: {self.from_label} -> {self.to_label}"


def _reachable(caps: Sequence[RelabelCapability], p: Policy) -> Iterator[Policy]:
    """Least policies reachable from `p`; every reachable policy is above one of them.

    A state (head, k) stands for head::p[k:].  Weakening only ever needs to
    raise the two leading labels to the capability's endpoints, so the
    search space is finite.
    """
    _require_labeled(p)
    n = len(p)
    start = (p.at(0), min(1, n))
    seen = {start}
    queue = deque([start])
    while queue:
        head, k = queue.popleft()
        yield Policy((head,) + p.labels[k:], p.terminal)
        second = p.at(k)
        for cap in caps:
            if label_leq(head, cap.from_label) and label_leq(second, cap.to_label):
                nxt = (cap.to_label, min(k + 1, n))
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)


def rewrites_to(caps: Iterable[RelabelCapability], p: Policy, q: Policy) -> bool:
    _require_labeled(p, q)
    caps = list(caps)
    if policy_leq(p, q):
        return True
    return any(policy_leq(state, q) for state in _reachable(caps, p))


def in_high(attacker: Policy, caps: Iterable[RelabelCapability], p: Policy) -> bool:
    _require_labeled(attacker, p)
    if not (attacker.is_bottom or attacker.terminal is Terminal.TOP):
        raise ValueError("attacker policy must be Bottom or end in Top")
    caps = list(caps)
    if policy_leq(p, attacker):
        return False
    return not any(policy_leq(state, attacker) for state in _reachable(caps, p))
