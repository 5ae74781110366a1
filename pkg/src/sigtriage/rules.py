"""Expert if-then rulesets mapping signatures to importance labels.

A ruleset is an ordered list of rules; each rule is a conjunction of
keyword conditions over the signature's 5-tuple, msg, metadata,
reference and classtype elements.  Evaluation returns the label of the
first matching rule, or ``unknown``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .sigparse import Signature
from .textprep import clean_text

__all__ = [
    "LABELS",
    "UNKNOWN",
    "FIVE_TUPLE_FIELDS",
    "Condition",
    "IfThenRule",
    "RuleSet",
    "RuleFileError",
    "evaluate",
    "msg_keyword_list",
    "reference_system_list",
    "load_ruleset",
    "loads_ruleset",
    "dumps_ruleset",
    "save_ruleset",
]

LABELS = ("low", "medium", "high")
UNKNOWN = "unknown"

FIVE_TUPLE_FIELDS = ("protocol", "src_addr", "src_port", "dst_addr", "dst_port")

# Condition kinds as written in rule files.
KIND_MSG = "msg"
KIND_REF = "ref"
KIND_META = "meta"
KIND_CLASSTYPE = "classtype"
CONDITION_KINDS = (KIND_MSG, KIND_REF, KIND_META, KIND_CLASSTYPE) + FIVE_TUPLE_FIELDS

RULE_FILE_HEADER = "#sigtriage-rules v1"


class RuleFileError(ValueError):
    """Malformed rule file content."""


@dataclass(frozen=True)
class Condition:
    kind: str
    operand: str

    def __post_init__(self):
        if self.kind not in CONDITION_KINDS:
            raise ValueError(f"unknown condition kind {self.kind!r}")
        if not self.operand:
            raise ValueError("condition operand must be non-empty")

    def holds(self, sig: Signature) -> bool:
        if self.kind == KIND_MSG:
            # Whole-word, position-insensitive match over the cleaned msg.
            return self.operand.lower() in set(clean_text(sig.msg))
        if self.kind == KIND_REF:
            # System name only; the ident is never consulted.
            return self.operand.lower() in {r.system for r in sig.references}
        if self.kind == KIND_META:
            want = " ".join(self.operand.split())
            return any(f"{p.key} {p.value}" == want for p in sig.metadata)
        if self.kind == KIND_CLASSTYPE:
            return sig.classtype == self.operand
        return getattr(sig, self.kind) == self.operand


@dataclass(frozen=True)
class IfThenRule:
    conditions: tuple[Condition, ...]
    label: str

    def __post_init__(self):
        if not self.conditions:
            raise ValueError("a rule needs at least one condition")
        if self.label not in LABELS:
            raise ValueError(f"rule label must be one of {LABELS}, got {self.label!r}")

    def matches(self, sig: Signature) -> bool:
        return all(cond.holds(sig) for cond in self.conditions)


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[IfThenRule, ...]

    def __len__(self) -> int:
        return len(self.rules)


def evaluate(rs: RuleSet, sig: Signature) -> str:
    """Label of the first matching rule; ``unknown`` if none matches."""
    for rule in rs.rules:
        if rule.matches(sig):
            return rule.label
    return UNKNOWN


def _operand_list(rs: RuleSet, kind: str) -> list[str]:
    seen: list[str] = []
    for rule in rs.rules:
        for cond in rule.conditions:
            if cond.kind == kind and cond.operand not in seen:
                seen.append(cond.operand)
    return seen


def msg_keyword_list(rs: RuleSet) -> list[str]:
    """Deduplicated msg keywords in order of first appearance."""
    return _operand_list(rs, KIND_MSG)


def reference_system_list(rs: RuleSet) -> list[str]:
    """Deduplicated reference system names in order of first appearance."""
    return _operand_list(rs, KIND_REF)


def loads_ruleset(text: str) -> RuleSet:
    """Parse the line-oriented rule file format.

    Format: header line ``#sigtriage-rules v1`` followed by one rule per
    line: ``label :: kind=operand ; kind=operand ; ...``.
    """
    lines = text.splitlines()
    if not lines or lines[0].strip() != RULE_FILE_HEADER:
        raise RuleFileError(f"missing header line {RULE_FILE_HEADER!r}")
    rules: list[IfThenRule] = []
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "::" not in line:
            raise RuleFileError(f"line {lineno}: missing '::' separator")
        label_part, cond_part = line.split("::", 1)
        label = label_part.strip()
        conditions = []
        for piece in cond_part.split(";"):
            piece = piece.strip()
            if not piece:
                continue
            if "=" not in piece:
                raise RuleFileError(f"line {lineno}: condition {piece!r} lacks '='")
            kind, operand = piece.split("=", 1)
            try:
                conditions.append(Condition(kind.strip(), operand.strip()))
            except ValueError as exc:
                raise RuleFileError(f"line {lineno}: {exc}") from exc
        try:
            rules.append(IfThenRule(tuple(conditions), label))
        except ValueError as exc:
            raise RuleFileError(f"line {lineno}: {exc}") from exc
    return RuleSet(tuple(rules))


def dumps_ruleset(rs: RuleSet) -> str:
    lines = [RULE_FILE_HEADER]
    for rule in rs.rules:
        conds = " ; ".join(f"{c.kind}={c.operand}" for c in rule.conditions)
        lines.append(f"{rule.label} :: {conds}")
    return "\n".join(lines) + "\n"


def load_ruleset(path) -> RuleSet:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_ruleset(fh.read())


def save_ruleset(rs: RuleSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_ruleset(rs))
