"""Labeled signature datasets: JSONL load/save and synthetic generation.

The real expert-labeled corpora are private, so this module generates
stand-ins with the same shape: a rule-matched stratum whose labels come
from if-then rule evaluation, and a manually-classified-like stratum
whose labels are recoverable only from vocabulary planted in the msg and
reference text.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from .enrich import ReferenceEnricher
from .rules import (
    LABELS,
    UNKNOWN,
    Condition,
    IfThenRule,
    RuleSet,
    evaluate,
)
from .sigparse import Option, RuleParseError, Signature, parse_rule, serialize

__all__ = [
    "CorpusError",
    "DatasetParseError",
    "DuplicateId",
    "InfeasibleMix",
    "LabeledItem",
    "LabeledDataset",
    "SynthSpec",
    "load_dataset",
    "save_dataset",
    "default_ruleset",
    "generate_synthetic",
    "write_fixtures",
]

PROVENANCES = ("rule_matched", "manual", "synthetic")


class CorpusError(ValueError):
    pass


class DatasetParseError(CorpusError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class DuplicateId(CorpusError):
    def __init__(self, item_id: str):
        super().__init__(f"duplicate item id {item_id!r}")
        self.item_id = item_id


class InfeasibleMix(CorpusError):
    """The requested class mix cannot be produced with the given ruleset."""


@dataclass(frozen=True)
class LabeledItem:
    id: str
    raw_rule: str
    label: str
    ref_text: str = ""
    provenance: str = "manual"


@dataclass
class LabeledDataset:
    items: list[LabeledItem] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.items)

    def signatures(self) -> list[Signature]:
        return [parse_rule(item.raw_rule) for item in self.items]

    def labels(self) -> list[str]:
        return [item.label for item in self.items]

    def pairs(self) -> list[tuple[Signature, str]]:
        """(Signature, ref_text) pairs as consumed by the featurizers."""
        return [(parse_rule(item.raw_rule), item.ref_text) for item in self.items]

    def class_counts(self) -> dict[str, int]:
        counts = {label: 0 for label in LABELS}
        for item in self.items:
            counts[item.label] += 1
        return counts


def load_dataset(path) -> LabeledDataset:
    items: list[LabeledItem] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetParseError(lineno, f"invalid JSON: {exc}") from exc
            try:
                item = LabeledItem(
                    id=record["id"],
                    raw_rule=record["rule"],
                    label=record["label"],
                    ref_text=record.get("ref_text", "") or "",
                    provenance=record.get("provenance", "manual"),
                )
            except KeyError as exc:
                raise DatasetParseError(lineno, f"missing field {exc}") from exc
            if item.label not in LABELS:
                raise DatasetParseError(lineno, f"unknown label {item.label!r}")
            if item.provenance not in PROVENANCES:
                raise DatasetParseError(lineno, f"unknown provenance {item.provenance!r}")
            if item.id in seen:
                raise DuplicateId(item.id)
            try:
                parse_rule(item.raw_rule)
            except RuleParseError as exc:
                raise DatasetParseError(lineno, f"unparseable rule: {exc}") from exc
            seen.add(item.id)
            items.append(item)
    return LabeledDataset(items)


def save_dataset(ds: LabeledDataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for item in ds.items:
            record = {
                "id": item.id,
                "rule": item.raw_rule,
                "label": item.label,
                "ref_text": item.ref_text,
                "provenance": item.provenance,
            }
            fh.write(json.dumps(record) + "\n")


# ---------------------------------------------------------------------------
# Synthetic generation


@dataclass
class SynthSpec:
    """Knobs for the synthetic corpus generator."""

    n: int
    class_mix: tuple[float, float, float]  # proportions for low, medium, high
    mad_fraction: float = 0.0
    vocab_seed: int = 0
    planted_per_class: int = 8
    planted_repeats: int = 5
    noise_vocab: int = 40
    msg_noise: tuple[int, int] = (1, 4)
    ref_noise: tuple[int, int] = (4, 10)
    header_mutation: float = 0.15
    max_attempts: int = 50


_PROTOCOLS = ("tcp", "udp", "icmp")
_ADDRS = ("$EXTERNAL_NET", "$HOME_NET", "any")
_PORTS = ("any", "80", "443", "79", "22", "8080")
_METADATA_POOL = (
    ("ruleset", "community"),
    ("policy", "balanced"),
    ("service", "http"),
    ("deployment", "perimeter"),
)
_REF_SYSTEMS = ("cve", "bugtraq", "url", "nessus")
# Reference systems used when the matched rule has no reference condition,
# kept disjoint from the systems rules key on.
_DECOY_REF_SYSTEMS = ("arachnids", "mcafee", "osvdb", "msb")


def default_ruleset(n_rules: int = 20, seed: int = 0) -> RuleSet:
    """A synthetic expert ruleset: each rule keys on a distinct classtype,
    most with an extra msg-keyword or reference-system condition."""
    rules = []
    for i in range(n_rules):
        conditions = [Condition("classtype", f"synth-class-{i:02d}")]
        if i % 3 == 0:
            conditions.append(Condition("msg", f"rulekw{i:02d}"))
        elif i % 3 == 1:
            conditions.append(Condition("ref", _REF_SYSTEMS[i % len(_REF_SYSTEMS)]))
        rules.append(IfThenRule(tuple(conditions), LABELS[i % 3]))
    return RuleSet(tuple(rules))


def _largest_remainder(n: int, proportions) -> list[int]:
    proportions = np.asarray(proportions, dtype=float)
    if proportions.sum() <= 0:
        raise InfeasibleMix("class mix proportions must sum to a positive value")
    raw = n * proportions / proportions.sum()
    counts = np.floor(raw).astype(int)
    remainder = n - counts.sum()
    order = np.argsort(-(raw - counts), kind="stable")
    for i in range(remainder):
        counts[order[i]] += 1
    return counts.tolist()


def _build_signature(
    rng,
    *,
    classtype: str,
    msg_words: list[str],
    reference: tuple[str, str] | None,
    five_tuple: dict[str, str],
    metadata: list[tuple[str, str]],
    sid: int,
) -> Signature:
    options = [Option.build("msg", " ".join(msg_words))]
    if metadata:
        options.append(
            Option.build("metadata", *[f"{k} {v}" for k, v in metadata])
        )
    if reference is not None:
        options.append(Option.build("reference", reference[0], reference[1]))
    options.append(Option.build("classtype", classtype))
    options.append(Option.build("sid", str(sid)))
    return Signature(
        action="alert",
        protocol=five_tuple["protocol"],
        src_addr=five_tuple["src_addr"],
        src_port=five_tuple["src_port"],
        direction="->",
        dst_addr=five_tuple["dst_addr"],
        dst_port=five_tuple["dst_port"],
        options=tuple(options),
    )


def _random_five_tuple(rng) -> dict[str, str]:
    return {
        "protocol": str(rng.choice(_PROTOCOLS)),
        "src_addr": str(rng.choice(_ADDRS)),
        "src_port": str(rng.choice(_PORTS)),
        "dst_addr": str(rng.choice(_ADDRS)),
        "dst_port": str(rng.choice(_PORTS)),
    }


def _sig_from_rule(
    rule: IfThenRule, rng, noise_words, sid: int, profile=None, mutation: float = 0.0
) -> Signature | None:
    if profile is None:
        five_tuple = _random_five_tuple(rng)
        metadata = [tuple(_METADATA_POOL[rng.integers(len(_METADATA_POOL))])]
    else:
        # Signatures from the same rule family share a header profile,
        # with occasional mutation of a single field.
        five_tuple = dict(profile[0])
        metadata = list(profile[1])
        if rng.random() < mutation:
            mutated = str(rng.choice(list(five_tuple)))
            pool = _PROTOCOLS if mutated == "protocol" else (
                _PORTS if mutated.endswith("port") else _ADDRS
            )
            five_tuple[mutated] = str(rng.choice(pool))
        if rng.random() < mutation:
            metadata = [tuple(_METADATA_POOL[rng.integers(len(_METADATA_POOL))])]
    classtype = None
    msg_words: list[str] = []
    reference = None
    for cond in rule.conditions:
        if cond.kind == "classtype":
            if classtype is not None and classtype != cond.operand:
                return None
            classtype = cond.operand
        elif cond.kind == "msg":
            msg_words.append(cond.operand)
        elif cond.kind == "ref":
            reference = (cond.operand, f"{rng.integers(1999, 2026)}-{rng.integers(1000, 9999)}")
        elif cond.kind == "meta":
            parts = cond.operand.split(None, 1)
            metadata = [(parts[0], parts[1] if len(parts) > 1 else "")]
        else:
            five_tuple[cond.kind] = cond.operand
    if classtype is None:
        classtype = "synth-unmatched"
    if reference is None:
        system = str(rng.choice(_DECOY_REF_SYSTEMS))
        reference = (system, f"{rng.integers(1999, 2026)}-{rng.integers(1000, 9999)}")
    extra = rng.integers(1, 4)
    msg_words = msg_words + [str(w) for w in rng.choice(noise_words, size=extra)]
    return _build_signature(
        rng,
        classtype=classtype,
        msg_words=msg_words,
        reference=reference,
        five_tuple=five_tuple,
        metadata=metadata,
        sid=sid,
    )


def generate_synthetic(rs: RuleSet, spec: SynthSpec) -> LabeledDataset:
    """Generate a labeled corpus with a rule-matched and an unmatched stratum.

    Rule-matched items are constructed to satisfy exactly one rule, so
    their labels equal rule evaluation.  Unmatched items miss every rule
    and carry labels recoverable only from tokens planted into msg and
    reference text (three disjoint pools, one per class).
    """
    if not rs.rules:
        raise InfeasibleMix("ruleset is empty")
    rng = np.random.default_rng(spec.vocab_seed)
    noise_words = np.array([f"noise{i:02d}" for i in range(spec.noise_vocab)])
    planted = {
        label: [f"planted_{label}_{i:02d}" for i in range(spec.planted_per_class)]
        for label in LABELS
    }
    mad_classtypes = [f"manual-class-{i}" for i in range(6)]

    n_mad = int(round(spec.n * spec.mad_fraction))
    n_aad = spec.n - n_mad
    aad_counts = _largest_remainder(n_aad, spec.class_mix) if n_aad else [0, 0, 0]
    mad_counts = _largest_remainder(n_mad, spec.class_mix) if n_mad else [0, 0, 0]

    rules_by_label: dict[str, list[tuple[IfThenRule, tuple]]] = {
        label: [] for label in LABELS
    }
    for rule in rs.rules:
        profile = (
            _random_five_tuple(rng),
            [tuple(_METADATA_POOL[rng.integers(len(_METADATA_POOL))])],
        )
        rules_by_label[rule.label].append((rule, profile))

    items: list[LabeledItem] = []
    sid = 100000

    for label, count in zip(LABELS, aad_counts):
        if count and not rules_by_label[label]:
            raise InfeasibleMix(f"no rule yields label {label!r}")
        for _ in range(count):
            sig = None
            for _ in range(spec.max_attempts):
                rule, profile = rules_by_label[label][
                    rng.integers(len(rules_by_label[label]))
                ]
                candidate = _sig_from_rule(
                    rule, rng, noise_words, sid, profile, spec.header_mutation
                )
                if candidate is not None and evaluate(rs, candidate) == label:
                    sig = candidate
                    break
            if sig is None:
                raise InfeasibleMix(
                    f"could not construct a signature with label {label!r}"
                )
            ref_noise = rng.integers(spec.ref_noise[0], spec.ref_noise[1] + 1)
            ref_text = " ".join(str(w) for w in rng.choice(noise_words, size=ref_noise))
            items.append(
                LabeledItem(
                    id=f"sig-{sid}",
                    raw_rule=serialize(sig),
                    label=label,
                    ref_text=ref_text,
                    provenance="rule_matched",
                )
            )
            sid += 1

    for label, count in zip(LABELS, mad_counts):
        pool = planted[label]
        for _ in range(count):
            sig = None
            msg_words: list[str] = []
            ref_words: list[str] = []
            for _ in range(spec.max_attempts):
                n_planted = 2 + int(rng.integers(0, 2))
                chosen = [pool[int(i)] for i in rng.integers(len(pool), size=n_planted)]
                into_msg = rng.random(n_planted) < 0.5
                msg_planted = [w for w, m in zip(chosen, into_msg) if m]
                ref_planted = [w for w, m in zip(chosen, into_msg) if not m]
                if not ref_planted:  # keep the reference text informative
                    ref_planted = [chosen[-1]]
                msg_noise = rng.integers(spec.msg_noise[0], spec.msg_noise[1] + 1)
                ref_noise = rng.integers(spec.ref_noise[0], spec.ref_noise[1] + 1)
                # Repeating the planted tokens gives them real term-frequency
                # mass next to the shared noise vocabulary.
                msg_words = msg_planted * spec.planted_repeats + [
                    str(w) for w in rng.choice(noise_words, size=msg_noise)
                ]
                ref_words = ref_planted * spec.planted_repeats + [
                    str(w) for w in rng.choice(noise_words, size=ref_noise)
                ]
                candidate = _build_signature(
                    rng,
                    classtype=mad_classtypes[int(rng.integers(len(mad_classtypes)))],
                    msg_words=msg_words,
                    reference=("cve", f"{rng.integers(1999, 2026)}-{rng.integers(1000, 9999)}"),
                    five_tuple=_random_five_tuple(rng),
                    metadata=[tuple(_METADATA_POOL[rng.integers(len(_METADATA_POOL))])],
                    sid=sid,
                )
                if evaluate(rs, candidate) == UNKNOWN:
                    sig = candidate
                    break
            if sig is None:
                raise InfeasibleMix("could not construct a rule-missing signature")
            items.append(
                LabeledItem(
                    id=f"sig-{sid}",
                    raw_rule=serialize(sig),
                    label=label,
                    ref_text=" ".join(ref_words),
                    provenance="synthetic",
                )
            )
            sid += 1

    order = rng.permutation(len(items))
    return LabeledDataset([items[i] for i in order])


def write_fixtures(ds: LabeledDataset, root) -> None:
    """Write each item's ref_text as enrichment fixture files, so the
    offline enricher reproduces the inline reference text."""
    from pathlib import Path

    root = Path(root)
    for item in ds.items:
        sig = parse_rule(item.raw_rule)
        for ref in sig.references:
            path = ReferenceEnricher.entry_path(root, ref)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(item.ref_text, "utf-8")
