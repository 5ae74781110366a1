"""Parsing and lossless serialization of Snort-format signatures.

The parser extracts the rule header (action plus the 5-tuple) and the
ordered option list.  Only ``msg``, ``metadata``, ``reference`` and
``classtype`` get typed views; every other option is preserved opaquely.
It does not attempt semantic validation of content matchers, PCRE, etc.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = [
    "RuleParseError",
    "MalformedHeader",
    "UnbalancedParens",
    "UnterminatedString",
    "MetadataPair",
    "Reference",
    "Option",
    "Signature",
    "parse_rule",
    "parse_rules",
    "serialize",
]

DIRECTIONS = ("->", "<>")

# Option keys whose single value is conventionally quoted when we build
# option text programmatically.
_QUOTED_KEYS = frozenset({"msg", "pcre", "content"})


class RuleParseError(ValueError):
    """Base class for structured signature parse failures."""


class MalformedHeader(RuleParseError):
    """The rule header does not consist of seven tokens before '('."""


class UnbalancedParens(RuleParseError):
    """The parenthesized option body is missing or unbalanced."""


class UnterminatedString(RuleParseError):
    """A quoted option value is never closed."""


@dataclass(frozen=True)
class MetadataPair:
    key: str
    value: str


@dataclass(frozen=True)
class Reference:
    system: str
    ident: str


@dataclass(frozen=True)
class Option:
    """One option: key, parsed values and the raw source text.

    ``raw`` is the option text without the trailing semicolon and is what
    :func:`serialize` emits, so a parse/serialize cycle is lossless.
    """

    key: str
    values: tuple[str, ...]
    raw: str

    @staticmethod
    def build(key: str, *values: str) -> "Option":
        """Construct an option with canonical raw text."""
        if not values:
            return Option(key=key, values=(), raw=key)
        if key in _QUOTED_KEYS and len(values) == 1:
            quoted = values[0].replace("\\", "\\\\").replace('"', '\\"')
            raw = f'{key}:"{quoted}"'
        else:
            raw = f"{key}:{','.join(values)}"
        return Option(key=key, values=tuple(values), raw=raw)


@dataclass(frozen=True)
class Signature:
    """A parsed Snort rule.

    ``raw_text`` is excluded from equality so that a reparse of
    serialized output compares equal to the original field-by-field.
    """

    action: str
    protocol: str
    src_addr: str
    src_port: str
    direction: str
    dst_addr: str
    dst_port: str
    options: tuple[Option, ...]
    raw_text: str = field(compare=False, default="")

    @property
    def msg(self) -> str:
        for opt in self.options:
            if opt.key == "msg" and opt.values:
                return opt.values[0]
        return ""

    @property
    def metadata(self) -> tuple[MetadataPair, ...]:
        pairs: list[MetadataPair] = []
        for opt in self.options:
            if opt.key != "metadata":
                continue
            for value in opt.values:
                parts = value.split(None, 1)
                if not parts:
                    continue
                pairs.append(MetadataPair(parts[0], parts[1] if len(parts) > 1 else ""))
        return tuple(pairs)

    @property
    def references(self) -> tuple[Reference, ...]:
        refs: list[Reference] = []
        for opt in self.options:
            if opt.key != "reference" or not opt.values:
                continue
            refs.append(Reference(opt.values[0].lower(), ",".join(opt.values[1:])))
        return tuple(refs)

    @property
    def classtype(self) -> str | None:
        for opt in self.options:
            if opt.key == "classtype" and opt.values:
                return opt.values[0]
        return None

    def five_tuple(self) -> dict[str, str]:
        return {
            "protocol": self.protocol,
            "src_addr": self.src_addr,
            "src_port": self.src_port,
            "dst_addr": self.dst_addr,
            "dst_port": self.dst_port,
        }


def _unquote(text: str) -> str:
    out = []
    i = 1
    end = len(text) - 1
    while i < end:
        ch = text[i]
        if ch == "\\" and i + 1 < end:
            out.append(text[i + 1])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _split_outside_quotes(text: str, sep: str) -> list[str]:
    """Split on ``sep`` ignoring separators inside double quotes."""
    chunks: list[str] = []
    buf: list[str] = []
    in_quote = False
    escaped = False
    for ch in text:
        if escaped:
            buf.append(ch)
            escaped = False
            continue
        if in_quote and ch == "\\":
            buf.append(ch)
            escaped = True
            continue
        if ch == '"':
            in_quote = not in_quote
            buf.append(ch)
            continue
        if ch == sep and not in_quote:
            chunks.append("".join(buf))
            buf = []
            continue
        buf.append(ch)
    if in_quote:
        raise UnterminatedString(f"unterminated quoted string in {text!r}")
    chunks.append("".join(buf))
    return chunks


def _parse_option(chunk: str) -> Option:
    key_part = _split_outside_quotes(chunk, ":")
    key = key_part[0].strip()
    if len(key_part) == 1:
        return Option(key=key, values=(), raw=chunk.strip())
    rest = ":".join(key_part[1:])
    values = []
    for value in _split_outside_quotes(rest, ","):
        value = value.strip()
        if len(value) >= 2 and value[0] == '"' and value[-1] == '"':
            value = _unquote(value)
        values.append(value)
    return Option(key=key, values=tuple(values), raw=chunk.strip())


def _extract_body(text: str, open_idx: int) -> str:
    """Return the option body between balanced parens, quote-aware."""
    depth = 1
    in_quote = False
    escaped = False
    i = open_idx + 1
    n = len(text)
    while i < n:
        ch = text[i]
        if escaped:
            escaped = False
        elif in_quote:
            if ch == "\\":
                escaped = True
            elif ch == '"':
                in_quote = False
        elif ch == '"':
            in_quote = True
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                if text[i + 1 :].strip():
                    raise UnbalancedParens("content after closing parenthesis")
                return text[open_idx + 1 : i]
        i += 1
    if in_quote:
        raise UnterminatedString("unclosed quote in option body")
    raise UnbalancedParens("missing closing parenthesis")


def parse_rule(text: str) -> Signature:
    """Parse one Snort rule given as a single logical line.

    Raises :class:`MalformedHeader`, :class:`UnbalancedParens` or
    :class:`UnterminatedString` on malformed input; never anything else.
    """
    if not isinstance(text, str):
        raise TypeError("rule text must be a string")
    open_idx = text.find("(")
    if open_idx < 0:
        raise MalformedHeader("rule has no parenthesized option body")
    header_tokens = text[:open_idx].split()
    if len(header_tokens) != 7:
        raise MalformedHeader(
            f"expected 7 header tokens, got {len(header_tokens)}"
        )
    if any(not tok for tok in header_tokens):
        raise MalformedHeader("empty header token")
    direction = header_tokens[4]
    if direction not in DIRECTIONS:
        raise MalformedHeader(f"invalid direction token {direction!r}")
    body = _extract_body(text, open_idx)
    options: list[Option] = []
    for chunk in _split_outside_quotes(body, ";"):
        if chunk.strip():
            options.append(_parse_option(chunk))
    return Signature(
        action=header_tokens[0],
        protocol=header_tokens[1],
        src_addr=header_tokens[2],
        src_port=header_tokens[3],
        direction=direction,
        dst_addr=header_tokens[5],
        dst_port=header_tokens[6],
        options=tuple(options),
        raw_text=text,
    )


def parse_rules(text: str) -> list[Signature]:
    """Parse UTF-8 text, one rule per line; '#' comments and blanks skipped."""
    sigs = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        sigs.append(parse_rule(line))
    return sigs


def serialize(sig: Signature) -> str:
    """Render a Signature back to rule text; reparses to an equal value."""
    header = " ".join(
        [
            sig.action,
            sig.protocol,
            sig.src_addr,
            sig.src_port,
            sig.direction,
            sig.dst_addr,
            sig.dst_port,
        ]
    )
    body = " ".join(f"{opt.raw};" for opt in sig.options)
    return f"{header} ({body})"
