"""Parser and serializer behavior, including round-trip properties."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigtriage.sigparse import (
    MalformedHeader,
    MetadataPair,
    Option,
    Reference,
    RuleParseError,
    Signature,
    UnbalancedParens,
    UnterminatedString,
    parse_rule,
    parse_rules,
    serialize,
)

from conftest import random_signature


class TestParseRule:
    def test_header_fields(self, finger_rule):
        sig = parse_rule(finger_rule)
        assert sig.action == "alert"
        assert sig.protocol == "tcp"
        assert sig.src_addr == "$EXTERNAL_NET"
        assert sig.src_port == "any"
        assert sig.direction == "->"
        assert sig.dst_addr == "$HOME_NET"
        assert sig.dst_port == "79"

    def test_option_views(self, finger_rule):
        sig = parse_rule(finger_rule)
        assert sig.msg == "PROTOCOL-FINGER 0 query"
        assert sig.metadata == (MetadataPair("ruleset", "community"),)
        assert sig.references == (Reference("cve", "1999-0197"),)
        assert sig.classtype == "attempted-recon"

    def test_option_order_preserved(self, finger_rule):
        sig = parse_rule(finger_rule)
        assert [o.key for o in sig.options] == [
            "msg",
            "metadata",
            "reference",
            "classtype",
            "sid",
        ]

    def test_minimal_rule(self):
        sig = parse_rule('alert tcp a any -> b 80 (msg:"x";)')
        assert sig.msg == "x"
        assert len(sig.options) == 1

    def test_keyless_option(self):
        sig = parse_rule('alert tcp a any -> b 80 (msg:"x"; nocase;)')
        assert sig.options[1] == Option(key="nocase", values=(), raw="nocase")

    def test_semicolon_inside_quotes(self):
        sig = parse_rule('alert tcp a any -> b 80 (msg:"a;b"; sid:1;)')
        assert sig.msg == "a;b"
        assert len(sig.options) == 2

    def test_escaped_quote_inside_msg(self):
        sig = parse_rule('alert tcp a any -> b 80 (msg:"say \\"hi\\""; sid:1;)')
        assert sig.msg == 'say "hi"'

    def test_multiple_references_collected_in_order(self):
        sig = parse_rule(
            "alert tcp a any -> b 80 "
            '(reference:cve,2020-1; reference:url,example.com/x;)'
        )
        assert sig.references == (
            Reference("cve", "2020-1"),
            Reference("url", "example.com/x"),
        )

    def test_reference_system_lowercased(self):
        sig = parse_rule("alert tcp a any -> b 80 (reference:CVE,2020-1;)")
        assert sig.references[0].system == "cve"

    def test_missing_classtype_is_none(self):
        sig = parse_rule('alert tcp a any -> b 80 (msg:"x";)')
        assert sig.classtype is None

    def test_bidirectional_direction(self):
        sig = parse_rule('alert tcp a any <> b 80 (msg:"x";)')
        assert sig.direction == "<>"


class TestParseErrors:
    def test_unbalanced_parens(self):
        with pytest.raises(UnbalancedParens):
            parse_rule('alert tcp a any -> b 80 (msg:"x";')

    def test_trailing_content_after_close(self):
        with pytest.raises(UnbalancedParens):
            parse_rule('alert tcp a any -> b 80 (msg:"x";) extra')

    def test_no_body(self):
        with pytest.raises(MalformedHeader):
            parse_rule("alert tcp a any -> b 80")

    def test_too_few_header_tokens(self):
        with pytest.raises(MalformedHeader):
            parse_rule('alert tcp a -> b 80 (msg:"x";)')

    def test_too_many_header_tokens(self):
        with pytest.raises(MalformedHeader):
            parse_rule('alert tcp a any any -> b 80 (msg:"x";)')

    def test_bad_direction_token(self):
        with pytest.raises(MalformedHeader):
            parse_rule('alert tcp a any => b 80 (msg:"x";)')

    def test_unterminated_string(self):
        with pytest.raises(UnterminatedString):
            parse_rule('alert tcp a any -> b 80 (msg:"x)')

    def test_errors_are_rule_parse_errors(self):
        for bad in ("", "alert", "alert tcp a any -> b 80 ("):
            with pytest.raises(RuleParseError):
                parse_rule(bad)

    def test_non_string_input_raises_type_error(self):
        with pytest.raises(TypeError):
            parse_rule(b"alert tcp a any -> b 80 ()")


class TestSerialize:
    def test_round_trip_equality(self, finger_rule):
        sig = parse_rule(finger_rule)
        assert parse_rule(serialize(sig)) == sig

    def test_zero_options(self):
        sig = parse_rule("alert tcp a any -> b 80 ()")
        assert serialize(sig) == "alert tcp a any -> b 80 ()"

    def test_parse_serialize_parse_fixed_point(self, finger_rule):
        once = serialize(parse_rule(finger_rule))
        twice = serialize(parse_rule(once))
        assert once == twice

    def test_1000_random_round_trips(self, rng):
        for _ in range(1000):
            sig = random_signature(rng)
            assert parse_rule(serialize(sig)) == sig


class TestParseRules:
    def test_comments_and_blanks_skipped(self, finger_rule):
        text = f"# comment\n\n{finger_rule}\n"
        assert len(parse_rules(text)) == 1

    def test_multiple_lines(self, finger_rule):
        text = f"{finger_rule}\n{finger_rule}\n"
        assert len(parse_rules(text)) == 2


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=120))
def test_parser_never_panics_on_arbitrary_text(text):
    try:
        parse_rule(text)
    except RuleParseError:
        pass


def test_parser_never_panics_on_random_bytes():
    rng = np.random.default_rng(7)
    for _ in range(5000):
        raw = rng.bytes(int(rng.integers(0, 80)))
        try:
            parse_rule(raw.decode("latin-1"))
        except RuleParseError:
            pass
