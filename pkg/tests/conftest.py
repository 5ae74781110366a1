"""Shared fixtures and random-input generators for the test suite."""

import string

import numpy as np
import pytest

from sigtriage.sigparse import Option, Signature

FINGER_RULE = (
    'alert tcp $EXTERNAL_NET any -> $HOME_NET 79 '
    '(msg:"PROTOCOL-FINGER 0 query"; metadata:ruleset community; '
    'reference:cve,1999-0197; classtype:attempted-recon; sid:1058;)'
)

_TOKEN_CHARS = string.ascii_letters + string.digits + "$_.-"
_VALUE_CHARS = string.ascii_letters + string.digits + ' _.-:\\"'


def random_token(rng, min_len=1, max_len=10) -> str:
    length = int(rng.integers(min_len, max_len + 1))
    return "".join(rng.choice(list(_TOKEN_CHARS), size=length))


def random_signature(rng) -> Signature:
    """A random but well-formed Signature built from canonical options."""
    options = []
    n_opts = int(rng.integers(0, 6))
    for _ in range(n_opts):
        roll = rng.random()
        if roll < 0.3:
            length = int(rng.integers(0, 20))
            text = "".join(rng.choice(list(_VALUE_CHARS), size=length))
            options.append(Option.build("msg", text))
        elif roll < 0.5:
            options.append(
                Option.build("metadata", f"{random_token(rng)} {random_token(rng)}")
            )
        elif roll < 0.7:
            options.append(
                Option.build(
                    "reference", random_token(rng).lower(), random_token(rng)
                )
            )
        elif roll < 0.85:
            options.append(Option.build("classtype", random_token(rng)))
        else:
            options.append(Option.build("nocase"))
    return Signature(
        action=random_token(rng),
        protocol=random_token(rng),
        src_addr=random_token(rng),
        src_port=random_token(rng),
        direction="->" if rng.random() < 0.5 else "<>",
        dst_addr=random_token(rng),
        dst_port=random_token(rng),
        options=tuple(options),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def finger_rule():
    return FINGER_RULE
