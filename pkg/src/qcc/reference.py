"""Built-in reference instances with exactly known behavior.

A qubit pair of measure-and-prepare channels that is compatible but has
no measure-and-prepare (PPT) compatibilizer, shipped together with one
explicit compatibilizer and the partial-transpose witness certifying the
PPT verdict.  All entries are dyadic rationals, so the JSON fixtures are
bit-exact.  These drive the ``verify-paper`` CLI command and double as
test fixtures.
"""

from __future__ import annotations

import json
from importlib import resources

from .channels import Channel, channel_from_json
from .witness import Witness, certificate_from_json


def _load(name: str) -> dict:
    with resources.files("qcc.data").joinpath(name).open("r") as f:
        return json.load(f)


def channel_pair() -> tuple[Channel, Channel]:
    """The compatible-but-not-PPT-compatibilizable qubit pair."""
    return (
        channel_from_json(_load("qubit_pair_a.json")),
        channel_from_json(_load("qubit_pair_b.json")),
    )


def compatibilizer() -> Channel:
    """An explicit (positive definite) compatibilizer of the pair."""
    return channel_from_json(_load("qubit_pair_compatibilizer.json"))


def ppt_witness() -> Witness:
    """The integer witness showing no PPT compatibilizer exists; margin -1/2."""
    w = certificate_from_json(_load("qubit_pair_ppt_witness.json"))
    assert isinstance(w, Witness)
    return w
