from __future__ import annotations

import textwrap

import pytest

from gridwatch.config import Model, link_and_validate, parse_objects


def model_from(text: str) -> Model:
    return link_and_validate(parse_objects(textwrap.dedent(text)))


BASIC_CONFIG = """
define vo {
    vo_name    atlas
}
define site {
    site_name    bologna
    latitude     44.5
    longitude    11.3
    vos          atlas
}
define contact {
    contact_name    ops
}
define contactgroup {
    contactgroup_name    oncall
    members              ops
}
define host {
    host_name        router1
    address          127.0.0.1
    site             bologna
    check_command    check_tcp!9001
}
define host {
    host_name        ce01
    address          127.0.0.1
    site             bologna
    parents          router1
    check_command    check_tcp!9002
}
define service {
    host_name              ce01
    service_description    CPU
    check_command          check_agent!9003!cpu!70!90
    contact_groups         oncall
    vos                    atlas
    metric_kind            cpu
}
"""


@pytest.fixture
def basic_model() -> Model:
    return model_from(BASIC_CONFIG)
