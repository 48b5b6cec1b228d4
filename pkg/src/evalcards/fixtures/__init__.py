"""Shipped component-definition fixtures for the three reference systems."""
from __future__ import annotations

from importlib import resources

from ..taxonomy import ComponentModel, parse_config, resolve_model

FIXTURE_SYSTEMS = ("visus", "distil", "tworavens")


def fixture_text(name: str) -> str:
    if name not in FIXTURE_SYSTEMS:
        raise KeyError(f"no shipped fixture named {name!r}; have {FIXTURE_SYSTEMS}")
    return resources.files(__package__).joinpath(f"{name}.yaml").read_text(encoding="utf-8")


def fixture_model(name: str) -> ComponentModel:
    system_name, actions = parse_config(fixture_text(name))
    return resolve_model(system_name, actions)
