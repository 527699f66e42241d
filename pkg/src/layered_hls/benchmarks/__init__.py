"""Shipped benchmark programs (single and cascaded 3x3 convolution)."""

from __future__ import annotations

from importlib import resources

NAMES = ("single", "cascade")


def path(name: str):
    return resources.files(__name__).joinpath(f"conv_{name}.cyb")


def source(name: str) -> str:
    if name not in NAMES:
        raise KeyError(f"unknown benchmark {name!r}")
    return path(name).read_text(encoding="utf-8")


def load(name: str):
    from ..frontend import parse

    return parse(source(name))
