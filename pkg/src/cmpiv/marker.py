"""Sentinel used in place of a value at a pole."""
from __future__ import annotations


class _PoleMarker:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "POLE"

    def __bool__(self):
        return False

    def __reduce__(self):
        return (_PoleMarker, ())


POLE = _PoleMarker()


def is_pole(value) -> bool:
    return value is POLE
