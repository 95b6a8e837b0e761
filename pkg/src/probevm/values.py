"""Guest values and the language-agnostic exception wrapper.

Guest values are represented directly by host types where that is unambiguous
(int, float, bool, str) plus singletons for null/undefined and a Closure object
for guest functions. Host ``None`` is never a guest value.
"""

from __future__ import annotations

from typing import Optional


class _Singleton:
    __slots__ = ("_name",)

    def __init__(self, name: str):
        self._name = name

    def __repr__(self) -> str:
        return self._name


#: The guest language's null value.
NULL = _Singleton("null")
#: Marks a frame slot that has not been written yet.
UNDEFINED = _Singleton("undefined")


class Closure:
    """A guest function value: a root node plus the frame it closed over."""

    __slots__ = ("root", "captured_frame")

    def __init__(self, root, captured_frame):
        self.root = root
        self.captured_frame = captured_frame

    def __repr__(self) -> str:
        return f"<fn {self.root.name}>"


class Builtin:
    """A host-implemented guest function (print, clock, exit)."""

    __slots__ = ("name", "arity", "fn")

    def __init__(self, name: str, arity: int, fn):
        self.name = name
        self.arity = arity
        self.fn = fn

    def __repr__(self) -> str:
        return f"<builtin {self.name}>"


def is_int(v) -> bool:
    return type(v) is int


def is_float(v) -> bool:
    return type(v) is float


def is_callable_value(v) -> bool:
    return isinstance(v, (Closure, Builtin))


# GuestException kinds
SYNTAX = "Syntax"
RUNTIME = "Runtime"
INTERNAL = "Internal"
EXIT = "Exit"
CANCELLED = "Cancelled"


class GuestException(Exception):
    """Language-agnostic wrapper for every exceptional guest outcome.

    The engine never leaks raw host errors: anything escaping language code is
    converted to kind=Internal before a client sees it.
    """

    def __init__(self, kind: str, message: str, location=None, language_id: str = "",
                 exit_code: Optional[int] = None):
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.location = location
        self.language_id = language_id
        self.guest_stack: list[tuple[str, object]] = []  # (root name, section)
        if kind == EXIT and exit_code is None:
            raise ValueError("Exit exceptions require an exit_code")
        self.exit_code = exit_code

    def __str__(self) -> str:
        loc = f" at {self.location}" if self.location is not None else ""
        return f"{self.kind}: {self.message}{loc}"
