"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class RelconjError(Exception):
    """Base class for all errors raised by relconj."""


class WordError(RelconjError, ValueError):
    pass


class UnknownSymbol(WordError):
    def __init__(self, token: str):
        super().__init__(f"unknown symbol {token!r}")
        self.token = token


class MalformedToken(WordError):
    def __init__(self, token: str):
        super().__init__(f"malformed token {token!r}")
        self.token = token


class AlphabetMismatch(RelconjError, ValueError):
    pass


class HandleMismatch(RelconjError, ValueError):
    pass


class GroupSpecError(RelconjError, ValueError):
    """A group description failed validation (bad table, bad names, ...)."""


class ResourceLimit(RelconjError):
    """The configured element-count cap was exceeded during enumeration."""

    def __init__(self, cap: int, radius: int):
        super().__init__(f"ball enumeration exceeded {cap} elements before radius {radius}")
        self.cap = cap
        self.radius = radius


class UnsupportedBackend(RelconjError):
    pass


class IndexOutOfRange(RelconjError, IndexError):
    pass


class FactorMismatch(RelconjError, ValueError):
    pass


class LengthMismatch(RelconjError, ValueError):
    pass


class InconsistentDuplicates(RelconjError):
    """a_i == a_j but b_i != b_j: the lists are definitely not conjugate."""

    def __init__(self, i: int, j: int):
        super().__init__(f"a[{i}] == a[{j}] but b[{i}] != b[{j}]")
        self.positions = (i, j)


class MissingConstant(RelconjError, KeyError):
    def __init__(self, name: str, key):
        super().__init__(f"constant {name} undefined at {key!r}")
        self.name = name
        self.key = key

    def __str__(self) -> str:
        return self.args[0]


class ProfileError(RelconjError, ValueError):
    pass


class NotAConjugator(RelconjError, ValueError):
    pass


class OracleFailure(RelconjError):
    """A parabolic oracle rejected connector lists that must be conjugate."""
