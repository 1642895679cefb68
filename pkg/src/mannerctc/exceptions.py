"""Exception hierarchy shared across the package."""


class MannerCTCError(Exception):
    """Base class for all errors raised by mannerctc."""


class AlphabetError(MannerCTCError, ValueError):
    """A symbol, label inventory or manner map is invalid."""


class UnknownMannerError(AlphabetError, KeyError):
    """A manner label is not present in the manner map."""

    def __str__(self):
        # KeyError would otherwise repr() the message
        return str(self.args[0]) if self.args else ""


class PosteriorError(MannerCTCError, ValueError):
    """A posterior matrix or posterior file violates its contract."""


class InstanceTooLargeError(MannerCTCError, ValueError):
    """Brute-force enumeration was asked to explore too many paths."""
