"""Timeline-based planning games: parsing, solving and plan checking."""

from ._tpg import Model, TpgError, diagnostics

__all__ = ["Model", "TpgError", "diagnostics", "load", "parse"]


def load(path):
    """Load a game or problem file."""
    return Model.load(str(path))


def parse(text):
    """Parse game or problem text."""
    return Model.parse(text)
