"""Exception hierarchy shared by the library and the command line.

The CLI maps :class:`Falsified` subclasses to exit status 1 and
:class:`UsageError` subclasses to exit status 2.
"""

from __future__ import annotations

from typing import Any


class GibbsLabError(Exception):
    """Base class for every library error."""


class UsageError(GibbsLabError):
    """Bad input or an exhausted resource budget (exit status 2)."""


class InputError(UsageError, ValueError):
    """Malformed or inconsistent input data."""


class BudgetError(UsageError):
    """A combinatorial enumeration would exceed its configured budget."""


class WindowError(UsageError):
    """A finite window is too small to hold the shapes a builder needs."""


class SearchExhausted(UsageError):
    """A randomized search used up its attempt budget without success."""

    def __init__(self, message: str, best: Any = None):
        super().__init__(message)
        self.best = best


class Falsified(GibbsLabError):
    """A structural property or precondition was refuted; carries a witness."""

    def __init__(self, message: str, witness: Any = None):
        super().__init__(message)
        self.witness = witness


class NoPath(Falsified):
    """No pivot (or exchange) path joins the two configurations."""


class FillFailure(Falsified):
    """A single-site fill found no admissible symbol."""


class TmpFailure(Falsified):
    """The memory-set property failed on a finite window."""


class ConsistencyError(Falsified):
    """Edge values of a potential reconstruction disagree around a cycle."""


class PreconditionError(Falsified):
    """A builder precondition does not hold on the enumerated pairs."""


class LiftError(InputError):
    """A configuration has no height lift (for example, equal neighbours)."""
