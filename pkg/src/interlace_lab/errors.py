"""Exception types shared across the package.

Every budget/guard violation gets its own class so callers (and the CLI,
which maps BudgetError subclasses to exit code 3) can react precisely.
"""


class InterlaceLabError(Exception):
    """Base class for all package errors."""


class EmptySelection(InterlaceLabError):
    """An extraction was asked for an empty row or column selection."""


class UnknownLabel(InterlaceLabError):
    """A label is not present in the matrix it was used against."""


class MalformedTree(InterlaceLabError):
    """A protocol tree is structurally invalid; carries the node path."""

    def __init__(self, message, path=()):
        super().__init__(f"{message} (at node path {'/'.join(map(str, path)) or 'root'})")
        self.path = tuple(path)


class BudgetError(InterlaceLabError):
    """Base for all configurable-budget violations (CLI exit code 3)."""


class BudgetExceeded(BudgetError):
    """A search-node cap was hit; the answer is unknown, not false."""


class SizeOverflow(BudgetError):
    """A construction would exceed the configured cell budget."""


class DegreeOverflow(BudgetError):
    """The small-bias generator would need a field degree over budget."""


class FamilyTooLarge(BudgetError):
    """A bracket family exceeds the enumeration cap; carries the count."""

    def __init__(self, count, cap):
        super().__init__(f"family has {count} members, cap is {cap}")
        self.count = count
        self.cap = cap


class GuardExceeded(InterlaceLabError):
    """The naive reference solver was called beyond its hard size guard."""


class AlphabetMismatch(InterlaceLabError):
    """A reservoir was built over a different column alphabet."""


class EmptyReservoir(InterlaceLabError):
    """All generated tuples decoded to an invalid codeword."""


class DensityTooLow(InterlaceLabError):
    """Surviving distinct column patterns fall short of the quota."""


class BindingViolation(InterlaceLabError):
    """A lemma binding violates one of the lemma's side conditions."""


class BinCountUnsupported(InterlaceLabError):
    """The reduction only supports vector-bin-packing with 4 bins."""


class DomainTooSmall(InterlaceLabError):
    """Parameter derivation needs dimension d >= 4 (a power of two)."""


class NoSuchColumn(InterlaceLabError):
    """A gap extraction needs a selector coverage the reservoir dropped."""
