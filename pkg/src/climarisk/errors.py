"""Exception and warning types raised across the package."""


class ClimariskError(Exception):
    """Base class for all package errors."""


class PanelError(ClimariskError, ValueError):
    """Malformed indicator panel input."""

    def __init__(self, message, column=None, row=None):
        super().__init__(message)
        self.column = column
        self.row = row


class MissingCell(PanelError):
    pass


class NonNumeric(PanelError):
    pass


class DuplicateColumn(PanelError):
    pass


class DirectionUnassigned(PanelError):
    pass


class UnknownColumn(PanelError):
    pass


class EmptyPanel(ClimariskError, ValueError):
    pass


class NonPositivePremium(ClimariskError, ValueError):
    pass


class DimensionMismatch(ClimariskError, ValueError):
    pass


class SingleClass(ClimariskError, ValueError):
    """A routine that needs both labels received only one."""


class EmptyMinority(ClimariskError, ValueError):
    pass


class PoolTooSmall(ClimariskError, ValueError):
    pass


class FoldTooSmall(ClimariskError, ValueError):
    pass


class SingleClassFold(SingleClass):
    pass


class NonPositiveValue(ClimariskError, ValueError):
    def __init__(self, message, column=None, row=None):
        super().__init__(message)
        self.column = column
        self.row = row


class RankDeficient(ClimariskError, ValueError):
    pass


class TooFewObservations(ClimariskError, ValueError):
    pass


class GridEmpty(ClimariskError, ValueError):
    pass


class NoModel(ClimariskError, ValueError):
    pass


class KTooLarge(ClimariskError, ValueError):
    pass


class EmptyInput(ClimariskError, ValueError):
    pass


class NoPopulationColumn(ClimariskError, KeyError):
    pass


class KNotTwo(ClimariskError, ValueError):
    pass


class TooFewIndicators(ClimariskError, ValueError):
    pass


class NotReciprocal(ClimariskError, ValueError):
    pass


class NotPositive(ClimariskError, ValueError):
    pass


class NoRI(ClimariskError, ValueError):
    pass


class InconsistentMatrix(ClimariskError):
    def __init__(self, cr):
        super().__init__(f"comparison matrix inconsistent: CR={cr:.4f} > 0.1")
        self.cr = cr


class AlphaOutOfRange(ClimariskError, ValueError):
    pass


class NegativeSigma(ClimariskError, ValueError):
    pass


class ConfigError(ClimariskError, ValueError):
    pass


# -- warnings ---------------------------------------------------------------


class ClimariskWarning(UserWarning):
    pass


class DegenerateColumn(ClimariskWarning):
    pass


class DidNotConverge(ClimariskWarning):
    pass


class TieBreakWarning(ClimariskWarning):
    pass


class ClampWarning(ClimariskWarning):
    pass
