"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map failures to the
documented process exit status without a lookup table.
"""


class SparseMomentsError(Exception):
    exit_code = 1


class InputError(SparseMomentsError):
    exit_code = 2


class ConfigError(SparseMomentsError):
    exit_code = 3


class NumericalFailure(SparseMomentsError):
    exit_code = 4


class DomainMismatch(InputError):
    pass


class TooLarge(InputError):
    pass


class MissingMoment(InputError):
    def __init__(self, i, j=None):
        self.index = (i,) if j is None else (i, j)
        super().__init__(f"moment {self.index} is missing")


class BadInput(InputError):
    pass


class InsufficientSnapshot(InputError):
    pass


class Infeasible(NumericalFailure):
    pass


class SingularSystem(NumericalFailure):
    pass


class DegenerateSupport(NumericalFailure):
    pass


class NormalizationFailure(NumericalFailure):
    pass


class DegenerateDirection(NumericalFailure):
    pass
