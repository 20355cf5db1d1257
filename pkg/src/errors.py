# src/errors.py


class EggLamError(Exception):
    """Base class for everything the prover raises on purpose."""


class TermSyntaxError(EggLamError, SyntaxError):
    def __init__(self, message, offset=0):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class NegativeIndexError(TermSyntaxError, IndexError):
    pass


class UnderflowError(EggLamError):
    pass


class LimitExceeded(EggLamError):
    pass


class EncodeError(EggLamError):
    pass


class StaleId(EggLamError, KeyError):
    pass


class UnboundMetavar(EggLamError):
    def __init__(self, rule, var, direction):
        super().__init__(f"Rule '{rule}': metavariable ?{var} is unbound in direction {direction}")
        self.rule = rule
        self.var = var
        self.direction = direction


class DuplicateRule(EggLamError):
    pass


class ExplanationIncomplete(EggLamError):
    pass
