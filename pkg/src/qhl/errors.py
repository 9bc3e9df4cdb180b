"""Exception hierarchy."""


class QHLError(Exception):
    pass


class SpecError(QHLError):
    """Invalid input document or declaration."""


class ParseError(SpecError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.line = line
        self.col = col
        self.message = message


class EvaluationError(QHLError):
    """Runtime failure: unbound variable, integer overflow, ill-formed command."""


class ProofError(QHLError):
    def __init__(self, message: str, step: str | None = None, expected: str | None = None, given: str | None = None):
        detail = message
        if step is not None:
            detail = f"step {step}: {message}"
        if expected is not None:
            detail += f"\n  expected: {expected}\n  given:    {given}"
        super().__init__(detail)
        self.step = step
        self.expected = expected
        self.given = given


class RuleMismatch(ProofError):
    pass
