"""Exception hierarchy.

Every error carries the process exit code the command-line front end uses
when the error escapes a command.
"""


class FaseError(Exception):
    exit_code = 1
    kind = "error"


class ParseError(FaseError):
    exit_code = 2
    kind = "syntax"

    def __init__(self, message, line, column, source=None):
        where = f"{line}:{column}" if source is None else f"{source}:{line}:{column}"
        super().__init__(f"{where}: {message}")
        self.message = message
        self.source = source
        self.line = line
        self.column = column


class ValidationError(FaseError):
    exit_code = 3
    kind = "validation"


class NotResponseProcess(FaseError):
    """Raised when a graph is not a response process.

    ``reason`` is one of ``foreign-action``, ``negative-balance`` or
    ``inconsistent-balance``.
    """

    exit_code = 4
    kind = "not-response-process"

    def __init__(self, reason, message, node=None):
        super().__init__(f"not-response-process ({reason}): {message}")
        self.reason = reason
        self.node = node


class PreconditionError(FaseError):
    exit_code = 5
    kind = "precondition"

    def __init__(self, kind, message, witness=None):
        super().__init__(f"{kind}: {message}")
        self.kind = kind
        self.witness = witness


class UnbalancedCycle(PreconditionError):
    def __init__(self, message, witness=None):
        super().__init__("unbalanced-cycle", message, witness)


class InternalInconsistency(FaseError):
    exit_code = 6
    kind = "internal-inconsistency"


class UnfoldingError(InternalInconsistency):
    """Recursion unfolding did not reach a prefix (unguarded term)."""


class CapExceeded(FaseError):
    exit_code = 7

    def __init__(self, kind, cap):
        super().__init__(f"{kind}: limit of {cap} exceeded")
        self.kind = kind
        self.cap = cap
