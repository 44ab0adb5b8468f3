"""Exception hierarchy.

Every error carries a ``module`` tag naming the subsystem that raised it so the
command line front end can report it without guessing.
"""

from __future__ import annotations


class TempcombError(Exception):
    module = "core"


class ArityError(TempcombError, ValueError):
    module = "order-core"


class LookupFailure(TempcombError, KeyError):
    module = "order-core"

    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class ContractError(TempcombError, ValueError):
    module = "op-engine"


class SignatureError(TempcombError, KeyError):
    module = "ppdef-lab"

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class ResourceError(TempcombError, RuntimeError):
    module = "solvers"


class FragmentError(TempcombError, ValueError):
    module = "solvers"


class InternalError(TempcombError, AssertionError):
    module = "core"


class ParseError(TempcombError, SyntaxError):
    module = "cli"

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.message = message
        self.line = line
        self.column = column
