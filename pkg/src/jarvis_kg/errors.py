"""Exception hierarchy shared across the package.

Everything raised on purpose derives from JarvisError so the service layer
can turn any domain failure into a well-formed apology response.
"""


class JarvisError(Exception):
    """Base class for all domain errors."""


# --- knowledge graph ---------------------------------------------------------

class NoCandidates(JarvisError):
    """A fuzzy label lookup found no labeled instances of the class."""


# --- query language ----------------------------------------------------------

class QuerySyntaxError(JarvisError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnknownPrefix(QuerySyntaxError):
    pass


class UnboundSelectVar(JarvisError):
    """A selected variable never occurs in any pattern."""


class MissingPlaceholder(JarvisError):
    def __init__(self, name: str):
        super().__init__(f"no value supplied for placeholder [{name}]")
        self.name = name


# --- NLU ---------------------------------------------------------------------

class FormatError(JarvisError):
    def __init__(self, message: str, line: int):
        super().__init__(f"{message} (line {line})")
        self.line = line


class NotANumber(JarvisError):
    pass


class SlotClearingFailed(JarvisError):
    def __init__(self, slot: str, reason: Exception):
        super().__init__(f"could not clear slot '{slot}': {reason}")
        self.slot = slot
        self.reason = reason


# --- fleet / handlers --------------------------------------------------------

class UnknownEngine(JarvisError):
    pass


class UnknownSubsystem(JarvisError):
    pass


class UnknownCharacteristic(JarvisError):
    pass


class UnknownFleet(JarvisError):
    pass


class NoData(JarvisError):
    pass


class NoSamples(JarvisError):
    pass


class NoBoundary(JarvisError):
    pass


class DuplicateEngineId(JarvisError):
    pass


class SchemaError(JarvisError):
    pass


# --- expression engine -------------------------------------------------------

class ExprSyntaxError(JarvisError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (position {position})")
        self.position = position


class UnknownIdentifier(JarvisError):
    def __init__(self, name: str):
        super().__init__(f"unknown identifier '{name}'")
        self.name = name


class EvalError(JarvisError):
    pass


class DependencyCycle(JarvisError):
    def __init__(self, cycle: list[str]):
        super().__init__("update-method cycle: " + " -> ".join(cycle))
        self.cycle = cycle
