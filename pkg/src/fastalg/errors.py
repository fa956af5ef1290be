"""Exception hierarchy shared by every fastalg module."""


class FastAlgError(Exception):
    """Base class for all library errors."""


class DecodeError(FastAlgError, ValueError):
    """A bit string does not decode under the expected code."""


class MalformedError(DecodeError):
    """Truncated input, unknown opcode, or a field out of range."""


class BadTargetError(DecodeError):
    """A jump target points outside the program."""


class PrefixViolation(FastAlgError, ValueError):
    """A codeword set is not prefix-free."""


class AssemblyError(FastAlgError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ScenarioError(FastAlgError, ValueError):
    """A scenario file could not be parsed or is inconsistent."""


class ScriptInvalid(FastAlgError):
    """A scripted proof source contains an entry that fails validation."""


class CeilingExceeded(FastAlgError):
    """A run hit its global step ceiling before producing output.

    ``partial`` holds whatever progress object the raiser had at the time.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class SearchExhausted(FastAlgError):
    """Levin search used up its ceiling without a verified witness."""

    def __init__(self, message, steps=0):
        super().__init__(message)
        self.steps = steps


class BoundViolated(FastAlgError):
    """A measured run exceeded the time bound it is supposed to satisfy."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
