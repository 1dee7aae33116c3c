"""Exception hierarchy for deliberpy.

Commands map these onto process exit codes (see ``EXIT_CODES``).
"""


class DeliberpyError(Exception):
    """Base class for all deliberpy errors."""


class ConfigError(DeliberpyError, ValueError):
    """Configuration schema violation, unknown key or bad preset."""


class ValidationError(DeliberpyError, ValueError):
    """Invalid input data: files, ids, specs or arguments."""


class ShapeError(ValidationError):
    """Tensor shapes do not satisfy an operation's shape rule."""


class NumericError(DeliberpyError, ArithmeticError):
    """A NaN or Inf appeared where finite values are required."""


class FrozenParameterError(DeliberpyError, RuntimeError):
    """A frozen parameter received a gradient."""


EXIT_CODES = {
    ConfigError: 2,
    ValidationError: 2,
    NumericError: 3,
    FrozenParameterError: 3,
}


def exit_code_for(error: BaseException) -> int:
    """Return the process exit code for an exception raised by a command."""
    for error_type, code in EXIT_CODES.items():
        if isinstance(error, error_type):
            return code
    return 1
