import sys


def print_warning(reason: str) -> None:
    """
    Prints a warning message.
    :param reason: Reason for the warning
    :type reason: str
    """
    print(f"WARNING: {reason}", file=sys.stderr)


def print_error(reason: str, exit_code: int = 1) -> int:
    """
    Prints an error message and returns the exit code the caller should terminate with.
    :param reason: Reason for the error
    :type reason: str
    :param exit_code: Exit code belonging to the error
    :type exit_code: int
    :return: The exit code
    :rtype: int
    """
    print(f"ERROR: {reason}", file=sys.stderr)
    return exit_code


def print_debug(reason: str) -> None:
    """
    Prints debug information.
    :param reason: Reason for the debug message
    :type reason: str
    """
    print(f"DEBUG: {reason}", file=sys.stderr)


class DiracError(Exception):
    """
    Base class of all numerical failures. The class name is the error name reported by the command line.
    """


class ConfigError(ValueError):
    """
    Invalid configuration or command line input.
    """


class RankDeficient(DiracError):
    pass


class NonRegularInput(DiracError):
    pass


class SingularPoint(DiracError):
    pass


class MeshMismatch(DiracError):
    pass


class DeterminantDrift(DiracError):
    pass


class ZeroOnContour(DiracError):
    pass


class NonConvergedWinding(DiracError):
    pass


class CountMismatch(DiracError):
    pass


class NearEigenvalue(DiracError):
    pass


class ContourSeparationFailure(DiracError):
    pass


class DefectiveEigenvalue(DiracError):
    pass


class PairingDegenerate(DiracError):
    pass


class ZeroFunction(DiracError):
    pass
