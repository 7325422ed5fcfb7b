"""Exception types raised by the lab."""

from typing import Optional, Tuple


class LabError(Exception):
    """Base class for every error raised deliberately by the lab."""


class InputError(LabError, ValueError):
    """Invalid arguments: bad shapes, non-finite values, unknown model names."""


class NumericalError(LabError, ArithmeticError):
    """A numerical routine failed to produce a certified answer."""

    def __init__(
        self,
        message: str,
        bracket: Optional[Tuple[float, float]] = None,
        residual: Optional[float] = None,
    ) -> None:
        details = []
        if bracket is not None:
            details.append(f"bracket=({bracket[0]:.6g}, {bracket[1]:.6g})")
        if residual is not None:
            details.append(f"residual={residual:.3e}")
        super().__init__(f"{message} [{', '.join(details)}]" if details else message)
        self.bracket = bracket
        self.residual = residual


class ProtocolViolation(LabError, RuntimeError):
    """The interaction protocol was broken by a policy or a simulator."""
