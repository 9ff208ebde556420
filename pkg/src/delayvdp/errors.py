"""Exception hierarchy shared across the package."""


class DelayVdpError(Exception):
    """Base class for all package errors."""


class ModeNonexistent(DelayVdpError):
    """The in-phase mode has no real positive amplitude (1 + alpha cos T <= 0)."""


class OutOfDomain(DelayVdpError, ValueError):
    """An argument lies outside the domain where a closed-form curve is defined."""


class NotAHopf(DelayVdpError):
    """Zero trace was found but the determinant is not positive."""


class UnsupportedMode(DelayVdpError, ValueError):
    """The characteristic equation is only available for beta = -1."""


class NoConvergence(DelayVdpError):
    """An iterative solver exhausted its iteration budget."""


class SingularJacobian(DelayVdpError):
    """Newton iteration hit a (numerically) singular Jacobian."""


class DegenerateHopf(DelayVdpError):
    """Seed frequency is too close to zero for a Hopf point to be meaningful."""


class NonFiniteState(DelayVdpError):
    """Integration produced an overflow or NaN.

    The partial trajectory and the blow-up time are attached so callers can
    still classify the run as growing.
    """

    def __init__(self, message, trajectory=None, t_blowup=None):
        super().__init__(message)
        self.trajectory = trajectory
        self.t_blowup = t_blowup


class TooShort(DelayVdpError, ValueError):
    """Trajectory too short for a growth-rate fit."""


class NoSignChange(DelayVdpError):
    """Bisection bracket does not straddle a stability change."""
