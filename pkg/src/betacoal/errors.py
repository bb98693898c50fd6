"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the function."""


class RegimeError(DomainError):
    """The stability index is outside (1, 2), where the coalescent comes down
    from infinity."""


class IndeterminateError(ArithmeticError):
    """A numerical decision could not be made within its tolerance band."""


class AbsorbedError(RuntimeError):
    """The Lamperti clock was requested past the extinction of the path."""


class HorizonError(RuntimeError):
    """The simulated grid ended before the requested time was reached."""


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def check_alpha(alpha, regime=False):
    """Validate a stability index and return it as a float.

    With ``regime=True`` the index must lie in (1, 2); otherwise in (0, 2).
    """
    try:
        a = float(alpha)
    except (TypeError, ValueError):
        raise DomainError(f"alpha must be a real number, got {alpha!r}") from None
    if not 0.0 < a < 2.0:
        raise DomainError(f"alpha must lie in (0, 2), got {a}")
    if regime and not 1.0 < a < 2.0:
        raise RegimeError(
            f"alpha={a} is outside (1, 2): the Beta-coalescent does not come "
            "down from infinity"
        )
    return a
