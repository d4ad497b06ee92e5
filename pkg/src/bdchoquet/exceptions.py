class StrictPositivityError(ArithmeticError):
    """An operator denominator vanished: the capacity gives no mass where the weight lives."""

    def __init__(self, alpha, denominator: float):
        self.alpha = tuple(alpha)
        self.denominator = denominator
        super().__init__(
            f"denominator for alpha={self.alpha} is {denominator:.3e}; "
            "capacity is not strictly positive on the support of the weight"
        )


class ConfigurationError(ValueError):
    """Operator or experiment configuration violates a stated hypothesis."""


class ConvergenceWarning(RuntimeWarning):
    """Beta quadrature hit its step cap before successive doublings agreed."""
