class IntegrationFault(RuntimeError):
    """A state went non-finite during integration."""

    def __init__(self, message: str, step: int):
        super().__init__(f"{message} at step {step}")
        self.step = step


class DegenerateMeasurement(ValueError):
    """A spectral measurement had no energy at the probed frequency."""


class ConfigError(ValueError):
    """An experiment or simulation config violates the schema."""
