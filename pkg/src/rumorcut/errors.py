"""Exception types shared across the package."""


class EdgeListParseError(ValueError):
    """Raised when an edge-list file contains a malformed line."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class PowerIterationError(RuntimeError):
    """Power iteration failed to converge; carries the last residual."""

    def __init__(self, residual: float, iterations: int):
        super().__init__(
            f"power iteration did not converge in {iterations} iterations "
            f"(last residual {residual:.3e})"
        )
        self.residual = residual
        self.iterations = iterations


class SimulationDivergenceError(RuntimeError):
    """An SIR run exceeded the hard step cap."""


class CheckpointError(ValueError):
    """A parameter file is corrupt, or its config does not match."""


class TrainingDivergedError(RuntimeError):
    """Training produced a non-finite loss; carries a diagnostic snapshot."""

    def __init__(self, episode: int, diagnostics: dict):
        super().__init__(f"non-finite loss at episode {episode}: {diagnostics}")
        self.episode = episode
        self.diagnostics = diagnostics
