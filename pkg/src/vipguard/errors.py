"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A configuration value violates its declared range or schema."""


class ContractViolation(ValueError):
    """A caller broke an operation's precondition (bad index, shape, or length)."""


class ControllerError(RuntimeError):
    """A bodyguard controller raised during an episode; carries the failing step."""

    def __init__(self, message: str, step_index: int):
        super().__init__(message)
        self.step_index = step_index


class TrainingDivergence(RuntimeError):
    """Training produced a non-finite loss and was aborted."""


class CheckpointError(RuntimeError):
    """A checkpoint file is unreadable: bad magic, version, digest, or truncation."""


class TrajectoryError(ValueError):
    """A trajectory file is malformed; carries the offending line number."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number
