"""
swarmcheck - explicit-state model checking of grid swarm navigation algorithms
"""

__version__ = "1.0.0"


class SwarmCheckError(Exception):
    """Base class for every error raised by swarmcheck"""


class ConfigurationError(SwarmCheckError):
    """Invalid model parameters or an empty initial set"""


class UnsupportedConfiguration(SwarmCheckError):
    """A parameter combination the requested operation does not support"""


class PropertyParseError(SwarmCheckError, ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class DomainParseError(SwarmCheckError, ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ReplayError(SwarmCheckError):
    def __init__(self, step: int, reason: str):
        super().__init__(f"replay failed at step {step}: {reason}")
        self.step = step
        self.reason = reason
