"""Exception types shared across the package."""


class InvalidParametersError(ValueError):
    """Raised for out-of-contract arguments (lengths, sizes, shapes)."""


class ConfigurationError(ValueError):
    """Raised for malformed user configuration (decoder names, quant strings)."""


class PipelineContractError(RuntimeError):
    """Frames were injected into a pipeline faster than its initiation interval."""


class RegisterCorruptionError(RuntimeError):
    """A pipeline register was read after another frame overwrote it."""
