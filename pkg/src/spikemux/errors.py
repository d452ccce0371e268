"""Exception types shared across the package."""


class SpikemuxError(Exception):
    """Base class for all package errors."""

    category = "internal-error"


class ConfigError(SpikemuxError):
    """Invalid or inconsistent configuration parameters."""

    category = "config-error"


class CapacityError(ConfigError):
    """A per-core structural limit (e.g. 256 neurons) was exceeded."""

    category = "capacity-error"


class ProtocolError(SpikemuxError):
    """Malformed packet, frame, or out-of-range address on a wire interface."""

    category = "protocol-error"


class ParseError(SpikemuxError):
    """A file could not be parsed (bad magic, version, or structure)."""

    category = "parse-error"


class CalibrationError(SpikemuxError):
    """Missing or invalid hardware-calibration data."""

    category = "calibration-error"


class DeadlockError(SpikemuxError):
    """The pipeline stopped making progress (should be impossible under
    correct backpressure; indicates a wiring bug)."""

    category = "deadlock-error"
