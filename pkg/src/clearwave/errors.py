"""Exception types shared across the pipeline."""


class ClearwaveError(Exception):
    """Base class for all pipeline errors."""


class InvalidSymbol(ClearwaveError):
    """Transcript symbol outside the alphabet, or empty transcript."""


class DegenerateMix(ClearwaveError):
    """Silent clean or noise signal passed to the mixer."""


class NoiseTooShort(ClearwaveError):
    """Noise clip shorter than the clean utterance."""


class InvalidRIR(ClearwaveError):
    """Room impulse response parameters out of range."""


class SignalTooShort(ClearwaveError):
    """Waveform too short for the requested analysis."""


class ShapeError(ClearwaveError):
    """Tensor shape mismatch between operands."""


class VocabError(ClearwaveError):
    """Token id outside the configured vocabulary."""


class InvalidTranscript(ClearwaveError):
    """Empty or malformed transcript."""


class InvalidReference(ClearwaveError):
    """Empty reference passed to an error-rate metric."""


class ConfigError(ClearwaveError):
    """Invalid configuration or incompatible checkpoints."""

    def __init__(self, message, field=None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class EmptyGeneration(ClearwaveError):
    """Decoder produced no usable token frame."""


class DivergenceError(ClearwaveError):
    """Training loss became non-finite."""
