"""Error classes shared across the package.

Every error carries an ``exit_code`` so the CLI can map failure classes to
distinct process exit codes: usage errors exit 2 (argparse), I/O errors 3,
content/validation errors 4, degenerate mask ratios 5.
"""

EXIT_USAGE = 2
EXIT_IO = 3
EXIT_VALIDATION = 4
EXIT_DEGENERATE = 5


class SpecmaskError(Exception):
    exit_code = EXIT_VALIDATION


class UsageError(SpecmaskError):
    """Flag combinations the CLI contract forbids."""

    exit_code = EXIT_USAGE


class IoFailure(SpecmaskError):
    exit_code = EXIT_IO


class DegenerateRatio(SpecmaskError):
    """Mask ratio leaves zero visible or zero masked patches."""

    exit_code = EXIT_DEGENERATE


# audio / spectrogram ingestion
class MalformedContainer(SpecmaskError):
    pass


class UnsupportedEncoding(SpecmaskError):
    pass


class EmptyAudio(SpecmaskError):
    pass


class SampleRateMismatch(SpecmaskError):
    pass


class ClipTooShort(SpecmaskError):
    pass


class ZeroVariance(SpecmaskError):
    pass


class SizeNotDivisible(SpecmaskError):
    pass


class NonFiniteValue(SpecmaskError):
    pass


# grids and sampling
class PatchLargerThanInput(SpecmaskError):
    pass


class KTooLarge(SpecmaskError):
    pass


class AllWeightsZero(SpecmaskError):
    pass


class DisconnectedSimilarity(SpecmaskError):
    pass


class EpochOutOfRange(SpecmaskError):
    pass


# benchmarking and serialized artifacts
class InsufficientSizes(SpecmaskError):
    pass


class GridMismatch(SpecmaskError):
    pass


class ValidationError(SpecmaskError):
    pass
