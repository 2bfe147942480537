# -*- coding: utf-8 -*-
"""
Defines the exceptions of the planning and compression business logic.
"""


class QuantizationError(ValueError):
    """
    A feature map cannot be quantized, e.g. because of an invalid bit-depth or
    a non-finite value.
    """
    pass


class CodecError(ValueError):
    """
    A quantized map cannot be encoded or a block cannot be decoded.
    """
    pass


class TruncatedPayloadError(CodecError):
    """
    The block ends before all declared symbols have been decoded.
    """

    def __init__(self, detail=None):
        message = 'truncated payload'
        if detail:
            message = '{0}: {1}'.format(message, detail)
        super(TruncatedPayloadError, self).__init__(message)


class InvalidCodeError(CodecError):
    """
    The code-length table does not describe a prefix-free code.
    """

    def __init__(self, detail=None):
        message = 'invalid code'
        if detail:
            message = '{0}: {1}'.format(message, detail)
        super(InvalidCodeError, self).__init__(message)


class SymbolCountError(CodecError):
    """
    The declared symbol count does not match the shape or the payload.
    """
    pass


class AlphabetTooLargeError(CodecError):
    """
    The bit-depth exceeds the alphabet supported by the block header.
    """
    pass


class InvalidHeaderError(CodecError):
    """
    A block header field is out of range, e.g. a bit-depth of 0 or a
    minimum above the maximum.
    """
    pass


class TableError(ValueError):
    """
    Lookup tables cannot be built or queried.
    """
    pass


class CoverageError(TableError):
    """
    Calibration records do not cover every requested (layer, bit-depth) cell.
    """

    def __init__(self, missing):
        super(CoverageError, self).__init__(
            'no calibration records for cells {0}'.format(
                ', '.join('({0},{1})'.format(i, c) for i, c in missing)))
        self.missing = missing


class OutOfGridError(TableError):
    """
    A lookup addressed a cell outside the table grid.
    """
    pass


class LatencyModelError(ValueError):
    """
    A latency model cannot be constructed from the given profiles.
    """
    pass


class PlanningError(ValueError):
    """
    A decision grid cannot be built or solved.
    """
    pass


class DimensionMismatchError(PlanningError):
    pass


class BandwidthError(PlanningError):
    """
    The bandwidth is not strictly positive.
    """
    pass


class InfeasibleGridError(PlanningError):
    """
    No cell of the decision grid satisfies the accuracy constraint. The
    all-cloud row makes this a programming error.
    """
    pass


class SimulationError(ValueError):
    """
    A scenario cannot be simulated.
    """

    def __init__(self, diagnostics):
        super(SimulationError, self).__init__(
            'invalid scenario: {0}'.format('; '.join(diagnostics)))
        self.diagnostics = diagnostics


class GeneratorError(ValueError):
    """
    A synthetic generator spec is inconsistent.
    """
    pass
