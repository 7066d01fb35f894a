#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
laplace_hdc.core.exceptions
===========================

Exceptions thrown by other laplace_hdc modules
"""


class ConfigurationError(Exception):
    """User-provided configuration contains an error"""


class KernelConfigError(ConfigurationError):
    """Kernel parameters are outside of the admissible family"""


class PermutationLayoutError(ConfigurationError):
    """Permutation family layout violates its divisibility or range constraints"""


class ParametersError(ConfigurationError):
    """Incomplete or wrong run parameters"""


class NumericsError(Exception):
    """Dense linear algebra or sampling failed"""


class EigenSolverError(NumericsError):
    """Symmetric eigendecomposition is not possible or did not converge"""


class SizeOverflowError(NumericsError):
    """Requested matrix does not fit into an entry buffer"""


class DegenerateDataError(Exception):
    """Data carry no usable distance information"""


class EncodingError(Exception):
    """Feature vectors or hypervectors do not match the encoder"""


class TrainingError(Exception):
    """Training data cannot produce a class model"""


class DataFormatError(Exception):
    """Input or model file is malformed"""


class IdxMagicError(DataFormatError):
    """IDX file does not start with the expected magic number"""


class TruncatedFileError(DataFormatError):
    """File ends before its header says it should"""


class CountMismatchError(DataFormatError):
    """Image and label files disagree on the number of items"""


class ModelVersionError(DataFormatError):
    """Model file was written by an unsupported format version"""


class CorruptModelError(DataFormatError):
    """Model file payload fails its length checks"""


class StageError(Exception):
    """A pipeline stage failed"""

    def __init__(self, stage, error):
        super().__init__(f'stage "{stage}" failed: {error}')
        self.stage = stage
        self.error = error
