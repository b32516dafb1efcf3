"""Exception hierarchy shared by every module of the package."""


class CpdError(Exception):
    """Base class for all errors raised by :mod:`cpdqz`."""


class FieldMismatch(CpdError):
    pass


class OrderMismatch(CpdError):
    pass


class BadMode(CpdError):
    pass


class BadModePartition(CpdError):
    pass


class BadIndex(CpdError):
    pass


class DimMismatch(CpdError):
    pass


class ZeroInput(CpdError):
    pass


class RankDeficient(CpdError):
    pass


class SvdNoConvergence(CpdError):
    pass


class QzNoConvergence(CpdError):
    pass


class RealPencilComplexEigenvalues(CpdError):
    """A real pencil has a complex conjugate eigenvalue pair.

    ``block`` is the (0-based) row/column index of the upper-left corner of
    the offending 2x2 diagonal block.
    """

    def __init__(self, block: int, message: str | None = None):
        self.block = block
        super().__init__(
            message
            or f"2x2 block at position {block} has complex eigenvalues; "
            "the real low-rank model may be inappropriate or the SNR too low"
        )


class SingularPencil(CpdError):
    pass


class IllConditionedEigenvectors(UserWarning):
    """Issued (not raised) when generalized eigenvalues nearly coincide."""


class NotEnoughSlices(CpdError):
    pass


class DegenerateHigherFactors(CpdError):
    pass


class SingularPivotFactor(CpdError):
    pass


class AngleOutOfRange(CpdError):
    pass


class DatasetUnavailable(CpdError):
    pass


class IoError(CpdError):
    pass


class TensorFormatError(CpdError):
    pass


class ZeroColumn(DimMismatch):
    pass
