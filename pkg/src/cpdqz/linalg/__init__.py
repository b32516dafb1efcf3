"""Matrix kernels: QZ, generalized eigenvectors, SVD and least squares."""
from ._backend import BACKEND
from .dense import SvdResult, best_rank1, leading_left_singular_vectors, lstsq, svd
from .qz import EigvecResult, QzResult, generalized_eigvecs, hessenberg_triangular, qz_decompose

__all__ = [
    "BACKEND",
    "EigvecResult",
    "QzResult",
    "SvdResult",
    "best_rank1",
    "generalized_eigvecs",
    "hessenberg_triangular",
    "leading_left_singular_vectors",
    "lstsq",
    "qz_decompose",
    "svd",
]
