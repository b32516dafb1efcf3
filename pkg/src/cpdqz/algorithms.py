"""Algebraic CPD algorithms: CPDQZ, CPDQZS and the GEVD baseline.

All three share the same front end: an MLSVD compresses the tensor to a
``R x R x R_2 x ... x R_{N-1}`` core, and a matrix pencil is taken from the
core's slices. They differ in how the factors are read off afterwards.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import errors
from .linalg import best_rank1, generalized_eigvecs, leading_left_singular_vectors, lstsq, qz_decompose
from .tensor import (
    COMPLEX,
    CpdModel,
    DenseTensor,
    general_unfold,
    khatri_rao_chain,
    mode_product,
    reshape_to_order3,
    subtensor3,
)

PIVOT_RANK_TOL = 1e-10


@dataclass(frozen=True)
class MlsvdResult:
    core: DenseTensor
    mode_factors: tuple[np.ndarray, ...]

    def expand(self) -> DenseTensor:
        t = self.core
        for n, f in enumerate(self.mode_factors):
            t = mode_product(t, f, n)
        return t


def mlsvd_compress(m: DenseTensor, target_ranks: Sequence[int]) -> MlsvdResult:
    """Truncated multilinear SVD.

    Mode factor ``n`` holds the ``target_ranks[n]`` leading left singular
    vectors of the mode-``n`` unfolding; the core is ``m`` multiplied by the
    conjugate transposed factors in every mode.
    """
    target_ranks = [int(r) for r in target_ranks]
    if len(target_ranks) != m.order:
        raise errors.DimMismatch(f"need {m.order} target ranks, got {len(target_ranks)}")
    for n, (r, i) in enumerate(zip(target_ranks, m.shape)):
        if not 1 <= r <= i:
            raise errors.DimMismatch(f"target rank {r} invalid for mode {n} of extent {i}")
    factors = []
    for n, r in enumerate(target_ranks):
        unf = np.reshape(np.moveaxis(m.data, n, 0), (m.shape[n], -1), order="F")
        factors.append(np.ascontiguousarray(leading_left_singular_vectors(unf, r)))
    core = m
    for n, f in enumerate(factors):
        core = mode_product(core, f.conj().T, n)
    return MlsvdResult(core, tuple(factors))


@dataclass(frozen=True)
class PencilChoice:
    strategy: str
    m1: np.ndarray
    m2: np.ndarray
    coefficients: np.ndarray | None = None


def parse_pencil(spec: str | None) -> tuple[str, int | None]:
    """``"first"`` or ``"random:SEED"``."""
    if spec is None or spec in ("first", "first_two_core_slices"):
        return "first", None
    if spec.startswith("random"):
        _, _, seed = spec.partition(":")
        return "random", int(seed) if seed else 0
    raise ValueError(f"unknown pencil strategy {spec!r}")


def select_pencil(core: DenseTensor, choice: str | None = "first") -> PencilChoice:
    """Two R x R matrices built from the slices ``core[:, :, i_2, ..., i_{N-1}]``.

    ``"first"`` takes the first two slices in column-major order of the
    trailing indices; ``"random:SEED"`` takes two independent combinations of
    all slices with standard normal coefficients.
    """
    if core.order < 3:
        raise errors.OrderMismatch("pencil selection needs an order >= 3 core")
    if core.shape[0] != core.shape[1]:
        raise errors.DimMismatch(f"core must be R x R x ..., got {core.shape}")
    strategy, seed = parse_pencil(choice)
    slices = reshape_to_order3(core).data
    k = slices.shape[2]
    if k < 2:
        raise errors.NotEnoughSlices(f"only {k} slice available; a pencil needs two")
    if strategy == "first":
        return PencilChoice("first", slices[:, :, 0].copy(), slices[:, :, 1].copy())
    coef = np.random.default_rng(seed).standard_normal((k, 2))
    m1 = slices @ coef[:, 0]
    m2 = slices @ coef[:, 1]
    return PencilChoice(f"random:{seed}", m1, m2, coef)


def extract_diag_factors(t_qz: DenseTensor, modes: Sequence[int] | None = None) -> list[np.ndarray]:
    """Read factors off the diagonals of a triangularized tensor.

    For each mode ``n >= 2`` the returned ``R_n x R`` matrix has column ``r``
    equal to the fiber ``t_qz[r, r, 0, ..., :, ..., 0]`` (free index in mode
    ``n``). Columns carry an arbitrary scaling.
    """
    if modes is None:
        modes = range(2, t_qz.order)
    r = min(t_qz.shape[:2])
    idx = np.arange(r)
    out = []
    for n in modes:
        sub = subtensor3(t_qz, n).data
        out.append(np.ascontiguousarray(sub[idx, idx, :].T))
    return out


def _peel(vec: np.ndarray, dims: Sequence[int]) -> tuple[list[np.ndarray], float]:
    """Split a Kronecker-structured vector into per-mode vectors.

    ``vec`` is indexed column-major over ``dims``; the highest mode is split
    off first by a dominant singular triplet, then the remainder recursively.
    The overall scale ends up on ``dims[0]``'s vector.
    """
    out: list[np.ndarray | None] = [None] * len(dims)
    rest = vec
    for n in range(len(dims) - 1, 0, -1):
        mat = np.reshape(rest, (-1, dims[n]), order="F")
        u, sigma, v = best_rank1(mat)
        out[n] = v.conj()
        rest = sigma * u
    out[0] = rest
    approx = out[0]
    for n in range(1, len(dims)):
        approx = np.kron(out[n], approx)
    resid = float(np.linalg.norm(vec - approx) / np.linalg.norm(vec))
    return out, resid


def recover_first_two_factors(m: DenseTensor, higher_factors: Sequence[np.ndarray]):
    """Solve for ``U1 ⊙ U0`` given factors of modes 2..N-1, then split each column.

    Returns
    -------
    u0, u1 : ndarray
        First and second factor (the scale sits on ``u0``).
    residuals : list of float
        Relative rank-1 residual of every reshaped column.
    """
    n_modes = m.order
    if len(higher_factors) != n_modes - 2:
        raise errors.DimMismatch(f"expected {n_modes - 2} higher factors")
    kr = khatri_rao_chain(list(higher_factors)[::-1])
    rhs = general_unfold(m, list(range(n_modes - 1, 1, -1)), [1, 0])
    try:
        x = lstsq(kr, rhs)
    except errors.RankDeficient as exc:
        raise errors.DegenerateHigherFactors(str(exc)) from exc
    dims = m.shape[:2]
    return _split_columns(x, dims)


def _split_columns(x: np.ndarray, dims: Sequence[int]):
    rank = x.shape[0]
    facs = [np.empty((d, rank), dtype=np.result_type(x, np.float64)) for d in dims]
    residuals = []
    for r in range(rank):
        vecs, res = _peel(x[r], dims)
        for f, v in zip(facs, vecs):
            f[:, r] = v
        residuals.append(res)
    return (*facs, residuals)


def _recover_from_pivot(core: DenseTensor, pivot: int, u_pivot: np.ndarray):
    """All factors except ``pivot`` from the unfolding against the pivot factor."""
    others = [n for n in range(core.order) if n != pivot]
    rhs = general_unfold(core, [pivot], others[::-1])
    sv = np.linalg.svd(u_pivot, compute_uv=False)
    if u_pivot.shape[0] != u_pivot.shape[1] or sv[-1] <= PIVOT_RANK_TOL * sv[0]:
        raise errors.SingularPivotFactor(
            f"pivot factor of mode {pivot} is singular (sigma_min/sigma_max = {sv[-1] / sv[0]:.2e})"
        )
    x = lstsq(u_pivot, rhs)
    *facs, residuals = _split_columns(x, [core.shape[n] for n in others])
    out = dict(zip(others, facs))
    out[pivot] = u_pivot
    return [out[n] for n in range(core.order)], residuals


@dataclass
class Diagnostics:
    method: str
    pencil: str = "first"
    qz_sweeps: int = 0
    promoted_to_complex: bool = False
    rank1_residuals: list[float] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class DecompositionReport:
    model: CpdModel
    diagnostics: Diagnostics


def _check_input(m: DenseTensor, rank: int) -> None:
    if m.order < 3:
        raise errors.OrderMismatch(f"algebraic CPD needs order >= 3, got {m.order}")
    if not 1 <= rank <= min(m.shape[:2]):
        raise errors.DimMismatch(f"rank {rank} must satisfy 1 <= R <= min(I0, I1) = {min(m.shape[:2])}")


def _front_end(m: DenseTensor, rank: int, pencil: str | None):
    targets = [rank, rank] + [min(rank, i) for i in m.shape[2:]]
    mls = mlsvd_compress(m, targets)
    if rank == 1:
        # a 1 x 1 pencil is triangular as it stands; the core has a single slice
        c = mls.core.data.reshape(1, -1)[:, :1]
        return mls, PencilChoice("trivial", c.copy(), np.ones_like(c))
    return mls, select_pencil(mls.core, pencil)


def _finish(mls: MlsvdResult, core_factors, diag: Diagnostics, normalize: bool) -> DecompositionReport:
    facs = tuple(f @ u for f, u in zip(mls.mode_factors, core_factors))
    model = CpdModel(facs)
    if normalize:
        model = model.normalized()
    return DecompositionReport(model, diag)


def _triangularize(core: DenseTensor, pc: PencilChoice, complex_fallback: bool, diag: Diagnostics):
    qz = qz_decompose(pc.m1, pc.m2, complex_fallback=complex_fallback)
    diag.qz_sweeps = qz.sweeps
    if qz.promoted:
        diag.promoted_to_complex = True
        diag.warnings.append(
            "real pencil had complex eigenvalues; continued in complex arithmetic, "
            "factors may carry complex phases"
        )
    if np.iscomplexobj(qz.q) and core.field != COMPLEX:
        core = core.to_complex()
    t_qz = mode_product(mode_product(core, qz.q, 0), qz.z.T, 1)
    return core, t_qz


def cpdqz(m: DenseTensor, rank: int, *, pencil: str | None = "first",
          complex_fallback: bool = False, normalize: bool = False) -> DecompositionReport:
    """Rank-``rank`` CPD by one QZ decomposition.

    Factors of modes 2..N-1 are read from the diagonals of the triangularized
    core; the first two come from a least-squares solve against their
    Khatri-Rao product followed by rank-1 splitting.
    """
    _check_input(m, rank)
    mls, pc = _front_end(m, rank, pencil)
    diag = Diagnostics("cpdqz", pc.strategy)
    core, t_qz = _triangularize(mls.core, pc, complex_fallback, diag)
    highers = extract_diag_factors(t_qz)
    u0, u1, residuals = recover_first_two_factors(core, highers)
    diag.rank1_residuals = residuals
    return _finish(mls, [u0, u1, *highers], diag, normalize)


def cpdqzs(m: DenseTensor, rank: int, pivot_mode: int | None = None, *, pencil: str | None = "first",
           complex_fallback: bool = False, normalize: bool = False) -> DecompositionReport:
    """Rank-``rank`` CPD reading only the pivot factor from the QZ form.

    ``pivot_mode`` (default: the last mode) must satisfy ``R_pivot = R`` with
    an invertible factor. The remaining factors come from a least-squares
    solve against it and rank-1 peeling.
    """
    _check_input(m, rank)
    if pivot_mode is None:
        pivot_mode = m.order - 1
    if not 2 <= pivot_mode < m.order:
        raise errors.BadMode(f"pivot mode {pivot_mode} must lie in [2, {m.order - 1}]")
    if m.shape[pivot_mode] < rank:
        raise errors.SingularPivotFactor(
            f"mode {pivot_mode} has extent {m.shape[pivot_mode]} < R = {rank}; its factor cannot be invertible"
        )
    mls, pc = _front_end(m, rank, pencil)
    diag = Diagnostics("cpdqzs", pc.strategy)
    core, t_qz = _triangularize(mls.core, pc, complex_fallback, diag)
    (u_pivot,) = extract_diag_factors(t_qz, [pivot_mode])
    core_factors, residuals = _recover_from_pivot(core, pivot_mode, u_pivot)
    diag.rank1_residuals = residuals
    return _finish(mls, core_factors, diag, normalize)


def gevd(m: DenseTensor, rank: int, *, pencil: str | None = "first",
         complex_fallback: bool = False, normalize: bool = False) -> DecompositionReport:
    """Baseline CPD from the generalized eigenvectors of the pencil.

    The second factor is the inverse transpose of the eigenvector matrix;
    the others are recovered as in :func:`cpdqzs` with mode 1 as pivot.
    """
    _check_input(m, rank)
    mls, pc = _front_end(m, rank, pencil)
    diag = Diagnostics("gevd", pc.strategy)
    eig = generalized_eigvecs(pc.m1, pc.m2, complex_fallback=complex_fallback)
    diag.qz_sweeps = eig.qz.sweeps
    diag.warnings.extend(eig.warnings)
    core = mls.core
    if eig.qz.promoted:
        diag.promoted_to_complex = True
        diag.warnings.append("real pencil had complex eigenvalues; continued in complex arithmetic")
        core = core.to_complex()
    try:
        u1 = np.linalg.inv(eig.vectors).T
    except np.linalg.LinAlgError as exc:
        raise errors.SingularPencil("eigenvector matrix is singular") from exc
    core_factors, residuals = _recover_from_pivot(core, 1, u1)
    diag.rank1_residuals = residuals
    return _finish(mls, core_factors, diag, normalize)


METHODS = {"cpdqz": cpdqz, "cpdqzs": cpdqzs, "gevd": gevd}


def decompose(method: str, m: DenseTensor, rank: int, *, pivot_mode: int | None = None,
              **kwargs) -> DecompositionReport:
    """Dispatch by method name (``cpdqz``, ``cpdqzs`` or ``gevd``)."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(METHODS)}")
    if method == "cpdqzs":
        return cpdqzs(m, rank, pivot_mode, **kwargs)
    return METHODS[method](m, rank, **kwargs)
