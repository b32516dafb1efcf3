"""Factor-matching error and SNR-calibrated Gaussian noise."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import errors
from .tensor import COMPLEX, CpdModel, DenseTensor


class MatchResult(NamedTuple):
    max_rel_error: float
    per_factor_errors: list[float]
    permutation: np.ndarray


def _unit_columns(a: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(a, axis=0)
    return a / np.where(nrm > 0, nrm, 1)


def congruence_cost(truth: Sequence[np.ndarray], estimate: Sequence[np.ndarray]) -> np.ndarray:
    """``1 - mean_n |cos(truth_n[:, r], estimate_n[:, c])|`` for every pair ``(r, c)``."""
    sims = [np.abs(_unit_columns(u).conj().T @ _unit_columns(e)) for u, e in zip(truth, estimate)]
    return 1.0 - np.mean(sims, axis=0)


def factor_match_error(truth: CpdModel, estimate: CpdModel,
                       modes: Sequence[int] | None = None) -> MatchResult:
    """Maximal relative factor error after optimal column permutation and scaling.

    One permutation, shared by all modes, maximizes the summed absolute
    column cosines (optimal assignment). Each matched column is then scaled
    by its least-squares optimal scalar, separately per mode.

    ``permutation[r]`` is the estimate column matched to truth column ``r``.
    ``modes`` restricts both matching and error to a subset of the modes.
    """
    if truth.rank != estimate.rank or truth.shape != estimate.shape:
        raise errors.DimMismatch(
            f"cannot match a rank-{estimate.rank} {estimate.shape} model "
            f"to a rank-{truth.rank} {truth.shape} model"
        )
    t_facs = truth.absorb_weights().factors
    e_facs = estimate.absorb_weights().factors
    if modes is None:
        modes = range(truth.order)
    t_facs = [t_facs[n] for n in modes]
    e_facs = [e_facs[n] for n in modes]
    cost = congruence_cost(t_facs, e_facs)
    rows, cols = linear_sum_assignment(cost)
    perm = cols[np.argsort(rows)]
    errs = []
    for u, e in zip(t_facs, e_facs):
        e = e[:, perm]
        den = np.sum(np.abs(e) ** 2, axis=0)
        lam = np.sum(e.conj() * u, axis=0) / np.where(den > 0, den, 1)
        errs.append(float(np.linalg.norm(u - e * lam) / np.linalg.norm(u)))
    return MatchResult(max(errs), errs, perm)


@dataclass(frozen=True)
class NoiseSpec:
    snr_db: float
    seed: int | Sequence[int] | np.random.SeedSequence | None = None


def trial_seed(master_seed: int, *index: int) -> np.random.SeedSequence:
    """Independent, order-free RNG stream for one trial."""
    return np.random.SeedSequence([int(master_seed), *(int(i) for i in index)])


def realized_snr_db(signal: DenseTensor, noisy: DenseTensor) -> float:
    noise = np.linalg.norm((noisy.data - signal.data).ravel())
    if noise == 0:
        return math.inf
    return 20.0 * math.log10(signal.norm() / noise)


def add_noise_snr(t: DenseTensor, spec: NoiseSpec | float, seed=None) -> DenseTensor:
    """``t`` plus Gaussian noise scaled so that ``20 log10(||t|| / ||noise||) = snr_db``.

    Complex tensors receive circularly symmetric noise (independent real and
    imaginary parts). ``snr_db = inf`` returns ``t`` unchanged.
    """
    if not isinstance(spec, NoiseSpec):
        spec = NoiseSpec(float(spec), seed)
    if math.isinf(spec.snr_db) and spec.snr_db > 0:
        return t
    tn = t.norm()
    if tn == 0:
        raise errors.ZeroInput("cannot calibrate noise against a zero tensor")
    rng = spec.seed if isinstance(spec.seed, np.random.Generator) else np.random.default_rng(spec.seed)
    noise = rng.standard_normal(t.shape)
    if t.field == COMPLEX:
        noise = noise + 1j * rng.standard_normal(t.shape)
    scale = tn / (np.linalg.norm(noise.ravel()) * 10.0 ** (spec.snr_db / 20.0))
    return DenseTensor(t.data + scale * noise, t.field)
