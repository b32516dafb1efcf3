"""Rank-3 decomposition of excitation-emission fluorescence data."""
from __future__ import annotations

import os
from typing import Sequence

import numpy as np

from ..algorithms import decompose
from ..errors import CpdError, DatasetUnavailable
from ..metrics import add_noise_snr, trial_seed
from ..tensor import CpdModel, DenseTensor, cpd_reconstruct
from ..tensorio import read_tensor
from .records import ExperimentRecord
from .synthetic import method_kwargs, run_method

SHAPE = (5, 201, 61)
RANK = 3


def load_fluorescence(path: str | os.PathLike) -> DenseTensor:
    """Read the 5 x 201 x 61 tensor file, raising ``DatasetUnavailable`` if absent or malformed."""
    if path is None or not os.path.isfile(path):
        raise DatasetUnavailable(f"fluorescence tensor file not found: {path}")
    try:
        t = read_tensor(path)
    except CpdError as exc:
        raise DatasetUnavailable(f"unreadable fluorescence tensor {path}: {exc}") from exc
    if t.shape != SHAPE:
        raise DatasetUnavailable(f"fluorescence tensor has shape {t.shape}, expected {SHAPE}")
    return t


def synthetic_fluorescence(seed: int = 0) -> CpdModel:
    """Smooth nonnegative rank-3 stand-in of size 5 x 201 x 61.

    Emission and excitation profiles are Gaussian bumps (one per component)
    and concentrations are uniform on [0.1, 1].
    """
    rng = np.random.default_rng(seed)
    em_axis = np.linspace(0.0, 1.0, SHAPE[1])
    ex_axis = np.linspace(0.0, 1.0, SHAPE[2])
    em_centers, em_widths = (0.25, 0.45, 0.65), (0.08, 0.10, 0.12)
    ex_centers, ex_widths = (0.30, 0.50, 0.70), (0.10, 0.12, 0.09)
    em = np.stack([np.exp(-0.5 * ((em_axis - c) / w) ** 2) for c, w in zip(em_centers, em_widths)], axis=1)
    ex = np.stack([np.exp(-0.5 * ((ex_axis - c) / w) ** 2) for c, w in zip(ex_centers, ex_widths)], axis=1)
    conc = rng.uniform(0.1, 1.0, size=(SHAPE[0], RANK))
    return CpdModel((conc, em, ex))


def run_fluorescence_experiment(path: str | os.PathLike | None, snr_grid: Sequence[float], trials: int,
                                methods: Sequence[str] = ("cpdqzs", "gevd"), *, seed: int = 0,
                                synthetic_fallback: bool = False, pencil: str = "first",
                                pivot_mode: int | None = None, complex_fallback: bool = False,
                                normalize: bool = False) -> tuple[list[ExperimentRecord], str]:
    """Mode-0 factor error of rank-3 decompositions under added noise.

    With a data file, each method's reference is its own decomposition of
    the clean tensor. Without one, ``DatasetUnavailable`` is raised unless
    ``synthetic_fallback`` is set, in which case the synthetic stand-in is
    used and its generating factors are the reference.

    Returns the records and the name of the data source.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    try:
        clean = load_fluorescence(path)
        refs = {}
        for m in methods:
            kw = method_kwargs(m, pencil, pivot_mode, complex_fallback, normalize)
            refs[m] = decompose(m, clean, RANK, **kw).model
        source = str(path)
    except DatasetUnavailable:
        if not synthetic_fallback:
            raise
        truth = synthetic_fluorescence(seed)
        clean = cpd_reconstruct(truth)
        refs = dict.fromkeys(methods, truth)
        source = "synthetic"
    order = {m: i for i, m in enumerate(methods)}
    records: list[ExperimentRecord] = []
    for snr_i, snr in enumerate(snr_grid):
        block = []
        for trial in range(trials):
            noisy = add_noise_snr(clean, snr, trial_seed(seed, trial, snr_i + 1))
            for m in methods:
                kw = method_kwargs(m, pencil, pivot_mode, complex_fallback, normalize)
                err, wall, status, warns = run_method(m, noisy, RANK, refs[m], kw, modes=[0])
                block.append(ExperimentRecord(m, {"snr_db": float(snr)}, trial, {"mode0_error": err},
                                              wall, status, warns))
        records.extend(sorted(block, key=lambda r: (order[r.method], r.trial)))
    return records, source

