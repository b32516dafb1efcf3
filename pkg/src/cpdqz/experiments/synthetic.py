"""Monte Carlo sweeps over rank and SNR on random low-rank tensors."""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from ..algorithms import decompose
from ..metrics import add_noise_snr, factor_match_error, trial_seed
from ..tensor import CpdModel, cpd_reconstruct
from .records import ExperimentRecord, failure_tag

DEFAULT_METHODS = ("cpdqz", "cpdqzs", "gevd")


@dataclass
class SweepConfig:
    """Parameters of a synthetic rank/SNR sweep.

    ``pivot_mode`` is 0-based and only used by ``cpdqzs``.
    """

    order: int = 4
    extents: tuple[int, ...] = (40, 40, 40, 40)
    ranks: tuple[int, ...] = (10,)
    snrs_db: tuple[float, ...] = (40.0,)
    trials: int = 50
    methods: tuple[str, ...] = DEFAULT_METHODS
    seed: int = 0
    pencil: str = "first"
    pivot_mode: int | None = None
    complex_fallback: bool = False
    normalize: bool = False
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.extents = tuple(int(i) for i in self.extents)
        self.ranks = tuple(int(r) for r in self.ranks)
        self.snrs_db = tuple(float(s) for s in self.snrs_db)
        self.methods = tuple(self.methods)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if len(self.extents) != self.order:
            raise ValueError(f"{len(self.extents)} extents given for order {self.order}")
        if not self.ranks or not self.snrs_db or not self.methods:
            raise ValueError("ranks, SNRs and methods must be nonempty")
        if min(self.extents) < max(self.ranks):
            raise ValueError(f"extents {self.extents} must be >= max rank {max(self.ranks)}")

    def as_dict(self) -> dict:
        return asdict(self)


def _snr_key(snr: float) -> int:
    return 2 ** 31 if math.isinf(snr) else int(round(snr * 1000)) % (2 ** 31)


def random_model(extents: Sequence[int], rank: int, rng: np.random.Generator) -> CpdModel:
    """Uniform[0, 1] factors with unit-norm columns."""
    facs = []
    for i in extents:
        u = rng.uniform(0.0, 1.0, size=(i, rank))
        facs.append(u / np.linalg.norm(u, axis=0))
    return CpdModel(tuple(facs))


def method_kwargs(method: str, pencil: str, pivot_mode, complex_fallback: bool, normalize: bool) -> dict:
    kw = {"pencil": pencil, "complex_fallback": complex_fallback, "normalize": normalize}
    if method == "cpdqzs":
        kw["pivot_mode"] = pivot_mode
    return kw


def run_method(method: str, tensor, rank: int, truth: CpdModel, kw: dict, modes=None):
    """Run one decomposition; returns ``(error, wall_time, status, warnings)``."""
    t0 = time.perf_counter()
    try:
        rep = decompose(method, tensor, rank, **kw)
    except Exception as exc:  # noqa: BLE001 - every failure becomes a row
        return math.nan, time.perf_counter() - t0, failure_tag(exc), [str(exc)]
    wall = time.perf_counter() - t0
    err = factor_match_error(truth, rep.model, modes).max_rel_error
    return err, wall, "ok", list(rep.diagnostics.warnings)


def run_synthetic_sweep(config: SweepConfig) -> list[ExperimentRecord]:
    """One record per (rank, SNR, method, trial), in that nesting order.

    Factors of trial ``k`` at rank ``R`` come from the stream
    ``(seed, k, R)`` and are shared by all SNR points; the noise of each SNR
    point has its own stream, so any subset of the sweep reproduces exactly.
    """
    records: list[ExperimentRecord] = []
    for rank in config.ranks:
        per_snr: dict[float, list[ExperimentRecord]] = {s: [] for s in config.snrs_db}
        for trial in range(config.trials):
            rng = np.random.default_rng(trial_seed(config.seed, trial, rank))
            truth = random_model(config.extents, rank, rng)
            clean = cpd_reconstruct(truth)
            for snr in config.snrs_db:
                noisy = add_noise_snr(clean, snr, trial_seed(config.seed, trial, rank, _snr_key(snr)))
                for method in config.methods:
                    kw = method_kwargs(method, config.pencil, config.pivot_mode,
                                       config.complex_fallback, config.normalize)
                    err, wall, status, warns = run_method(method, noisy, rank, truth, kw)
                    per_snr[snr].append(ExperimentRecord(
                        method, {"rank": rank, "snr_db": snr}, trial, {"error": err}, wall, status, warns))
        for snr in config.snrs_db:
            order = {m: i for i, m in enumerate(config.methods)}
            records.extend(sorted(per_snr[snr], key=lambda r: (order[r.method], r.trial)))
    return records
