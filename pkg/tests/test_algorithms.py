import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpdqz import errors
from cpdqz.algorithms import (
    _front_end,
    _triangularize,
    Diagnostics,
    cpdqz,
    cpdqzs,
    decompose,
    extract_diag_factors,
    gevd,
    mlsvd_compress,
    recover_first_two_factors,
    select_pencil,
)
from cpdqz.metrics import factor_match_error
from cpdqz.tensor import CpdModel, DenseTensor, cpd_reconstruct, frontal_slice, mode_product, subtensor3

from conftest import rand_matrix

METHODS = (cpdqz, cpdqzs, gevd)


def random_cpd(rng, shape, rank, cplx=False, uniform=False):
    if uniform:
        facs = [rng.uniform(0, 1, (n, rank)) for n in shape]
        facs = [f / np.linalg.norm(f, axis=0) for f in facs]
    else:
        facs = [rand_matrix(rng, n, rank, cplx) for n in shape]
    model = CpdModel(tuple(facs))
    return model, cpd_reconstruct(model)


def column_match(a, b):
    """For every column of ``b``, the index of the best aligned column of ``a``."""
    an = a / np.linalg.norm(a, axis=0)
    bn = b / np.linalg.norm(b, axis=0)
    return np.abs(an.conj().T @ bn).argmax(axis=0)


class TestMlsvd:
    def test_rank2_expansion(self):
        rng = np.random.default_rng(0)
        _, t = random_cpd(rng, (6, 6, 6), 2)
        res = mlsvd_compress(t, [2, 2, 2])
        assert res.core.shape == (2, 2, 2)
        assert np.linalg.norm(res.expand().data - t.data) <= 1e-12 * t.norm()
        for f in res.mode_factors:
            assert np.linalg.norm(f.conj().T @ f - np.eye(f.shape[1])) <= 1e-12 * np.sqrt(f.shape[1])

    def test_full_ranks(self):
        rng = np.random.default_rng(1)
        t = DenseTensor(rand_matrix(rng, 3, 20, True).reshape(3, 4, 5))
        res = mlsvd_compress(t, t.shape)
        for f in res.mode_factors:
            np.testing.assert_allclose(f.conj().T @ f, np.eye(f.shape[0]), atol=1e-12)
        assert res.core.norm() == pytest.approx(t.norm(), rel=1e-12)

    def test_rank1_scalar_core(self):
        rng = np.random.default_rng(2)
        _, t = random_cpd(rng, (3, 4, 5), 1)
        res = mlsvd_compress(t, [1, 1, 1])
        assert abs(res.core.data.item()) == pytest.approx(t.norm(), rel=1e-12)

    def test_wide_unfolding_path(self):
        # extents large enough that the Gram route is taken on every mode
        rng = np.random.default_rng(3)
        _, t = random_cpd(rng, (7, 7, 7, 7), 3, cplx=True)
        res = mlsvd_compress(t, [3, 3, 3, 3])
        assert np.linalg.norm(res.expand().data - t.data) <= 1e-12 * t.norm()

    def test_target_too_large(self):
        with pytest.raises(errors.DimMismatch):
            mlsvd_compress(DenseTensor(np.ones((2, 2, 2))), [3, 2, 2])


class TestPencil:
    def test_default_first_slices(self):
        rng = np.random.default_rng(4)
        core = DenseTensor(rng.standard_normal((3, 3, 4)))
        pc = select_pencil(core)
        np.testing.assert_array_equal(pc.m1, frontal_slice(core, 0))
        np.testing.assert_array_equal(pc.m2, frontal_slice(core, 1))

    def test_default_order4_uses_mode2_fastest(self):
        rng = np.random.default_rng(5)
        core = DenseTensor(rng.standard_normal((2, 2, 3, 2)))
        pc = select_pencil(core)
        np.testing.assert_array_equal(pc.m2, core.data[:, :, 1, 0])

    def test_random_deterministic(self):
        rng = np.random.default_rng(6)
        core = DenseTensor(rng.standard_normal((3, 3, 4)))
        a, b = select_pencil(core, "random:7"), select_pencil(core, "random:7")
        assert np.array_equal(a.m1, b.m1) and np.array_equal(a.m2, b.m2)
        assert not np.array_equal(a.m1, select_pencil(core, "random:8").m1)

    def test_random_combination_structure(self):
        rng = np.random.default_rng(7)
        u1, u2, w = rng.standard_normal((3, 3)), rng.standard_normal((3, 3)), rng.standard_normal((5, 3))
        core = cpd_reconstruct(CpdModel((u1, u2, w)))
        pc = select_pencil(core, "random:3")
        for m, c in ((pc.m1, pc.coefficients[:, 0]), (pc.m2, pc.coefficients[:, 1])):
            np.testing.assert_allclose(m, u1 @ np.diag(w.T @ c) @ u2.T, atol=1e-12)

    def test_not_enough_slices(self):
        with pytest.raises(errors.NotEnoughSlices):
            select_pencil(DenseTensor(np.ones((2, 2, 1))))

    def test_unknown_strategy(self):
        with pytest.raises(ValueError):
            select_pencil(DenseTensor(np.ones((2, 2, 2))), "best")


class TestExtractDiag:
    def test_triangular_construction(self):
        rng = np.random.default_rng(8)
        u1 = np.triu(rng.standard_normal((4, 4))) + 2 * np.eye(4)
        u2 = np.tril(rng.standard_normal((4, 4))) + 2 * np.eye(4)
        u3 = rng.standard_normal((3, 4))
        t = cpd_reconstruct(CpdModel((u1, u2, u3)))
        for k in range(3):
            assert np.abs(np.tril(frontal_slice(t, k), -1)).max() <= 1e-14
        (est,) = extract_diag_factors(t)
        np.testing.assert_allclose(est, u3 * (np.diag(u1) * np.diag(u2)), atol=1e-13)

    def test_rank1(self):
        t = DenseTensor(np.arange(1.0, 4.0).reshape(1, 1, 3))
        np.testing.assert_array_equal(extract_diag_factors(t)[0][:, 0], [1, 2, 3])

    def test_after_qz_random(self):
        rng = np.random.default_rng(9)
        truth, t = random_cpd(rng, (5, 5, 4), 3)
        mls, pc = _front_end(t, 3, "first")
        _, t_qz = _triangularize(mls.core, pc, False, Diagnostics("test"))
        (u3,) = extract_diag_factors(t_qz)
        est = mls.mode_factors[2] @ u3
        perm = column_match(est, truth.factors[2])
        for r in range(3):
            e, u = est[:, perm[r]], truth.factors[2][:, r]
            lam = (e.conj() @ u) / (e.conj() @ e)
            assert np.linalg.norm(u - lam * e) <= 1e-10 * np.linalg.norm(u)


class TestRecoverFirstTwo:
    def test_exact_rank2(self):
        rng = np.random.default_rng(10)
        truth, t = random_cpd(rng, (4, 4, 3), 2)
        u0, u1, res = recover_first_two_factors(t, [truth.factors[2]])
        est = CpdModel((u0, u1, truth.factors[2]))
        assert factor_match_error(truth, est).max_rel_error <= 1e-10
        assert len(res) == 2 and max(res) <= 1e-12

    def test_rank1_residual_zero(self):
        rng = np.random.default_rng(11)
        truth, t = random_cpd(rng, (3, 4, 2), 1)
        u0, u1, res = recover_first_two_factors(t, [truth.factors[2]])
        assert res[0] <= 1e-14
        np.testing.assert_allclose(np.outer(u0[:, 0], u1[:, 0]) * 1.0,
                                   np.outer(truth.factors[0][:, 0], truth.factors[1][:, 0]), atol=1e-13)

    def test_degenerate_higher_factors(self):
        rng = np.random.default_rng(12)
        u3 = np.ones((3, 2))
        t = cpd_reconstruct(CpdModel((rng.standard_normal((3, 2)), rng.standard_normal((3, 2)), u3)))
        with pytest.raises(errors.DegenerateHigherFactors):
            recover_first_two_factors(t, [u3])


class TestNoiselessExactness:
    def test_cpdqz_rank5_order4(self):
        rng = np.random.default_rng(13)
        truth, t = random_cpd(rng, (10, 10, 10, 10), 5)
        rep = cpdqz(t, 5)
        assert factor_match_error(truth, rep.model).max_rel_error <= 1e-8
        assert len(rep.diagnostics.rank1_residuals) == 5

    def test_cpdqzs_rank4_order4(self):
        rng = np.random.default_rng(14)
        truth, t = random_cpd(rng, (8, 8, 8, 8), 4)
        assert factor_match_error(truth, cpdqzs(t, 4).model).max_rel_error <= 1e-8

    def test_gevd_rank3_order3(self):
        rng = np.random.default_rng(15)
        truth, t = random_cpd(rng, (6, 6, 6), 3)
        assert factor_match_error(truth, gevd(t, 3).model).max_rel_error <= 1e-8

    def test_gevd_agrees_with_cpdqz(self):
        rng = np.random.default_rng(16)
        _, t = random_cpd(rng, (6, 7, 5, 4), 3)
        assert factor_match_error(cpdqz(t, 3).model, gevd(t, 3).model).max_rel_error <= 1e-8

    @pytest.mark.parametrize("method", METHODS, ids=lambda f: f.__name__)
    @pytest.mark.parametrize("shape", [(4, 3, 5), (3, 4, 2, 3)])
    def test_rank1(self, method, shape):
        rng = np.random.default_rng(17)
        truth, t = random_cpd(rng, shape, 1)
        assert factor_match_error(truth, method(t, 1).model).max_rel_error <= 1e-12

    @pytest.mark.parametrize("method", METHODS, ids=lambda f: f.__name__)
    def test_complex(self, method):
        rng = np.random.default_rng(18)
        truth, t = random_cpd(rng, (6, 5, 4, 5), 4, cplx=True)
        assert factor_match_error(truth, method(t, 4).model).max_rel_error <= 1e-8

    def test_random_pencil(self):
        rng = np.random.default_rng(19)
        truth, t = random_cpd(rng, (6, 6, 6, 6), 4)
        rep = cpdqzs(t, 4, pencil="random:5")
        assert rep.diagnostics.pencil == "random:5"
        assert factor_match_error(truth, rep.model).max_rel_error <= 1e-8

    def test_pivot_mode(self):
        rng = np.random.default_rng(20)
        truth, t = random_cpd(rng, (6, 6, 6, 6), 4)
        assert factor_match_error(truth, cpdqzs(t, 4, pivot_mode=2).model).max_rel_error <= 1e-8

    def test_normalize(self):
        rng = np.random.default_rng(21)
        truth, t = random_cpd(rng, (5, 5, 5), 3)
        m = cpdqz(t, 3, normalize=True).model
        assert m.weights is not None
        for f in m.factors:
            np.testing.assert_allclose(np.linalg.norm(f, axis=0), 1)
        assert np.linalg.norm(cpd_reconstruct(m).data - t.data) <= 1e-10 * t.norm()

    @settings(max_examples=25, deadline=None)
    @given(order=st.integers(3, 4), rank=st.integers(2, 6), seed=st.integers(0, 2 ** 32 - 1))
    def test_exact_property(self, order, rank, seed):
        rng = np.random.default_rng(seed)
        shape = tuple(int(n) for n in rng.integers(rank, rank + 3, order))
        truth, t = random_cpd(rng, shape, rank, uniform=True)
        for method in METHODS:
            assert factor_match_error(truth, method(t, rank).model).max_rel_error <= 1e-7


class TestOrder3Equivalence:
    @settings(max_examples=25, deadline=None)
    @given(rank=st.integers(1, 6), cplx=st.booleans(), snr=st.sampled_from([np.inf, 20.0]),
           seed=st.integers(0, 2 ** 32 - 1))
    def test_identical(self, rank, cplx, snr, seed):
        from cpdqz.metrics import add_noise_snr
        rng = np.random.default_rng(seed)
        shape = tuple(int(n) for n in rng.integers(max(rank, 2), rank + 4, 3))
        _, t = random_cpd(rng, shape, rank, cplx=cplx)
        t = add_noise_snr(t, snr, rng)
        try:
            a = cpdqz(t, rank, complex_fallback=True).model
        except errors.CpdError:
            return
        b = cpdqzs(t, rank, complex_fallback=True).model
        for x, y in zip(a.factors, b.factors):
            assert np.max(np.abs(x - y)) <= 1e-12 * np.max(np.abs(x))


class TestStructure:
    def _qz_state(self, seed, shape, rank):
        rng = np.random.default_rng(seed)
        truth, t = random_cpd(rng, shape, rank)
        mls, pc = _front_end(t, rank, "first")
        diag = Diagnostics("test")
        core, t_qz = _triangularize(mls.core, pc, False, diag)
        return truth, mls, core, t_qz

    @pytest.mark.parametrize("shape,rank", [((6, 6, 6), 4), ((7, 6, 5, 4), 4), ((5, 5, 3, 3, 2), 3)])
    def test_triangularization_invariant(self, shape, rank):
        _, _, core, t_qz = self._qz_state(22, shape, rank)
        cn = core.norm()
        for n in range(2, t_qz.order):
            sub = subtensor3(t_qz, n)
            for k in range(sub.shape[2]):
                assert np.abs(np.tril(frontal_slice(sub, k), -1)).max(initial=0) <= 1e-8 * cn

    def test_triangular_factor_structure(self):
        truth, mls, core, t_qz = self._qz_state(23, (6, 6, 5, 5), 4)
        qz_from = select_pencil(mls.core)
        from cpdqz.linalg import qz_decompose
        qz = qz_decompose(qz_from.m1, qz_from.m2)
        u0c = mls.mode_factors[0].conj().T @ truth.factors[0]
        u1c = mls.mode_factors[1].conj().T @ truth.factors[1]
        u2c = mls.mode_factors[2].conj().T @ truth.factors[2]
        (diag2,) = extract_diag_factors(t_qz, [2])
        # truth column sitting at each diagonal position
        sigma = column_match(u2c, diag2)
        upper = (qz.q @ u0c)[:, sigma]
        lower = (qz.z.T @ u1c)[:, sigma]
        assert np.abs(np.tril(upper, -1)).max() <= 1e-8 * np.abs(upper).max()
        assert np.abs(np.triu(lower, 1)).max() <= 1e-8 * np.abs(lower).max()

    def test_unitary_invariance(self):
        rng = np.random.default_rng(24)
        truth, t = random_cpd(rng, (6, 6, 5, 5), 4)
        v1, _ = np.linalg.qr(rand_matrix(rng, 6, 6, True))
        v2, _ = np.linalg.qr(rand_matrix(rng, 6, 6, True))
        t2 = mode_product(mode_product(t.to_complex(), v1, 0), v2, 1)
        a = cpdqz(t, 4).model
        b = cpdqz(t2, 4).model
        sub_a = CpdModel(a.factors[2:])
        sub_b = CpdModel(b.factors[2:])
        assert factor_match_error(sub_a, sub_b).max_rel_error <= 1e-9


class TestErrors:
    def test_order2(self):
        with pytest.raises(errors.OrderMismatch):
            cpdqz(DenseTensor(np.ones((3, 3))), 2)

    def test_rank_too_big(self):
        with pytest.raises(errors.DimMismatch):
            cpdqz(DenseTensor(np.ones((2, 3, 3))), 3)

    def test_pivot_extent_too_small(self):
        rng = np.random.default_rng(25)
        _, t = random_cpd(rng, (5, 5, 5, 2), 3)
        with pytest.raises(errors.SingularPivotFactor):
            cpdqzs(t, 3)

    def test_pivot_mode_range(self):
        with pytest.raises(errors.BadMode):
            cpdqzs(DenseTensor(np.ones((3, 3, 3))), 2, pivot_mode=1)

    def test_not_enough_slices(self):
        rng = np.random.default_rng(26)
        _, t = random_cpd(rng, (3, 3, 1), 2)
        with pytest.raises(errors.NotEnoughSlices):
            cpdqz(t, 2)

    def test_real_complex_pair_propagates(self):
        # slices whose pencil has eigenvalues +-i
        core = np.zeros((2, 2, 2))
        core[:, :, 0] = [[0.0, 1.0], [-1.0, 0.0]]
        core[:, :, 1] = np.eye(2)
        t = DenseTensor(core)
        with pytest.raises(errors.RealPencilComplexEigenvalues):
            cpdqz(t, 2)
        rep = cpdqz(t, 2, complex_fallback=True)
        assert rep.diagnostics.promoted_to_complex and rep.diagnostics.warnings

    def test_decompose_dispatch(self):
        rng = np.random.default_rng(27)
        truth, t = random_cpd(rng, (4, 4, 4), 2)
        for name in ("cpdqz", "cpdqzs", "gevd"):
            assert factor_match_error(truth, decompose(name, t, 2).model).max_rel_error <= 1e-10
        with pytest.raises(ValueError):
            decompose("als", t, 2)
