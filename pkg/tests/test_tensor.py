import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpdqz import errors
from cpdqz.tensor import (
    COMPLEX,
    REAL,
    CpdModel,
    DenseTensor,
    cpd_reconstruct,
    frontal_slice,
    general_unfold,
    khatri_rao,
    khatri_rao_chain,
    mode_product,
    multi_mode_product,
    refold,
    reshape_to_order3,
    subtensor3,
    unfold,
)

from conftest import outer_oracle, rand_matrix

shapes = st.lists(st.integers(1, 4), min_size=1, max_size=4).map(tuple)


def random_tensor(rng, shape, cplx=False):
    a = rng.standard_normal(shape)
    if cplx:
        a = a + 1j * rng.standard_normal(shape)
    return DenseTensor(a)


class TestDenseTensor:
    def test_flat_is_column_major(self):
        t = DenseTensor.from_flat(np.arange(1.0, 9.0), (2, 2, 2))
        assert t[1, 0, 0] == 2 and t[0, 1, 0] == 3 and t[0, 0, 1] == 5
        np.testing.assert_array_equal(t.flat, np.arange(1.0, 9.0))

    def test_field_tag(self):
        assert DenseTensor(np.ones(3)).field == REAL
        assert DenseTensor(np.ones(3) * 1j).field == COMPLEX
        assert DenseTensor(np.ones(3)).to_complex().field == COMPLEX

    def test_immutable(self):
        src = np.ones((2, 2))
        t = DenseTensor(src)
        src[0, 0] = 5
        assert t[0, 0] == 1
        with pytest.raises(ValueError):
            t.data[0, 0] = 2

    def test_flat_length_checked(self):
        with pytest.raises(errors.DimMismatch):
            DenseTensor.from_flat(np.ones(5), (2, 3))

    def test_zero_extent_rejected(self):
        with pytest.raises(errors.DimMismatch):
            DenseTensor(np.ones((2, 0)))


class TestCpdModel:
    def test_column_count_mismatch(self):
        with pytest.raises(errors.DimMismatch):
            CpdModel((np.ones((2, 2)), np.ones((3, 1))))

    def test_zero_column(self):
        u = np.ones((3, 2))
        u[:, 1] = 0
        with pytest.raises(errors.ZeroColumn):
            CpdModel((u, np.ones((2, 2))))

    def test_shared_field(self):
        m = CpdModel((np.ones((2, 1)), 1j * np.ones((3, 1))))
        assert m.field == COMPLEX and all(np.iscomplexobj(f) for f in m.factors)

    def test_normalized_preserves_tensor(self):
        rng = np.random.default_rng(0)
        m = CpdModel(tuple(rng.standard_normal((n, 2)) for n in (3, 4, 2)))
        nm = m.normalized()
        for f in nm.factors:
            np.testing.assert_allclose(np.linalg.norm(f, axis=0), 1.0)
        np.testing.assert_allclose(cpd_reconstruct(nm).data, cpd_reconstruct(m).data, atol=1e-14)


class TestUnfold:
    def test_singleton_third_mode(self):
        t = DenseTensor(np.array([[1.0, 3.0], [2.0, 4.0]])[:, :, None])
        np.testing.assert_array_equal(unfold(t, 0), [[1, 3], [2, 4]])

    def test_index_formula_2x2x2(self):
        a = np.empty((2, 2, 2))
        for i, j, k in itertools.product(range(2), repeat=3):
            a[i, j, k] = (i + 1) + 2 * j + 4 * k
        np.testing.assert_array_equal(unfold(DenseTensor(a), 0), [[1, 3, 5, 7], [2, 4, 6, 8]])

    def test_columns_enumerated_by_formula(self):
        rng = np.random.default_rng(1)
        t = random_tensor(rng, (2, 3, 4))
        dims = t.shape
        for mode in range(3):
            i, j = [m for m in range(3) if m != mode]
            mat = unfold(t, mode)
            for idx in itertools.product(*(range(n) for n in dims)):
                assert mat[idx[mode], dims[i] * idx[j] + idx[i]] == t[idx]

    def test_rank1(self):
        rng = np.random.default_rng(2)
        u, v, w = (rng.standard_normal(3) for _ in range(3))
        t = DenseTensor(np.einsum("i,j,k->ijk", u, v, w))
        np.testing.assert_allclose(unfold(t, 0), np.outer(u, np.kron(w, v)), atol=1e-14)

    def test_order_and_mode_errors(self):
        with pytest.raises(errors.OrderMismatch):
            unfold(DenseTensor(np.ones((2, 2))), 0)
        with pytest.raises(errors.BadMode):
            unfold(DenseTensor(np.ones((2, 2, 2))), 3)


class TestGeneralUnfold:
    def test_t4321_index_formula(self):
        # rows: i0 fastest then i1; columns: i2 fastest then i3
        rng = np.random.default_rng(3)
        t = random_tensor(rng, (2, 2, 2, 2))
        mat = general_unfold(t, [1, 0], [3, 2])
        for i0, i1, i2, i3 in itertools.product(range(2), repeat=4):
            assert mat[2 * i1 + i0, 2 * i3 + i2] == t[i0, i1, i2, i3]

    def test_matrix_identity(self):
        a = np.arange(6.0).reshape(2, 3)
        np.testing.assert_array_equal(general_unfold(DenseTensor(a), [0], [1]), a)

    def test_bad_partition(self):
        t = DenseTensor(np.ones((2, 2, 2)))
        with pytest.raises(errors.BadModePartition):
            general_unfold(t, [0, 1], [1])
        with pytest.raises(errors.BadModePartition):
            general_unfold(t, [0], [1])

    def test_roundtrip_3422(self):
        rng = np.random.default_rng(4)
        t = random_tensor(rng, (3, 4, 2, 2))
        back = refold(general_unfold(t, [2, 0], [3, 1]), [2, 0], [3, 1], t.shape)
        assert back == t

    @settings(max_examples=60, deadline=None)
    @given(shape=shapes, data=st.data())
    def test_roundtrip_property(self, shape, data):
        rng = np.random.default_rng(data.draw(st.integers(0, 2 ** 32 - 1)))
        t = random_tensor(rng, shape)
        perm = data.draw(st.permutations(range(len(shape))))
        k = data.draw(st.integers(0, len(shape)))
        rows, cols = list(perm[:k]), list(perm[k:])
        assert refold(general_unfold(t, rows, cols), rows, cols, shape) == t


class TestModeProduct:
    def test_identity(self):
        rng = np.random.default_rng(5)
        t = random_tensor(rng, (3, 4, 2))
        for n in range(3):
            assert mode_product(t, np.eye(t.shape[n]), n) == t

    def test_unfolding_relation(self):
        rng = np.random.default_rng(6)
        t = random_tensor(rng, (3, 4, 2))
        for n in range(3):
            a = rng.standard_normal((5, t.shape[n]))
            np.testing.assert_allclose(unfold(mode_product(t, a, n), n), a @ unfold(t, n), atol=1e-13)

    def test_commute(self):
        rng = np.random.default_rng(7)
        t = random_tensor(rng, (4, 4, 3))
        a, b = rng.standard_normal((2, 4)), rng.standard_normal((5, 4))
        x = mode_product(mode_product(t, a, 0), b, 1).data
        y = mode_product(mode_product(t, b, 1), a, 0).data
        np.testing.assert_allclose(x, y, rtol=1e-14, atol=1e-14 * np.abs(x).max())

    def test_rank1(self):
        rng = np.random.default_rng(8)
        u, v, w = rng.standard_normal(3), rng.standard_normal(4), rng.standard_normal(2)
        a = rng.standard_normal((5, 3))
        t = DenseTensor(np.einsum("i,j,k->ijk", u, v, w))
        np.testing.assert_allclose(mode_product(t, a, 0).data, np.einsum("i,j,k->ijk", a @ u, v, w), atol=1e-14)

    def test_errors(self):
        t = DenseTensor(np.ones((2, 3)))
        with pytest.raises(errors.DimMismatch):
            mode_product(t, np.ones((2, 2)), 1)
        with pytest.raises(errors.FieldMismatch):
            mode_product(t, 1j * np.ones((2, 2)), 0)

    @settings(max_examples=40, deadline=None)
    @given(shape=st.lists(st.integers(1, 4), min_size=2, max_size=4).map(tuple), data=st.data())
    def test_commute_property(self, shape, data):
        rng = np.random.default_rng(data.draw(st.integers(0, 2 ** 32 - 1)))
        t = random_tensor(rng, shape, cplx=True)
        m, n = data.draw(st.permutations(range(len(shape))))[:2]
        a = rand_matrix(rng, 3, shape[m], True)
        b = rand_matrix(rng, 2, shape[n], True)
        x = mode_product(mode_product(t, a, m), b, n).data
        y = mode_product(mode_product(t, b, n), a, m).data
        assert np.linalg.norm(x - y) <= 1e-14 * max(np.linalg.norm(x), 1e-300) * 10

    def test_multi_mode_skips_none(self):
        rng = np.random.default_rng(9)
        t = random_tensor(rng, (2, 3, 2))
        a = rng.standard_normal((4, 3))
        assert multi_mode_product(t, [None, a, None]) == mode_product(t, a, 1)


class TestSubtensor:
    def test_order3_identity(self):
        rng = np.random.default_rng(10)
        t = random_tensor(rng, (2, 3, 4))
        assert subtensor3(t, 2) == t

    def test_order4_entries(self):
        rng = np.random.default_rng(11)
        t = random_tensor(rng, (2, 3, 2, 4))
        s = subtensor3(t, 3)
        assert s.shape == (2, 3, 4)
        for i, j, k in itertools.product(range(2), range(3), range(4)):
            assert s[i, j, k] == t[i, j, 0, k]

    def test_cpd_form(self):
        rng = np.random.default_rng(12)
        u = [rng.standard_normal((n, 2)) for n in (3, 3, 2, 4)]
        t = cpd_reconstruct(CpdModel(tuple(u)))
        expect = outer_oracle([u[0], u[1], u[3] * u[2][0]])
        np.testing.assert_allclose(subtensor3(t, 3).data, expect, atol=1e-14)

    def test_bad_mode(self):
        t = DenseTensor(np.ones((2, 2, 2)))
        with pytest.raises(errors.BadMode):
            subtensor3(t, 3)
        with pytest.raises(errors.BadMode):
            subtensor3(t, 1)


class TestKhatriRao:
    def test_identities(self):
        np.testing.assert_array_equal(khatri_rao(np.eye(2), np.eye(2)), [[1, 0], [0, 0], [0, 0], [0, 1]])

    def test_single_column(self):
        np.testing.assert_array_equal(khatri_rao(np.array([[1.0], [2.0]]), np.array([[3.0], [4.0]])).ravel(),
                                      [3, 4, 6, 8])

    def test_reshape_is_outer(self):
        rng = np.random.default_rng(13)
        a, b = rng.standard_normal((3, 2)), rng.standard_normal((4, 2))
        kr = khatri_rao(a, b)
        for r in range(2):
            np.testing.assert_allclose(kr[:, r].reshape(4, 3, order="F"), np.outer(b[:, r], a[:, r]))

    def test_column_mismatch(self):
        with pytest.raises(errors.DimMismatch):
            khatri_rao(np.ones((2, 2)), np.ones((2, 3)))

    @settings(max_examples=40, deadline=None)
    @given(m=st.integers(2, 6), n=st.integers(2, 6), seed=st.integers(0, 2 ** 32 - 1))
    def test_columns_rank1(self, m, n, seed):
        rng = np.random.default_rng(seed)
        a, b = rand_matrix(rng, m, 3, True), rand_matrix(rng, n, 3, True)
        kr = khatri_rao(a, b)
        for r in range(3):
            s = np.linalg.svd(kr[:, r].reshape(n, m, order="F"), compute_uv=False)
            assert s[1] <= 1e-14 * s[0]

    def test_chain_order(self):
        rng = np.random.default_rng(14)
        a, b, c = (rng.standard_normal((n, 2)) for n in (2, 3, 2))
        np.testing.assert_allclose(khatri_rao_chain([a, b, c]), khatri_rao(khatri_rao(a, b), c))


class TestReconstruct:
    def test_all_ones(self):
        m = CpdModel(tuple(np.ones((2, 1)) for _ in range(3)))
        np.testing.assert_array_equal(cpd_reconstruct(m).data, np.ones((2, 2, 2)))

    def test_frontal_slice_identity(self):
        rng = np.random.default_rng(15)
        u = [rng.standard_normal((n, 3)) for n in (4, 5, 3)]
        t = cpd_reconstruct(CpdModel(tuple(u)))
        for k in range(3):
            expect = u[0] @ np.diag(u[2][k]) @ u[1].T
            np.testing.assert_allclose(frontal_slice(t, k), expect, rtol=1e-13, atol=1e-13)

    def test_refit_rank2(self):
        rng = np.random.default_rng(16)
        u = [rng.standard_normal((3, 2)) for _ in range(3)]
        np.testing.assert_allclose(cpd_reconstruct(CpdModel(tuple(u))).data, outer_oracle(u), atol=1e-14)

    def test_shape_mismatch(self):
        with pytest.raises(errors.DimMismatch):
            cpd_reconstruct(CpdModel((np.ones((2, 1)), np.ones((2, 1)))), (2, 3))

    @settings(max_examples=50, deadline=None)
    @given(shape=st.lists(st.integers(1, 4), min_size=1, max_size=4), rank=st.integers(1, 3),
           cplx=st.booleans(), seed=st.integers(0, 2 ** 32 - 1))
    def test_loop_oracle(self, shape, rank, cplx, seed):
        rng = np.random.default_rng(seed)
        u = [rand_matrix(rng, n, rank, cplx) for n in shape]
        got = cpd_reconstruct(CpdModel(tuple(u))).data
        ref = outer_oracle(u)
        assert np.linalg.norm(got - ref) <= 1e-14 * np.linalg.norm(ref) * 10

    @settings(max_examples=30, deadline=None)
    @given(shape=st.lists(st.integers(1, 5), min_size=3, max_size=3), rank=st.integers(1, 4),
           seed=st.integers(0, 2 ** 32 - 1))
    def test_slice_identity_property(self, shape, rank, seed):
        rng = np.random.default_rng(seed)
        u = [rand_matrix(rng, n, rank, True) for n in shape]
        t = cpd_reconstruct(CpdModel(tuple(u)))
        for k in range(shape[2]):
            expect = u[0] @ np.diag(u[2][k]) @ u[1].T
            assert np.linalg.norm(frontal_slice(t, k) - expect) <= 1e-13 * max(np.linalg.norm(expect), 1e-300)

    def test_weights(self):
        rng = np.random.default_rng(17)
        u = [rng.standard_normal((n, 2)) for n in (2, 3, 2)]
        w = np.array([2.0, -0.5])
        np.testing.assert_allclose(cpd_reconstruct(CpdModel(tuple(u), w)).data, outer_oracle(u, w), atol=1e-14)


class TestReshape:
    def test_order3_identity(self):
        t = DenseTensor(np.arange(8.0).reshape(2, 2, 2))
        assert reshape_to_order3(t) == t

    def test_shape(self):
        assert reshape_to_order3(DenseTensor(np.ones((2, 2, 2, 3)))).shape == (2, 2, 6)

    def test_cpd_structure(self):
        rng = np.random.default_rng(18)
        u = [rng.standard_normal((n, 2)) for n in (3, 3, 2, 2)]
        t = reshape_to_order3(cpd_reconstruct(CpdModel(tuple(u))))
        expect = cpd_reconstruct(CpdModel((u[0], u[1], khatri_rao(u[3], u[2]))))
        np.testing.assert_allclose(t.data, expect.data, atol=1e-14)


class TestFrontalSlice:
    def test_single_slice(self):
        rng = np.random.default_rng(19)
        t = random_tensor(rng, (3, 2, 1))
        np.testing.assert_array_equal(frontal_slice(t, 0), general_unfold(t, [0], [2, 1]))

    def test_sum_of_slices(self):
        rng = np.random.default_rng(20)
        t = random_tensor(rng, (3, 2, 4))
        total = sum(frontal_slice(t, k) for k in range(4))
        np.testing.assert_allclose(mode_product(t, np.ones((1, 4)), 2).data[:, :, 0], total, atol=1e-14)

    def test_out_of_range(self):
        with pytest.raises(errors.BadIndex):
            frontal_slice(DenseTensor(np.ones((2, 2, 2))), 2)
