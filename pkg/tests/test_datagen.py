import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teachlab.datagen import (
    Dataset,
    DatasetSpec,
    GenerationError,
    feature_map,
    generate_dataset,
    hamming,
    load_dataset_csv,
    optimal_model,
    pearson_corr,
    save_dataset_csv,
    selection_cost,
)


def make_dataset(X, Y, independent_idx, collinear_idx):
    d = X.shape[1]
    corr_y = np.array([pearson_corr(X[:, i], Y) for i in range(d)])
    corr_m = np.corrcoef(X, rowvar=False).reshape(d, d)
    np.fill_diagonal(corr_m, 1.0)
    return Dataset(
        X=X,
        Y=Y,
        independent_idx=tuple(independent_idx),
        collinear_idx=tuple(collinear_idx),
        corr_to_output=corr_y,
        corr_matrix=np.clip((corr_m + corr_m.T) / 2, -1, 1),
    )


class TestSpecValidation:
    def test_defaults_valid(self):
        spec = DatasetSpec()
        assert spec.d == 25

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n_samples": 2},
            {"collinear_noise": 0.0},
            {"output_noise": -1.0},
            {"n_independent": 0},
            {"coef_independent": (1.0, 2.0)},  # wrong length for 10 independents
        ],
    )
    def test_invalid_specs_rejected(self, kwargs):
        with pytest.raises(GenerationError):
            DatasetSpec(**kwargs)


class TestGenerateDataset:
    def test_paper_shape(self):
        ds = generate_dataset(DatasetSpec(n_independent=10, n_collinear=15, seed=1))
        assert ds.d == 25
        assert len(ds.independent_idx) == 10
        assert len(ds.collinear_idx) == 15

    def test_no_collinear_block(self):
        ds = generate_dataset(DatasetSpec(n_independent=4, n_collinear=0, seed=3))
        assert ds.collinear_idx == ()
        assert set(ds.independent_idx) == set(range(4))

    def test_collinear_block_strongly_correlated(self):
        # oracle: Pearson correlations computed directly on the matrix
        ds = generate_dataset(DatasetSpec(n_samples=200, collinear_noise=0.1, seed=7))
        cols = list(ds.collinear_idx)
        pair_corrs = [
            abs(pearson_corr(ds.X[:, i], ds.X[:, j]))
            for k, i in enumerate(cols)
            for j in cols[k + 1 :]
        ]
        assert np.mean(pair_corrs) > 0.9

    def test_bit_reproducible(self):
        a = generate_dataset(DatasetSpec(seed=11))
        b = generate_dataset(DatasetSpec(seed=11))
        assert np.array_equal(a.X, b.X) and np.array_equal(a.Y, b.Y)

    def test_corr_matrix_symmetric_unit_diag(self):
        ds = generate_dataset(DatasetSpec(seed=5))
        assert np.allclose(ds.corr_matrix, ds.corr_matrix.T, atol=1e-12)
        assert np.allclose(np.diag(ds.corr_matrix), 1.0, atol=1e-12)
        assert ds.corr_matrix.min() >= -1.0 and ds.corr_matrix.max() <= 1.0

    def test_nonzero_column_variance(self):
        ds = generate_dataset(DatasetSpec(seed=13))
        assert (ds.X.std(axis=0) > 0).all()


class TestPearson:
    def test_self_correlation(self):
        x = np.array([1.0, 2.0, 5.0, 3.0])
        assert pearson_corr(x, x) == pytest.approx(1.0)

    def test_sign_flip(self):
        x = np.array([1.0, 2.0, 5.0, 3.0])
        assert pearson_corr(x, -x) == pytest.approx(-1.0)

    def test_textbook_formula(self):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        y = np.array([2.0, 4.0, 5.0, 9.0])
        # hand evaluation: cov = 11, sx^2 = 5, sy^2 = 26
        expected = 11.0 / np.sqrt(5.0 * 26.0)
        assert pearson_corr(x, y) == pytest.approx(expected, abs=1e-12)

    def test_zero_variance_rejected(self):
        with pytest.raises(ValueError):
            pearson_corr(np.ones(5), np.arange(5.0))


class TestFeatureMap:
    def test_empty_model_phi2_zero(self):
        ds = generate_dataset(DatasetSpec(seed=2))
        phi1, phi2 = feature_map(3, np.zeros(ds.d), ds)
        assert phi2 == 0.0
        assert phi1 == pytest.approx(abs(ds.corr_to_output[3]))

    def test_perfectly_collinear_included(self):
        x = np.random.default_rng(0).standard_normal(50)
        X = np.column_stack([x, x, np.random.default_rng(1).standard_normal(50)])
        Y = x + 0.1 * np.random.default_rng(2).standard_normal(50)
        ds = make_dataset(X, Y, [2], [0, 1])
        model = np.array([0, 1, 0])
        phi1, phi2 = feature_map(0, model, ds)
        assert phi2 == pytest.approx(1.0)

    def test_concrete_three_variable(self):
        ds = generate_dataset(DatasetSpec(n_independent=1, n_collinear=2, seed=9))
        model = np.array([0, 1, 0])
        for i in range(3):
            phi1, phi2 = feature_map(i, model, ds)
            assert phi1 == pytest.approx(abs(ds.corr_to_output[i]))
            assert phi2 == pytest.approx(abs(ds.corr_matrix[i, 1]))

    @given(st.integers(0, 2**32 - 1), st.integers(0, 24))
    @settings(max_examples=25, deadline=None)
    def test_outputs_in_unit_square(self, seed, action):
        ds = generate_dataset(DatasetSpec(seed=seed))
        model = np.random.default_rng(seed).integers(0, 2, ds.d)
        phi1, phi2 = feature_map(action, model, ds)
        assert 0.0 <= phi1 <= 1.0 and 0.0 <= phi2 <= 1.0


class TestOptimalModel:
    def test_eleven_ones_on_default(self):
        ds = generate_dataset(DatasetSpec(seed=1))
        theta = optimal_model(ds)
        assert theta.sum() == 11
        assert all(theta[i] == 1 for i in ds.independent_idx)

    def test_all_ones_without_collinear(self):
        ds = generate_dataset(DatasetSpec(n_independent=5, n_collinear=0, seed=4))
        assert optimal_model(ds).sum() == 5

    def test_tie_break_lowest_index(self):
        x = np.random.default_rng(3).standard_normal(60)
        X = np.column_stack([np.random.default_rng(4).standard_normal(60), x, x])
        Y = x.copy()
        ds = make_dataset(X, Y, [0], [1, 2])
        # both collinear columns correlate identically with Y; lowest index wins
        assert abs(ds.corr_to_output[1]) == pytest.approx(abs(ds.corr_to_output[2]))
        theta = optimal_model(ds)
        assert theta[1] == 1 and theta[2] == 0

    def test_optimal_cost_zero_property(self):
        for seed in range(5):
            ds = generate_dataset(DatasetSpec(seed=seed))
            assert selection_cost(optimal_model(ds), ds) == 0.0


class TestSelectionCost:
    def test_all_ones_cost(self):
        ds = generate_dataset(DatasetSpec(seed=1))
        assert selection_cost(np.ones(25), ds) == 14.0

    def test_all_zeros_cost(self):
        # zero collinear variables selected adds no collinear penalty
        ds = generate_dataset(DatasetSpec(seed=1))
        assert selection_cost(np.zeros(25), ds) == 10.0

    def test_length_mismatch(self):
        ds = generate_dataset(DatasetSpec(seed=1))
        with pytest.raises(ValueError):
            selection_cost(np.ones(7), ds)


class TestHamming:
    def test_identity(self):
        theta = np.array([1, 0, 1])
        assert hamming(theta, theta) == 0

    def test_one_flip(self):
        assert hamming(np.array([1, 0, 1]), np.array([0, 0, 1])) == 1

    def test_all_ones_vs_optimal(self):
        ds = generate_dataset(DatasetSpec(seed=1))
        assert hamming(np.ones(25), optimal_model(ds)) == 14

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            hamming(np.ones(3), np.ones(4))

    @given(st.integers(1, 12), st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_metric_properties(self, d, seed):
        rng = np.random.default_rng(seed)
        a, b, c = (rng.integers(0, 2, d) for _ in range(3))
        assert hamming(a, b) == hamming(b, a)
        assert hamming(a, c) <= hamming(a, b) + hamming(b, c)
        assert (hamming(a, b) == 0) == bool((a == b).all())


class TestCsvRoundtrip:
    def test_roundtrip(self, tmp_path):
        ds = generate_dataset(DatasetSpec(n_samples=40, n_independent=3, n_collinear=2, seed=6))
        path = tmp_path / "data.csv"
        save_dataset_csv(ds, path)
        header = path.read_text().splitlines()[0]
        assert header == "x1,x2,x3,x4,x5,y"
        loaded = load_dataset_csv(path)
        assert np.array_equal(loaded.X, ds.X)
        assert np.array_equal(loaded.Y, ds.Y)
        assert loaded.independent_idx == ds.independent_idx
        assert loaded.collinear_idx == ds.collinear_idx
        assert loaded.spec == ds.spec
