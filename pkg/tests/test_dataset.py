import numpy as np
import pytest

from qubofs import (
    MISSING_POLICY_DROP_ANY,
    DataLoadError,
    Dataset,
    FeatureMask,
    SplitPlan,
    filter_columns,
    generate_friedman1,
    load_auto_csv,
    ordinal_encode,
    pcc,
    split,
)


class TestFeatureMask:
    def test_bits_validated(self):
        with pytest.raises(ValueError):
            FeatureMask((0, 2, 1))

    def test_k_counts_ones(self):
        assert FeatureMask((1, 0, 1, 1)).k == 3
        assert FeatureMask((0, 0)).k == 0

    def test_from_indices_round_trip(self):
        mask = FeatureMask.from_indices(6, [1, 4])
        assert mask.bits == (0, 1, 0, 0, 1, 0)
        assert mask.indices() == (1, 4)

    def test_from_indices_range_checked(self):
        with pytest.raises(ValueError):
            FeatureMask.from_indices(3, [3])

    def test_bits_normalized_to_ints(self):
        mask = FeatureMask(np.array([1, 0, 1]))
        assert mask.bits == (1, 0, 1)
        assert isinstance(mask.bits[0], int)


class TestDataset:
    def test_row_mismatch_rejected(self):
        with pytest.raises(ValueError):
            Dataset(np.zeros((3, 2)), np.zeros(4), ("a", "b"), ("numeric",) * 2)

    def test_non_finite_rejected(self):
        X = np.array([[1.0, np.nan]])
        with pytest.raises(ValueError):
            Dataset(X, np.zeros(1), ("a", "b"), ("numeric",) * 2)

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError):
            Dataset(np.zeros((2, 2)), np.zeros(2), ("a", "a"), ("numeric",) * 2)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            Dataset(np.zeros((2, 1)), np.zeros(2), ("a",), ("categorical",))

    def test_arrays_read_only(self):
        d = Dataset(np.zeros((2, 1)), np.zeros(2), ("a",), ("numeric",))
        with pytest.raises(ValueError):
            d.features[0, 0] = 1.0


class TestFriedman:
    def test_shape_and_names(self):
        d = generate_friedman1(30, 7, 0.5, seed=1)
        assert d.features.shape == (30, 7)
        assert d.feature_names == ("x1", "x2", "x3", "x4", "x5", "x6", "x7")
        assert d.column_kinds == ("numeric",) * 7

    def test_deterministic(self):
        a = generate_friedman1(50, 10, 1.0, seed=9)
        b = generate_friedman1(50, 10, 1.0, seed=9)
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.target, b.target)

    def test_noiseless_formula(self):
        d = generate_friedman1(40, 6, 0.0, seed=2)
        X = d.features
        expected = (
            10.0 * np.sin(np.pi * X[:, 0] * X[:, 1])
            + 20.0 * (X[:, 2] - 0.5) ** 2
            + 10.0 * X[:, 3]
            + 5.0 * X[:, 4]
        )
        np.testing.assert_allclose(d.target, expected, atol=1e-12)

    def test_minimum_features(self):
        with pytest.raises(ValueError):
            generate_friedman1(10, 4)

    def test_single_row_allowed(self):
        d = generate_friedman1(1, 5, 0.0, seed=0)
        assert d.n_rows == 1

    def test_features_in_unit_interval(self):
        d = generate_friedman1(200, 5, 1.0, seed=3)
        assert d.features.min() >= 0.0 and d.features.max() <= 1.0


class TestOrdinalEncode:
    def test_first_appearance_order(self):
        codes = ordinal_encode(["gas", "diesel", "gas", "lpg"])
        np.testing.assert_array_equal(codes, [0.0, 1.0, 0.0, 2.0])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            ordinal_encode([])


class TestAutoLoading:
    def test_default_policy_shape(self, auto_path):
        d = load_auto_csv(auto_path)
        # 205 raw rows, 4 with missing price
        assert d.n_rows == 201
        assert d.n_features == 25
        assert d.target_name == "price"

    def test_drop_any_policy_shape(self, auto_path):
        d = load_auto_csv(auto_path, MISSING_POLICY_DROP_ANY)
        assert d.n_rows == 159
        assert d.n_features == 25

    def test_column_kinds(self, auto_path):
        d = load_auto_csv(auto_path)
        kinds = dict(zip(d.feature_names, d.column_kinds))
        assert kinds["make"] == "ordinal-encoded"
        assert kinds["fuel-type"] == "ordinal-encoded"
        assert kinds["engine-size"] == "numeric"
        assert kinds["curb-weight"] == "numeric"
        # doors is spelled out ("two"/"four"), so it encodes ordinally
        assert kinds["num-of-doors"] == "ordinal-encoded"

    def test_engine_size_price_correlation(self, auto_path):
        d = load_auto_csv(auto_path)
        j = d.feature_names.index("engine-size")
        r = pcc(d.features[:, j], d.target)
        assert r == pytest.approx(0.8723, abs=5e-4)

    def test_engine_size_price_complete_rows(self, auto_path):
        d = load_auto_csv(auto_path, MISSING_POLICY_DROP_ANY)
        j = d.feature_names.index("engine-size")
        r = pcc(d.features[:, j], d.target)
        assert r == pytest.approx(0.8415, abs=5e-4)

    def test_imputation_fills_numeric_gaps(self, auto_path):
        d = load_auto_csv(auto_path)
        assert np.isfinite(d.features).all()

    def test_imputed_value_is_column_median(self, tmp_path):
        row = "0,?,make,gas,std,two,sedan,fwd,front,99.0,170.0,65.0,52.0,2000,ohc,four,109,mpfi,3.0,3.0,9.0,100,5000,25,30,{}"
        lines = [row.format(5_000 + 1_000 * i) for i in range(5)]
        parts = lines[2].split(",")
        parts[1] = "120"
        lines[2] = ",".join(parts)
        parts = lines[3].split(",")
        parts[1] = "160"
        lines[3] = ",".join(parts)
        path = tmp_path / "mini.data"
        path.write_text("\n".join(lines) + "\n")
        d = load_auto_csv(str(path))
        j = d.feature_names.index("normalized-losses")
        filled = d.features[[0, 1, 4], j]
        np.testing.assert_allclose(filled, 140.0)

    def test_missing_price_rows_always_dropped(self, tmp_path):
        good = "0,100,make,gas,std,two,sedan,fwd,front,99.0,170.0,65.0,52.0,2000,ohc,four,109,mpfi,3.0,3.0,9.0,100,5000,25,30,10000"
        bad = good[: good.rfind(",")] + ",?"
        path = tmp_path / "mini.data"
        path.write_text(good + "\n" + bad + "\n" + good + "\n")
        d = load_auto_csv(str(path))
        assert d.n_rows == 2

    def test_field_count_error_names_row(self, tmp_path):
        path = tmp_path / "broken.data"
        path.write_text("1,2,3\n")
        with pytest.raises(DataLoadError, match="row 1"):
            load_auto_csv(str(path))

    def test_bad_price_error_names_position(self, tmp_path):
        good = "0,100,make,gas,std,two,sedan,fwd,front,99.0,170.0,65.0,52.0,2000,ohc,four,109,mpfi,3.0,3.0,9.0,100,5000,25,30,10000"
        bad = good[: good.rfind(",")] + ",cheap"
        path = tmp_path / "mini.data"
        path.write_text(good + "\n" + bad + "\n")
        with pytest.raises(DataLoadError, match=r"row 2, column 26"):
            load_auto_csv(str(path))

    def test_missing_file(self):
        with pytest.raises(DataLoadError):
            load_auto_csv("/no/such/file.data")

    def test_unknown_policy(self, auto_path):
        with pytest.raises(ValueError):
            load_auto_csv(auto_path, "ignore")


class TestSplit:
    def test_sizes(self, small_friedman):
        pairs = split(small_friedman, SplitPlan(0.7, 3, seed=0))
        assert len(pairs) == 3
        for train, test in pairs:
            assert train.n_rows == 56  # floor(0.7 * 80)
            assert test.n_rows == 24

    def test_partition_is_exact(self):
        d = generate_friedman1(50, 5, 1.0, seed=6)
        (train, test), = split(d, SplitPlan(0.7, 1, seed=1))
        joined = np.vstack([train.features, test.features])
        assert joined.shape[0] == 50
        # every original row appears exactly once
        orig = {tuple(row) for row in d.features}
        assert {tuple(row) for row in joined} == orig

    def test_deterministic_and_repeat_varied(self, small_friedman):
        a = split(small_friedman, SplitPlan(0.7, 2, seed=5))
        b = split(small_friedman, SplitPlan(0.7, 2, seed=5))
        for (ta, _), (tb, _) in zip(a, b):
            np.testing.assert_array_equal(ta.features, tb.features)
        assert not np.array_equal(a[0][0].features, a[1][0].features)

    def test_degenerate_split_rejected(self):
        d = generate_friedman1(1, 5, 0.0, seed=0)
        with pytest.raises(ValueError):
            split(d, SplitPlan(0.7, 1, seed=0))


class TestFilterColumns:
    def test_keeps_selected_columns(self, small_friedman):
        mask = FeatureMask.from_indices(10, [0, 3, 7])
        kept = filter_columns(small_friedman, mask)
        assert kept.n_features == 3
        assert kept.feature_names == ("x1", "x4", "x8")
        np.testing.assert_array_equal(
            kept.features, small_friedman.features[:, [0, 3, 7]]
        )

    def test_full_mask_is_identity(self, small_friedman):
        kept = filter_columns(small_friedman, FeatureMask((1,) * 10))
        np.testing.assert_array_equal(kept.features, small_friedman.features)
        assert kept.feature_names == small_friedman.feature_names

    def test_single_column_survives(self):
        d = Dataset(
            np.arange(6.0).reshape(3, 2), np.zeros(3), ("a", "b"),
            ("numeric", "numeric"),
        )
        kept = filter_columns(d, FeatureMask((0, 1)))
        assert kept.feature_names == ("b",)

    def test_all_zero_mask_rejected(self, small_friedman):
        with pytest.raises(ValueError):
            filter_columns(small_friedman, FeatureMask((0,) * 10))

    def test_length_mismatch_rejected(self, small_friedman):
        with pytest.raises(ValueError):
            filter_columns(small_friedman, FeatureMask((1, 0)))
