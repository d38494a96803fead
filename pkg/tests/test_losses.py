"""Mask construction, negative sampling, and the three loss oracles."""

import numpy as np
import pytest

from compzsl.errors import DataError, NumericError
from compzsl.losses import (
    LossWeights,
    MaskMatrix,
    build_positive_mask,
    composition_mask_rows,
    decode_mask_rows,
    decoding_loss,
    fusion_loss,
    normalize_composition,
    sample_negative_mask,
    total_loss,
    triplet_loss,
)
from compzsl.numerics import Tensor


class TestPositiveMask:
    def test_single_attribute_row(self):
        # 3 attributes + 2 objects; (attr 1, obj 0) selects columns 1 and 3
        mask = build_positive_mask([((1,), 0)], 3, 2)
        assert np.array_equal(mask.matrix, [[0.0, 1.0, 0.0, 1.0, 0.0]])

    def test_multi_attribute_row(self):
        mask = build_positive_mask([((0, 2), 1)], 3, 2)
        assert np.array_equal(mask.matrix, [[1.0, 0.0, 1.0, 0.0, 1.0]])

    def test_object_out_of_range_rejected(self):
        with pytest.raises(DataError):
            build_positive_mask([((0,), 2)], 3, 2)

    def test_attribute_out_of_range_rejected(self):
        with pytest.raises(DataError):
            build_positive_mask([((3,), 0)], 3, 2)

    def test_empty_attribute_set_rejected(self):
        with pytest.raises(DataError):
            build_positive_mask([((), 0)], 3, 2)

    def test_rows_decode_back_to_compositions(self):
        comps = [((1,), 0), ((0, 2), 1)]
        mask = build_positive_mask(comps, 3, 2)
        assert decode_mask_rows(mask) == comps


class TestMaskMatrix:
    def test_non_binary_entries_rejected(self):
        with pytest.raises(DataError):
            MaskMatrix(np.array([[0.5, 0.0, 1.0]]), "positive", 1)

    def test_row_needs_exactly_one_object(self):
        with pytest.raises(DataError):
            MaskMatrix(np.array([[1.0, 1.0, 1.0]]), "positive", 1)

    def test_row_needs_an_attribute(self):
        with pytest.raises(DataError):
            MaskMatrix(np.array([[0.0, 1.0, 0.0]]), "positive", 1)

    def test_unknown_kind_rejected(self):
        with pytest.raises(DataError):
            MaskMatrix(np.array([[1.0, 1.0, 0.0]]), "anchor", 1)

    def test_mean_pooling_normalizes_rows_without_mutating(self):
        mask = build_positive_mask([((0, 2), 1)], 3, 2)
        pooled = mask.pooled("mean")
        assert np.allclose(pooled.data, [[1 / 3, 0.0, 1 / 3, 0.0, 1 / 3]])
        # the stored mask stays 0-1
        assert np.array_equal(mask.matrix, [[1.0, 0.0, 1.0, 0.0, 1.0]])
        assert np.array_equal(mask.pooled("sum").data, mask.matrix)


class TestNegativeSampling:
    def test_pool_of_one_rejected(self):
        pos = build_positive_mask([((0,), 0)], 2, 2)
        with pytest.raises(DataError):
            sample_negative_mask(pos, [((0,), 0)], np.random.default_rng(0), 2)

    def test_negative_never_equals_positive(self):
        pool = [((0,), 0), ((1,), 0), ((0,), 1), ((1,), 1)]
        pos = build_positive_mask([((0,), 0), ((1,), 1)], 2, 2)
        rng = np.random.default_rng(1)
        for _ in range(500):
            neg = sample_negative_mask(pos, pool, rng, 2)
            assert not (neg.matrix == pos.matrix).all(axis=1).any()

    def test_duplicate_pool_entries_collapse(self):
        pool = [((0,), 0), ((0,), 0), ((1,), 0)]
        pos = build_positive_mask([((0,), 0)], 2, 1)
        rng = np.random.default_rng(2)
        for _ in range(50):
            neg = sample_negative_mask(pos, pool, rng, 1)
            assert decode_mask_rows(neg) == [((1,), 0)]

    def test_draws_are_uniform_over_pool_minus_truth(self):
        # chi-square over 4 allowed outcomes, 10,000 draws, 3 sigma band
        pool = [((0,), 0), ((1,), 0), ((0,), 1), ((1,), 1), ((2,), 0)]
        pos = build_positive_mask([((0,), 0)], 3, 2)
        rng = np.random.default_rng(7)
        counts: dict = {}
        draws = 10_000
        for _ in range(draws):
            neg = sample_negative_mask(pos, pool, rng, 2)
            comp = decode_mask_rows(neg)[0]
            counts[comp] = counts.get(comp, 0) + 1
        assert set(counts) == set(pool) - {((0,), 0)}
        expected = draws / 4
        stat = sum((c - expected) ** 2 / expected for c in counts.values())
        df = 3
        assert abs(stat - df) <= 3 * np.sqrt(2 * df)

    def test_attribute_order_in_pool_does_not_matter(self):
        pool = [((2, 0), 0), ((1,), 0)]
        pos = build_positive_mask([((0, 2), 0)], 3, 1)
        rng = np.random.default_rng(3)
        for _ in range(20):
            neg = sample_negative_mask(pos, pool, rng, 1)
            assert decode_mask_rows(neg) == [((1,), 0)]


def one_dim_nodes(values):
    """Column of 1-d node embeddings for hand-computable distances."""
    return Tensor(np.array(values).reshape(-1, 1))


class TestFusionLoss:
    def test_three_four_five_row(self):
        # 2 attrs + 1 obj, latent dim 2: target row [1, 0], xc [4, 4]
        z = Tensor(np.array([[0.5, 0.0], [0.0, 0.0], [0.5, 0.0]]))
        mask = build_positive_mask([((0,), 0)], 2, 1)
        xc = Tensor(np.array([[4.0, 4.0]]))
        assert fusion_loss(xc, mask, z).item() == pytest.approx(5.0, abs=1e-15)

    def test_batch_mean_over_rows(self):
        z = Tensor(np.array([[0.5, 0.0], [0.0, 0.0], [0.5, 0.0]]))
        mask = build_positive_mask([((0,), 0), ((0,), 0)], 2, 1)
        xc = Tensor(np.array([[4.0, 4.0], [1.0, 0.0]]))
        # rows: distance 5 and 0 -> mean 2.5
        assert fusion_loss(xc, mask, z).item() == pytest.approx(2.5, abs=1e-15)

    def test_shape_mismatch_rejected(self):
        z = Tensor(np.zeros((3, 2)))
        mask = build_positive_mask([((0,), 0)], 2, 1)
        with pytest.raises(Exception):
            fusion_loss(Tensor(np.zeros((2, 2))), mask, z)


class TestTripletLoss:
    def make(self, pos_target, neg_target):
        # 2 attrs + 2 objs in 1-d: node values chosen to hit the targets
        z = one_dim_nodes([pos_target / 2, neg_target / 2,
                           pos_target / 2, neg_target / 2])
        pos = build_positive_mask([((0,), 0)], 2, 2)
        neg = MaskMatrix(np.array([[0.0, 1.0, 0.0, 1.0]]), "negative", 2)
        xc = Tensor(np.array([[0.0]]))
        return xc, pos, neg, z

    def test_equal_distances_give_margin(self):
        xc, pos, neg, z = self.make(0.5, 0.5)
        assert triplet_loss(xc, pos, neg, z, 0.5).item() == pytest.approx(0.5, abs=1e-15)

    def test_separated_pair_gives_zero(self):
        xc, pos, neg, z = self.make(0.2, 0.9)
        assert triplet_loss(xc, pos, neg, z, 0.5).item() == 0.0

    def test_inverted_pair_pays_full_hinge(self):
        xc, pos, neg, z = self.make(0.7, 0.4)
        assert triplet_loss(xc, pos, neg, z, 0.5).item() == pytest.approx(0.8, abs=1e-15)

    def test_mask_shape_mismatch_rejected(self):
        xc, pos, neg, z = self.make(0.5, 0.5)
        bad = MaskMatrix(np.array([[1.0, 0.0, 1.0, 0.0],
                                   [0.0, 1.0, 0.0, 1.0]]), "negative", 2)
        with pytest.raises(Exception):
            triplet_loss(xc, pos, bad, z, 0.5)

    def test_inactive_rows_get_zero_latent_gradient(self):
        # row 0 inactive (hinge 0), row 1 active: only row 1 drives xc
        z = one_dim_nodes([0.1, 0.45, 0.1, 0.45])
        pos = build_positive_mask([((0,), 0), ((0,), 0)], 2, 2)
        neg = MaskMatrix(np.array([[0.0, 1.0, 0.0, 1.0],
                                   [0.0, 1.0, 0.0, 1.0]]), "negative", 2)
        xc = Tensor(np.array([[0.0], [0.6]]))
        # d_pos/d_neg row0: |0-0.2| = 0.2 vs |0-0.9| = 0.9, hinge -0.2 -> 0
        # row1: |0.6-0.2| = 0.4 vs |0.6-0.9| = 0.3, hinge 0.6 -> active
        loss = triplet_loss(xc, pos, neg, z, 0.5)
        assert loss.item() == pytest.approx(0.3, abs=1e-15)
        loss.backward()
        assert xc.grad[0, 0] == 0.0
        assert xc.grad[1, 0] != 0.0


class TestDecodingLoss:
    def test_three_four_five_row(self):
        x0 = Tensor(np.array([[3.0, 4.0]]))
        xhat = Tensor(np.array([[0.0, 0.0]]))
        assert decoding_loss(x0, xhat).item() == pytest.approx(5.0, abs=1e-15)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(Exception):
            decoding_loss(Tensor(np.zeros((1, 2))), Tensor(np.zeros((1, 3))))


class TestLossWeights:
    def test_negative_weight_rejected(self):
        with pytest.raises(NumericError):
            LossWeights(alpha=-1.0)

    def test_all_zero_rejected(self):
        with pytest.raises(NumericError):
            LossWeights(alpha=0.0, beta=0.0, gamma=0.0)

    def test_margin_must_be_positive(self):
        with pytest.raises(NumericError):
            LossWeights(margin=0.0)

    def test_single_positive_weight_allowed(self):
        assert LossWeights(alpha=1.0, beta=0.0, gamma=0.0).alpha == 1.0


class TestTotalLoss:
    def test_components_sum_exactly(self):
        f, t, d = Tensor([[1.25]]), Tensor([[0.5]]), Tensor([[2.0]])
        total = total_loss(f, t, d, LossWeights())
        assert abs(total.item() - 3.75) <= 1e-12

    def test_weights_scale_components(self):
        f, t, d = Tensor([[1.0]]), Tensor([[1.0]]), Tensor([[1.0]])
        total = total_loss(f, t, d, LossWeights(alpha=2.0, beta=3.0, gamma=5.0))
        assert total.item() == pytest.approx(10.0, abs=1e-12)

    def test_sparsity_term_added(self):
        f, t, d = Tensor([[1.0]]), Tensor([[1.0]]), Tensor([[1.0]])
        total = total_loss(f, t, d, LossWeights(), sparsity=Tensor([[0.25]]))
        assert total.item() == pytest.approx(3.25, abs=1e-12)

    def test_non_finite_component_named(self):
        f, t, d = Tensor([[1.0]]), Tensor([[1.0]]), Tensor([[1.0]])
        t.data[0, 0] = np.nan
        with pytest.raises(NumericError, match="triplet"):
            total_loss(f, t, d, LossWeights())


def test_normalize_composition_sorts_and_dedupes():
    assert normalize_composition(((2, 0, 2), 1)) == ((0, 2), 1)


def test_composition_mask_rows_multi_image():
    rows = composition_mask_rows([((0,), 0), ((1,), 1)], 2, 2)
    assert np.array_equal(rows, [[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]])
