import io
import json
import math
import random
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qapkit import (
    EmptyTrainingSet,
    LabeledInstance,
    MalformedModel,
    Node,
    QuestionType,
    TrainConfig,
    TreeModel,
    UnsupportedVersion,
    entropy,
    information_gain,
    load_model,
    majority_baseline,
    predict,
    save_model,
    train_tree,
)
from qapkit.tree import candidate_splits

from helpers import make_fv

YN, WH, DQ, CS, PQ = QuestionType.YN, QuestionType.WH, QuestionType.DQ, QuestionType.CS, QuestionType.PQ

LABELS_STRATEGY = st.lists(st.sampled_from(list(QuestionType)), min_size=1, max_size=30)


def inst(label, **fv_overrides):
    return LabeledInstance(make_fv(**fv_overrides), label)


def random_instances(rng, size):
    out = []
    for _ in range(size):
        out.append(
            LabeledInstance(
                make_fv(
                    has_wh=rng.random() < 0.5,
                    has_or=rng.random() < 0.5,
                    has_inversion=rng.random() < 0.5,
                    has_tag=rng.random() < 0.5,
                    last_utt_similar=rng.random() < 0.5,
                    last_utt_incomplete=rng.random() < 0.5,
                    has_cliche=rng.random() < 0.5,
                    length=rng.randint(0, 8),
                ),
                rng.choice(list(QuestionType)),
            )
        )
    return out


class TestEntropy:
    def test_uniform_binary(self):
        assert entropy([YN, YN, WH, WH]) == 1.0

    def test_single_class(self):
        assert entropy([YN, YN, YN]) == 0.0

    def test_empty(self):
        assert entropy([]) == 0.0

    def test_three_to_one_split(self):
        assert entropy([YN, YN, YN, WH]) == pytest.approx(0.8112781244591328, abs=1e-15)

    def test_uniform_over_five(self):
        assert entropy(list(QuestionType)) == pytest.approx(math.log2(5))

    @given(LABELS_STRATEGY)
    def test_bounds(self, labels):
        h = entropy(labels)
        assert 0.0 <= h <= math.log2(len(QuestionType)) + 1e-12

    @given(st.permutations([YN, YN, WH, PQ, CS, CS, DQ]))
    def test_order_invariant_to_the_bit(self, labels):
        assert entropy(labels) == entropy([YN, YN, WH, PQ, CS, CS, DQ])


class TestInformationGain:
    def test_perfect_separation_equals_parent_entropy(self):
        data = [inst(YN, has_wh=False)] * 3 + [inst(WH, has_wh=True)]
        gain = information_gain(data, "has_wh")
        assert gain == pytest.approx(0.8112781244591328, abs=1e-15)
        assert gain == pytest.approx(entropy([i.label for i in data]), abs=1e-15)

    def test_identical_distributions_no_gain(self):
        data = [
            inst(YN, has_or=False),
            inst(WH, has_or=False),
            inst(YN, has_or=True),
            inst(WH, has_or=True),
        ]
        assert information_gain(data, "has_or") == 0.0

    def test_empty_side_is_zero_by_convention(self):
        data = [inst(YN), inst(WH)]  # nobody has has_tag set
        assert information_gain(data, "has_tag") == 0.0

    def test_length_threshold(self):
        data = [inst(PQ, length=1), inst(PQ, length=2), inst(YN, length=6)]
        assert information_gain(data, "length", 4.0) == pytest.approx(
            entropy([PQ, PQ, YN]), abs=1e-15
        )

    def test_never_negative_on_random_data(self):
        rng = random.Random(7)
        for _ in range(50):
            data = random_instances(rng, rng.randint(1, 12))
            for feature, threshold in candidate_splits(data):
                assert information_gain(data, feature, threshold) >= 0.0


class TestCandidateSplits:
    def test_booleans_come_first_in_field_order(self):
        data = [inst(YN, length=2), inst(WH, length=4)]
        splits = candidate_splits(data)
        assert splits[:7] == [
            ("has_wh", None),
            ("has_or", None),
            ("has_inversion", None),
            ("has_tag", None),
            ("last_utt_similar", None),
            ("last_utt_incomplete", None),
            ("has_cliche", None),
        ]
        assert splits[7:] == [("length", 3.0)]

    def test_length_midpoints(self):
        data = [inst(YN, length=1), inst(YN, length=2), inst(YN, length=6), inst(YN, length=2)]
        thresholds = [t for f, t in candidate_splits(data) if f == "length"]
        assert thresholds == [1.5, 4.0]

    def test_constant_length_offers_no_threshold(self):
        data = [inst(YN, length=3), inst(WH, length=3)]
        assert all(f != "length" for f, _ in candidate_splits(data))


class TestTraining:
    def test_pure_data_gives_single_leaf(self):
        model = train_tree([inst(PQ, length=1), inst(PQ, length=9)])
        assert model.root.is_leaf
        assert model.root.label is PQ
        assert model.root.distribution == {PQ: 2}
        assert model.depth() == 0

    def test_forced_single_split(self):
        model = train_tree([inst(YN, has_wh=False), inst(WH, has_wh=True)])
        assert model.root.feature == "has_wh"
        assert model.root.threshold is None
        assert model.root.left.label is YN  # False routes left
        assert model.root.right.label is WH
        assert model.depth() == 1

    def test_empty_training_set(self):
        with pytest.raises(EmptyTrainingSet):
            train_tree([])

    def test_max_depth_respected(self):
        rng = random.Random(3)
        data = random_instances(rng, 40)
        model = train_tree(data, TrainConfig(max_depth=2))
        assert model.depth() <= 2

    def test_min_samples_leaf_blocks_tiny_splits(self):
        # only has_wh separates, but one side would hold a single instance
        data = [inst(YN), inst(YN), inst(YN), inst(WH, has_wh=True)]
        model = train_tree(data, TrainConfig(min_samples_leaf=2))
        assert model.root.is_leaf
        assert model.root.label is YN

    def test_contradictory_duplicates_become_majority_leaf(self):
        data = [inst(YN), inst(YN), inst(WH)]  # identical vectors, mixed labels
        model = train_tree(data)
        assert model.root.is_leaf
        assert model.root.label is YN
        assert model.root.distribution == {YN: 2, WH: 1}

    def test_leaf_tie_breaks_by_global_frequency(self):
        # leaf sees YN and WH once each; WH is globally more frequent
        data = [
            inst(YN, length=1),
            inst(WH, length=1),
            inst(WH, has_wh=True, length=5),
            inst(WH, has_wh=True, length=5),
        ]
        model = train_tree(data, TrainConfig(max_depth=1))
        tied_leaf = model.root.left
        assert Counter({WH: 1, YN: 1}) == Counter(tied_leaf.distribution)
        assert tied_leaf.label is WH

    def test_leaf_tie_breaks_by_fixed_order_last(self):
        data = [inst(YN), inst(WH)]  # same vector, global counts tied too
        model = train_tree(data, TrainConfig(max_depth=1))
        assert model.root.is_leaf
        assert model.root.label is YN

    def test_training_accuracy_one_without_contradictions(self):
        rng = random.Random(11)
        for _ in range(25):
            raw = random_instances(rng, rng.randint(1, 30))
            seen = {}
            data = [seen.setdefault(i.fv, i) for i in raw]
            data = list(dict.fromkeys(data))
            model = train_tree(data)
            assert all(predict(model, i.fv) is i.label for i in data)

    def test_permutation_stability(self):
        rng = random.Random(13)
        for _ in range(20):
            data = random_instances(rng, rng.randint(2, 25))
            reference = train_tree(data)
            for _ in range(3):
                shuffled = data[:]
                rng.shuffle(shuffled)
                assert train_tree(shuffled) == reference

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(max_depth=0)
        with pytest.raises(ValueError):
            TrainConfig(min_samples_leaf=0)


class TestPredict:
    def test_single_leaf_predicts_constantly(self):
        model = TreeModel(root=Node(label=CS, distribution={CS: 5}))
        assert predict(model, make_fv()) is CS
        assert predict(model, make_fv(has_wh=True, length=20)) is CS

    def test_length_routing_is_inclusive_on_the_left(self):
        left = Node(label=PQ, distribution={PQ: 1})
        right = Node(label=YN, distribution={YN: 1})
        model = TreeModel(root=Node(feature="length", threshold=2.5, left=left, right=right))
        assert predict(model, make_fv(length=2)) is PQ
        assert predict(model, make_fv(length=3)) is YN


class TestBaseline:
    def test_majority_label_everywhere(self):
        model = majority_baseline([YN, YN, WH])
        assert model.root.is_leaf
        for fv in (make_fv(), make_fv(has_wh=True), make_fv(length=25)):
            assert predict(model, fv) is YN

    def test_tie_prefers_fixed_order(self):
        model = majority_baseline([WH, YN, YN, WH])
        assert predict(model, make_fv()) is YN

    def test_empty(self):
        with pytest.raises(EmptyTrainingSet):
            majority_baseline([])

    def test_baseline_round_trips_like_any_model(self):
        model = majority_baseline([PQ, PQ, YN])
        buf = io.StringIO()
        save_model(model, buf)
        buf.seek(0)
        assert load_model(buf) == model


class TestSerialization:
    def roundtrip(self, model):
        buf = io.StringIO()
        save_model(model, buf)
        buf.seek(0)
        return load_model(buf)

    def test_round_trip_identity(self):
        rng = random.Random(17)
        for _ in range(10):
            model = train_tree(random_instances(rng, rng.randint(2, 30)))
            assert self.roundtrip(model) == model

    def test_saved_bytes_are_deterministic(self):
        model = train_tree([inst(YN), inst(WH, has_wh=True), inst(PQ, has_cliche=True, length=1)])
        a, b = io.StringIO(), io.StringIO()
        save_model(model, a)
        save_model(model, b)
        assert a.getvalue() == b.getvalue()

    def test_version_field_embedded(self):
        buf = io.StringIO()
        save_model(majority_baseline([YN]), buf)
        assert json.loads(buf.getvalue())["version"] == 1

    def test_truncated_document(self):
        with pytest.raises(MalformedModel):
            load_model(io.StringIO('{"version": 1, "root": {"label"'))

    def test_future_version(self):
        with pytest.raises(UnsupportedVersion):
            load_model(io.StringIO('{"version": 99, "root": {"label": "YN", "distribution": {"YN": 1}}}'))

    def test_missing_version(self):
        with pytest.raises(MalformedModel):
            load_model(io.StringIO('{"root": {"label": "YN", "distribution": {"YN": 1}}}'))

    def test_bad_label(self):
        with pytest.raises(MalformedModel):
            load_model(io.StringIO('{"version": 1, "root": {"label": "??", "distribution": {"??": 1}}}'))

    def test_unknown_split_feature(self):
        doc = {
            "version": 1,
            "root": {
                "feature": "has_sparkles",
                "threshold": None,
                "left": {"label": "YN", "distribution": {"YN": 1}},
                "right": {"label": "WH", "distribution": {"WH": 1}},
            },
        }
        with pytest.raises(MalformedModel):
            load_model(io.StringIO(json.dumps(doc)))

    def test_boolean_split_rejects_threshold(self):
        doc = {
            "version": 1,
            "root": {
                "feature": "has_wh",
                "threshold": 0.5,
                "left": {"label": "YN", "distribution": {"YN": 1}},
                "right": {"label": "WH", "distribution": {"WH": 1}},
            },
        }
        with pytest.raises(MalformedModel):
            load_model(io.StringIO(json.dumps(doc)))

    def test_missing_child(self):
        doc = {
            "version": 1,
            "root": {"feature": "has_wh", "threshold": None, "left": {"label": "YN", "distribution": {"YN": 1}}},
        }
        with pytest.raises(MalformedModel, match="child"):
            load_model(io.StringIO(json.dumps(doc)))

    def test_non_object_document(self):
        with pytest.raises(MalformedModel):
            load_model(io.StringIO("[1, 2, 3]"))
