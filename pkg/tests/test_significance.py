import numpy as np
import pytest

from billboard_salience.core import BoundingBox, ConfusionCounts, FixationPoint, FixationSet, SaliencyMap
from billboard_salience.errors import EmptyIntersection, EmptyTrainingSet, MissingLabels
from billboard_salience.significance import (
    RegionScore,
    SignificanceThreshold,
    calibrate_threshold,
    classify_region,
    confusion_stats,
    ground_truth_salience,
    label_regions,
    region_mean_saliency,
    score_regions,
)

BOX = BoundingBox(0, 0, 2, 2)


def _score(value, image_id="img", box=BOX, predicted=None, truth=None):
    return RegionScore(image_id, box, value, predicted, truth)


def _threshold(value):
    return SignificanceThreshold(value, 1, "calibrated:train")


class TestRegionMeanSaliency:
    def test_constant_map(self):
        saliency = SaliencyMap(np.full((10, 10), 0.37))
        assert region_mean_saliency(saliency, BoundingBox(2, 3, 4, 5)) == pytest.approx(0.37)

    def test_whole_map(self):
        saliency = SaliencyMap(np.array([[0.0, 1.0], [1.0, 1.0]]))
        assert region_mean_saliency(saliency, BoundingBox(0, 0, 2, 2)) == 0.75

    def test_clipped_box(self):
        saliency = SaliencyMap(np.array([[0.0, 1.0], [1.0, 1.0]]))
        assert region_mean_saliency(saliency, BoundingBox(-2, 0, 4, 2)) == 0.75

    def test_outside_frame(self):
        with pytest.raises(EmptyIntersection):
            region_mean_saliency(SaliencyMap(np.zeros((4, 4))), BoundingBox(10, 10, 2, 2))

    def test_bounded_by_box_values(self, rng):
        values = rng.random((20, 20))
        saliency = SaliencyMap(values)
        for _ in range(50):
            x, y = (int(v) for v in rng.integers(0, 18, size=2))
            w, h = (int(v) for v in rng.integers(1, 6, size=2))
            patch = values[y:y + h, x:x + w]
            mean = region_mean_saliency(saliency, BoundingBox(x, y, w, h))
            assert patch.min() - 1e-12 <= mean <= patch.max() + 1e-12

    def test_score_regions_skips_outside_boxes(self):
        saliency = SaliencyMap(np.zeros((4, 4)))
        scores = score_regions(saliency, [BoundingBox(0, 0, 2, 2), BoundingBox(9, 9, 1, 1)], "img")
        assert [s.box for s in scores] == [BoundingBox(0, 0, 2, 2)]


class TestCalibrateThreshold:
    def test_single_region(self):
        assert calibrate_threshold([_score(0.3)]).value == pytest.approx(0.3)

    def test_two_regions(self):
        threshold = calibrate_threshold([_score(0.2), _score(0.6)], method_id="spectral-residual")
        assert threshold.value == pytest.approx(0.4)
        assert threshold.n_regions == 2
        assert threshold.source == "calibrated:train"
        assert threshold.method_id == "spectral-residual"

    def test_empty(self):
        with pytest.raises(EmptyTrainingSet):
            calibrate_threshold([])

    def test_within_score_range(self, rng):
        for _ in range(50):
            scores = [_score(float(v)) for v in rng.random(int(rng.integers(1, 30)))]
            value = calibrate_threshold(scores).value
            assert min(s.mean_saliency for s in scores) <= value <= max(s.mean_saliency for s in scores)

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            SignificanceThreshold(1.2, 1, "override")
        with pytest.raises(ValueError):
            SignificanceThreshold(0.5, -1, "override")


class TestClassifyRegion:
    def test_above(self):
        assert classify_region(_score(0.5), _threshold(0.416))

    def test_equal_is_not_salient(self):
        assert not classify_region(_score(0.416), _threshold(0.416))

    def test_below(self):
        assert not classify_region(_score(0.1), _threshold(0.416))

    def test_affine_invariance(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            means = rng.uniform(0.0, 0.5, size=int(rng.integers(2, 20)))
            a = float(rng.uniform(0.2, 1.5))
            b = float(rng.uniform(0.0, 1.0 - 0.5 * a))

            def classify(values):
                scores = [_score(float(v)) for v in values]
                threshold = calibrate_threshold(scores)
                return [classify_region(s, threshold) for s in scores]

            assert classify(means) == classify(a * means + b)


class TestGroundTruthSalience:
    def test_no_fixations(self):
        assert not ground_truth_salience(FixationSet("img"), BOX)

    def test_one_inside(self):
        assert ground_truth_salience(FixationSet("img", [FixationPoint(1.5, 0.5)]), BOX)

    def test_only_outside(self):
        fixations = FixationSet("img", [FixationPoint(2.0, 0.0), FixationPoint(5.0, 5.0)])
        assert not ground_truth_salience(fixations, BOX)


class TestLabelRegions:
    def test_attaches_prediction_and_truth(self):
        fixations = FixationSet("img", [FixationPoint(0.5, 0.5)])
        labelled = label_regions([_score(0.9), _score(0.1, box=BoundingBox(5, 5, 2, 2))], _threshold(0.5), fixations)
        assert [(r.predicted_salient, r.truth_salient) for r in labelled] == [(True, True), (False, False)]

    def test_missing_inputs_leave_labels_unset(self):
        labelled = label_regions([_score(0.9)], None, None)
        assert labelled[0].predicted_salient is None and labelled[0].truth_salient is None


class TestConfusionStats:
    def test_all_correct(self):
        regions = [_score(0, predicted=True, truth=True), _score(0, predicted=False, truth=False)]
        assert confusion_stats(regions).accuracy == 1.0

    def test_known_counts(self):
        regions = (
            [_score(0, predicted=True, truth=True)] * 3
            + [_score(0, predicted=False, truth=False)] * 4
            + [_score(0, predicted=True, truth=False)]
            + [_score(0, predicted=False, truth=True)] * 2
        )
        stats = confusion_stats(regions)
        assert stats.counts == ConfusionCounts(tp=3, tn=4, fp=1, fn=2)
        assert stats.accuracy == 0.7
        assert stats.sensitivity == 0.6
        assert stats.specificity == 0.8
        assert stats.precision == 0.75

    def test_undefined_rates(self):
        stats = confusion_stats([_score(0, predicted=False, truth=False)])
        assert stats.sensitivity is None
        assert stats.precision is None
        assert stats.specificity == 1.0

    def test_missing_labels(self):
        with pytest.raises(MissingLabels):
            confusion_stats([_score(0, predicted=True)])
