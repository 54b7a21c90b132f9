import numpy as np
import pytest
from sklearn.base import clone

from inertia.estimator import InertiaClassifier
from inertia.grammar import parse_endo, parse_group

SAMPLES = [
    ("Q^w", "mult 2"),
    ("Q^w", "mult 1/2"),
    ("Z(3)^w + Z(3^inf)", "block{1: 1; 2: -1}"),
    ("Z(2^inf) + Q[2]", ["block{1: local(2:1); 2: 1/2}"]),
]


def test_predict_rin():
    clf = InertiaClassifier(precision=6).fit(SAMPLES)
    assert clf.predict(SAMPLES).tolist() == [True, False, True, False]


def test_predict_lin():
    clf = InertiaClassifier(precision=6, target="lin").fit(SAMPLES)
    assert clf.predict(SAMPLES).tolist() == [False, True, True, False]


def test_score_and_proba():
    clf = InertiaClassifier(precision=6).fit(SAMPLES)
    assert clf.score(SAMPLES, [True, False, True, False]) == 1.0
    proba = clf.predict_proba(SAMPLES[:2])
    assert np.array_equal(proba, [[0.0, 1.0], [1.0, 0.0]])


def test_objects_accepted():
    A = parse_group("Z^2")
    clf = InertiaClassifier().fit([])
    assert clf.predict([(A, parse_endo("matrix{1: [[1,1],[0,1]]}", A))]).tolist() == [False]


def test_params_and_clone():
    clf = InertiaClassifier(precision=7, target="lin")
    assert clf.get_params() == {"precision": 7, "target": "lin"}
    assert clone(clf).get_params() == clf.get_params()


@pytest.mark.parametrize("kw", [{"target": "both"}, {"precision": 0}])
def test_bad_params(kw):
    with pytest.raises(ValueError):
        InertiaClassifier(**kw).fit(SAMPLES)


def test_bad_sample():
    with pytest.raises(ValueError):
        InertiaClassifier().fit([("Z", "mult 1/2")])


def test_unfitted():
    with pytest.raises(AttributeError):
        InertiaClassifier().predict(SAMPLES)
