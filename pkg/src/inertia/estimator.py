"""Scikit-learn style wrapper around the classifier.

Samples are ``(group, endo)`` pairs, either as objects or as text specs.
There is nothing to learn: ``fit`` validates the inputs and records the
label set, and ``predict`` runs the exact decision procedure.
"""

from __future__ import annotations

from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .classifier import Verdict, classify_general
from .endo import Endomorphism
from .grammar import parse_endo, parse_group
from .groups import GroupDescriptor

Sample = Tuple[Union[str, GroupDescriptor], Union[str, Endomorphism, Sequence]]


def _coerce(sample: Sample) -> Tuple[GroupDescriptor, List[Endomorphism]]:
    group, endos = sample
    A = parse_group(group) if isinstance(group, str) else group
    if isinstance(endos, (str, Endomorphism)):
        endos = [endos]
    out = [parse_endo(e, A) if isinstance(e, str) else e for e in endos]
    for e in out:
        if e.ambient != A:
            raise ValueError("endomorphism does not act on the sample's group")
        e.require()
    return A, out


class InertiaClassifier(ClassifierMixin, BaseEstimator):
    """Predict right inertia (or left inertia with ``target="lin"``)."""

    def __init__(self, precision: int = 20, target: str = "rin"):
        self.precision = precision
        self.target = target

    def fit(self, X: Iterable[Sample], y=None):
        if self.target not in ("rin", "lin"):
            raise ValueError("target must be 'rin' or 'lin'")
        if self.precision < 1:
            raise ValueError("precision must be positive")
        X = list(X)
        for s in X:
            _coerce(s)
        self.classes_ = np.array([False, True])
        self.n_samples_seen_ = len(X)
        return self

    def verdicts(self, X: Iterable[Sample]) -> List[Verdict]:
        return [classify_general(*_coerce(s), K=self.precision) for s in X]

    def predict(self, X: Iterable[Sample]) -> np.ndarray:
        if not hasattr(self, "classes_"):
            raise AttributeError("call fit before predict")
        return np.array([getattr(v, self.target) for v in self.verdicts(X)], dtype=bool)

    def predict_proba(self, X: Iterable[Sample]) -> np.ndarray:
        p = self.predict(X).astype(float)
        return np.column_stack([1 - p, p])

    def _more_tags(self):
        return {"requires_y": False, "X_types": ["categorical"]}
