import numpy as np
from hypothesis import given, settings, strategies as st

from inertia.classifier import classify
from inertia.groups import Localized
from inertia.sampling import (
    random_element,
    random_endo,
    random_fg_subgroup,
    random_group,
    random_inertial_pair,
)

seeds = st.integers(0, 2**32 - 1)


def test_seeded_reproducible():
    a = random_group(np.random.default_rng(5))
    b = random_group(np.random.default_rng(5))
    assert a == b
    fa = random_endo(np.random.default_rng(9), a)
    fb = random_endo(np.random.default_rng(9), b)
    assert fa.structurally_equal(fb)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_samples_are_valid(seed):
    rng = np.random.default_rng(seed)
    A = random_group(rng, 4, ftfr=True, need_localized=True)
    assert A.has_ftfr and any(isinstance(a, Localized) for a, _ in A.slots)
    for style in ("structured", "inertial", "invertible"):
        assert random_endo(rng, A, style).is_well_defined()
    assert A.contains(random_element(rng, A))
    X = random_fg_subgroup(rng, A)
    assert 1 <= len(X.generators) <= 3


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_inertial_pair(seed):
    A, f, g = random_inertial_pair(np.random.default_rng(seed))
    assert classify(A, f).rin and classify(A, g).rin
