import numpy as np
import pytest

from atfs.attack import AttackConfig, run_attack
from atfs.estimators import FeatureSynergyAttack
from conftest import standard_extractors, standard_target


def test_fit_transform_matches_run_attack(face0, moire_target):
    extractors = standard_extractors(0)
    est = FeatureSynergyAttack(extractors=extractors, target=moire_target,
                               steps=15)
    out = est.fit(face0).transform(face0)
    ref, state = run_attack(extractors, face0, moire_target,
                            AttackConfig(steps=15))
    assert np.array_equal(out, ref)
    assert np.array_equal(est.delta_, state.delta)
    assert np.max(np.abs(est.delta_)) <= est.epsilon + 1e-15


def test_transform_applies_learned_delta_elsewhere(face0, moire_target):
    est = FeatureSynergyAttack(extractors=standard_extractors(1),
                               target=moire_target, steps=5)
    est.fit(face0)
    other = np.clip(face0 + 0.05, 0.0, 1.0)
    out = est.transform(other)
    assert np.array_equal(out, np.clip(other + est.delta_, 0.0, 1.0))


def test_sklearn_param_plumbing(moire_target):
    est = FeatureSynergyAttack(extractors=standard_extractors(2),
                               target=moire_target)
    params = est.get_params()
    assert params["steps"] == 100 and params["method"] == "atfs"
    est.set_params(steps=3, epsilon=2.0 / 255.0)
    assert est.steps == 3


def test_fit_validation(face0, moire_target):
    with pytest.raises(ValueError):
        FeatureSynergyAttack(extractors=[], target=moire_target).fit(face0)
    with pytest.raises(RuntimeError):
        FeatureSynergyAttack(extractors=standard_extractors(0),
                             target=moire_target).transform(face0)
    with pytest.raises(ValueError):
        FeatureSynergyAttack(extractors=standard_extractors(0),
                             target=moire_target).fit(np.full((3, 4, 4), 2.0))
