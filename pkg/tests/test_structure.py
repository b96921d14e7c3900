import numpy as np
import pytest

from dampedchain import (
    Distribution,
    Regime,
    RegimeError,
    StochasticMatrix,
    ValidationError,
    class_mass,
    decompose,
    restrict,
    restrict_damping,
    restrict_distribution,
)


def test_five_node_is_regular(five_node):
    P, _ = five_node
    s = decompose(P)
    assert s.regime is Regime.REGULAR
    assert len(s.classes) == 1
    assert s.classes[0].states == (0, 1, 2, 3, 4)
    assert s.classes[0].aperiodic
    assert s.transient_states == ()


def test_eight_node_is_singular_with_two_classes(eight_node):
    P, _ = eight_node
    s = decompose(P)
    assert s.regime is Regime.SINGULAR
    assert [c.states for c in s.classes] == [(0, 1, 2, 3), (4, 5, 6, 7)]
    assert all(c.aperiodic for c in s.classes)
    assert s.transient_states == ()


def test_two_state_swap_is_periodic_unsupported():
    P = StochasticMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    s = decompose(P)
    assert len(s.classes) == 1
    assert s.classes[0].period == 2
    assert not s.classes[0].aperiodic
    assert s.regime is Regime.UNSUPPORTED


def test_transient_states_are_detected_and_unsupported():
    # State 3 leaks into the closed class {1, 2}.
    P = StochasticMatrix(
        np.array([[0.5, 0.5, 0.0], [0.5, 0.5, 0.0], [0.25, 0.25, 0.5]])
    )
    s = decompose(P)
    assert s.transient_states == (2,)
    assert [c.states for c in s.classes] == [(0, 1)]
    assert s.regime is Regime.UNSUPPORTED


def test_self_loop_state_has_period_one():
    P = StochasticMatrix(np.array([[1.0, 0.0], [0.5, 0.5]]))
    s = decompose(P)
    assert s.classes[0].states == (0,)
    assert s.classes[0].period == 1


class TestClassMass:
    def test_uniform_splits_evenly(self, eight_node):
        P, d = eight_node
        s = decompose(P)
        masses = class_mass(d.as_distribution(), s)
        np.testing.assert_allclose(masses, [0.5, 0.5], atol=1e-15)

    def test_point_mass_concentrates(self, eight_node):
        P, _ = eight_node
        s = decompose(P)
        masses = class_mass(Distribution.point_mass(8, 0), s)
        np.testing.assert_allclose(masses, [1.0, 0.0], atol=0)

    def test_regular_regime_gives_one(self, five_node):
        P, _ = five_node
        s = decompose(P)
        masses = class_mass(Distribution.uniform(5), s)
        np.testing.assert_allclose(masses, [1.0], atol=1e-15)

    def test_transient_mass_is_rejected(self):
        P = StochasticMatrix(
            np.array([[0.5, 0.5, 0.0], [0.5, 0.5, 0.0], [0.25, 0.25, 0.5]])
        )
        s = decompose(P)
        with pytest.raises(RegimeError):
            class_mass(Distribution.uniform(3), s)

    def test_masses_account_for_all_probability(self, eight_node):
        P, _ = eight_node
        s = decompose(P)
        rng = np.random.default_rng(3)
        for _ in range(5):
            w = rng.random(8)
            p = Distribution(w / w.sum())
            assert class_mass(p, s).sum() == pytest.approx(1.0, abs=1e-12)


class TestRestrict:
    def test_eight_node_first_class_equals_four_node(self, eight_node, four_node):
        P8, _ = eight_node
        P4, _ = four_node
        s = decompose(P8)
        sub = restrict(P8, s.classes[0])
        np.testing.assert_array_equal(sub.entries, P4.entries)

    def test_whole_space_class_is_identity_restriction(self, five_node):
        P, _ = five_node
        s = decompose(P)
        np.testing.assert_array_equal(restrict(P, s.classes[0]).entries, P.entries)

    def test_non_closed_class_is_rejected(self, eight_node):
        from dampedchain.structure import ClosedClass

        P, _ = eight_node
        with pytest.raises(ValidationError):
            restrict(P, ClosedClass((0, 1, 2), 1))

    def test_damping_renormalizes(self, eight_node):
        P, d = eight_node
        s = decompose(P)
        sub = restrict_damping(d, s.classes[0])
        np.testing.assert_allclose(sub.weights, [0.25, 0.25, 0.25, 0.25], atol=1e-15)

    def test_distribution_restriction_requires_mass(self, eight_node):
        P, _ = eight_node
        s = decompose(P)
        p = Distribution.point_mass(8, 0)
        with pytest.raises(ValidationError):
            restrict_distribution(p, s.classes[1])


def test_restricted_classes_are_regular(eight_node):
    P, _ = eight_node
    s = decompose(P)
    for cls in s.classes:
        sub_structure = decompose(restrict(P, cls))
        assert sub_structure.regime is Regime.REGULAR


def test_decompose_commutes_with_permutation(eight_node):
    P, _ = eight_node
    rng = np.random.default_rng(11)
    perm = rng.permutation(8)
    permuted = StochasticMatrix(P.entries[np.ix_(perm, perm)])
    s = decompose(permuted)
    assert s.regime is Regime.SINGULAR
    # Mapping permuted class members back to original labels recovers the classes.
    found = {frozenset(int(perm[s_]) for s_ in c.states) for c in s.classes}
    assert found == {frozenset({0, 1, 2, 3}), frozenset({4, 5, 6, 7})}
