import cmath
import math

import pytest

from repeater.common import ConfigError, FockError, ModeError, TruncationError
from repeater.fock import (
    FockState, MixedState, ModeId, ModeKind, Polarization, build_eme, build_input_photon_state,
)

S = 1 / math.sqrt(2)


def two_modes():
    return [ModeId.photon("a"), ModeId.photon("b")]


def test_mode_polarization_rule():
    """Photonic modes need a polarization, atomic modes must not have one."""
    assert ModeId.photon("x", "V").polarization == Polarization.V
    assert ModeId.atomic_t("L1").label == "L1.T"
    assert ModeId.atomic_s("L1").kind == ModeKind.ATOMIC_S
    with pytest.raises(ModeError):
        ModeId("x", ModeKind.PHOTONIC)
    with pytest.raises(ModeError):
        ModeId("x.T", ModeKind.ATOMIC_T, Polarization.H)


def test_registry_rejects_duplicates():
    with pytest.raises(ModeError):
        FockState([ModeId.photon("a"), ModeId.photon("a")], {(0, 0): 1})


def test_truncation_is_enforced():
    with pytest.raises(TruncationError):
        FockState(two_modes(), {(3, 0): 1})
    assert FockState(two_modes(), {(3, 0): 1}, n_max=3).norm() == pytest.approx(1.0)


def test_zero_amplitudes_pruned():
    state = FockState(two_modes(), {(1, 0): 1.0, (0, 1): 1e-16})
    assert list(state.amplitudes) == [(1, 0)]


def test_normalize_and_zero_state():
    state = FockState(two_modes(), {(1, 0): 3, (0, 1): 4}).normalize()
    assert state.norm() == pytest.approx(1.0, abs=1e-12)
    assert abs(state.amplitudes[(0, 1)]) == pytest.approx(0.8)
    with pytest.raises(FockError):
        FockState(two_modes(), {}).normalize()


def test_inner_aligns_registries():
    a = FockState(two_modes(), {(1, 0): 1})
    b = FockState(list(reversed(two_modes())), {(0, 1): 1})
    assert a.inner(b) == pytest.approx(1.0)


def test_partition_splits_on_modes():
    state = FockState(two_modes(), {(1, 0): S, (0, 1): S})
    pieces = state.partition(["a"])
    assert set(pieces) == {(0,), (1,)}
    assert pieces[(1,)].labels == ("b",)
    assert pieces[(1,)].amplitudes == {(0,): pytest.approx(S)}


def test_tensor_rejects_shared_modes():
    a = FockState.vacuum(two_modes())
    with pytest.raises(ModeError):
        a.tensor(a)


def test_input_photon_state():
    """Single photon split over L_in/R_in with phase on the L_in term."""
    state = build_input_photon_state(0.0)
    assert state.labels == ("L_in", "R_in")
    assert state.amplitudes[(0, 1)] == pytest.approx(S)
    assert state.amplitudes[(1, 0)] == pytest.approx(S)

    flipped = build_input_photon_state(math.pi)
    assert flipped.amplitudes[(1, 0)] == pytest.approx(-S)

    quarter = build_input_photon_state(math.pi / 2)
    assert quarter.amplitudes[(1, 0)] == pytest.approx(1j * S)


def test_eme_pure_when_c0_zero():
    eme = build_eme(0.0, 0.0)
    assert len(eme.branches) == 1
    expected = FockState(eme.modes, {(1, 0): S, (0, 1): S})
    assert eme.fidelity(expected) == pytest.approx(1.0)


def test_eme_weights():
    eme = build_eme(1.0, 0.4)
    assert sorted(w for w, _ in eme.branches) == pytest.approx([0.5, 0.5])

    eme = build_eme(3.0, 2.2)
    vacuum = FockState.vacuum(eme.modes)
    assert eme.fidelity(vacuum) == pytest.approx(0.75)


def test_eme_phase_on_right_ensemble():
    eme = build_eme(0.0, 0.7, "L1", "R1")
    state = eme.as_pure()
    assert state.labels == ("L1.T", "R1.T")
    assert state.amplitudes[(0, 1)] / state.amplitudes[(1, 0)] == pytest.approx(cmath.exp(0.7j))


def test_eme_rejects_negative_c0():
    with pytest.raises(ConfigError, match="c0"):
        build_eme(-0.1, 0.0)


def test_mixed_state_invariants():
    vac = FockState.vacuum(two_modes())
    with pytest.raises(FockError):
        MixedState([(0.5, vac)])
    with pytest.raises(FockError):
        MixedState([(1.0, FockState(two_modes(), {(1, 0): 2}))])


def test_from_unnormalized_weights_by_norm():
    one = FockState(two_modes(), {(1, 0): 0.6})
    two = FockState(two_modes(), {(0, 1): 0.8})
    total, mixed = MixedState.from_unnormalized([(1.0, one), (1.0, two)])
    assert total == pytest.approx(1.0)
    assert sorted(w for w, _ in mixed.branches) == pytest.approx([0.36, 0.64])


def test_reduce_traces_out_modes():
    """Partial trace of a Bell-like state leaves a maximally mixed mode."""
    state = FockState(two_modes(), {(1, 0): S, (0, 1): S})
    reduced = MixedState.pure(state).reduce(["a"])
    assert reduced.labels == ("a",)
    assert reduced.occupation_distribution("a") == pytest.approx({0: 0.5, 1: 0.5})
    assert reduced.purity() == pytest.approx(0.5)


def test_merged_combines_global_phase_copies():
    a = FockState(two_modes(), {(1, 0): 1})
    mixed = MixedState([(0.25, a), (0.75, a.scaled(-1j))])
    assert len(mixed.merged().branches) == 1
    assert mixed.as_pure().fidelity(a) == pytest.approx(1.0)


def test_as_pure_rejects_real_mixtures():
    with pytest.raises(FockError):
        build_eme(1.0, 0.0).as_pure()
