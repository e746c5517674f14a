import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from repeater.common import ConfigError
from repeater.dark_state import DarkStateSystem, dark_state_check


def test_dark_state_is_annihilated():
    residual, theta = dark_state_check(DarkStateSystem(g=2.0, omega_c2=1.0))
    assert residual < 1e-12
    assert theta == pytest.approx(math.atan(2.0))


def test_limits():
    """Pure S when the control field dominates, pure T when it is off."""
    assert DarkStateSystem(0.0, 5.0).dark_state() == pytest.approx([1.0, 0.0, 0.0])
    assert DarkStateSystem(5.0, 0.0).dark_state() == pytest.approx([0.0, 0.0, -1.0])


def test_hamiltonian_is_symmetric_and_scaled():
    h = DarkStateSystem(3e7, 4e7).hamiltonian()
    assert np.allclose(h, h.T)
    assert h[0, 1] == pytest.approx(0.6)
    assert h[1, 2] == pytest.approx(0.8)


def test_rejects_bad_couplings():
    with pytest.raises(ConfigError):
        DarkStateSystem(-1.0, 1.0)
    with pytest.raises(ConfigError):
        DarkStateSystem(0.0, 0.0)


@settings(deadline=None, max_examples=200)
@given(st.floats(0, 1e9), st.floats(0, 1e9))
def test_residual_property(g, omega):
    if g == 0 and omega == 0:
        return
    residual, _ = dark_state_check(DarkStateSystem(g, omega))
    assert residual <= 1e-12
