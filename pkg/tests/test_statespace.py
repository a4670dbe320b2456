import numpy as np
import pytest
from scipy.signal import cont2discrete

from reliable_drive.control import StateSpaceModel, discretize, static_gain


def first_order():
    return StateSpaceModel([[-1.0]], [[1.0]], [[1.0]], [[0.0]])


def random_system(rng, n=4, m=2, p=3):
    A = rng.normal(size=(n, n)) - 3 * np.eye(n)
    return StateSpaceModel(A, rng.normal(size=(n, m)), rng.normal(size=(p, n)),
                           rng.normal(size=(p, m)))


def test_integrator_pole_maps_to_one():
    integ = StateSpaceModel([[0.0]], [[1.0]], [[1.0]], [[0.0]])
    d = discretize(integ, 0.01)
    assert d.poles()[0] == pytest.approx(1.0, abs=1e-15)


def test_dc_gain_preserved():
    d = discretize(first_order(), 0.01)
    assert d.dcgain()[0, 0] == pytest.approx(1.0, abs=1e-12)


def test_low_frequency_response_matches():
    dt = 1e-3
    sys = first_order()
    w = 0.1 * 2 / dt
    ratio = discretize(sys, dt).freqresp([w])[0] / sys.freqresp([w])[0]
    assert abs(ratio[0, 0] - 1) < 0.01


@pytest.mark.parametrize("seed", range(5))
def test_tustin_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    sys = random_system(rng)
    dt = 0.05
    d = discretize(sys, dt)
    Ad, Bd, Cd, Dd, _ = cont2discrete((sys.A, sys.B, sys.C, sys.D), dt, method="bilinear")
    # realizations differ by a similarity; transfer functions must agree
    w = np.array([0.0, 0.3, 3.0, 30.0])
    ref = StateSpaceModel(Ad, Bd, Cd, Dd, dt=dt).freqresp(w)
    np.testing.assert_allclose(d.freqresp(w), ref, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(d.D, Dd, rtol=1e-12)
    np.testing.assert_allclose(np.sort_complex(d.poles()), np.sort_complex(np.linalg.eigvals(Ad)),
                               rtol=1e-10)


def test_stable_maps_inside_unit_disc():
    rng = np.random.default_rng(7)
    for _ in range(10):
        sys = random_system(rng)
        if sys.is_stable():
            assert discretize(sys, 0.1).is_stable()


def test_pole_at_two_over_dt_is_singular():
    dt = 0.01
    sys = StateSpaceModel([[2.0 / dt]], [[1.0]], [[1.0]], [[0.0]])
    with pytest.raises(ValueError, match="singular"):
        discretize(sys, dt)


def test_static_gain_and_round_trip():
    g = static_gain([[2.0, 0.0]], input_labels=("a", "b"), output_labels=("y",))
    assert g.n_states == 0 and g.dcgain()[0, 0] == 2.0
    sys = random_system(np.random.default_rng(1))
    back = StateSpaceModel.from_dict(sys.to_dict())
    np.testing.assert_array_equal(back.A, sys.A)
    assert back.input_labels == sys.input_labels


def test_validation():
    with pytest.raises(ValueError):
        StateSpaceModel(np.eye(2), np.ones((3, 1)), np.ones((1, 2)), [[0.0]])
    with pytest.raises(ValueError):
        StateSpaceModel([[-1.0]], [[1.0]], [[1.0]], [[0.0]], input_labels=("u",),
                        output_labels=("y", "y2"))
    with pytest.raises(ValueError):
        StateSpaceModel([[-1.0]], [[1.0]], [[1.0]], [[0.0]], dt=0.0)
    with pytest.raises(ValueError):
        discretize(discretize(first_order(), 0.1), 0.1)


def test_matrices_are_read_only():
    sys = first_order()
    with pytest.raises(ValueError):
        sys.A[0, 0] = 3.0


def test_select_by_label():
    sys = random_system(np.random.default_rng(2))
    sub = sys.select(outputs=["y2"], inputs=["u0"])
    np.testing.assert_array_equal(sub.D, sys.D[2:3, 0:1])
