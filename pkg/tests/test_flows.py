import math

import numpy as np
import pytest

from flowcube.flows import (
    GOLDEN_ALPHA,
    SuspensionError,
    SuspensionSpec,
    circle_coords,
    coordinates,
    evolve,
    get_flow,
    north_pole_flow,
    rotation_suspension,
    suspension_evolve,
    suspension_orbit,
    torus_dist,
    torus_flow,
)

ALPHA = GOLDEN_ALPHA


def circle_rotation(alpha=ALPHA, roof=lambda x: 1.0, lo=1.0, hi=1.0):
    return SuspensionSpec(
        base_map=lambda x: np.mod(np.asarray(x) + alpha, 1.0),
        base_inverse=lambda x: np.mod(np.asarray(x) - alpha, 1.0),
        roof=roof,
        roof_min=lo,
        roof_max=hi,
    )


def circ(a, b):
    d = abs(a - b) % 1.0
    return min(d, 1 - d)


class TestTorus:
    def test_closed_form(self):
        flow = torus_flow()
        np.testing.assert_allclose(evolve(flow, [0, 0], 1.0), [0.0, ALPHA], atol=1e-15)
        np.testing.assert_array_equal(evolve(flow, [0.3, 0.6], 0.0), [0.3, 0.6])

    def test_group_law(self):
        flow = torus_flow()
        x = np.array([0.12, 0.87])
        a = evolve(flow, evolve(flow, x, 0.3), 0.7)
        assert float(torus_dist(a, evolve(flow, x, 1.0))) <= 1e-12

    def test_vectorized_times(self):
        flow = torus_flow()
        out = evolve(flow, [0.1, 0.2], np.array([0.0, 0.5, -1.0]))
        assert out.shape == (3, 2)
        np.testing.assert_allclose(out[1], evolve(flow, [0.1, 0.2], 0.5))

    def test_coordinates(self):
        flow = torus_flow()
        np.testing.assert_allclose(coordinates(flow, [0, 0]), [1, 0.5, 1, 0.5], atol=1e-15)
        np.testing.assert_allclose(coordinates(flow, [0.25, 0]), [0.5, 1, 1, 0.5], atol=1e-15)


class TestSuspension:
    def test_small_step_stays_on_floor(self):
        np.testing.assert_allclose(suspension_evolve(circle_rotation(), [0.2, 0.5], 0.3), [0.2, 0.8])
        np.testing.assert_array_equal(suspension_evolve(circle_rotation(), [0.2, 0.5], 0.0),
                                      [0.2, 0.5])

    def test_identification_applied(self):
        out = suspension_evolve(circle_rotation(), [0.2, 0.5], 0.5)
        assert out[1] == 0.0
        assert circ(out[0], 0.2 + ALPHA) <= 1e-15

    def test_roof_one_and_a_half(self):
        susp = circle_rotation(roof=lambda x: 1.5, lo=1.5, hi=1.5)
        out = suspension_evolve(susp, [0.1, 1.0], 2.0)
        # Brute force: step forward at 1e-4, wrapping whenever s reaches the roof.
        x, s, t = 0.1, 1.0, 0.0
        for _ in range(20000):
            s += 1e-4
            if s >= 1.5 - 1e-12:
                x, s = (x + ALPHA) % 1.0, s - 1.5
        assert circ(out[0], x) <= 1e-12
        assert circ(out[0], 0.1 + 2 * ALPHA) <= 1e-12
        assert out[1] <= 1e-9

    def test_negative_time_inverts(self):
        flow = rotation_suspension(roof_amp=0.25)
        x = np.array([0.4, 0.3])
        back = flow.evolve(flow.evolve(x, -3.7), 3.7)
        assert float(flow.dist(back, x)) <= 1e-9

    def test_roof_violation(self):
        susp = circle_rotation(roof=lambda x: 0.1, lo=0.5, hi=1.0)
        with pytest.raises(SuspensionError):
            suspension_evolve(susp, [0.0, 0.05], 3.0)

    def test_outside_fundamental_domain(self):
        with pytest.raises(ValueError):
            suspension_evolve(circle_rotation(), [0.0, 1.0], 0.5)

    def test_orbit_matches_single_steps(self):
        flow = rotation_suspension(roof_amp=0.25)
        susp = flow.params["spec"]
        times = np.linspace(-6, 6, 37)
        orbit = suspension_orbit(susp, [0.7, 0.2], times)
        for t, row in zip(times, orbit):
            np.testing.assert_allclose(row, suspension_evolve(susp, [0.7, 0.2], t), atol=1e-12)

    def test_coords_continuous_across_identification(self):
        flow = rotation_suspension(roof_amp=0.0)
        x = 0.33
        top = coordinates(flow, [x, 1.0 - 1e-12])
        bottom = coordinates(flow, [(x + ALPHA) % 1.0, 0.0])
        assert np.abs(top - bottom).max() <= 1e-9

    def test_cos_roof_coords_continuous(self):
        flow = rotation_suspension(roof_amp=0.25)
        x = 0.61
        roof = 1 + 0.25 * math.cos(2 * math.pi * x)
        top = coordinates(flow, [x, roof * (1 - 1e-13)])
        bottom = coordinates(flow, [(x + ALPHA) % 1.0, 0.0])
        assert np.abs(top - bottom).max() <= 1e-9


class TestFixedCircle:
    def test_fixed_points(self):
        flow = north_pole_flow()
        x = flow.fixed_state
        out = flow.evolve(x, np.linspace(-5, 5, 11))
        np.testing.assert_array_equal(out, np.tile(x, (11, 1)))

    def test_closed_form_solves_ode(self):
        flow = north_pole_flow()
        x = np.array([0.1, 0.4])
        t, dt = 0.7, 1e-6
        a = flow.evolve(x, t)[1]
        deriv = (flow.evolve(x, t + dt)[1] - flow.evolve(x, t - dt)[1]) / (2 * dt)
        assert deriv == pytest.approx(math.sin(math.pi * a) ** 2, rel=1e-6)

    def test_orbit_tends_to_fixed_circle(self):
        flow = north_pole_flow()
        a = flow.evolve(np.array([0.5, 0.5]), 1e6)[1]
        assert circ(a, 0.0) < 1e-5


def test_get_flow():
    assert get_flow("torus").name == "torus"
    with pytest.raises(KeyError):
        get_flow("nope")


def test_circle_coords_shape():
    assert circle_coords(np.zeros((5, 3))).shape == (5, 6)
