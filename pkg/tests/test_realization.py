import math

import numpy as np
import pytest

from affinekit import realization
from affinekit.realization import DomainViolation, NonCommuting, NonCompactFiber

TWO_PI = 2 * math.pi


def test_oscillator_period():
    est = realization.period_lattice(realization.builtin("oscillator"), [1.0])
    assert len(est.generators) == 1
    assert abs(abs(est.generators[0][0]) - TWO_PI) < 1e-6
    assert max(est.residuals) < 1e-6


def test_two_oscillators():
    est = realization.period_lattice(realization.builtin("oscillator2"), [1.0, 1.0])
    G = np.array(est.generators) / TWO_PI
    assert G.shape == (2, 2)
    # same lattice as 2πZ^2: integer entries with |det| = 1
    assert np.max(np.abs(G - np.round(G))) < 1e-6
    assert abs(abs(np.linalg.det(np.round(G))) - 1) < 1e-9


def test_rescaling_halves_generator():
    one = realization.period_lattice(realization.builtin("oscillator"), [1.0])
    two = realization.period_lattice(realization.builtin("oscillator", 2.0), [2.0])
    assert abs(abs(two.generators[0][0]) * 2 - abs(one.generators[0][0])) < 1e-6


@pytest.mark.parametrize("b,period", [(0.5, TWO_PI), (2.0, math.pi)])
def test_nonlinear_moment_period(b, period):
    # μ = H^2/2 with H = (x^2+p^2)/2 flows with angular speed H, so the period is 2π/H
    sys = realization.from_expressions(1, ["((x1**2 + p1**2)/2)**2/2"], ([-4, -4], [4, 4]))
    est = realization.period_lattice(sys, [b])
    assert abs(abs(est.generators[0][0]) - period) < 1e-6


def test_free_particle_noncompact():
    with pytest.raises(NonCompactFiber):
        realization.period_lattice(realization.builtin("free_particle"), [1.0])


def test_noncommuting_rejected():
    with pytest.raises(NonCommuting):
        realization.from_expressions(2, ["x1", "p1"], ([-1] * 4, [1] * 4))


def test_domain_errors():
    with pytest.raises(DomainViolation):
        realization.from_expressions(1, ["x1 + y"], ([-1, -1], [1, 1]))
    with pytest.raises(DomainViolation):
        realization.builtin("pendulum")
    with pytest.raises(DomainViolation):
        realization.from_expressions(1, ["x1"], ([1, 1], [-1, -1]))


@pytest.mark.parametrize("name", ["oscillator", "oscillator2", "free_particle"])
def test_moment_condition(name):
    assert realization.moment_condition_check(realization.builtin(name), 50, 3) < 1e-6


def test_from_json_and_time_one():
    sys = realization.from_json({"builtin": "oscillator"})
    z = realization.find_fiber_point(sys, [1.0])
    assert abs(sys.mu(z)[0] - 1.0) < 1e-9
    assert realization.time_one_residual(sys, [TWO_PI], z) < 1e-6
    assert realization.time_one_residual(sys, [1.0], z) > 0.1
