import os
import numpy as np
from numpy.testing import assert_raises
from ..series_core import koebe_coefficients, initial_coefficients
from ..loewner_dynamics import (
    ConstantDriving, PiecewiseConstantDriving, PowerSeriesDriving,
    PerturbedDriving, make_driving_function, coefficient_rhs, adjoint_rhs,
    companion_rhs, integrate, close_tail, extract_limit_coefficients,
    LoewnerFlow, IntegrationBlowupError)
from ..conditions import lemma1_initial_adjoint, companion_initial_values
from ._test_utils import (random_functional, random_coefficients,
                          random_adjoint, make_output_dir)

# global setup
RNG = np.random.RandomState(0)
KOEBE_DRIVING = ConstantDriving(np.pi)


def test_piecewise_driving():
    u = PiecewiseConstantDriving([1., 2.], [0., 1., 2.])
    np.testing.assert_array_equal(u([0., .5, 1., 1.5, 2., 10.]),
                                  [0., 0., 1., 1., 2., 2.])
    assert u.breakpoints == (1., 2.)
    assert u.tail_start == 2.
    assert u.tail_value == 2.
    assert_raises(ValueError, PiecewiseConstantDriving, [1.], [0.])
    assert_raises(ValueError, PiecewiseConstantDriving, [2., 1.],
                  [0., 1., 2.])


def test_power_series_driving():
    u = PowerSeriesDriving(np.pi, [1., -.5], horizon=2.)
    t = np.array([0., 1., 2., 5.])
    np.testing.assert_allclose(u(t), np.pi + np.array([0., .5, 0., 0.]))
    np.testing.assert_allclose(u.derivative([0., 1., 3.]), [1., 0., 0.])
    assert u.tail_start == 2.
    assert_raises(ValueError, PowerSeriesDriving, 0., [1.], 0.)


def test_perturbed_driving():
    u = PerturbedDriving(KOEBE_DRIVING, [0., 1., 3.], [.1, -.2])
    np.testing.assert_allclose(u([0., .99, 1., 2.5, 3., 7.]),
                               np.pi + np.array([.1, .1, -.2, -.2, 0., 0.]))
    assert u.tail_start == 3.
    assert u.breakpoints == (1., 3.)

    # edges without a jump are not breakpoints
    u = PerturbedDriving(KOEBE_DRIVING, [0., 1., 2., 3.], [.1, .1, 0.])
    assert u.breakpoints == (2.,)
    assert_raises(ValueError, PerturbedDriving, KOEBE_DRIVING, [0., 1.],
                  [.1, .2])
    assert_raises(ValueError, PerturbedDriving, KOEBE_DRIVING, [.5, 1.],
                  [.1])


def test_make_driving_function():
    for u in [ConstantDriving(1.), PiecewiseConstantDriving([1.], [0., 1.]),
              PowerSeriesDriving(3., [.1, .2], 4.),
              PerturbedDriving(PowerSeriesDriving(3., [.1], 1.), [0., 2.],
                               [.5])]:
        v = make_driving_function(u.to_dict())
        assert type(v) is type(u)
        t = np.linspace(0., 5., 11)
        np.testing.assert_array_equal(u(t), v(t))
    assert_raises(ValueError, make_driving_function, dict(kind="sle"))
    assert_raises(ValueError, make_driving_function,
                  dict(kind="constant", level=1.))


def test_rhs_closed_form_n2():
    # da_2/dt = -2 e^{-t - iu}
    for t, u in [(0., 0.), (.5, 1.), (2., np.pi)]:
        rhs = coefficient_rhs(t, [1., .3 + .1j], u)
        assert rhs[0] == 0.
        np.testing.assert_allclose(rhs[1], -2. * np.exp(-t - 1j * u))


def test_rhs_hand_values():
    # at t = 0 and u = pi, e^{-s i u} = (-1)^s; A^s a0 = e_{s + 1}
    a0 = initial_coefficients(4)
    np.testing.assert_allclose(coefficient_rhs(0., a0, np.pi),
                               [0., 2., -2., 2.], atol=1e-12)
    np.testing.assert_allclose(coefficient_rhs(0., a0[:3], 0.),
                               [0., -2., -2.], atol=1e-12)

    a0 = initial_coefficients(3)
    np.testing.assert_allclose(adjoint_rhs(0., a0, [0., 0., 1.], np.pi),
                               [6., -4., 0.], atol=1e-12)
    np.testing.assert_allclose(companion_rhs(0., a0, [1., 0., 0.], np.pi),
                               [0., -4., 6.], atol=1e-12)

    # linear in the costate
    np.testing.assert_array_equal(adjoint_rhs(.7, a0, np.zeros(3), 1.), 0.)
    np.testing.assert_array_equal(companion_rhs(.7, a0, np.zeros(3), 1.), 0.)


def test_rhs_conservation():
    n = 5
    a = random_coefficients(n, RNG)
    psi = random_adjoint(n, RNG)
    assert coefficient_rhs(.3, a, 1.)[0] == 0.
    assert adjoint_rhs(.3, a, psi, 1.)[-1] == 0.
    assert companion_rhs(.3, a, psi, 1.)[0] == 0.
    assert_raises(ValueError, coefficient_rhs, -1., a, 0.)


def test_koebe_reproduction():
    n = 10
    traj = integrate(KOEBE_DRIVING, n, T=30., h=1e-3, sample_every=1000)
    np.testing.assert_allclose(traj.a_samples[-1], np.arange(1, n + 1),
                               atol=1e-7)
    assert traj.times[0] == 0.
    assert traj.times[-1] == 30.
    assert traj.tail_error_estimate < 1e-8


def test_koebe_error_decays_with_horizon():
    n = 6
    errors = []
    for T in [5., 10., 15.]:
        traj = integrate(KOEBE_DRIVING, n, T=T, h=1e-3, sample_every=10000)
        err = np.max(np.abs(traj.a_samples[-1] - np.arange(1, n + 1)))
        errors.append(err)
    assert errors[0] > errors[1] > errors[2]


def test_short_horizon_is_flagged():
    traj = integrate(KOEBE_DRIVING, 4, T=1., h=1e-3)
    _, bound, converged = extract_limit_coefficients(traj, tol=1e-8)
    assert not converged
    assert bound > 1e-8


def test_zero_driving_n2():
    traj = integrate(ConstantDriving(0.), 2, T=30., h=1e-3)
    a_inf, _, converged = extract_limit_coefficients(traj)
    assert converged
    np.testing.assert_allclose(a_inf, [1., -2.], atol=1e-8)


def test_index_conservation():
    n = 5
    lam = random_functional(n, RNG)
    psi0 = lemma1_initial_adjoint(lam, koebe_coefficients(n))
    u = PowerSeriesDriving(np.pi, [.5, -.2], 3.)
    traj = integrate(u, n, T=5., h=1e-2, psi0=psi0)
    np.testing.assert_array_equal(traj.a_samples[:, 0], 1.)
    np.testing.assert_array_equal(traj.psi_samples[:, -1], psi0[-1])


def test_step_halving_fourth_order():
    n = 5
    u = PowerSeriesDriving(np.pi, [.8, -.3], 3.)
    ends = [integrate(u, n, T=2., h=h).a_samples[-1]
            for h in [.04, .02, .01]]
    e1 = np.max(np.abs(ends[0] - ends[1]))
    e2 = np.max(np.abs(ends[1] - ends[2]))
    assert 10. < e1 / e2 < 22.


def test_breakpoints_keep_fourth_order():
    # a jump in the middle of a step would drop to first order
    n = 4
    u = PiecewiseConstantDriving([.013, .57], [np.pi, 2., 1.])
    ends = [integrate(u, n, T=2., h=h).a_samples[-1]
            for h in [.04, .02, .01]]
    e1 = np.max(np.abs(ends[0] - ends[1]))
    e2 = np.max(np.abs(ends[1] - ends[2]))
    assert e1 / e2 > 10.


def test_lemma1_forward():
    # the adjoint seeded from the limit coefficients ends at (0, conj(lam))
    for n in [3, 3, 4, 4, 4, 5, 5, 5, 6, 6, 6, 7, 7, 7, 8, 8, 8, 3, 5, 8]:
        lam = random_functional(n, RNG)
        a_inf = koebe_coefficients(n)
        target = np.concatenate(([0.], np.conj(lam)))

        psi0 = lemma1_initial_adjoint(lam, a_inf)
        traj = integrate(KOEBE_DRIVING, n, T=30., h=1e-3, psi0=psi0,
                         sample_every=30000)
        np.testing.assert_allclose(traj.psi_samples[-1][1:], target[1:],
                                   atol=1e-6)

        # anchoring psi_1 also sends it to 0
        psi0 = lemma1_initial_adjoint(lam, a_inf, anchor_first=True)
        traj = integrate(KOEBE_DRIVING, n, T=30., h=1e-3, psi0=psi0,
                         sample_every=30000)
        np.testing.assert_allclose(traj.psi_samples[-1], target, atol=1e-6)


def test_lemma1_forward_general_driving():
    n = 5
    lam = random_functional(n, RNG)
    u = PiecewiseConstantDriving([.3, 1.], [np.pi, 2.5, 3.5])
    flow = LoewnerFlow(n, horizon=30., step=1e-3, sample_every=30000,
                       exact_tail=True, verbose=0).fit(u)
    psi0 = lemma1_initial_adjoint(lam, flow.limit_, anchor_first=True)
    traj = integrate(u, n, T=30., h=1e-3, psi0=psi0, sample_every=30000)
    np.testing.assert_allclose(traj.psi_samples[-1],
                               np.concatenate(([0.], np.conj(lam))),
                               atol=1e-6)


def test_transposition_duality_along_trajectory():
    for n in [3, 5, 8]:
        lam = random_functional(n, RNG)
        a_inf = koebe_coefficients(n)
        psi0 = lemma1_initial_adjoint(lam, a_inf, anchor_first=True)
        q0 = companion_initial_values(lam, a_inf)
        traj = integrate(KOEBE_DRIVING, n, T=30., h=1e-3, psi0=psi0, q0=q0,
                         sample_every=100)
        np.testing.assert_allclose(traj.psi_samples, traj.q_samples[:, ::-1],
                                   atol=1e-8)


def test_close_tail():
    # exact closure after the last jump vs. long integration
    n = 6
    u = PiecewiseConstantDriving([.5, 2.], [np.pi, 2., 2.5])
    traj = integrate(u, n, T=2., h=1e-3)
    a_closed = close_tail(traj.a_samples[-1], 2., u.tail_value)
    a_long = integrate(u, n, T=30., h=1e-3, sample_every=30000).a_samples[-1]
    np.testing.assert_allclose(a_closed, a_long, atol=1e-8)

    # Koebe in closed form from t = 0
    np.testing.assert_allclose(close_tail(initial_coefficients(n), 0., np.pi),
                               np.arange(1, n + 1), atol=1e-12)
    a, bound, converged = extract_limit_coefficients(traj, driving=u)
    assert bound == 0. and converged
    np.testing.assert_allclose(a, a_closed)


def test_integration_blowup():
    with assert_raises(IntegrationBlowupError) as cm:
        integrate(KOEBE_DRIVING, 4, T=1., h=1e-2,
                  a0=[1., 1e200, 1e200, 1e200])
    assert 0. < cm.exception.time <= 1.


def test_bad_arguments():
    assert_raises(ValueError, integrate, KOEBE_DRIVING, 1)
    assert_raises(ValueError, integrate, KOEBE_DRIVING, 3, T=0.)
    assert_raises(ValueError, integrate, KOEBE_DRIVING, 3, T=1., h=2.)
    assert_raises(ValueError, integrate, KOEBE_DRIVING, 3, sample_every=0)
    assert_raises(ValueError, integrate, KOEBE_DRIVING, 3, psi0=[0., 1.])


def test_sampling():
    traj = integrate(KOEBE_DRIVING, 3, T=1., h=1e-2, sample_every=7)
    assert len(traj.times) == len(traj.a_samples)
    assert traj.times[-1] == 1.
    assert np.all(np.diff(traj.times) > 0.)
    assert traj.psi_samples is None and traj.q_samples is None


def test_loewner_flow():
    output_dir = make_output_dir("flow")
    flow = LoewnerFlow(4, horizon=30., step=1e-3, sample_every=1000,
                       verbose=0).fit(KOEBE_DRIVING)
    assert flow.converged_
    np.testing.assert_allclose(flow.limit_, [1, 2, 3, 4], atol=1e-8)
    report = flow.get_limit_report()
    assert list(report.keys()) == ["n", "driving", "horizon", "step",
                                   "limit", "tail_bound", "converged"]
    output = flow.transform(output_dir)
    assert os.path.isfile(output["limit"])
    with open(output["trajectory"]) as fd:
        header = fd.readline().strip()
    assert header == "t,re_a2,im_a2,re_a3,im_a3,re_a4,im_a4"

    # unfitted
    assert_raises(Exception, LoewnerFlow(3).transform, output_dir)
