import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from kdivis import models, qmat
from kdivis.errors import IntegrationUnstable, QuadratureFailure, SingularMap


def _is_tp(e, tol=1e-8):
    return qmat.is_trace_preserving(e, tol)


def _annihilates_trace(gen, tol=1e-10):
    vid = qmat.vec(np.eye(int(np.sqrt(gen.shape[0]))))
    return np.abs(vid.conj() @ gen).max() <= tol


# ---------------------------------------------------------------------------
# rate functions
# ---------------------------------------------------------------------------

def test_rate_presets_match_quadrature():
    from scipy.integrate import quad
    for rate in (models.RateFn.constant(0.7), models.RateFn.tanh_neg(),
                 models.RateFn.sine(), models.RateFn.sine_neg()):
        for t in (0.3, 1.7, 6.0):
            ref, _ = quad(lambda s: float(rate(s)), 0.0, t, epsabs=1e-12)
            assert_allclose(rate.integral(t), ref, atol=1e-9)


def test_rate_custom_uses_quadrature():
    rate = models.RateFn.of(lambda t: np.exp(-t))
    assert rate.tag == "custom"
    assert_allclose(rate.integral(2.0), 1.0 - np.exp(-2.0), atol=1e-9)
    grid = rate.integrals_on_grid(np.linspace(0.0, 2.0, 9))
    assert_allclose(grid[-1], 1.0 - np.exp(-2.0), atol=1e-9)


def test_rate_vocabulary_round_trip():
    for spec in ("const:0.5", "tanh-neg", "sin", "sin-neg"):
        assert models.RateFn.of(spec).tag == spec
    assert models.RateFn.of(2).tag == "const:2"
    assert models.RateFn.of("0.25").tag == "const:0.25"
    with pytest.raises(ValueError):
        models.RateFn.of("cosh")


def test_quadrature_failure_on_wild_rate():
    rate = models.RateFn.of(lambda t: np.sin(1e7 * t))
    with pytest.raises(QuadratureFailure):
        rate.integral(50.0)


# ---------------------------------------------------------------------------
# Pauli channel
# ---------------------------------------------------------------------------

def test_pauli_generator_zero_rates():
    model = models.PauliChannelModel.constant(0.0, 0.0, 0.0)
    assert_allclose(models.pauli_generator(model, 1.0), np.zeros((4, 4)))


def test_pauli_generator_dephasing_action():
    model = models.PauliChannelModel.constant(0.0, 0.0, 0.8)
    gen = models.pauli_generator(model, 0.0)
    # sigma_z sigma_x sigma_z = -sigma_x, so L(sigma_x) = -g3 sigma_x
    assert_allclose(qmat.apply_superop(gen, qmat.SIGMA_X), -0.8 * qmat.SIGMA_X,
                    atol=1e-13)


def test_pauli_generator_hall_at_zero_time():
    # tanh 0 = 0, so the Hall rates start at (1, 1, 0)
    hall = models.PauliChannelModel.hall()
    ref = models.PauliChannelModel.constant(1.0, 1.0, 0.0)
    assert_allclose(models.pauli_generator(hall, 0.0),
                    models.pauli_generator(ref, 5.0), atol=1e-13)


def test_pauli_generator_invariants():
    gen = models.pauli_generator(models.PauliChannelModel.hall(), 0.7)
    assert _annihilates_trace(gen)
    choi = qmat.reshuffle(gen)
    assert np.abs(choi - choi.conj().T).max() < 1e-12


def test_pauli_propagator_identity_at_zero():
    model = models.PauliChannelModel.hall()
    assert_allclose(models.pauli_propagator_analytic(model, 0.0), np.eye(4),
                    atol=1e-14)


def test_pauli_propagator_constant_rates():
    model = models.PauliChannelModel.constant(1.0, 1.0, 0.0)
    for t in (0.5, 2.0):
        lam = model.bloch_eigenvalues(np.array([t]))[0]
        assert_allclose(lam, [np.exp(-t), np.exp(-t), np.exp(-2 * t)], atol=1e-12)


def test_pauli_propagator_hall_eigenvalues():
    model = models.PauliChannelModel.hall()
    ts = np.linspace(0.1, 5.0, 7)
    lam = model.bloch_eigenvalues(ts)
    assert_allclose(lam[:, 0], np.exp(-ts) * np.cosh(ts), rtol=1e-12)
    assert_allclose(lam[:, 1], np.exp(-ts) * np.cosh(ts), rtol=1e-12)
    assert_allclose(lam[:, 2], np.exp(-2 * ts), rtol=1e-12)


def test_pauli_propagator_matches_rk4():
    for model in (models.PauliChannelModel.hall(),
                  models.PauliChannelModel.constant(1.0, 1.0, 1.0)):
        gen_fn = lambda t: models.pauli_generator(model, t)
        for t in (1.0, 5.0):
            rk = models.propagate_rk4(gen_fn, t, steps=max(200, int(200 * t)))
            exact = models.pauli_propagator_analytic(model, t)
            assert np.abs(rk - exact).max() < 1e-6


def test_rk4_matches_analytic_on_random_bounded_triples(rng):
    # 50 random constant-rate triples whose propagator stays bounded on
    # [0, 5] (all pairwise rate sums nonnegative, so no exponential growth)
    checked = 0
    while checked < 50:
        g = rng.uniform(-1.0, 1.0, size=3)
        if g[0] + g[1] < 0 or g[1] + g[2] < 0 or g[2] + g[0] < 0:
            continue
        checked += 1
        model = models.PauliChannelModel.constant(*g)
        gen = models.pauli_generator(model, 0.0)
        rk = models.propagate_rk4(lambda t: gen, 5.0, steps=1000)
        exact = models.pauli_propagator_analytic(model, 5.0)
        assert np.abs(rk - exact).max() <= 1e-6, g


# ---------------------------------------------------------------------------
# amplitude damping
# ---------------------------------------------------------------------------

def _survival_ode_oracle(gamma0, lam, ts):
    # G'' + lam G' + (gamma0 lam / 2) G = 0, G(0) = 1, G'(0) = 0, which is the
    # memory-kernel equation for the Lorentzian reservoir
    sol = solve_ivp(lambda t, y: [y[1], -lam * y[1] - 0.5 * gamma0 * lam * y[0]],
                    [0.0, float(ts[-1])], [1.0, 0.0], rtol=1e-11, atol=1e-13,
                    dense_output=True)
    return np.array([sol.sol(t)[0] for t in ts])


@pytest.mark.parametrize("gamma0,lam", [(0.3, 1.0), (0.5, 1.0), (2.0, 1.0), (1.2, 0.4)])
def test_survival_amplitude_against_ode(gamma0, lam):
    model = models.AmplitudeDampingModel(gamma0, lam)
    ts = np.linspace(0.0, 6.0, 25)
    assert_allclose(model.survival(ts), _survival_ode_oracle(gamma0, lam, ts),
                    atol=1e-8)


def test_survival_derivative_matches_finite_differences():
    model = models.AmplitudeDampingModel(1.5, 0.8)
    h = 1e-6
    for t in (0.3, 1.1, 4.0):
        fd = (model.survival(t + h) - model.survival(t - h)) / (2 * h)
        assert_allclose(model.survival_derivative(t), fd, atol=1e-7)


def test_ad_propagator_identity_at_zero():
    model = models.AmplitudeDampingModel(1.0, 1.0)
    assert_allclose(models.amplitude_damping_propagator(model, 0.0), np.eye(4),
                    atol=1e-14)


def test_ad_weak_coupling_rate_nonnegative():
    # gamma0 <= lam/2: G decreases monotonically, so the rate stays >= 0
    model = models.AmplitudeDampingModel(0.45, 1.0)
    ts = np.linspace(0.01, 20.0, 200)
    assert (np.asarray([model.rate(t) for t in ts]) >= -1e-12).all()
    g = model.survival(ts)
    assert (np.diff(g) < 0).all()


def test_ad_strong_coupling_zero_and_singularity():
    model = models.AmplitudeDampingModel(2.0, 1.0)
    # root-find oracle on the oscillatory branch
    t_star = brentq(model.survival, 0.5, 4.0, xtol=1e-12)
    assert_allclose(model.first_zero(), t_star, atol=1e-9)
    e_near = models.amplitude_damping_propagator(model, t_star)
    with pytest.raises(SingularMap):
        qmat.invert(e_near)
    assert models.AmplitudeDampingModel(0.45, 1.0).first_zero() is None


def test_ad_propagator_cptp_on_both_branches():
    for gamma0 in (0.3, 2.5):
        model = models.AmplitudeDampingModel(gamma0, 1.0)
        for t in np.linspace(0.0, 8.0, 40):
            choi = qmat.choi_of(models.amplitude_damping_propagator(model, t))
            assert np.linalg.eigvalsh(choi)[0] >= -1e-9
            assert _is_tp(models.amplitude_damping_propagator(model, t))


def test_ad_boundary_case_survival_finite():
    model = models.AmplitudeDampingModel(0.5, 1.0)  # d = 0 exactly
    ts = np.linspace(0.0, 5.0, 11)
    assert_allclose(model.survival(ts), _survival_ode_oracle(0.5, 1.0, ts), atol=1e-8)


# ---------------------------------------------------------------------------
# composite models
# ---------------------------------------------------------------------------

def test_cnot_zero_generator():
    model = models.CnotControlModel(J=0.0, gamma=0.0, a=0.3)
    assert_allclose(models.joint_generator(model), np.zeros((16, 16)), atol=1e-14)


def test_superradiance_decoupled_at_pi():
    model = models.SuperradianceModel(gamma0=1.0, x=np.pi, a=0.5)
    assert abs(model.cross_rate) < 1e-15
    # two independent decays
    gen = models.joint_generator(model)
    ops = (np.kron(qmat.SIGMA_MINUS, qmat.IDENTITY),
           np.kron(qmat.IDENTITY, qmat.SIGMA_MINUS))
    expected = np.zeros((16, 16), dtype=complex)
    eye4 = np.eye(4, dtype=complex)
    for op in ops:
        ldl = op.conj().T @ op
        expected += (np.kron(op.conj(), op)
                     - 0.5 * (np.kron(eye4, ldl) + np.kron(ldl.T, eye4)))
    assert_allclose(gen, expected, atol=1e-13)


def test_superradiance_rate_matrix_psd():
    for x in (0.2, 1.0, 2.5, 4.0, 9.0):
        model = models.SuperradianceModel(gamma0=1.3, x=x, a=0.1)
        evals = np.linalg.eigvalsh(model.rate_matrix())
        # eigenvalues gamma0 (1 +- sinc x) with |sinc| <= 1
        assert evals[0] >= -1e-12
        assert_allclose(sorted(evals),
                        sorted([1.3 * (1 - abs(np.sinc(x / np.pi))),
                                1.3 * (1 + abs(np.sinc(x / np.pi)))]), atol=1e-12)


def test_joint_generator_invariants(rng):
    for model in (models.CnotControlModel(1.0, 0.2, 0.4),
                  models.SuperradianceModel(1.0, 2.0, 0.6)):
        gen = models.joint_generator(model)
        assert _annihilates_trace(gen)
        # Hermiticity preservation, tested on random Hermitian inputs
        for _ in range(5):
            g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            h = g + g.conj().T
            out = (gen @ h.reshape(-1, order="F")).reshape(4, 4, order="F")
            assert np.abs(out - out.conj().T).max() < 1e-12


def test_model_validation():
    with pytest.raises(ValueError):
        models.CnotControlModel(1.0, -0.1, 0.5)
    with pytest.raises(ValueError):
        models.CnotControlModel(1.0, 0.1, 1.5)
    with pytest.raises(ValueError):
        models.SuperradianceModel(0.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        models.SuperradianceModel(1.0, -1.0, 0.5)
    with pytest.raises(ValueError):
        models.AmplitudeDampingModel(0.0, 1.0)


# ---------------------------------------------------------------------------
# reduced propagator
# ---------------------------------------------------------------------------

def test_reduced_propagator_identity_at_zero():
    model = models.CnotControlModel(1.0, 0.3, 0.5)
    e = models.reduced_propagator(models.joint_generator(model),
                                  model.env_state(), model.env_factor, 0.0, 10)
    assert_allclose(e, np.eye(4), atol=1e-14)


def test_reduced_propagator_cnot_ground_control_is_identity():
    # control in |0> applies the identity branch for all t
    model = models.CnotControlModel(J=1.3, gamma=0.0, a=0.0)
    gen = models.joint_generator(model)
    for t in (0.7, 3.1, 8.0):
        e = models.reduced_propagator(gen, model.env_state(), model.env_factor,
                                      t, steps=max(1, int(200 * t)))
        assert np.abs(e - np.eye(4)).max() < 1e-9


def test_reduced_propagator_decoupled_superradiance_is_damping():
    # x = pi, ground-state environment: plain decay at rate gamma0
    model = models.SuperradianceModel(gamma0=1.0, x=np.pi, a=0.0)
    gen = models.joint_generator(model)
    for t in (0.5, 2.0, 4.0):
        e = models.reduced_propagator(gen, model.env_state(), model.env_factor,
                                      t, steps=int(400 * t))
        expected = models.damping_superop(np.exp(-0.5 * t))
        assert np.abs(e - expected).max() < 1e-5


def test_superradiance_ground_env_is_time_dependent_damping():
    # with the partner atom in its ground state the reduced dynamics is an
    # amplitude-damping family with survival amplitude
    # e^{-g0 t/2} cosh(g12 t / 2), from the single-excitation amplitude pair
    # dA/dt = -1/2 [[g0, g12], [g12, g0]] A with A = (1, 0)
    model = models.SuperradianceModel(gamma0=1.0, x=2.0, a=0.0)
    gen = models.joint_generator(model)
    g12 = model.cross_rate
    for t in (0.7, 2.1):
        e = models.reduced_propagator(gen, model.env_state(), model.env_factor,
                                      t, steps=int(400 * t))
        amp = np.exp(-0.5 * t) * np.cosh(0.5 * g12 * t)
        assert np.abs(e - models.damping_superop(amp)).max() < 1e-6
    # the amplitude decreases for every x, which is why the a=0 row is
    # Markovian: |g12| <= g0 keeps d/dt [e^{-g0 t/2} cosh(g12 t/2)] < 0
    ts = np.linspace(0.0, 10.0, 101)
    amps = np.exp(-0.5 * ts) * np.cosh(0.5 * g12 * ts)
    assert (np.diff(amps) < 0).all()


def test_cnot_pure_excited_control_is_rotation_times_depolarizing():
    # control fixed in |1>: the target rotates about x at angle J t while the
    # isotropic channel shrinks the whole Bloch ball by e^{-2 gamma t}
    model = models.CnotControlModel(J=1.3, gamma=0.2, a=1.0)
    gen = models.joint_generator(model)
    for t in (0.9, 2.4):
        e = models.reduced_propagator(gen, model.env_state(), model.env_factor,
                                      t, steps=int(400 * t))
        m, c = qmat.bloch_affine(e)
        angle = model.J * t
        shrink = np.exp(-2.0 * model.gamma * t)
        rot_x = np.array([[1.0, 0.0, 0.0],
                          [0.0, np.cos(angle), -np.sin(angle)],
                          [0.0, np.sin(angle), np.cos(angle)]])
        assert np.abs(m - shrink * rot_x).max() < 1e-6
        assert np.abs(c).max() < 1e-8


def test_reduced_propagator_is_linear_and_tp(rng):
    model = models.SuperradianceModel(gamma0=1.0, x=2.0, a=0.5)
    gen = models.joint_generator(model)
    e = models.reduced_propagator(gen, model.env_state(), model.env_factor,
                                  1.3, steps=260)
    assert _is_tp(e)
    coeffs = rng.normal(size=4)
    mix = sum(c * p for c, p in zip(coeffs, qmat.PAULIS))
    direct = qmat.apply_superop(e, mix)
    summed = sum(c * qmat.apply_superop(e, p) for c, p in zip(coeffs, qmat.PAULIS))
    assert np.abs(direct - summed).max() < 1e-8


def test_reduced_propagator_validates_env_state():
    model = models.CnotControlModel(1.0, 0.1, 0.5)
    with pytest.raises(ValueError):
        models.reduced_propagator(models.joint_generator(model), np.eye(2),
                                  0, 1.0, 100)


def test_step_halving_check_flags_coarse_integration():
    model = models.CnotControlModel(J=10.0, gamma=0.0, a=1.0)
    gen = models.joint_generator(model)
    with pytest.raises(IntegrationUnstable):
        models.reduced_propagator(gen, model.env_state(), 0, 2.0, steps=3,
                                  check=True)
    e = models.reduced_propagator(gen, model.env_state(), 0, 2.0, steps=2000,
                                  check=True)
    assert _is_tp(e)


# ---------------------------------------------------------------------------
# RK4 propagation
# ---------------------------------------------------------------------------

def test_rk4_zero_generator_gives_identity():
    zero = np.zeros((4, 4), dtype=complex)
    e = models.propagate_rk4(lambda t: zero, 7.3, steps=10)
    assert_allclose(e, np.eye(4))


def test_rk4_matches_analytic_depolarizing():
    model = models.PauliChannelModel.constant(1.0, 1.0, 1.0)
    gen = models.pauli_generator(model, 0.0)
    e = models.propagate_rk4(lambda t: gen, 1.0, steps=200)
    assert np.abs(e - models.pauli_propagator_analytic(model, 1.0)).max() < 1e-6


def test_rk4_requires_at_least_one_step():
    with pytest.raises(ValueError):
        models.propagate_rk4(lambda t: np.zeros((4, 4)), 1.0, steps=0)


# ---------------------------------------------------------------------------
# propagator grids
# ---------------------------------------------------------------------------

def test_grid_matches_pointwise_constructions():
    horizon, n = 3.0, 60
    pauli = models.PauliChannelModel.hall()
    grid = models.propagator_grid(pauli, horizon, n)
    for i in (0, 17, n):
        t = grid.times[i]
        assert_allclose(grid.maps[i], models.pauli_propagator_analytic(pauli, t),
                        atol=1e-12)

    ad = models.AmplitudeDampingModel(2.0, 1.0)
    grid = models.propagator_grid(ad, horizon, n)
    for i in (0, 31, n):
        t = grid.times[i]
        assert_allclose(grid.maps[i], models.amplitude_damping_propagator(ad, t),
                        atol=1e-12)


def test_grid_composite_matches_reduced_propagator():
    model = models.SuperradianceModel(gamma0=1.0, x=1.3, a=0.4)
    grid = models.propagator_grid(model, 2.0, 100)
    gen = models.joint_generator(model)
    for i in (10, 50, 100):
        t = grid.times[i]
        ref = models.reduced_propagator(gen, model.env_state(), model.env_factor,
                                        t, steps=int(800 * t))
        assert np.abs(grid.maps[i] - ref).max() < 1e-6


def test_grid_shift_off_grid_epsilon():
    model = models.PauliChannelModel.hall()
    grid = models.propagator_grid(model, 2.0, 40, eps=0.01)
    assert grid.eps == 0.01
    assert_allclose(grid.maps_shift[8],
                    models.pauli_propagator_analytic(model, grid.times[8] + 0.01),
                    atol=1e-12)
    cn = models.CnotControlModel(1.0, 0.1, 0.5)
    grid = models.propagator_grid(cn, 2.0, 40, eps=0.01)
    gen = models.joint_generator(cn)
    ref = models.reduced_propagator(gen, cn.env_state(), cn.env_factor,
                                    grid.times[8] + 0.01, steps=600)
    assert np.abs(grid.maps_shift[8] - ref).max() < 1e-6


def test_grid_maps_are_tp_and_hp_for_all_families():
    cases = [
        (models.PauliChannelModel.sine_eternal(), 6.0),
        (models.AmplitudeDampingModel(1.5, 1.0), 6.0),
        (models.CnotControlModel(1.0, 0.2, 0.5), 6.0),
        (models.SuperradianceModel(1.0, 2.0, 0.7), 6.0),
    ]
    for model, horizon in cases:
        grid = models.propagator_grid(model, horizon, 120)
        for i in range(0, 121, 24):
            assert _is_tp(grid.maps[i]), type(model).__name__
            assert qmat.is_hermiticity_preserving(grid.maps[i], 1e-10)


def test_superradiance_ground_env_population_decays():
    model = models.SuperradianceModel(gamma0=1.0, x=2.2, a=0.0)
    grid = models.propagator_grid(model, 8.0, 160)
    excited = np.diag([0.0, 1.0]).astype(complex)
    pops = [qmat.apply_superop(e, excited)[1, 1].real for e in grid.maps]
    assert (np.diff(pops) <= 1e-10).all()


def test_propagator_grid_validates_inputs():
    model = models.PauliChannelModel.hall()
    with pytest.raises(ValueError):
        models.propagator_grid(model, -1.0, 100)
    with pytest.raises(ValueError):
        models.propagator_grid(model, 5.0, 1)
    with pytest.raises(ValueError):
        models.propagator_grid(model, 5.0, 100, eps=0.2)  # eps > spacing
    with pytest.raises(TypeError):
        models.propagator_grid(object(), 5.0, 100)


def test_model_params_round_trip():
    cases = [
        models.PauliChannelModel.hall(),
        models.AmplitudeDampingModel(1.2, 0.7),
        models.CnotControlModel(1.0, 0.3, 0.25),
        models.SuperradianceModel(0.9, 2.4, 0.6),
    ]
    for model in cases:
        family, params = models.model_params(model)
        rebuilt = models.model_from_params(family, params)
        assert rebuilt == model
