import numpy as np
import numpy.testing as npt
import pytest

from models import battery_model
from models.microgrid_model import validate_schedule
from models.schemas import BatteryParams, CostParams, SolverOptions
from services import admm_engine as admm
from services.baselines_bench import static_hybrid_dispatch
from utilities.exceptions import InfeasibleProblemError, ProblemShapeError


@pytest.fixture
def charge_then_discharge(make_problem):
    """Excedente FV en el paso 0 y un pico que el generador no cubre en el paso 1."""
    return make_problem([0.5, 5.5], [3.0, 0.0], soc_initial=40.0)


def _estado(problema, rho=1.0):
    sp = admm.assemble_problem(problema)
    return sp, admm.initial_state(sp, SolverOptions(rho=rho))


# ----------------------------
# ENSAMBLADO
# ----------------------------

@pytest.mark.parametrize("n", [1, 24])
def test_assemble_problem_dimensions(make_problem, n):
    sp = admm.assemble_problem(make_problem(np.ones(n), np.ones(n)))
    assert sp.rows == 3 * n
    flujos = sum(sp.matrix(b).shape[1] for b in admm.BLOCK_ORDER[:4])
    assert flujos == 4 * n
    assert sp.E.shape == (3 * n, 2 * n)
    for bloque in admm.BLOCK_ORDER:
        assert sp.matrix(bloque).shape[0] == 3 * n


def test_assemble_problem_rhs_for_idle_instance(make_problem):
    sp = admm.assemble_problem(make_problem(np.zeros(2), np.zeros(2)))
    npt.assert_allclose(sp.c, [0, 0, 0, 0, 1e-6, 1e-6])


def test_assemble_problem_rejects_inconsistent_series(make_problem):
    problema = make_problem([1.0, 1.0], [0.0, 0.0])
    problema.pv = np.zeros(3)
    with pytest.raises(ProblemShapeError):
        admm.assemble_problem(problema)


def test_initial_state_is_feasible_for_slack_rows(make_problem):
    sp, st = _estado(make_problem([1.0], [2.0]))
    r = admm.equality_residual(sp, st)
    npt.assert_allclose(r[1:], [0.0, 0.0], atol=1e-15)
    assert r[0] == pytest.approx(-1.05)


def test_regime_bounds_cap_suppressed_flow(make_problem):
    sp = admm.assemble_problem(make_problem([1.0, 1.0], [3.0, 3.0]))
    sp.set_regime(np.array([1, 0]), np.array([0, 1]))
    _, hi_c = sp.block_bounds("charge")
    _, hi_d = sp.block_bounds("discharge")
    npt.assert_allclose(hi_c, [1e-6, 3.0])
    npt.assert_allclose(hi_d, [1.05, 1e-6])


# ----------------------------
# LAGRANGIANO AUMENTADO
# ----------------------------

def test_augmented_lagrangian_at_feasible_point(make_problem):
    sp, st = _estado(make_problem([0.0], [0.0]))
    assert admm.augmented_lagrangian(sp, st) == admm.objective_value(sp, st) == 0.0


def test_augmented_lagrangian_penalty(make_problem):
    sp, st = _estado(make_problem([0.0], [0.0]), rho=2.0)
    st.p_gl = np.array([1.0])
    r = admm.equality_residual(sp, st)
    assert admm.augmented_lagrangian(sp, st) == pytest.approx(0.35 + float(r @ r))

    doble = admm.augmented_lagrangian(sp, st)
    st.rho = 4.0
    assert admm.augmented_lagrangian(sp, st) - doble == pytest.approx(float(r @ r))


# ----------------------------
# ACTUALIZACIONES DE BLOQUE
# ----------------------------

def test_generator_block_idle_instance_updates_to_zero(make_problem):
    sp, st = _estado(make_problem([0.0], [0.0]))
    npt.assert_allclose(admm.block_update_quadratic("generator", st, sp), [0.0])


def test_generator_block_closed_form(make_problem):
    sp, st = _estado(make_problem([1.0], [0.0]))
    # 2·0.25·g + 0.1 + (g − 1.05) = 0
    npt.assert_allclose(admm.block_update_quadratic("generator", st, sp), [(1.05 - 0.1) / 1.5])


def test_generator_block_clips_to_gen_max(make_problem):
    sp, st = _estado(make_problem([1.0], [0.0]))
    st.mu[0] = -20.0
    npt.assert_allclose(admm.block_update_quadratic("generator", st, sp), [5.0])


def test_storage_block_without_reward_stays_idle(make_problem):
    problema = make_problem([0.0], [2.0])
    problema.cost = CostParams(w2=0.0)
    sp, st = _estado(problema)
    npt.assert_allclose(admm.block_update_storage("charge", st, sp, SolverOptions()), [0.0])
    npt.assert_allclose(admm.block_update_storage("discharge", st, sp, SolverOptions()), [0.0])


def test_storage_block_hits_pv_bound(make_problem):
    sp, st = _estado(make_problem([0.5], [3.0]))
    npt.assert_allclose(admm.block_update_storage("charge", st, sp, SolverOptions()), [3.0])


def test_storage_block_interior_point_is_stationary(make_problem):
    problema = make_problem([0.0], [20.0])
    problema.cost = CostParams(w2=1.0)
    sp, st = _estado(problema)
    c = admm.block_update_storage("charge", st, sp, SolverOptions())[0]
    d1, _ = battery_model.charge_cost_derivatives(c, problema.battery)
    # (ρ·e(p) − 1)·de/dp + ρ·p = 0 con multiplicadores nulos y SOC sin mover
    assert 0.0 < c < 10.0
    e = battery_model.charge_cost_exact(c, problema.battery)
    assert (e - 1.0) * float(d1) + c == pytest.approx(0.0, abs=1e-8)


def test_storage_block_falls_back_when_newton_has_no_budget(make_problem, battery_alpha):
    problema = make_problem([0.0], [20.0], battery_params=battery_alpha)
    problema.cost = CostParams(w2=1.0)
    sp, st = _estado(problema)
    c = admm.block_update_storage("charge", st, sp, SolverOptions(newton_max_iters=1))[0]
    assert st.newton_fallbacks == 1
    d1, _ = battery_model.charge_cost_derivatives(c, problema.battery)
    e = battery_model.charge_cost_exact(c, problema.battery)
    assert (e - 1.0) * float(d1) + c == pytest.approx(0.0, abs=1e-6)


def test_storage_block_sees_soc_price(make_problem):
    """Con ν negativo guardar energía deja de pagar y la carga se frena."""
    sp, st = _estado(make_problem([0.5], [3.0], soc_initial=40.0))
    libre = admm.block_update_storage("charge", st, sp, SolverOptions())[0]
    st.nu = np.array([-12.0])
    frenada = admm.block_update_storage("charge", st, sp, SolverOptions())[0]
    assert libre == pytest.approx(3.0)
    assert frenada < 1.0


def test_static_storage_block_closed_form_includes_soc_row(make_problem):
    problema = make_problem([0.0], [20.0], static=(1.0, 1.0))
    problema.cost = CostParams(w2=1.0)
    sp, st = _estado(problema)
    # −1 + ρ·(p − 0) + ρ·p = 0: fila FV y fila del SOC
    npt.assert_allclose(admm.block_update_storage("charge", st, sp, SolverOptions()), [0.5])


# ----------------------------
# BLOQUE DE SOC
# ----------------------------

def test_soc_block_follows_flows_inside_bounds(make_problem):
    sp, st = _estado(make_problem([0.0, 0.0], [2.0, 1.0], soc_initial=40.0, static=(1.0, 1.0)))
    st.p_pves = np.array([2.0, 1.0])
    npt.assert_allclose(admm.block_update_soc(st, sp), [42.0, 43.0])
    st.soc = admm.block_update_soc(st, sp)
    npt.assert_allclose(admm.soc_residual(sp, st), 0.0, atol=1e-12)


def test_soc_block_clamps_chain_to_capacity(make_problem):
    sp, st = _estado(make_problem([0.0, 0.0, 0.0], [3.0, 3.0, 0.0], soc_initial=50.0, static=(1.0, 1.0)))
    st.p_pves = np.array([3.0, 3.0, 0.0])
    st.p_esl = np.array([0.0, 0.0, 2.0])
    soc = admm.block_update_soc(st, sp)
    assert soc.max() <= 55.0 + 1e-12
    assert soc.min() >= 27.5 - 1e-12
    # los incrementos deseados son 3, 3, −2: la cadena reparte el exceso sin romper la caja
    deseado = np.array([3.0, 3.0, -2.0])
    incrementos = np.diff(soc, prepend=50.0)
    costo = np.sum((incrementos - deseado) ** 2)
    rng = np.random.default_rng(7)
    for _ in range(200):
        otro = np.clip(soc + rng.normal(0.0, 0.5, 3), 27.5, 55.0)
        assert np.sum((np.diff(otro, prepend=50.0) - deseado) ** 2) >= costo - 1e-9


def test_soc_block_respects_multipliers(make_problem):
    sp, st = _estado(make_problem([0.0], [0.0], soc_initial=40.0))
    st.nu = np.array([2.0])
    # s = soc0 + dt·(0 − ν/ρ)
    npt.assert_allclose(admm.block_update_soc(st, sp), [38.0])


# ----------------------------
# NEWTON-RAPHSON ESCALAR
# ----------------------------

def test_newton_linear_derivative():
    res = admm.newton_raphson_scalar(lambda x: 2 * x, lambda x: 2 + 0 * x, 5.0, 1e-10, 50)
    assert res.converged
    assert res.root == pytest.approx(0.0, abs=1e-12)
    assert res.iterations == 1


def test_newton_quadratic_derivative():
    res = admm.newton_raphson_scalar(lambda x: x ** 2 - 4, lambda x: 2 * x, 3.0, 1e-10, 50)
    assert res.converged
    assert res.root == pytest.approx(2.0, abs=1e-10)


def test_newton_constant_derivative_does_not_converge():
    res = admm.newton_raphson_scalar(lambda x: 1.0 + 0 * x, lambda x: 0 * x, 0.0, 1e-10, 50)
    assert not res.converged


def test_newton_vectorized_with_bounds():
    res = admm.newton_raphson_scalar(lambda x: x ** 2 - 4, lambda x: 2 * x, np.array([3.0, 5.0, 1.0]),
                                     1e-10, 50, bounds=(np.zeros(3), np.array([10.0, 10.0, 1.5])))
    npt.assert_allclose(res.root[:2], [2.0, 2.0], atol=1e-10)
    npt.assert_array_equal(res.converged, [True, True, False])
    assert res.root[2] == pytest.approx(1.5)


# ----------------------------
# ACTUALIZACIÓN DUAL Y CONVERGENCIA
# ----------------------------

def test_dual_update(make_problem):
    sp, st = _estado(make_problem([0.0], [0.0]))
    st.mu = np.array([0.5, 0.0, 0.0])
    npt.assert_allclose(admm.dual_update(st, sp), [0.5, 0.0, 0.0])
    st.p_gl = np.array([1.0])
    npt.assert_allclose(admm.dual_update(st, sp), [1.5, 0.0, 0.0])
    st.rho = 2.0
    npt.assert_allclose(admm.dual_update(st, sp), [2.5, 0.0, 0.0])


def test_convergence_check(make_problem):
    sp, st = _estado(make_problem([0.0], [0.0]))
    st.iteration, st.change = 1, 0.0
    st.residual = np.zeros(3)
    revision = admm.convergence_check(st, SolverOptions())
    assert revision.converged
    assert revision.primal_residual == 0.0
    assert revision.dual_residual == 0.0

    st.residual = np.array([0.5, 0.0, 0.0])
    assert not admm.convergence_check(st, SolverOptions()).converged

    st.residual = np.zeros(3)
    st.soc_residual = np.array([0.2])
    revision = admm.convergence_check(st, SolverOptions())
    assert not revision.converged
    assert revision.primal_residual == pytest.approx(0.2)


def test_soc_dual_update(make_problem):
    sp, st = _estado(make_problem([0.0], [0.0], soc_initial=40.0))
    st.soc = np.array([41.0])
    npt.assert_allclose(admm.soc_dual_update(st, sp), [1.0])


# ----------------------------
# SOLUCIONADOR COMPLETO
# ----------------------------

def test_solve_single_step_generator_only(make_problem):
    reporte = admm.solve(make_problem([1.0], [0.0]))
    s = reporte.schedule
    assert reporte.strategy == "proposed"
    assert reporte.diagnostics.converged
    assert s.p_gl[0] == pytest.approx(1.05, abs=1e-3)
    npt.assert_allclose([s.p_pvl[0], s.p_pves[0], s.p_esl[0]], 0.0, atol=1e-6)
    assert reporte.costs.objective == pytest.approx(0.25 * 1.1025 + 0.1 * 1.05, abs=1e-3)


def test_solve_idle_instance_returns_zero_schedule(make_problem):
    reporte = admm.solve(make_problem([0.0], [0.0], soc_initial=40.0))
    assert reporte.diagnostics.converged
    assert reporte.costs.objective <= 1e-12
    npt.assert_allclose(np.concatenate(reporte.schedule.flows()), 0.0, atol=1e-12)


def test_solve_charges_then_discharges(charge_then_discharge):
    reporte = admm.solve(charge_then_discharge)
    s = reporte.schedule
    assert reporte.diagnostics.converged
    assert s.p_pves[0] > 1.0
    assert s.p_esl[1] >= 0.775 - 1e-3
    assert np.all(np.minimum(s.p_pves, s.p_esl) <= charge_then_discharge.network.h_max + 1e-12)
    assert validate_schedule(s, charge_then_discharge) == []


def test_residual_history_decreases_on_convex_instance(make_problem):
    reporte = admm.solve(make_problem([1.0], [0.0]))
    historia = [primal for _, primal, _ in reporte.diagnostics.history]
    assert len(historia) >= 2
    assert all(b < a for a, b in zip(historia, historia[1:]))


@pytest.mark.parametrize("carga, fv", [([1.0], [0.0]), ([1.0, 1.5], [2.0, 0.5])])
def test_block_updates_never_increase_lagrangian(make_problem, carga, fv):
    problema = make_problem(carga, fv, soc_initial=40.0)
    reporte = admm.solve(problema, SolverOptions(track_lagrangian=True))
    assert reporte.diagnostics.lagrangian_max_increase is not None
    assert reporte.diagnostics.lagrangian_max_increase <= 1e-9


def test_solve_returns_best_iterate_when_budget_runs_out(charge_then_discharge):
    reporte = admm.solve(charge_then_discharge, SolverOptions(max_iters=3))
    assert not reporte.diagnostics.converged
    assert reporte.diagnostics.iterations == 3
    assert len(reporte.diagnostics.history) == 3
    assert reporte.schedule.horizon == 2


def test_solve_rejects_infeasible_instance(make_problem):
    with pytest.raises(InfeasibleProblemError):
        admm.solve(make_problem([20.0], [0.0]))


def test_solve_warns_outside_convexity_regime(make_problem, battery_alpha):
    reporte = admm.solve(make_problem([1.0], [0.0], battery_params=battery_alpha))
    assert admm.CONVEXITY_WARNING in reporte.diagnostics.warnings


def test_projection_interval_does_not_change_optimum(make_problem):
    problema = make_problem([1.0, 1.5], [2.0, 0.5], soc_initial=40.0)
    cada_uno = admm.solve(problema)
    espaciado = admm.solve(problema, SolverOptions(projection_interval=5))
    assert espaciado.diagnostics.converged
    assert espaciado.costs.objective == pytest.approx(cada_uno.costs.objective, abs=1e-3)


def test_full_bank_shifts_charge_to_the_cheaper_step(make_problem):
    """Con 1 kWh de margen conviene usar la FV del pico en la carga, descargar y recargar después."""
    problema = make_problem([4.36, 0.97], [3.02, 1.35], soc_initial=54.0)
    reporte = admm.solve(problema)
    s = reporte.schedule
    assert reporte.diagnostics.converged
    assert validate_schedule(s, problema) == []
    assert s.p_pves[0] < 0.1
    assert s.p_esl[0] > 0.1
    assert s.p_pves[1] > 1.2
    assert s.soc[-1] == pytest.approx(55.0, abs=1e-3)


def test_daily_steps_keep_soc_inside_bounds(make_problem):
    problema = make_problem([1.0, 1.2, 0.8], [2.5, 2.0, 0.0], dt=24.0)
    reporte = admm.solve(problema)
    assert reporte.diagnostics.converged
    assert validate_schedule(reporte.schedule, problema) == []
    assert reporte.schedule.soc.max() == pytest.approx(55.0, abs=1e-3)


def test_dynamic_model_collapses_to_static_without_degradation(make_problem):
    ideal = BatteryParams(alpha=0.0, u=0.0, v=0.0, p_max=1e6)
    problema = make_problem([0.5, 5.5], [3.0, 0.0], soc_initial=40.0, battery_params=ideal)
    dinamico = admm.solve(problema)
    estatico = static_hybrid_dispatch(problema, eta_c0=1.0, eta_d0=1.0)
    assert estatico.strategy == "no-degradation"
    for a, b in zip(dinamico.schedule.flows(), estatico.schedule.flows()):
        npt.assert_allclose(a, b, atol=1e-4)
