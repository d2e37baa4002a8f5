import numpy as np
import numpy.testing as npt
import pytest

from models import battery_model as bm
from models import dispatch_objective as obj
from models.schemas import BatteryParams, CostParams, Schedule
from utilities.exceptions import DomainError, ProblemShapeError


@pytest.mark.parametrize("p, esperado", [(0.0, 0.0), (2.0, 1.2), (5.0, 6.75)])
def test_generator_cost(cost, p, esperado):
    assert obj.generator_cost(p, cost) == pytest.approx(esperado)


@pytest.mark.parametrize("p", [0.0, 3.0, 4.5])
def test_pv_saving_is_linear(cost, p):
    assert obj.pv_saving(p, cost) == pytest.approx(p)


def test_storage_saving(battery, battery_alpha, cost):
    assert obj.storage_saving(0.0, 0.0, battery, cost) == 0.0
    assert obj.storage_saving(2.0, 0.0, battery_alpha, cost) == pytest.approx(1.982, abs=1e-3)
    assert obj.storage_saving(0.0, 6.0, battery, cost) == pytest.approx(-6.754, abs=1e-3)
    with pytest.raises(DomainError):
        obj.storage_saving(0.0, 12.0, battery, cost)


def test_storage_saving_with_static_efficiencies(battery, cost):
    valor = obj.storage_saving(2.0, 1.0, battery, cost, static_efficiencies=(0.9, 0.8))
    assert valor == pytest.approx(0.9 * 2.0 - 1.0 / 0.8)


def test_storage_saving_reduces_to_linear_without_degradation(cost):
    ideal = BatteryParams(alpha=0.0, u=0.0, v=0.0, p_max=1e6)
    carga = np.array([0.0, 1.0, 3.0])
    descarga = np.array([2.0, 0.0, 0.5])
    npt.assert_allclose(obj.storage_saving(carga, descarga, ideal, cost), carga - descarga, atol=1e-6)


def test_step_objective_composition(battery, battery_alpha, cost):
    assert obj.step_objective(0, 0, 0, 0, battery, cost) == 0.0
    assert obj.step_objective(2.0, 3.0, 0.0, 0.0, battery, cost) == pytest.approx(0.9)
    assert obj.step_objective(0.0, 0.0, 2.0, 0.0, battery_alpha, cost) == pytest.approx(-19.82, abs=1e-2)


def test_step_objective_respects_weights(battery):
    pesos = CostParams(w1=2.0, w2=0.0, w3=1.0)
    assert obj.step_objective(2.0, 3.0, 5.0, 0.0, battery, pesos) == pytest.approx(2 * 1.2 - 3.0)


def test_total_objective_breakdown(battery_alpha, cost):
    schedule = Schedule(p_gl=[2.0, 0.0], p_pvl=[3.0, 0.0], p_pves=[0.0, 2.0], p_esl=[0.0, 0.0],
                        soc=[30.0, 30.0, 31.98])
    costos = obj.total_objective(schedule, [1.0, 1.0], battery_alpha, cost)
    assert costos.j1_total == pytest.approx(1.2)
    assert costos.j3_total == pytest.approx(3.0)
    assert costos.j2_total == pytest.approx(1.982, abs=1e-3)
    assert costos.objective == pytest.approx(1.2 - 10 * costos.j2_total - 0.3)
    assert set(costos.as_dict()) == {"j1_total", "j2_total", "j3_total", "objective"}


def test_total_objective_zero_schedule(battery, cost):
    cero = Schedule(p_gl=np.zeros(3), p_pvl=np.zeros(3), p_pves=np.zeros(3), p_esl=np.zeros(3),
                    soc=np.full(4, 30.0))
    assert obj.total_objective(cero, np.zeros(3), battery, cost).objective == 0.0


def test_total_objective_length_mismatch(battery, cost):
    schedule = Schedule(p_gl=[1.0], p_pvl=[0.0], p_pves=[0.0], p_esl=[0.0], soc=[30.0, 30.0])
    with pytest.raises(ProblemShapeError):
        obj.total_objective(schedule, [1.0, 2.0], battery, cost)


def test_cost_params_reject_negative_weights():
    with pytest.raises(DomainError):
        CostParams(w2=-1.0)


def _horario(flujos, soc0=30.0):
    n = flujos.shape[1]
    return Schedule(p_gl=flujos[0], p_pvl=flujos[1], p_pves=flujos[2], p_esl=flujos[3],
                    soc=np.full(n + 1, soc0))


def _flujos_al_azar(rng, n):
    return np.vstack([rng.uniform(0.0, 5.0, n), rng.uniform(0.0, 4.5, n),
                      rng.uniform(0.0, 4.5, n), rng.uniform(0.0, 5.0, n)])


def test_total_objective_is_convex_in_valid_regime(battery, cost):
    assert bm.ragone_parameter(battery.p_max, battery).valid
    rng = np.random.default_rng(11)
    n = 3
    carga = np.zeros(n)
    f = lambda x: obj.total_objective(_horario(x), carga, battery, cost).objective
    for _ in range(1000):
        x, y = _flujos_al_azar(rng, n), _flujos_al_azar(rng, n)
        lam = rng.uniform()
        assert f(lam * x + (1 - lam) * y) <= lam * f(x) + (1 - lam) * f(y) + 1e-6


def test_total_objective_separates_by_step(battery, cost):
    rng = np.random.default_rng(5)
    flujos = _flujos_al_azar(rng, 6)
    total = obj.total_objective(_horario(flujos), np.zeros(6), battery, cost).objective
    pasos = obj.step_objective(*flujos, battery, cost)
    assert total == pytest.approx(float(np.sum(pasos)), rel=1e-12)

    # cambiar un paso mueve el total solo en la diferencia de ese paso
    otro = flujos.copy()
    otro[:, 2] = _flujos_al_azar(rng, 1)[:, 0]
    nuevo = obj.total_objective(_horario(otro), np.zeros(6), battery, cost).objective
    delta = obj.step_objective(*otro[:, 2], battery, cost) - obj.step_objective(*flujos[:, 2], battery, cost)
    assert nuevo - total == pytest.approx(float(delta), abs=1e-9)
