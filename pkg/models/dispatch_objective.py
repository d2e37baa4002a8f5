"""Componentes de costo J1, J2, J3 y el objetivo ponderado del despacho.

Cost = Σ_t w1·J1(t) − w2·J2(t) − w3·J3(t). J2 entra con signo negativo: la
carga se premia (cóncava) y la descarga se penaliza (convexa), lo que con el
peso w2 = 10 incentiva fuertemente el uso del almacenamiento.
"""
from typing import Optional, Tuple

import numpy as np

from models import battery_model
from models.schemas import BatteryParams, CostBreakdown, CostParams, Schedule
from utilities.exceptions import ProblemShapeError


def generator_cost(p_gl, c: CostParams):
    """J1 = G1·(a·p² + b·p)."""
    p = np.asarray(p_gl, dtype=float)
    costo = c.g1 * (c.a * p * p + c.b * p)
    return float(costo) if costo.ndim == 0 else costo


def pv_saving(p_pvl, c: CostParams):
    """J3 = G2·p_pvl."""
    p = np.asarray(p_pvl, dtype=float)
    ahorro = c.g2 * p
    return float(ahorro) if ahorro.ndim == 0 else ahorro


def storage_saving(p_pves, p_esl, battery: BatteryParams, c: CostParams,
                   static_efficiencies: Optional[Tuple[float, float]] = None):
    """J2 = G3·η_c(p_pves)·p_pves − G4·p_esl/η_d(p_esl).

    Con `static_efficiencies` las eficiencias son las constantes (eta_c0, eta_d0).

    Raises:
        DomainError: Si p_esl alcanza p_max.
    """
    carga = np.asarray(p_pves, dtype=float)
    descarga = np.asarray(p_esl, dtype=float)
    if static_efficiencies is not None:
        eta_c0, eta_d0 = static_efficiencies
        premio, castigo = eta_c0 * carga, descarga / eta_d0
    else:
        premio = np.asarray(battery_model.charge_cost_exact(carga, battery))
        castigo = np.asarray(battery_model.discharge_cost(descarga, battery))
    valor = c.g3 * premio - c.g4 * castigo
    return float(valor) if valor.ndim == 0 else valor


def step_objective(p_gl, p_pvl, p_pves, p_esl, battery: BatteryParams, c: CostParams,
                   static_efficiencies: Optional[Tuple[float, float]] = None) -> np.ndarray:
    """Objetivo de cada paso w1·J1 − w2·J2 − w3·J3."""
    return c.w1 * np.asarray(generator_cost(p_gl, c)) \
        - c.w2 * np.asarray(storage_saving(p_pves, p_esl, battery, c, static_efficiencies)) \
        - c.w3 * np.asarray(pv_saving(p_pvl, c))


def total_objective(schedule: Schedule, load, battery: BatteryParams, c: CostParams,
                    static_efficiencies: Optional[Tuple[float, float]] = None) -> CostBreakdown:
    """Objetivo total del horizonte con los totales de cada componente.

    Args:
        schedule (Schedule): Flujos a evaluar.
        load: Serie de demanda; solo se usa para verificar la longitud.
        static_efficiencies (tuple, optional): Evalúa con eficiencias constantes.

    Returns:
        CostBreakdown: j1_total, j2_total, j3_total y el objetivo ponderado.

    Raises:
        ProblemShapeError: Si la demanda y el despacho difieren en longitud.
    """
    if np.asarray(load).reshape(-1).shape[0] != schedule.horizon:
        raise ProblemShapeError("la demanda y el despacho difieren en longitud")
    j1 = float(np.sum(generator_cost(schedule.p_gl, c)))
    j2 = float(np.sum(storage_saving(schedule.p_pves, schedule.p_esl, battery, c, static_efficiencies)))
    j3 = float(np.sum(pv_saving(schedule.p_pvl, c)))
    return CostBreakdown(
        j1_total=j1,
        j2_total=j2,
        j3_total=j3,
        objective=c.w1 * j1 - c.w2 * j2 - c.w3 * j3,
    )
