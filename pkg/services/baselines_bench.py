#  Copyright (c) 2026 Fleer
#  Permission is hereby granted, free of charge, to any person obtaining a copy
#  of this software and associated documentation files (the "Software"), to deal
#  in the Software without restriction, including without limitation the rights
#  to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
#  copies of the Software, and to permit persons to whom the Software is
#  furnished to do so, subject to the following conditions:
#
#  The above copyright notice and this permission notice shall be included in all
#  copies or substantial portions of the Software.

"""Estrategias de comparación, cálculo de ahorros y oráculo de fuerza bruta."""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Mapping, NamedTuple, Optional

import numpy as np

from config.mappings import MARCA_INDEFINIDO
from models import battery_model, microgrid_model
from models.dispatch_objective import step_objective, total_objective
from models.schemas import (BatteryParams, CostBreakdown, CostParams, DispatchProblem, DispatchReport,
                            NetworkParams, SavingsReport, Schedule, SolverOptions)
from services.admm_engine import solve
from utilities.exceptions import DomainError, InfeasibleProblemError, OracleLimitError
from utilities.logger import obtener_logger

log = obtener_logger("baselines")

ORACLE_MAX_HORIZON = 3
SOC_SLACK = 1e-12


class OracleResult(NamedTuple):
    schedule: Schedule
    objective: float
    evaluated: int      # combinaciones factibles revisadas


# ----------------------------
# ESTRATEGIAS DE COMPARACIÓN
# ----------------------------

def diesel_only_dispatch(load, net: NetworkParams, c: CostParams,
                         battery: Optional[BatteryParams] = None) -> DispatchReport:
    """El generador cubre toda la demanda con pérdidas; el resto de flujos es cero.

    Args:
        load: Serie de demanda en kW.
        net (NetworkParams): Aporta loss_factor, gen_max y el SOC inicial.
        c (CostParams): Costos del combustible y pesos.
        battery (BatteryParams, optional): Solo para evaluar el objetivo completo.

    Returns:
        DispatchReport: estrategia "diesel-only"; el SOC se mantiene en soc_initial.

    Raises:
        InfeasibleProblemError: Si algún paso supera gen_max (nombra el paso).
    """
    demanda = np.atleast_1d(np.asarray(load, dtype=float))
    p_gl = net.loss_factor * demanda
    exceso = np.flatnonzero(p_gl > net.gen_max)
    if exceso.size:
        paso = int(exceso[0])
        raise InfeasibleProblemError(
            f"paso {paso}: el generador no cubre {p_gl[paso]:.4g} kW (máximo {net.gen_max:.4g} kW)",
            paso=paso)

    ceros = np.zeros_like(p_gl)
    schedule = Schedule(p_gl=p_gl, p_pvl=ceros, p_pves=ceros.copy(), p_esl=ceros.copy(),
                        soc=np.full(p_gl.shape[0] + 1, net.soc_initial))
    costos = total_objective(schedule, demanda, battery or BatteryParams(), c)
    return DispatchReport(strategy="diesel-only", schedule=schedule, costs=costos)


def static_hybrid_dispatch(problem: DispatchProblem,
                           eta_c0: Optional[float] = None,
                           eta_d0: Optional[float] = None,
                           opts: Optional[SolverOptions] = None) -> DispatchReport:
    """Mismo problema con eficiencias congeladas; todos los bloques en forma cerrada.

    Las constantes por defecto son `eta_c_static` / `eta_d_static` del banco.
    """
    eta_c0 = problem.battery.eta_c_static if eta_c0 is None else eta_c0
    eta_d0 = problem.battery.eta_d_static if eta_d0 is None else eta_d0
    return solve(replace(problem, static_efficiencies=(eta_c0, eta_d0)), opts)


def evaluate_dynamic(schedule: Schedule, problem: DispatchProblem) -> CostBreakdown:
    """Objetivo completo (eficiencias dinámicas) de un despacho cualquiera."""
    return total_objective(schedule, problem.load, problem.battery, problem.cost)


# ----------------------------
# AHORROS
# ----------------------------

def _porcentaje(base: Optional[float], propuesto: Optional[float]) -> Optional[float]:
    if base is None or propuesto is None or base <= 0:
        return None
    return 100.0 * (base - propuesto) / base


def savings_report(costs: Mapping[str, float],
                   fuel_costs: Optional[Mapping[str, float]] = None) -> SavingsReport:
    """Reducciones porcentuales del despacho propuesto frente a cada línea base.

    El objetivo ponderado suele ser negativo en cuanto la batería opera, y en
    ese caso el porcentaje contra esa base queda indefinido. Los costos de
    combustible J1 son siempre no negativos y dan una lectura directa del
    ahorro en diésel.

    Args:
        costs (Mapping[str, float]): Objetivo por estrategia con las claves
            "diesel-only", "no-degradation" y "proposed"; las ausentes quedan
            sin porcentaje.
        fuel_costs (Mapping[str, float], optional): J1 por estrategia, mismas claves.

    Returns:
        SavingsReport: pct_vs_X = 100·(X − propuesto)/X si X > 0; en otro caso
        None y la etiqueta `MARCA_INDEFINIDO`. Los fuel_pct_* siguen la misma
        regla sobre J1.

    Raises:
        DomainError: Si algún costo no es finito.
    """
    combustible = dict(fuel_costs or {})
    for nombre, valor in list(costs.items()) + list(combustible.items()):
        if valor is not None and not math.isfinite(valor):
            raise DomainError(f"costo no finito para {nombre}: {valor}")

    diesel = costs.get("diesel-only")
    estatico = costs.get("no-degradation")
    propuesto = costs.get("proposed")
    reporte = SavingsReport(
        cost_diesel_only=diesel,
        cost_static_hybrid=estatico,
        cost_proposed=propuesto,
        pct_vs_diesel=_porcentaje(diesel, propuesto),
        pct_vs_static=_porcentaje(estatico, propuesto),
    )
    reporte.labels = {
        "pct_vs_diesel": "proposed vs diesel-only" if reporte.pct_vs_diesel is not None else MARCA_INDEFINIDO,
        "pct_vs_static": "proposed vs no-degradation" if reporte.pct_vs_static is not None else MARCA_INDEFINIDO,
    }
    if fuel_costs is not None:
        reporte.fuel_pct_vs_diesel = _porcentaje(combustible.get("diesel-only"), combustible.get("proposed"))
        reporte.fuel_pct_vs_static = _porcentaje(combustible.get("no-degradation"), combustible.get("proposed"))
        reporte.labels["fuel_pct_vs_diesel"] = ("fuel proposed vs diesel-only"
                                                if reporte.fuel_pct_vs_diesel is not None else MARCA_INDEFINIDO)
        reporte.labels["fuel_pct_vs_static"] = ("fuel proposed vs no-degradation"
                                                if reporte.fuel_pct_vs_static is not None else MARCA_INDEFINIDO)
    return reporte


# ----------------------------
# ORÁCULO DE FUERZA BRUTA
# ----------------------------

def _malla(hasta: float, paso: float) -> np.ndarray:
    if hasta < 0:
        return np.zeros(0)
    return np.arange(int(math.floor(hasta / paso + 1e-9)) + 1) * paso


def _candidatos_paso(problem: DispatchProblem, t: int, paso: float):
    """Pares (carga, descarga) exclusivos del paso t con su mejor p_pvl en la malla.

    El generador se elimina por el balance: p_gl = demanda servida − p_pvl − p_esl,
    y solo se conservan los puntos dentro de [gen_min, gen_max].

    Returns:
        tuple: arreglos (p_gl, p_pvl, p_pves, p_esl, objetivo, delta_soc).
    """
    net, pv, servida = problem.network, float(problem.pv[t]), float(problem.served_load[t])
    cargas = _malla(min(pv, battery_model.fade_power_limit(problem.battery)), paso)
    descargas = _malla(min(microgrid_model.DISCHARGE_MARGIN * problem.battery.p_max, servida), paso)
    pares = np.concatenate((
        np.column_stack((cargas, np.zeros_like(cargas))),
        np.column_stack((np.zeros(descargas.shape[0] - 1), descargas[1:])),
    ))
    c, d = pares[:, 0:1], pares[:, 1:2]
    l = _malla(pv, paso)[np.newaxis, :]
    g = servida - l - d

    factible = (l + c <= pv + 1e-12) & (g >= net.gen_min - 1e-12) & (g <= net.gen_max + 1e-12)
    g = np.clip(g, 0.0, None)
    objetivo = step_objective(g, np.broadcast_to(l, g.shape), np.broadcast_to(c, g.shape),
                              np.broadcast_to(d, g.shape), problem.battery, problem.cost,
                              problem.static_efficiencies)
    objetivo = np.where(factible, objetivo, np.inf)
    mejor_l = np.argmin(objetivo, axis=1)
    fila = np.arange(pares.shape[0])
    mejor_obj = objetivo[fila, mejor_l]
    validos = np.isfinite(mejor_obj)

    entra, sale = microgrid_model.storage_energy_terms(c[:, 0], d[:, 0], problem.battery,
                                                       problem.static_efficiencies)
    delta = problem.dt * (np.asarray(entra) - np.asarray(sale))
    return (g[fila, mejor_l][validos], l[0, mejor_l][validos], c[validos, 0], d[validos, 0],
            mejor_obj[validos], delta[validos])


def _mejor_con_prefijo(candidatos, indice_0: int, net: NetworkParams):
    """Mejor combinación con el candidato `indice_0` fijo en el primer paso."""
    objetivos = [candidatos[0][4][indice_0:indice_0 + 1]] + [cand[4] for cand in candidatos[1:]]
    deltas = [candidatos[0][5][indice_0:indice_0 + 1]] + [cand[5] for cand in candidatos[1:]]
    mallas_obj = np.meshgrid(*objetivos, indexing="ij")
    mallas_delta = np.meshgrid(*deltas, indexing="ij")

    total = sum(mallas_obj)
    soc = np.full(total.shape, net.soc_initial)
    factible = np.ones(total.shape, dtype=bool)
    for delta in mallas_delta:
        soc = soc + delta
        factible &= (soc >= net.soc_min - SOC_SLACK) & (soc <= net.soc_max + SOC_SLACK)
    total = np.where(factible, total, np.inf)
    plano = int(np.argmin(total))
    return float(total.flat[plano]), np.unravel_index(plano, total.shape), int(factible.sum())


def brute_force_oracle(problem: DispatchProblem, grid_step: float = 0.05) -> OracleResult:
    """Enumera exhaustivamente los despachos sobre una malla y devuelve el mejor.

    Se exploran p_pvl, p_pves y p_esl en múltiplos de `grid_step` con carga y
    descarga exclusivas; p_gl sale del balance. Como el objetivo es separable
    por paso, en cada paso basta el mejor p_pvl para cada par (carga, descarga);
    el acoplamiento entre pasos es solo el SOC. La dimensión del primer paso se
    reparte entre hilos.

    Raises:
        OracleLimitError: Si el horizonte supera 3 pasos.
        DomainError: Si grid_step no es positivo.
        InfeasibleProblemError: Si ningún punto de la malla es factible.
    """
    if problem.horizon > ORACLE_MAX_HORIZON:
        raise OracleLimitError(
            f"el oráculo admite como máximo {ORACLE_MAX_HORIZON} pasos (recibido {problem.horizon})")
    if not grid_step > 0:
        raise DomainError(f"grid_step debe ser positivo (recibido {grid_step})")

    candidatos = [_candidatos_paso(problem, t, grid_step) for t in range(problem.horizon)]
    if any(cand[0].size == 0 for cand in candidatos):
        raise InfeasibleProblemError("ningún punto de la malla cumple el balance en algún paso")

    with ThreadPoolExecutor() as pool:
        parciales = list(pool.map(lambda i: _mejor_con_prefijo(candidatos, i, problem.network),
                                  range(candidatos[0][0].size)))

    evaluados = sum(p[2] for p in parciales)
    mejor_i = int(np.argmin([p[0] for p in parciales]))
    objetivo, resto, _ = parciales[mejor_i]
    if not math.isfinite(objetivo):
        raise InfeasibleProblemError("ninguna combinación de la malla respeta los límites de SOC")

    indices = (mejor_i,) + tuple(int(k) for k in resto[1:])
    flujos = [np.array([candidatos[t][k][j] for t, j in enumerate(indices)]) for k in range(4)]
    soc = microgrid_model.soc_trajectory(flujos[2], flujos[3], problem.network.soc_initial, problem.dt,
                                         problem.battery, problem.static_efficiencies)
    schedule = Schedule(*flujos, soc=soc, dt=problem.dt)
    log.debug("Oráculo: %d combinaciones factibles, objetivo %.6g", evaluados, objetivo)
    return OracleResult(schedule=schedule, objective=objetivo, evaluated=evaluados)
