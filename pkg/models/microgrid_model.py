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

"""Microred FV-diésel-batería de barra única.

Generación FV, balance con pérdidas de línea, dinámica y límites del estado de
carga, conmutación de régimen carga/descarga y la proyección de SOC. Todo lo
que decide si un despacho es factible vive aquí.
"""
from typing import List, Optional, Tuple

import numpy as np

from config import settings
from models import battery_model
from models.schemas import BatteryParams, DispatchProblem, NetworkParams, PvParams, Schedule
from utilities.exceptions import DomainError, InfeasibleProblemError
from utilities.logger import obtener_logger
from utilities.sanitizer import Sanitizer

log = obtener_logger("microgrid")

DISCHARGE_MARGIN = 0.999
"""float: Fracción de p_max que acota la descarga; en p_max la eficiencia se anula."""


def pv_output(irradiance, pv: PvParams):
    """Potencia FV min(A·η·I, capacidad) para irradiancia horaria en kWh/m².

    Raises:
        DomainError: Si la irradiancia es negativa.
    """
    arr = np.asarray(irradiance, dtype=float)
    if np.any(arr < 0):
        raise DomainError("la irradiancia debe ser no negativa")
    salida = np.minimum(pv.area * pv.efficiency * arr, pv.capacity_cap)
    return float(salida) if salida.ndim == 0 else salida


def pv_split_residual(p_pvl, p_pves, p_pv):
    """p_pvl + p_pves − p_pv; factible si es <= 0."""
    residuo = np.asarray(p_pvl, dtype=float) + np.asarray(p_pves, dtype=float) - np.asarray(p_pv, dtype=float)
    return float(residuo) if residuo.ndim == 0 else residuo


def balance_residual(p_gl, p_pvl, p_esl, load, net: NetworkParams):
    """p_gl + p_pvl + p_esl − loss_factor·load; factible si |residuo| <= tolerancia."""
    residuo = np.asarray(p_gl, dtype=float) + np.asarray(p_pvl, dtype=float) \
        + np.asarray(p_esl, dtype=float) - net.loss_factor * np.asarray(load, dtype=float)
    return float(residuo) if residuo.ndim == 0 else residuo


# ----------------------------
# ESTADO DE CARGA
# ----------------------------

def soc_limits(soc_max: float, dod: float) -> Tuple[float, float]:
    """Límites (soc_min, soc_max) con soc_min = (1 − DOD)·soc_max."""
    Sanitizer.fraccion(dod, "dod")
    return (1.0 - dod) * soc_max, soc_max


def network_params(battery: BatteryParams,
                   soc_initial: Optional[float] = None,
                   loss_factor: float = settings.LOSS_FACTOR,
                   gen_min: float = settings.GEN_MIN,
                   gen_max: float = settings.GEN_MAX,
                   h_max: float = settings.H_MAX) -> NetworkParams:
    """Construye NetworkParams derivando los límites de SOC del banco.

    Args:
        battery (BatteryParams): Aporta soc_max y DOD.
        soc_initial (float, optional): SOC al inicio del horizonte; por defecto soc_min.

    Returns:
        NetworkParams: Parámetros validados.
    """
    soc_min, soc_max = soc_limits(battery.soc_max, battery.dod)
    return NetworkParams(
        soc_min=soc_min,
        soc_max=soc_max,
        soc_initial=soc_min if soc_initial is None else soc_initial,
        loss_factor=loss_factor,
        gen_min=gen_min,
        gen_max=gen_max,
        h_max=h_max,
        dod=battery.dod,
    )


def storage_energy_terms(p_pves, p_esl, battery: BatteryParams,
                         static_efficiencies: Optional[Tuple[float, float]] = None):
    """Energía que entra (η_c·p_pves) y que sale (p_esl/η_d) del banco por unidad de tiempo."""
    c = np.asarray(p_pves, dtype=float)
    d = np.asarray(p_esl, dtype=float)
    if static_efficiencies is not None:
        eta_c0, eta_d0 = static_efficiencies
        return eta_c0 * c, d / eta_d0
    return np.asarray(battery_model.charge_cost_exact(c, battery)), \
        np.asarray(battery_model.discharge_cost(d, battery))


def soc_trajectory(p_pves, p_esl, soc0: float, dt: float, battery: BatteryParams,
                   static_efficiencies: Optional[Tuple[float, float]] = None) -> np.ndarray:
    """Trayectoria SOC(t) = SOC(t−1) + dt·(η_c·p_pves − p_esl/η_d), longitud N+1.

    Raises:
        DomainError: Si algún p_esl alcanza p_max (η_d = 0).
    """
    entra, sale = storage_energy_terms(np.atleast_1d(p_pves), np.atleast_1d(p_esl),
                                       battery, static_efficiencies)
    return np.concatenate(([float(soc0)], float(soc0) + np.cumsum(dt * (entra - sale))))


def regime_coefficients(p_pves_iter, p_esl_iter):
    """Coeficientes (n1, n2) del régimen: se suprime el flujo menor.

    Carga dominante (o empate) → (0, 1), se suprime la descarga.
    Descarga dominante → (1, 0), se suprime la carga.
    """
    c = np.asarray(p_pves_iter, dtype=float)
    d = np.asarray(p_esl_iter, dtype=float)
    n1 = (d > c).astype(int)
    n2 = 1 - n1
    if n1.ndim == 0:
        return int(n1), int(n2)
    return n1, n2


def soc_projection(p_pves_t: float, p_esl_t: float, soc_t: float, net: NetworkParams) -> Tuple[float, float]:
    """Regla de proyección de un paso: anula la carga si SOC > max y la descarga si SOC < min."""
    if soc_t > net.soc_max:
        return 0.0, p_esl_t
    if soc_t < net.soc_min:
        return p_pves_t, 0.0
    return p_pves_t, p_esl_t


def project_soc(p_pves, p_esl, dt: float, battery: BatteryParams, net: NetworkParams,
                static_efficiencies: Optional[Tuple[float, float]] = None):
    """Aplica `soc_projection` en un barrido hacia adelante.

    El SOC de cada paso se recalcula con los flujos ya proyectados de los pasos
    anteriores, de modo que la trayectoria resultante queda en [soc_min, soc_max]
    si el SOC inicial lo está.

    Returns:
        tuple: (p_pves, p_esl, soc) proyectados; soc de longitud N+1.
    """
    c = np.array(p_pves, dtype=float)
    d = np.array(p_esl, dtype=float)
    entra, sale = storage_energy_terms(c, d, battery, static_efficiencies)
    entra = dt * entra
    sale = dt * sale

    soc = np.concatenate(([net.soc_initial], net.soc_initial + np.cumsum(entra - sale)))
    if soc[1:].max() <= net.soc_max and soc[1:].min() >= net.soc_min:
        return c, d, soc

    previo = net.soc_initial
    for t in range(c.shape[0]):
        actual = previo + entra[t] - sale[t]
        for _ in range(2):
            nuevo_c, nuevo_d = soc_projection(c[t], d[t], actual, net)
            if nuevo_c == c[t] and nuevo_d == d[t]:
                break
            if nuevo_c != c[t]:
                c[t], entra[t] = nuevo_c, 0.0
            if nuevo_d != d[t]:
                d[t], sale[t] = nuevo_d, 0.0
            actual = previo + entra[t] - sale[t]
        soc[t + 1] = actual
        previo = actual
    return c, d, soc


def cap_to_soc_headroom(p_pves, p_esl, dt: float, battery: BatteryParams, net: NetworkParams,
                        static_efficiencies: Optional[Tuple[float, float]] = None):
    """Recorta carga y descarga al margen de SOC que queda en cada paso.

    Barrido hacia adelante: la carga del paso t se limita a (soc_max − SOC)/dt y
    la descarga a η_d·(SOC − soc_min)/dt, con el SOC ya recortado del paso
    anterior. Como η_c <= 1 y η_d decrece con la potencia, ambos topes son
    conservadores con eficiencias dinámicas y exactos con eficiencias estáticas.

    Returns:
        tuple: (p_pves, p_esl) recortados.
    """
    c = np.array(p_pves, dtype=float)
    d = np.array(p_esl, dtype=float)
    entra, sale = storage_energy_terms(c, d, battery, static_efficiencies)
    soc = net.soc_initial + np.cumsum(dt * (entra - sale))
    if soc.max() <= net.soc_max and soc.min() >= net.soc_min:
        return c, d

    tope_d = DISCHARGE_MARGIN * battery.p_max
    previo = net.soc_initial
    for t in range(c.shape[0]):
        margen_sup = max(net.soc_max - previo, 0.0) / dt
        margen_inf = max(previo - net.soc_min, 0.0) / dt
        if static_efficiencies is not None:
            eta_c0, eta_d0 = static_efficiencies
            c[t] = min(c[t], margen_sup / eta_c0)
            d[t] = min(d[t], eta_d0 * margen_inf)
        else:
            c[t] = min(c[t], margen_sup)
            d[t] = min(d[t], float(battery_model.eta_d(min(margen_inf, tope_d), battery)) * margen_inf)
        e_in, e_out = storage_energy_terms(c[t], d[t], battery, static_efficiencies)
        previo = min(max(previo + dt * (float(e_in) - float(e_out)), net.soc_min), net.soc_max)
    return c, d


# ----------------------------
# FACTIBILIDAD
# ----------------------------

def max_discharge(problem: DispatchProblem) -> np.ndarray:
    """Cota superior de la descarga por paso."""
    return np.minimum(DISCHARGE_MARGIN * problem.battery.p_max, problem.served_load)


def max_charge(problem: DispatchProblem) -> np.ndarray:
    """Cota superior de la carga por paso: FV disponible y rango ajustado del desvanecimiento."""
    return np.minimum(problem.pv, battery_model.fade_power_limit(problem.battery))


def check_feasibility(problem: DispatchProblem) -> None:
    """Detecta instancias infactibles antes de iterar.

    Raises:
        InfeasibleProblemError: Si en algún paso la demanda con pérdidas supera
            generador + FV + descarga máxima, o si el SOC inicial está fuera de límites.
    """
    net = problem.network
    if not net.soc_min <= net.soc_initial <= net.soc_max:
        raise InfeasibleProblemError("el SOC inicial está fuera de sus límites")
    capacidad = net.gen_max + problem.pv + DISCHARGE_MARGIN * problem.battery.p_max
    faltante = problem.served_load - capacidad
    if (faltante > 0).any():
        paso = int(np.argmax(faltante > 0))
        raise InfeasibleProblemError(
            f"paso {paso}: demanda {problem.served_load[paso]:.4g} kW supera la capacidad "
            f"disponible {capacidad[paso]:.4g} kW", paso=paso)
    if (problem.served_load < net.gen_min).any() and net.gen_min > 0:
        log.warning("La demanda es menor que gen_min en algún paso; el balance puede no cerrarse")


def validate_schedule(schedule: Schedule, problem: DispatchProblem,
                      tol: float = 1e-4, soc_tol: float = 1e-6) -> List[str]:
    """Revisa los invariantes de la microred sobre un despacho.

    Returns:
        List[str]: Descripción de cada violación; vacía si el despacho es válido.
    """
    net = problem.network
    violaciones = []
    balance = balance_residual(schedule.p_gl, schedule.p_pvl, schedule.p_esl, problem.load, net)
    for t in np.flatnonzero(np.abs(balance) > tol):
        violaciones.append(f"paso {t}: balance {balance[t]:+.3e} kW")
    split = np.asarray(pv_split_residual(schedule.p_pvl, schedule.p_pves, problem.pv))
    for t in np.flatnonzero(split > tol):
        violaciones.append(f"paso {t}: reparto FV {split[t]:+.3e} kW")
    simultaneo = np.minimum(schedule.p_pves, schedule.p_esl)
    for t in np.flatnonzero(simultaneo > net.h_max):
        violaciones.append(f"paso {t}: carga y descarga simultáneas ({simultaneo[t]:.3e} kW)")
    for t in np.flatnonzero((schedule.soc < net.soc_min - soc_tol) | (schedule.soc > net.soc_max + soc_tol)):
        violaciones.append(f"índice {t}: SOC {schedule.soc[t]:.6g} kWh fuera de límites")
    return violaciones
