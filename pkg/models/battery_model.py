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

"""Modelo semiempírico del banco de baterías.

Desvanecimiento de capacidad en carga y descarga, corrientes del circuito
equivalente, energías, vida útil, eficiencias dinámicas y las funciones de costo
que se construyen sobre ellas, junto con la auditoría numérica de su
convexidad.

Las operaciones a escala de banco reciben potencias en kW; las operaciones de
celda (corrientes, energías y vida útil) reciben vatios y usan `v0`,
`r_internal` y `q0` en Ah. Todas aceptan escalares o arreglos de numpy y
devuelven el mismo tipo que reciben.
"""
from typing import NamedTuple, Tuple

import numpy as np

from config import settings
from models.schemas import BatteryParams, CellState, AuditReport
from utilities.exceptions import DomainError
from utilities.logger import obtener_logger

log = obtener_logger("battery")


class RagoneParameter(NamedTuple):
    value: float
    valid: bool


def _entrada(p):
    arr = np.asarray(p, dtype=float)
    return arr, arr.ndim == 0


def _salida(arr, escalar):
    return float(arr) if escalar else arr


def _exigir_no_negativa(arr, nombre="p"):
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError(f"{nombre} debe ser no negativa")


def _fraccion_carga(p, params: BatteryParams):
    return 1.0 - params.u * p - params.v * p * p


def _parametros_celda(params: BatteryParams) -> float:
    """Valida v0 y R y devuelve V0/2R."""
    if not params.v0 > 0:
        raise DomainError(f"v0 debe ser positivo (recibido {params.v0})")
    if not params.r_internal > 0:
        raise DomainError(f"r_internal debe ser positiva (recibido {params.r_internal})")
    return params.v0 / (2.0 * params.r_internal)


def max_discharge_power_cell(params: BatteryParams) -> float:
    """Potencia máxima entregable por la celda, V0²/4R (W)."""
    k = _parametros_celda(params)
    return k * k * params.r_internal


def fade_power_limit(params: BatteryParams) -> float:
    """Potencia de carga a la que 1 − u·p − v·p² se anula (kW); inf si no se anula."""
    if params.v > 0:
        return float((-params.u + np.sqrt(params.u ** 2 + 4.0 * params.v)) / (2.0 * params.v))
    if params.u > 0:
        return 1.0 / params.u
    return float("inf")


# ----------------------------
# CAPACIDAD DISPONIBLE
# ----------------------------

def capacity_fraction_charge(p, params: BatteryParams):
    """Fracción de la capacidad nominal disponible al cargar a potencia `p` (kW).

    Un resultado negativo indica que el modelo de desvanecimiento se usa fuera
    de su rango ajustado: se registra una advertencia y el valor se devuelve
    sin recortar.

    Args:
        p (float | np.ndarray): Potencia de carga, kW.
        params (BatteryParams): Constantes del banco.

    Returns:
        float | np.ndarray: 1 − u·p − v·p².

    Raises:
        DomainError: Si `p` es negativa.
    """
    arr, escalar = _entrada(p)
    _exigir_no_negativa(arr)
    frac = _fraccion_carga(arr, params)
    if np.any(frac < 0):
        log.warning("Desvanecimiento fuera del rango ajustado: fracción de carga %.4g a p=%.4g kW",
                    float(np.min(frac)), float(np.max(arr)))
    return _salida(frac, escalar)


def capacity_fraction_discharge(p, params: BatteryParams):
    """Fracción de capacidad disponible al descargar: tanh((Pmax − p)/√(Pmax + p)).

    Raises:
        DomainError: Si `p` está fuera de [0, p_max].
    """
    arr, escalar = _entrada(p)
    _exigir_no_negativa(arr)
    if np.any(arr > params.p_max):
        raise DomainError(f"p supera p_max={params.p_max}")
    frac = np.tanh((params.p_max - arr) / np.sqrt(params.p_max + arr))
    return _salida(frac, escalar)


# ----------------------------
# CIRCUITO EQUIVALENTE DE CELDA
# ----------------------------

def charge_current(p, params: BatteryParams):
    """Corriente de carga de la celda a potencia `p` (W).

    Se toma la raíz positiva −V0/2R + √((V0/2R)² + P/R); la otra raíz es
    negativa y no tiene sentido físico al cargar. Se evalúa en la forma
    racionalizada (P/R)/(V0/2R + √(...)), equivalente y sin cancelación.
    """
    k = _parametros_celda(params)
    arr, escalar = _entrada(p)
    _exigir_no_negativa(arr)
    q = arr / params.r_internal
    corriente = q / (k + np.sqrt(k * k + q))
    return _salida(corriente, escalar)


def discharge_current(p, params: BatteryParams):
    """Corriente de descarga V0/2R − √((V0/2R)² − P/R) para `p` en W.

    Raises:
        DomainError: Si `p` supera V0²/4R (discriminante negativo).
    """
    k = _parametros_celda(params)
    arr, escalar = _entrada(p)
    _exigir_no_negativa(arr)
    p_lim = k * k * params.r_internal
    if np.any(arr > p_lim * (1.0 + 1e-12)):
        raise DomainError(f"p supera la potencia máxima de la celda V0²/4R={p_lim:.6g} W")
    q = arr / params.r_internal
    raiz = np.sqrt(np.maximum(k * k - q, 0.0))
    corriente = q / (k + raiz)
    return _salida(corriente, escalar)


def cell_lifetime(capacity_available, current):
    """Tiempo hasta agotar la capacidad disponible a corriente constante (h).

    Raises:
        DomainError: Si la corriente no es positiva o la capacidad es negativa.
    """
    cap, escalar = _entrada(capacity_available)
    cur = np.asarray(current, dtype=float)
    if np.any(cur <= 0):
        raise DomainError("la corriente debe ser positiva para calcular la vida útil")
    _exigir_no_negativa(cap, "capacity_available")
    return _salida(cap / cur, escalar and cur.ndim == 0)


def stored_energy_charge(p, capacity_available, params: BatteryParams):
    """Energía almacenada tras cargar a potencia `p` (W), en Wh.

    Q0·V0 + (V0/2R − √((V0/2R)² + P/R))·Qc·R; el término de corrección es la
    subcarga que crece con la potencia.
    """
    # V0/2R − √(...) es exactamente −I
    corriente = np.asarray(charge_current(p, params))
    energia = params.q0 * params.v0 - corriente * np.asarray(capacity_available, dtype=float) * params.r_internal
    return _salida(energia, energia.ndim == 0)


def available_energy_discharge(p, capacity_available, params: BatteryParams):
    """Energía disponible para la carga al descargar a `p` (W), en Wh.

    2R·Qd·P / (V0 − √(V0² − 4RP)), evaluada como Qd·(V0 + √(V0² − 4RP))/2,
    que coincide para P > 0 y da el límite Qd·V0 en P = 0.
    """
    _parametros_celda(params)
    arr, escalar = _entrada(p)
    _exigir_no_negativa(arr)
    disc = params.v0 ** 2 - 4.0 * params.r_internal * arr
    if np.any(disc < -1e-12 * params.v0 ** 2):
        raise DomainError("p supera la potencia máxima de la celda V0²/4R")
    energia = np.asarray(capacity_available, dtype=float) * (params.v0 + np.sqrt(np.maximum(disc, 0.0))) / 2.0
    return _salida(energia, escalar and np.ndim(capacity_available) == 0)


def cell_state_charge(p, params: BatteryParams) -> CellState:
    """Estado de la celda cargando a `p` W: capacidad Qc, corriente y vida Qc/I."""
    capacidad = max(float(capacity_fraction_charge(p, params)), 0.0) * params.q0
    corriente = float(charge_current(p, params))
    vida = cell_lifetime(capacidad, corriente) if corriente > 0 else float("inf")
    return CellState(current=corriente, capacity_available=capacidad, lifetime=vida)


def cell_state_discharge(p, params: BatteryParams) -> CellState:
    """Estado de la celda descargando a `p` W: capacidad Qd, corriente y vida Qd/I."""
    capacidad = float(capacity_fraction_discharge(p, params)) * params.q0
    corriente = float(discharge_current(p, params))
    vida = cell_lifetime(capacidad, corriente) if corriente > 0 else float("inf")
    return CellState(current=corriente, capacity_available=capacidad, lifetime=vida)


# ----------------------------
# EFICIENCIAS DINÁMICAS
# ----------------------------

def eta_c(p, params: BatteryParams):
    """Eficiencia de carga 1 + ½(1 − √(1 + 2αp))(1 − up − vp²) para `p` en kW."""
    arr, escalar = _entrada(p)
    _exigir_no_negativa(arr)
    eta = 1.0 + 0.5 * (1.0 - np.sqrt(1.0 + 2.0 * params.alpha * arr)) * _fraccion_carga(arr, params)
    return _salida(eta, escalar)


def eta_d(p, params: BatteryParams):
    """Eficiencia de descarga tanh((Pmax − p)/√(Pmax + p)).

    Con resistencia interna baja coincide con la fracción de capacidad de
    descarga.

    Raises:
        DomainError: Si `p` está fuera de [0, p_max); en p_max la eficiencia es 0.
    """
    arr, escalar = _entrada(p)
    _exigir_no_negativa(arr)
    if np.any(arr >= params.p_max):
        raise DomainError(f"la eficiencia de descarga se anula en p >= p_max={params.p_max}")
    return _salida(np.tanh((params.p_max - arr) / np.sqrt(params.p_max + arr)), escalar)


# ----------------------------
# FUNCIONES DE COSTO
# ----------------------------

def charge_cost_exact(p, params: BatteryParams):
    """Costo efectivo de carga p·η_c(p)."""
    arr, escalar = _entrada(p)
    return _salida(arr * np.asarray(eta_c(arr, params)), escalar)


def charge_cost_quadratic(p, params: BatteryParams):
    """Aproximación cuadrática p − ½·α·p², válida en el régimen αp ≤ 1e-6."""
    arr, escalar = _entrada(p)
    _exigir_no_negativa(arr)
    return _salida(arr - 0.5 * params.alpha * arr * arr, escalar)


def discharge_cost(p, params: BatteryParams):
    """Costo efectivo de descarga p/η_d(p); convexo en [0, p_max)."""
    arr, escalar = _entrada(p)
    return _salida(arr / np.asarray(eta_d(arr, params)), escalar)


def charge_cost_derivatives(p, params: BatteryParams) -> Tuple[np.ndarray, np.ndarray]:
    """Primera y segunda derivada analíticas de p·η_c(p)."""
    p = np.asarray(p, dtype=float)
    a = params.alpha
    raiz = np.sqrt(1.0 + 2.0 * a * p)
    h = 0.5 * (1.0 - raiz)
    h1 = -a / (2.0 * raiz)
    h2 = a * a / (2.0 * raiz ** 3)
    q = _fraccion_carga(p, params)
    q1 = -params.u - 2.0 * params.v * p
    q2 = -2.0 * params.v
    eta = 1.0 + h * q
    eta1 = h1 * q + h * q1
    eta2 = h2 * q + 2.0 * h1 * q1 + h * q2
    return eta + p * eta1, 2.0 * eta1 + p * eta2


def discharge_cost_derivatives(p, params: BatteryParams) -> Tuple[np.ndarray, np.ndarray]:
    """Primera y segunda derivada analíticas de p/η_d(p) en [0, p_max)."""
    p = np.asarray(p, dtype=float)
    pm = params.p_max
    base = pm + p
    s = (pm - p) / np.sqrt(base)
    s1 = -(pm + 3.0 * p) / (2.0 * base ** 1.5)
    s2 = -0.75 * (pm - p) / base ** 2.5
    eta = np.tanh(s)
    sech2 = 1.0 - eta * eta
    eta1 = sech2 * s1
    eta2 = sech2 * s2 - 2.0 * eta * sech2 * s1 * s1
    primera = 1.0 / eta - p * eta1 / eta ** 2
    segunda = -2.0 * eta1 / eta ** 2 - p * eta2 / eta ** 2 + 2.0 * p * eta1 ** 2 / eta ** 3
    return primera, segunda


def ragone_parameter(p, params: BatteryParams, threshold: float = settings.RAGONE_THRESHOLD) -> RagoneParameter:
    """Parámetro de Ragone α·p y si cae en el régimen de concavidad válido.

    Returns:
        RagoneParameter: (value, valid) con valid = α·p ≤ threshold.
    """
    valor = params.alpha * float(p)
    if valor < 0:
        raise DomainError("p debe ser no negativa")
    return RagoneParameter(valor, valor <= threshold)


# ===== AUDITORÍA DE CONVEXIDAD =====

def _segunda_diferencia(funcion, grid, h):
    return (funcion(grid + h) - 2.0 * funcion(grid) + funcion(grid - h)) / (h * h)


def convexity_audit(params: BatteryParams,
                    grid_points: int = settings.AUDIT_GRID_POINTS,
                    margin: float = settings.AUDIT_MARGIN,
                    tolerance: float = settings.AUDIT_TOLERANCE) -> AuditReport:
    """Audita numéricamente la convexidad de la descarga y la concavidad de la carga.

    Evalúa segundas diferencias centrales con paso h = p_max·1e-4 sobre una
    malla de `grid_points` puntos en [h, margin·p_max]. La malla se detiene antes
    de p_max porque el costo de descarga diverge allí.

    Args:
        params (BatteryParams): Constantes del banco.
        grid_points (int): Puntos de la malla (>= 3).
        margin (float): Fracción de p_max cubierta, en (0, 1).
        tolerance (float): Tolerancia de las comparaciones.

    Returns:
        AuditReport: Extremos, veredictos y bandera de Ragone en p_max. Los
        parámetros degenerados producen veredictos fallidos, no excepciones.
    """
    if grid_points < 3:
        raise DomainError("grid_points debe ser al menos 3")
    if not 0.0 < margin < 1.0:
        raise DomainError("margin debe estar en (0, 1)")

    h = params.p_max * 1e-4
    grid = np.linspace(h, margin * params.p_max, grid_points)

    try:
        d2_descarga = _segunda_diferencia(lambda x: discharge_cost(x, params), grid, h)
        min_descarga = float(np.min(d2_descarga))
    except DomainError:
        min_descarga = float("nan")
    try:
        d2_carga = _segunda_diferencia(lambda x: charge_cost_exact(x, params), grid, h)
        max_carga = float(np.max(d2_carga))
    except DomainError:
        max_carga = float("nan")

    ragone = ragone_parameter(params.p_max, params)
    reporte = AuditReport(
        min_discharge_second_diff=min_descarga,
        max_charge_second_diff=max_carga,
        discharge_convex=bool(np.isfinite(min_descarga) and min_descarga >= -tolerance),
        charge_concave=bool(np.isfinite(max_carga) and max_carga <= tolerance),
        ragone_value=ragone.value,
        ragone_valid=ragone.valid,
        grid_points=grid_points,
        margin=margin,
        step=h,
        tolerance=tolerance,
    )
    log.debug("Auditoría: min d2 descarga=%.3e, max d2 carga=%.3e, alpha·Pmax=%.3e",
              min_descarga, max_carga, ragone.value)
    return reporte
