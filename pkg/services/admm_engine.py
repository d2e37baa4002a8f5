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

"""ADMM secuencial proyectado para el despacho con degradación.

El problema se lleva a la forma estándar

    A·p_gl + B·p_pvl + C·p_pves + D·p_esl + E·ε = c,   ε >= 0

con 3N filas: N de balance (sin holgura), N de límite FV y N de régimen (ambas
con holgura). Cada iteración actualiza en orden los bloques generador,
FV-a-carga, carga, descarga y holguras minimizando exactamente el Lagrangiano
aumentado en ese bloque; luego proyecta el SOC y actualiza los multiplicadores.

El SOC es una variable más, acotada a [soc_min, soc_max] y atada a los flujos
por N filas de dinámica (SOC(t) − SOC(t−1))/dt − e_in(t) + e_out(t) = 0 con
multiplicadores propios. Su actualización es la proyección de la cadena sobre
la caja; así los bloques de almacenamiento ven el precio del límite de SOC.

Las columnas de un mismo bloque no comparten filas, así que cada bloque se
separa en N subproblemas escalares independientes que se resuelven vectorizados.
"""
from dataclasses import dataclass, field
from typing import Callable, Dict, NamedTuple, Optional, Tuple

import numpy as np
import scipy.sparse as sparse
from scipy.optimize import minimize_scalar
from scipy.sparse.linalg import spsolve
from tqdm import tqdm

from models import battery_model, microgrid_model
from models.dispatch_objective import total_objective
from models.schemas import AdmmDiagnostics, DispatchProblem, DispatchReport, Schedule, SolverOptions
from utilities.exceptions import ProblemShapeError
from utilities.logger import obtener_logger

log = obtener_logger("admm")

BLOCK_ORDER = ("generator", "pv_load", "charge", "discharge", "slacks")
"""tuple: Orden de actualización de los bloques dentro de una iteración."""

CURVATURE_FLOOR = 1e-12
CONVEXITY_WARNING = "régimen de convexidad violado: no se garantiza el óptimo global"

SOC_SIGN = {"charge": -1.0, "discharge": 1.0}
"""dict: Signo con que la energía de cada flujo entra en la fila de dinámica del SOC."""


# ----------------------------
# ESTRUCTURAS
# ----------------------------

@dataclass(eq=False)
class BlockObjective:
    """Costo separable de un bloque de flujos.

    `quadratic` = (q2, q1) cuando f(x) = q2·x² + q1·x elemento a elemento; en
    ese caso la minimización del bloque es en forma cerrada.
    """
    value: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]
    quadratic: Optional[Tuple[float, float]] = None


class StorageEnergy(NamedTuple):
    """Energía por unidad de tiempo e(x) de un flujo de almacenamiento, con f(x) = weight·e(x).

    `slope` no es None cuando e(x) = slope·x (eficiencias estáticas).
    """
    value: Callable
    grad: Callable
    hess: Callable
    weight: float
    slope: Optional[float] = None


def _cuadratico(q2: float, q1: float) -> BlockObjective:
    return BlockObjective(
        value=lambda x: q2 * x * x + q1 * x,
        grad=lambda x: 2.0 * q2 * x + q1,
        hess=lambda x: np.full_like(np.asarray(x, dtype=float), 2.0 * q2),
        quadratic=(q2, q1),
    )


@dataclass(eq=False)
class StandardProblem:
    """Forma estándar con holguras del problema de despacho."""
    problem: DispatchProblem
    A: sparse.csr_matrix
    B: sparse.csr_matrix
    C: sparse.csr_matrix
    D: sparse.csr_matrix
    E: sparse.csr_matrix
    c: np.ndarray
    f: Dict[str, BlockObjective]
    lower: Dict[str, np.ndarray]
    upper: Dict[str, np.ndarray]
    n1: np.ndarray
    n2: np.ndarray

    @property
    def horizon(self) -> int:
        return self.problem.horizon

    @property
    def rows(self) -> int:
        return 3 * self.horizon

    def matrix(self, block: str) -> sparse.csr_matrix:
        return {"generator": self.A, "pv_load": self.B, "charge": self.C,
                "discharge": self.D, "slacks": self.E}[block]

    def set_regime(self, n1: np.ndarray, n2: np.ndarray) -> None:
        """Reescribe las filas de régimen de C y D con nuevos (n1, n2)."""
        self.n1 = np.asarray(n1, dtype=int)
        self.n2 = np.asarray(n2, dtype=int)
        n = self.horizon
        eye = sparse.identity(n, format="csr")
        cero = sparse.csr_matrix((n, n))
        self.C = sparse.vstack([cero, eye, sparse.diags(self.n1.astype(float))], format="csr")
        self.D = sparse.vstack([eye, cero, sparse.diags(self.n2.astype(float))], format="csr")

    def block_bounds(self, block: str) -> Tuple[np.ndarray, np.ndarray]:
        """Caja del bloque; el flujo suprimido por el régimen queda acotado por h_max."""
        lo, hi = self.lower[block], self.upper[block]
        h_max = self.problem.network.h_max
        if block == "charge":
            hi = np.where(self.n1 == 1, np.minimum(hi, h_max), hi)
        elif block == "discharge":
            hi = np.where(self.n2 == 1, np.minimum(hi, h_max), hi)
        return lo, hi


@dataclass(eq=False)
class AdmmState:
    p_gl: np.ndarray
    p_pvl: np.ndarray
    p_pves: np.ndarray
    p_esl: np.ndarray
    slacks: np.ndarray          # [ε_pv (N), ε_régimen (N)]
    mu: np.ndarray              # 3N
    rho: float
    soc: Optional[np.ndarray] = None    # SOC al final de cada paso (N)
    nu: Optional[np.ndarray] = None     # multiplicadores de la dinámica del SOC (N)
    iteration: int = 0
    residual: Optional[np.ndarray] = None
    soc_residual: Optional[np.ndarray] = None
    change: float = float("inf")
    newton_fallbacks: int = 0
    lagrangian_max_increase: Optional[float] = 0.0   # None si no se registra
    primal_history: list = field(default_factory=list)
    dual_history: list = field(default_factory=list)
    objective_history: list = field(default_factory=list)

    def block(self, name: str) -> np.ndarray:
        return {"generator": self.p_gl, "pv_load": self.p_pvl, "charge": self.p_pves,
                "discharge": self.p_esl, "slacks": self.slacks}[name]

    def set_block(self, name: str, valor: np.ndarray) -> None:
        atributo = {"generator": "p_gl", "pv_load": "p_pvl", "charge": "p_pves",
                    "discharge": "p_esl", "slacks": "slacks"}[name]
        setattr(self, atributo, np.asarray(valor, dtype=float))

    def vector(self) -> np.ndarray:
        return np.concatenate((self.p_gl, self.p_pvl, self.p_pves, self.p_esl, self.slacks, self.soc))


class NewtonResult(NamedTuple):
    root: object            # float o np.ndarray
    converged: object       # bool o np.ndarray de bool
    iterations: int


class ConvergenceCheck(NamedTuple):
    converged: bool
    primal_residual: float
    dual_residual: float


# ----------------------------
# ENSAMBLADO
# ----------------------------

def _objetivos_bloque(problem: DispatchProblem) -> Dict[str, BlockObjective]:
    cp, bat = problem.cost, problem.battery
    f = {
        "generator": _cuadratico(cp.w1 * cp.g1 * cp.a, cp.w1 * cp.g1 * cp.b),
        "pv_load": _cuadratico(0.0, -cp.w3 * cp.g2),
        "slacks": _cuadratico(0.0, 0.0),
    }
    if problem.static_efficiencies is not None:
        eta_c0, eta_d0 = problem.static_efficiencies
        f["charge"] = _cuadratico(0.0, -cp.w2 * cp.g3 * eta_c0)
        f["discharge"] = _cuadratico(0.0, cp.w2 * cp.g4 / eta_d0)
        return f

    k_c = cp.w2 * cp.g3
    k_d = cp.w2 * cp.g4
    f["charge"] = BlockObjective(
        value=lambda x: -k_c * np.asarray(battery_model.charge_cost_exact(x, bat)),
        grad=lambda x: -k_c * battery_model.charge_cost_derivatives(x, bat)[0],
        hess=lambda x: -k_c * battery_model.charge_cost_derivatives(x, bat)[1],
    )
    f["discharge"] = BlockObjective(
        value=lambda x: k_d * np.asarray(battery_model.discharge_cost(x, bat)),
        grad=lambda x: k_d * battery_model.discharge_cost_derivatives(x, bat)[0],
        hess=lambda x: k_d * battery_model.discharge_cost_derivatives(x, bat)[1],
    )
    return f


def _energia(block: str, problem: DispatchProblem) -> StorageEnergy:
    cp, bat = problem.cost, problem.battery
    if block == "charge":
        peso = -cp.w2 * cp.g3
        if problem.static_efficiencies is not None:
            pendiente = problem.static_efficiencies[0]
        else:
            return StorageEnergy(
                value=lambda x: np.asarray(battery_model.charge_cost_exact(x, bat)),
                grad=lambda x: battery_model.charge_cost_derivatives(x, bat)[0],
                hess=lambda x: battery_model.charge_cost_derivatives(x, bat)[1],
                weight=peso)
    else:
        peso = cp.w2 * cp.g4
        if problem.static_efficiencies is not None:
            pendiente = 1.0 / problem.static_efficiencies[1]
        else:
            return StorageEnergy(
                value=lambda x: np.asarray(battery_model.discharge_cost(x, bat)),
                grad=lambda x: battery_model.discharge_cost_derivatives(x, bat)[0],
                hess=lambda x: battery_model.discharge_cost_derivatives(x, bat)[1],
                weight=peso)
    return StorageEnergy(
        value=lambda x: pendiente * np.asarray(x, dtype=float),
        grad=lambda x: np.full_like(np.asarray(x, dtype=float), pendiente),
        hess=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        weight=peso, slope=pendiente)


def assemble_problem(problem: DispatchProblem) -> StandardProblem:
    """Arma la forma estándar: filas de balance, límite FV y régimen.

    Args:
        problem (DispatchProblem): Instancia validada.

    Returns:
        StandardProblem: Bloques dispersos A..E, lado derecho c, costos por
        bloque y cajas. El régimen inicial es el de iterados nulos (empate).

    Raises:
        ProblemShapeError: Si las series no son coherentes.
    """
    n = problem.horizon
    if problem.pv.shape != (n,) or problem.load.shape != (n,):
        raise ProblemShapeError("load y pv deben tener la longitud del horizonte")

    net = problem.network
    eye = sparse.identity(n, format="csr")
    cero = sparse.csr_matrix((n, n))
    A = sparse.vstack([eye, cero, cero], format="csr")
    B = sparse.vstack([eye, eye, cero], format="csr")
    E = sparse.vstack([sparse.hstack([cero, cero]),
                       sparse.hstack([eye, cero]),
                       sparse.hstack([cero, eye])], format="csr")
    rhs = np.concatenate((problem.served_load, problem.pv, np.full(n, net.h_max)))

    lower = {
        "generator": np.full(n, net.gen_min),
        "pv_load": np.zeros(n),
        "charge": np.zeros(n),
        "discharge": np.zeros(n),
        "slacks": np.zeros(2 * n),
    }
    upper = {
        "generator": np.full(n, net.gen_max),
        "pv_load": problem.pv.copy(),
        "charge": microgrid_model.max_charge(problem),
        "discharge": microgrid_model.max_discharge(problem),
        "slacks": np.full(2 * n, np.inf),
    }
    n1, n2 = microgrid_model.regime_coefficients(np.zeros(n), np.zeros(n))
    sp = StandardProblem(problem=problem, A=A, B=B, C=None, D=None, E=E, c=rhs,
                         f=_objetivos_bloque(problem), lower=lower, upper=upper, n1=n1, n2=n2)
    sp.set_regime(n1, n2)
    return sp


def initial_state(sp: StandardProblem, opts: SolverOptions) -> AdmmState:
    """Arranque en frío: flujos nulos, holguras que satisfacen las filas FV y de
    régimen, SOC constante en soc_initial y multiplicadores nulos."""
    n = sp.horizon
    net = sp.problem.network
    holguras = np.concatenate((sp.problem.pv, np.full(n, net.h_max)))
    estado = AdmmState(p_gl=np.zeros(n), p_pvl=np.zeros(n), p_pves=np.zeros(n), p_esl=np.zeros(n),
                       slacks=holguras, mu=np.zeros(3 * n), rho=float(opts.rho),
                       soc=np.full(n, float(net.soc_initial)), nu=np.zeros(n))
    estado.residual = equality_residual(sp, estado)
    estado.soc_residual = soc_residual(sp, estado)
    return estado


# ----------------------------
# LAGRANGIANO AUMENTADO
# ----------------------------

def equality_residual(sp: StandardProblem, st: AdmmState) -> np.ndarray:
    return sp.A @ st.p_gl + sp.B @ st.p_pvl + sp.C @ st.p_pves + sp.D @ st.p_esl \
        + sp.E @ st.slacks - sp.c


def soc_residual(sp: StandardProblem, st: AdmmState) -> np.ndarray:
    """Filas de dinámica del SOC: (SOC(t) − SOC(t−1))/dt − e_in(t) + e_out(t), en kW."""
    p = sp.problem
    entra, sale = microgrid_model.storage_energy_terms(st.p_pves, st.p_esl, p.battery, p.static_efficiencies)
    return np.diff(st.soc, prepend=p.network.soc_initial) / p.dt - entra + sale


def objective_value(sp: StandardProblem, st: AdmmState) -> float:
    """Suma de los costos de bloque (el objetivo del despacho)."""
    return float(sum(np.sum(sp.f[b].value(st.block(b))) for b in BLOCK_ORDER[:4]))


def augmented_lagrangian(sp: StandardProblem, st: AdmmState) -> float:
    """f + μᵀr + (ρ/2)·‖r‖² + νᵀq + (ρ/2)·‖q‖² en el iterado actual (q: filas del SOC)."""
    r = equality_residual(sp, st)
    q = soc_residual(sp, st)
    return objective_value(sp, st) + float(st.mu @ r) + 0.5 * st.rho * float(r @ r) \
        + float(st.nu @ q) + 0.5 * st.rho * float(q @ q)


def _coeficientes_escalares(block: str, st: AdmmState, sp: StandardProblem):
    """Término lineal y curvatura de los subproblemas escalares del bloque.

    Para la columna m del bloque: L(x) = f(x) + lin·x + ½·curv·x² + cte, con
    lin = mᵀ(μ + ρ·K) y curv = ρ·‖m‖², donde K es el residuo sin el bloque.
    """
    M = sp.matrix(block)
    x = st.block(block)
    K = equality_residual(sp, st) - M @ x
    lin = M.T @ (st.mu + st.rho * K)
    curv = st.rho * np.asarray(M.multiply(M).sum(axis=0)).ravel()
    return lin, curv


def block_update_quadratic(block: str, st: AdmmState, sp: StandardProblem) -> np.ndarray:
    """Minimizador exacto, en forma cerrada, de un bloque cuadrático, recortado a su caja.

    Args:
        block (str): "generator", "pv_load" o "slacks".

    Returns:
        np.ndarray: Nuevo iterado del bloque.
    """
    q2, q1 = sp.f[block].quadratic
    lin, curv = _coeficientes_escalares(block, st, sp)
    lo, hi = sp.block_bounds(block)
    return np.clip(-(q1 + lin) / (2.0 * q2 + curv), lo, hi)


def newton_raphson_scalar(f_prime, f_second, guess, tol, max_iters, bounds=None) -> NewtonResult:
    """Newton-Raphson sobre f' = 0, elemento a elemento.

    Acepta un escalar o un arreglo de puntos iniciales independientes. Con
    `bounds` = (lo, hi) cada iterado se recorta a la caja.

    Returns:
        NewtonResult: raíz, bandera de convergencia (|f'(x)| <= tol) e
        iteraciones usadas. Una curvatura |f''| < 1e-12 detiene el elemento
        sin convergencia.
    """
    x = np.array(guess, dtype=float)
    escalar = x.ndim == 0
    x = np.atleast_1d(x)
    activo = np.ones(x.shape, dtype=bool)
    convergido = np.zeros(x.shape, dtype=bool)

    iteraciones = 0
    for iteraciones in range(max_iters + 1):
        fp = np.atleast_1d(np.asarray(f_prime(x), dtype=float))
        convergido |= activo & (np.abs(fp) <= tol)
        activo &= ~convergido
        if not activo.any() or iteraciones == max_iters:
            break
        fpp = np.atleast_1d(np.asarray(f_second(x), dtype=float))
        activo &= ~(np.abs(fpp) < CURVATURE_FLOOR)
        if not activo.any():
            break
        paso = np.where(activo, fp / np.where(activo, fpp, 1.0), 0.0)
        x = x - paso
        if bounds is not None:
            x = np.clip(x, bounds[0], bounds[1])

    if escalar:
        return NewtonResult(float(x[0]), bool(convergido[0]), iteraciones)
    return NewtonResult(x, convergido, iteraciones)


def block_update_storage(block: str, st: AdmmState, sp: StandardProblem, opts: SolverOptions) -> np.ndarray:
    """Minimiza el Lagrangiano en el bloque de carga o de descarga.

    Además de las filas lineales, el flujo entra en la fila de dinámica del SOC
    de su paso con energía e(p) y signo σ (−1 carga, +1 descarga). Con K el
    resto de esa fila y w el peso del costo, f(p) = w·e(p), el subproblema
    escalar es

        L(p) = (w + σ·ν)·e(p) + (ρ/2)·(K + σ·e(p))² + lin·p + ½·curv·p²

    Con eficiencias estáticas es cuadrático y se resuelve en forma cerrada.
    Si no, cada paso resuelve dL/dp = 0 por Newton-Raphson desde el iterado
    previo y recorta a su caja. Si Newton no converge, o converge a un punto de
    curvatura negativa, se recurre a una búsqueda acotada (golden/Brent) y se
    conserva el mejor entre ese resultado, el iterado previo y los extremos.
    """
    en = _energia(block, sp.problem)
    sigma = SOC_SIGN[block]
    rho = st.rho
    lin, curv = _coeficientes_escalares(block, st, sp)
    lo, hi = sp.block_bounds(block)
    K = soc_residual(sp, st) - sigma * en.value(st.block(block))

    if en.slope is not None:
        eta = en.slope
        q1 = (en.weight + sigma * st.nu) * eta + rho * sigma * eta * K + lin
        return np.clip(-q1 / (rho * eta * eta + curv), lo, hi)

    previo = np.clip(st.block(block), lo, hi)

    def precio(x, idx):
        return en.weight + sigma * (st.nu[idx] + rho * (K[idx] + sigma * en.value(x)))

    def F(x, idx=slice(None)):
        e = en.value(x)
        return (en.weight + sigma * st.nu[idx]) * e + 0.5 * rho * (K[idx] + sigma * e) ** 2 \
            + lin[idx] * x + 0.5 * curv[idx] * x * x

    def dF(x, idx=slice(None)):
        return precio(x, idx) * en.grad(x) + lin[idx] + curv[idx] * x

    def d2F(x, idx=slice(None)):
        g = en.grad(x)
        return precio(x, idx) * en.hess(x) + rho * g * g + curv[idx]

    nuevo = previo.copy()
    en_lo = dF(lo) >= 0
    en_hi = ~en_lo & (dF(hi) <= 0)
    nuevo[en_lo] = lo[en_lo]
    nuevo[en_hi] = hi[en_hi]

    idx = np.flatnonzero(~(en_lo | en_hi))
    if idx.size == 0:
        return nuevo

    res = newton_raphson_scalar(lambda x: dF(x, idx), lambda x: d2F(x, idx), previo[idx],
                                opts.newton_tol, opts.newton_max_iters, bounds=(lo[idx], hi[idx]))
    raiz = np.asarray(res.root)
    ok = np.asarray(res.converged) & (np.asarray(d2F(raiz, idx)) > 0)
    nuevo[idx[ok]] = raiz[ok]

    for j in idx[~ok]:
        st.newton_fallbacks += 1
        escalar = lambda x, j=j: float(F(np.asarray(x), j))
        busqueda = minimize_scalar(escalar, bounds=(lo[j], hi[j]), method="bounded",
                                   options={"xatol": 1e-12})
        candidatos = [float(busqueda.x), float(previo[j]), float(lo[j]), float(hi[j])]
        nuevo[j] = min(candidatos, key=escalar)
    if (~ok).any():
        log.debug("Bloque %s: %d subproblemas resueltos por búsqueda acotada", block, int((~ok).sum()))
    return nuevo


def block_update_soc(st: AdmmState, sp: StandardProblem) -> np.ndarray:
    """Proyecta la cadena de SOC sobre [soc_min, soc_max] minimizando νᵀq + (ρ/2)·‖q‖².

    Equivale a min Σ (SOC(t) − SOC(t−1) − w_t)² con w = dt·(e_in − e_out − ν/ρ).
    Sin cotas activas la solución es la suma acumulada de w. Si no, se usa un
    método primal-dual de conjuntos activos sobre el sistema tridiagonal DᵀD,
    que arranca de las cotas activas del iterado previo y termina en a lo sumo
    N + 1 rondas.

    Returns:
        np.ndarray: SOC al final de cada paso.
    """
    p = sp.problem
    net = p.network
    n = sp.horizon
    entra, sale = microgrid_model.storage_energy_terms(st.p_pves, st.p_esl, p.battery, p.static_efficiencies)
    w = p.dt * (entra - sale - st.nu / st.rho)
    libre = net.soc_initial + np.cumsum(w)
    if libre.min() >= net.soc_min and libre.max() <= net.soc_max:
        return libre

    b = w.copy()
    b[0] += net.soc_initial
    Dm = (sparse.identity(n, format="csr") - sparse.eye(n, k=-1, format="csr")).tocsr()
    H = (Dm.T @ Dm).tocsr()
    g = Dm.T @ b

    sup = st.soc >= net.soc_max
    inf = st.soc <= net.soc_min
    s = libre
    for _ in range(n + 1):
        s = np.where(sup, net.soc_max, np.where(inf, net.soc_min, 0.0))
        suelto = ~(sup | inf)
        if suelto.any():
            rhs = g[suelto] - H[suelto][:, ~suelto] @ s[~suelto]
            s[suelto] = spsolve(H[suelto][:, suelto].tocsc(), rhs)
        lam = np.where(suelto, 0.0, g - H @ s)
        nuevo_sup = lam + (s - net.soc_max) > 0
        nuevo_inf = lam + (s - net.soc_min) < 0
        if np.array_equal(nuevo_sup, sup) and np.array_equal(nuevo_inf, inf):
            return s
        sup, inf = nuevo_sup, nuevo_inf
    log.debug("Conjuntos activos del SOC sin estabilizar; se recorta a la caja")
    return np.clip(s, net.soc_min, net.soc_max)


def dual_update(st: AdmmState, sp: StandardProblem) -> np.ndarray:
    """μ ← μ + ρ·r (ascenso dual escalado)."""
    return st.mu + st.rho * equality_residual(sp, st)


def soc_dual_update(st: AdmmState, sp: StandardProblem) -> np.ndarray:
    """ν ← ν + ρ·q sobre las filas de dinámica del SOC."""
    return st.nu + st.rho * soc_residual(sp, st)


def convergence_check(st: AdmmState, opts: SolverOptions) -> ConvergenceCheck:
    """Residuo primal ‖(r, q)‖∞ y cambio entre iterados sucesivos frente a las tolerancias."""
    r = st.residual if st.residual is not None else np.array([np.inf])
    if st.soc_residual is not None:
        r = np.concatenate((r, st.soc_residual))
    primal = float(np.max(np.abs(r))) if r.size else 0.0
    dual = float(st.change)
    convergido = st.iteration >= 1 and primal <= opts.tol_primal and dual <= opts.tol_dual
    return ConvergenceCheck(convergido, primal, dual)


# ----------------------------
# BUCLE PRINCIPAL
# ----------------------------

def _refrescar_regimen(sp: StandardProblem, st: AdmmState) -> None:
    n1, n2 = microgrid_model.regime_coefficients(st.p_pves, st.p_esl)
    cambio = n1 != sp.n1
    if cambio.any():
        st.mu[2 * sp.horizon + np.flatnonzero(cambio)] = 0.0
    sp.set_regime(n1, n2)
    # El flujo suprimido entra a su nueva caja antes de actualizar bloques
    st.p_pves = np.clip(st.p_pves, *sp.block_bounds("charge"))
    st.p_esl = np.clip(st.p_esl, *sp.block_bounds("discharge"))


def _pulir(sp: StandardProblem, st: AdmmState) -> None:
    """Ajusta el iterado final al margen de SOC que dejan sus propios flujos.

    Las filas del SOC se cumplen solo hasta la tolerancia, así que la
    trayectoria de los flujos puede pasarse de la caja por O(dt·N·tol). La
    descarga que se recorta la cubre el generador y, si no alcanza, la FV libre.
    """
    p = sp.problem
    net = p.network
    c, d = microgrid_model.cap_to_soc_headroom(st.p_pves, st.p_esl, p.dt, p.battery, net,
                                               p.static_efficiencies)
    faltante = st.p_esl - d
    p_gl = np.minimum(st.p_gl + faltante, net.gen_max)
    faltante -= p_gl - st.p_gl
    p_pvl = st.p_pvl + np.clip(faltante, 0.0, np.maximum(p.pv - c - st.p_pvl, 0.0))
    st.p_gl, st.p_pvl, st.p_pves, st.p_esl = p_gl, p_pvl, c, d


def _proyectar(sp: StandardProblem, st: AdmmState) -> np.ndarray:
    p = sp.problem
    c, d, soc = microgrid_model.project_soc(st.p_pves, st.p_esl, p.dt, p.battery, p.network,
                                            p.static_efficiencies)
    st.p_pves, st.p_esl = c, d
    return soc


def _medir(st: AdmmState, sp: StandardProblem, k: int, bloque: str, actualizar: Callable[[], None]) -> None:
    antes = augmented_lagrangian(sp, st) if st.lagrangian_max_increase is not None else None
    actualizar()
    if antes is not None:
        aumento = augmented_lagrangian(sp, st) - antes
        st.lagrangian_max_increase = max(st.lagrangian_max_increase, aumento)
        if aumento > 1e-9:
            log.debug("Iter %d, bloque %s: L aumentó %.3e", k, bloque, aumento)


def solve(problem: DispatchProblem, opts: Optional[SolverOptions] = None) -> DispatchReport:
    """Resuelve el despacho por ADMM secuencial con proyección de SOC.

    Cada iteración: refresca el régimen, actualiza los bloques en
    `BLOCK_ORDER`, proyecta la cadena de SOC sobre su caja (cada
    `projection_interval` iteraciones, junto con sus multiplicadores), actualiza
    μ y revisa convergencia. Al terminar, el iterado se ajusta al margen de SOC
    de sus flujos y pasa por `project_soc`. Si se agotan las iteraciones se
    devuelve el iterado con menor residuo primal y `converged=False`.

    Args:
        problem (DispatchProblem): Instancia a resolver.
        opts (SolverOptions, optional): Parámetros del solucionador.

    Returns:
        DispatchReport: Despacho, desglose de costos y diagnósticos.

    Raises:
        InfeasibleProblemError: Si la instancia es infactible (antes de iterar).
    """
    opts = opts or SolverOptions()
    microgrid_model.check_feasibility(problem)
    sp = assemble_problem(problem)
    st = initial_state(sp, opts)
    st.lagrangian_max_increase = 0.0 if opts.track_lagrangian else None
    estrategia = "no-degradation" if problem.static_efficiencies is not None else "proposed"
    diag = AdmmDiagnostics()

    if problem.static_efficiencies is None:
        ragone = battery_model.ragone_parameter(problem.battery.p_max, problem.battery)
        if not ragone.valid:
            diag.warnings.append(CONVEXITY_WARNING)
            log.warning("%s (alpha·p_max = %.3e)", CONVEXITY_WARNING, ragone.value)

    log.info("ADMM %s: N=%d, rho=%g, max_iters=%d", estrategia, sp.horizon, opts.rho, opts.max_iters)
    mejor = None
    revision = None
    for k in tqdm(range(1, opts.max_iters + 1), disable=not opts.progress, desc=estrategia, leave=False):
        anterior = st.vector()
        _refrescar_regimen(sp, st)

        for bloque in BLOCK_ORDER:
            if bloque in ("charge", "discharge"):
                _medir(st, sp, k, bloque,
                       lambda b=bloque: st.set_block(b, block_update_storage(b, st, sp, opts)))
            else:
                _medir(st, sp, k, bloque,
                       lambda b=bloque: st.set_block(b, block_update_quadratic(b, st, sp)))

        if k % opts.projection_interval == 0:
            _medir(st, sp, k, "soc", lambda: setattr(st, "soc", block_update_soc(st, sp)))
            st.nu = soc_dual_update(st, sp)

        st.mu = dual_update(st, sp)
        st.iteration = k
        st.residual = equality_residual(sp, st)
        st.soc_residual = soc_residual(sp, st)
        st.change = float(np.max(np.abs(st.vector() - anterior)))
        revision = convergence_check(st, opts)
        objetivo = objective_value(sp, st)
        st.primal_history.append(revision.primal_residual)
        st.dual_history.append(revision.dual_residual)
        st.objective_history.append(objetivo)
        diag.history.append((k, revision.primal_residual, objetivo))

        if mejor is None or revision.primal_residual < mejor[0]:
            mejor = (revision.primal_residual, revision.dual_residual,
                     st.p_gl.copy(), st.p_pvl.copy(), st.p_pves.copy(), st.p_esl.copy(), st.slacks.copy())
        if k % opts.log_every == 0:
            log.debug("Iter %5d  primal %.3e  dual %.3e  objetivo %.6g",
                      k, revision.primal_residual, revision.dual_residual, objetivo)
        if revision.converged:
            break

    convergido = bool(revision is not None and revision.converged)
    if not convergido and mejor is not None:
        st.p_gl, st.p_pvl, st.p_pves, st.p_esl, st.slacks = mejor[2:]
    _pulir(sp, st)
    soc = _proyectar(sp, st)
    st.residual = equality_residual(sp, st)

    diag.converged = convergido
    diag.iterations = st.iteration
    diag.primal_residual = float(np.max(np.abs(st.residual)))
    diag.dual_residual = float(st.change if convergido or mejor is None else mejor[1])
    diag.newton_fallbacks = st.newton_fallbacks
    diag.lagrangian_max_increase = st.lagrangian_max_increase

    schedule = Schedule(p_gl=st.p_gl, p_pvl=st.p_pvl, p_pves=st.p_pves, p_esl=st.p_esl,
                        soc=soc, dt=problem.dt)
    costos = total_objective(schedule, problem.load, problem.battery, problem.cost,
                             problem.static_efficiencies)
    if convergido:
        log.info("ADMM %s convergió en %d iteraciones (objetivo %.6g)", estrategia, st.iteration, costos.objective)
    else:
        log.warning("ADMM %s no convergió en %d iteraciones (residuo primal %.3e)",
                    estrategia, st.iteration, diag.primal_residual)
    return DispatchReport(strategy=estrategia, schedule=schedule, costs=costos, diagnostics=diag)
