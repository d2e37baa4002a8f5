"""Registros de datos compartidos por los modelos, el solucionador y la CLI."""
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Dict

import numpy as np
import pandas as pd

from config import settings
from utilities.exceptions import DomainError, ProblemShapeError
from utilities.sanitizer import Sanitizer


# ===== PARÁMETROS FÍSICOS =====

@dataclass(frozen=True)
class BatteryParams:
    """
    Constantes electroquímicas y de desvanecimiento de capacidad del banco.

    `alpha` es la constante de Ragone a escala de banco (por kW) y es el único
    parámetro eléctrico de las eficiencias. `v0`, `r_internal` y `q0` en Ah solo
    se usan en las operaciones a nivel de celda.
    """
    u: float = settings.FADE_U                  # por kW
    v: float = settings.FADE_V                  # por kW²
    p_max: float = settings.P_MAX               # kW
    alpha: float = settings.ALPHA               # por kW
    v0: float = settings.CELL_V0                # V
    r_internal: float = settings.CELL_R         # Ω
    q0: float = settings.Q0                     # kWh (banco) o Ah (celda)
    dod: float = settings.DOD
    soc_max: float = settings.SOC_MAX           # kWh
    eta_c_static: float = settings.STATIC_ETA_C
    eta_d_static: float = settings.STATIC_ETA_D

    def __post_init__(self):
        Sanitizer.no_negativo(self.u, "u")
        Sanitizer.no_negativo(self.v, "v")
        Sanitizer.positivo(self.p_max, "p_max")
        Sanitizer.no_negativo(self.alpha, "alpha")
        Sanitizer.positivo(self.q0, "q0")
        Sanitizer.fraccion(self.dod, "dod")
        Sanitizer.positivo(self.soc_max, "soc_max")
        for nombre in ("eta_c_static", "eta_d_static"):
            valor = getattr(self, nombre)
            if not 0.0 < valor <= 1.0:
                raise DomainError(f"{nombre} debe estar en (0, 1] (recibido {valor})")


@dataclass(frozen=True)
class CellState:
    """Estado de una celda a potencia constante."""
    current: float              # A
    capacity_available: float   # mismas unidades que q0
    lifetime: float             # h


@dataclass(frozen=True)
class PvParams:
    area: float = settings.PV_AREA                  # m²
    efficiency: float = settings.PV_EFFICIENCY
    capacity_cap: float = settings.PV_CAPACITY      # kW

    def __post_init__(self):
        Sanitizer.positivo(self.area, "area")
        if not 0.0 < self.efficiency <= 1.0:
            raise DomainError(f"efficiency debe estar en (0, 1] (recibido {self.efficiency})")
        Sanitizer.positivo(self.capacity_cap, "capacity_cap")


@dataclass(frozen=True)
class NetworkParams:
    """
    Parámetros de la barra única: pérdidas, generador, régimen y límites de SOC.

    Se construye normalmente con `microgrid_model.network_params`, que deriva
    `soc_min` de la profundidad de descarga. Si se indica `dod`, se exige
    soc_min = (1 − dod)·soc_max; sin él los límites se aceptan tal cual.
    """
    soc_min: float
    soc_max: float
    soc_initial: float
    loss_factor: float = settings.LOSS_FACTOR
    gen_min: float = settings.GEN_MIN
    gen_max: float = settings.GEN_MAX
    h_max: float = settings.H_MAX
    dod: Optional[float] = None

    def __post_init__(self):
        Sanitizer.positivo(self.loss_factor, "loss_factor")
        Sanitizer.no_negativo(self.gen_min, "gen_min")
        if self.gen_min > self.gen_max:
            raise DomainError(f"gen_min ({self.gen_min}) supera gen_max ({self.gen_max})")
        if not 0.0 < self.h_max < self.gen_max:
            raise DomainError(f"h_max debe estar en (0, gen_max) (recibido {self.h_max})")
        Sanitizer.no_negativo(self.soc_min, "soc_min")
        if self.soc_min > self.soc_max:
            raise DomainError("soc_min supera soc_max")
        if self.dod is not None:
            Sanitizer.fraccion(self.dod, "dod")
            esperado = (1.0 - self.dod) * self.soc_max
            if not np.isclose(self.soc_min, esperado, rtol=1e-9, atol=1e-9):
                raise DomainError(
                    f"soc_min ({self.soc_min}) no corresponde a (1 − dod)·soc_max = {esperado:.6g}")
        if not self.soc_min <= self.soc_initial <= self.soc_max:
            raise DomainError(
                f"soc_initial ({self.soc_initial}) fuera de [{self.soc_min}, {self.soc_max}]")


@dataclass(frozen=True)
class CostParams:
    a: float = settings.FUEL_A   # $/h por kW²
    b: float = settings.FUEL_B   # $/kWh
    g1: float = settings.G1
    g2: float = settings.G2
    g3: float = settings.G3
    g4: float = settings.G4
    w1: float = settings.W1
    w2: float = settings.W2
    w3: float = settings.W3

    def __post_init__(self):
        for nombre in ("a", "b", "g1", "g2", "g3", "g4", "w1", "w2", "w3"):
            Sanitizer.no_negativo(getattr(self, nombre), nombre)


@dataclass(frozen=True)
class CostBreakdown:
    """Totales de J1, J2, J3 y del objetivo ponderado."""
    j1_total: float
    j2_total: float
    j3_total: float
    objective: float

    def as_dict(self) -> Dict[str, float]:
        return {
            'j1_total': float(self.j1_total),
            'j2_total': float(self.j2_total),
            'j3_total': float(self.j3_total),
            'objective': float(self.objective),
        }


# ===== DESPACHO =====

@dataclass(eq=False)
class Schedule:
    """
    Los cuatro flujos de potencia (kW) y la trayectoria de SOC (kWh).

    `soc` tiene longitud N+1; el índice 0 es el estado inicial.
    """
    p_gl: np.ndarray
    p_pvl: np.ndarray
    p_pves: np.ndarray
    p_esl: np.ndarray
    soc: np.ndarray
    dt: float = 1.0

    def __post_init__(self):
        self.p_gl = np.asarray(self.p_gl, dtype=float)
        self.p_pvl = np.asarray(self.p_pvl, dtype=float)
        self.p_pves = np.asarray(self.p_pves, dtype=float)
        self.p_esl = np.asarray(self.p_esl, dtype=float)
        self.soc = np.asarray(self.soc, dtype=float)
        n = self.p_gl.shape[0]
        for nombre in ("p_pvl", "p_pves", "p_esl"):
            if getattr(self, nombre).shape != (n,):
                raise ProblemShapeError(f"{nombre} no tiene longitud {n}")
        if self.soc.shape != (n + 1,):
            raise ProblemShapeError(f"soc debe tener longitud {n + 1}")
        for nombre in ("p_gl", "p_pvl", "p_pves", "p_esl"):
            if (getattr(self, nombre) < 0).any():
                raise DomainError(f"{nombre} tiene flujos negativos")

    @property
    def horizon(self) -> int:
        return int(self.p_gl.shape[0])

    def flows(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return self.p_gl, self.p_pvl, self.p_pves, self.p_esl


@dataclass(eq=False)
class DispatchProblem:
    """
    Instancia completa de despacho económico.

    Args:
        load (np.ndarray): Demanda por paso, kW.
        pv (np.ndarray): Potencia FV disponible por paso, kW.
        dt (float): Horas por paso.
        static_efficiencies (tuple, optional): (eta_c0, eta_d0). Si se indica,
            el objetivo y la dinámica de SOC usan eficiencias constantes.
    """
    load: np.ndarray
    pv: np.ndarray
    battery: BatteryParams
    network: NetworkParams
    cost: CostParams
    dt: float = 1.0
    timestamps: Optional[pd.DatetimeIndex] = None
    static_efficiencies: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        self.load = Sanitizer.serie_no_negativa(self.load, "load")
        self.pv = Sanitizer.serie_no_negativa(self.pv, "pv")
        if self.load.shape != self.pv.shape:
            raise ProblemShapeError(
                f"load ({self.load.shape[0]}) y pv ({self.pv.shape[0]}) difieren en longitud")
        if self.load.shape[0] == 0:
            raise ProblemShapeError("el horizonte está vacío")
        Sanitizer.positivo(self.dt, "dt")
        if self.timestamps is not None and len(self.timestamps) != self.load.shape[0]:
            raise ProblemShapeError("timestamps no coincide con el horizonte")
        if self.static_efficiencies is not None:
            eta_c0, eta_d0 = self.static_efficiencies
            if not (0.0 < eta_c0 <= 1.0 and 0.0 < eta_d0 <= 1.0):
                raise DomainError("las eficiencias estáticas deben estar en (0, 1]")

    @property
    def horizon(self) -> int:
        return int(self.load.shape[0])

    @property
    def served_load(self) -> np.ndarray:
        """Demanda incluyendo pérdidas de línea."""
        return self.network.loss_factor * self.load


@dataclass(frozen=True)
class SolverOptions:
    rho: float = settings.RHO
    tol_primal: float = settings.TOL_PRIMAL
    tol_dual: float = settings.TOL_DUAL
    max_iters: int = settings.MAX_ITERS
    newton_tol: float = settings.NEWTON_TOL
    newton_max_iters: int = settings.NEWTON_MAX_ITERS
    projection_interval: int = settings.PROJECTION_INTERVAL   # iteraciones entre bloques de SOC
    track_lagrangian: bool = False   # registra L antes y después de cada bloque
    progress: bool = False           # barra tqdm
    log_every: int = 100

    def __post_init__(self):
        for nombre in ("rho", "tol_primal", "tol_dual", "max_iters", "newton_tol",
                       "newton_max_iters", "projection_interval", "log_every"):
            Sanitizer.positivo(getattr(self, nombre), nombre)


# ===== REPORTES =====

@dataclass
class AdmmDiagnostics:
    converged: bool = False
    iterations: int = 0
    primal_residual: float = float("inf")
    dual_residual: float = float("inf")
    history: List[Tuple[int, float, float]] = field(default_factory=list)  # (iter, primal, objetivo)
    newton_fallbacks: int = 0
    lagrangian_max_increase: Optional[float] = None
    warnings: List[str] = field(default_factory=list)


@dataclass
class AuditReport:
    """Resultado de la auditoría numérica de convexidad/concavidad."""
    min_discharge_second_diff: float
    max_charge_second_diff: float
    discharge_convex: bool
    charge_concave: bool
    ragone_value: float          # alpha·p_max
    ragone_valid: bool
    grid_points: int
    margin: float
    step: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.discharge_convex and self.charge_concave


@dataclass
class SavingsReport:
    cost_diesel_only: Optional[float] = None
    cost_static_hybrid: Optional[float] = None
    cost_proposed: Optional[float] = None
    pct_vs_diesel: Optional[float] = None     # None = indefinido
    pct_vs_static: Optional[float] = None
    # reducción del costo de combustible J1; solo si se pasan esos costos
    fuel_pct_vs_diesel: Optional[float] = None
    fuel_pct_vs_static: Optional[float] = None
    labels: Dict[str, str] = field(default_factory=dict)


@dataclass
class DispatchReport:
    """Resultado de una estrategia: despacho, costos y diagnósticos."""
    strategy: str
    schedule: Schedule
    costs: CostBreakdown
    diagnostics: Optional[AdmmDiagnostics] = None
    violations: List[str] = field(default_factory=list)
    savings: Optional[SavingsReport] = None


# ===== ENTRADAS DE LA CLI =====

@dataclass(eq=False)
class TimeSeries:
    """Serie con paso uniforme; `dt` en horas."""
    timestamps: pd.DatetimeIndex
    values: np.ndarray
    dt: float
    name: str = "value"

    def __len__(self):
        return int(self.values.shape[0])


@dataclass
class ScenarioConfig:
    load_csv: str
    irradiance_csv: str
    pv: PvParams
    network: NetworkParams
    battery: BatteryParams
    cost: CostParams
    solver: SolverOptions
    mode: str = settings.DEFAULT_MODE
    output_dir: str = settings.OUTPUT_DIR
    daily_mean: bool = False
    source: Optional[str] = None   # ruta del archivo de escenario
