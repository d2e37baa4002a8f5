#  Copyright (c) 2026 Fleer
import os
import sys
from dotenv import load_dotenv

# 1. DETERMINAR RUTAS BASE
if getattr(sys, 'frozen', False):
    # Si es un ejecutable congelado, BASE_DIR será la carpeta del ejecutable
    BASE_DIR = os.path.dirname(sys.executable)
else:
    # Raíz del proyecto (config/ está un nivel por debajo)
    BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

ENV_PATH = os.path.join(BASE_DIR, '.env')
if os.path.exists(ENV_PATH):
    load_dotenv(ENV_PATH)


def _f(clave, defecto):
    return float(os.getenv(clave, defecto))


def _i(clave, defecto):
    return int(os.getenv(clave, defecto))


# 2. COSTOS DEL GENERADOR Y PESOS DEL OBJETIVO
FUEL_A = _f("FUEL_A", 0.25)   # $/h por kW²
FUEL_B = _f("FUEL_B", 0.1)    # $/kWh
G1 = _f("G1", 1.0)
G2 = _f("G2", 1.0)
G3 = _f("G3", 1.0)
G4 = _f("G4", 1.0)
W1 = _f("W1", 1.0)
W2 = _f("W2", 10.0)
W3 = _f("W3", 0.1)

# 3. BANCO DE BATERÍAS
FADE_U = _f("FADE_U", 0.035)      # por kW
FADE_V = _f("FADE_V", 0.0052)     # por kW²
P_MAX = _f("P_MAX", 12.0)         # kW
ALPHA = _f("ALPHA", 5e-8)         # α·P_MAX = 6e-7, dentro del régimen cóncavo
Q0 = _f("Q0", 55.0)               # kWh
DOD = _f("DOD", 0.5)
SOC_MAX = _f("SOC_MAX", 55.0)     # kWh
CELL_V0 = _f("CELL_V0", 3.2)      # V, solo operaciones de celda
CELL_R = _f("CELL_R", 0.1)        # Ω, solo operaciones de celda
STATIC_ETA_C = _f("STATIC_ETA_C", 1.0)
STATIC_ETA_D = _f("STATIC_ETA_D", 1.0)

# 4. GENERACIÓN FOTOVOLTAICA Y RED
PV_AREA = _f("PV_AREA", 30.0)             # m²
PV_EFFICIENCY = _f("PV_EFFICIENCY", 0.15)
PV_CAPACITY = _f("PV_CAPACITY", 4.5)      # kW
GEN_MIN = _f("GEN_MIN", 0.0)
GEN_MAX = _f("GEN_MAX", 5.0)              # unidad de 5 kVA
LOSS_FACTOR = _f("LOSS_FACTOR", 1.05)     # pérdidas de línea del 5 %
H_MAX = _f("H_MAX", 1e-6)

# 5. PARÁMETROS DEL SOLUCIONADOR ADMM
RHO = _f("RHO", 1.0)
TOL_PRIMAL = _f("TOL_PRIMAL", 1e-4)
TOL_DUAL = _f("TOL_DUAL", 1e-4)
MAX_ITERS = _i("MAX_ITERS", 5000)
NEWTON_TOL = _f("NEWTON_TOL", 1e-10)
NEWTON_MAX_ITERS = _i("NEWTON_MAX_ITERS", 50)
PROJECTION_INTERVAL = _i("PROJECTION_INTERVAL", 1)

# 6. AUDITORÍA DE CONVEXIDAD
AUDIT_GRID_POINTS = _i("AUDIT_GRID_POINTS", 1000)
AUDIT_MARGIN = _f("AUDIT_MARGIN", 0.95)
AUDIT_TOLERANCE = _f("AUDIT_TOLERANCE", 1e-6)
RAGONE_THRESHOLD = _f("RAGONE_THRESHOLD", 1e-6)

# 7. SALIDAS Y REGISTRO
OUTPUT_DIR = os.getenv("OUTPUT_DIR", os.path.join(BASE_DIR, 'resultados'))
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
DEFAULT_MODE = os.getenv("MODE", "proposed")
