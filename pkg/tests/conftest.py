"""Fixtures compartidas por las pruebas."""
import numpy as np
import pandas as pd
import pytest

from models.microgrid_model import network_params
from models.schemas import BatteryParams, CostParams, DispatchProblem, SolverOptions


@pytest.fixture
def battery():
    """Banco con las constantes por defecto (α·P_max dentro del régimen válido)."""
    return BatteryParams()


@pytest.fixture
def battery_alpha():
    """Banco con α = 0.01, el de los ejemplos numéricos de eficiencia."""
    return BatteryParams(alpha=0.01)


@pytest.fixture
def cell():
    """Celda de 3.2 V, 0.1 Ω y 0.9 Ah para las operaciones de circuito."""
    return BatteryParams(v0=3.2, r_internal=0.1, q0=0.9)


@pytest.fixture
def cost():
    return CostParams()


@pytest.fixture
def opts():
    return SolverOptions()


@pytest.fixture
def make_problem(battery, cost):
    """Fábrica de instancias: `make_problem(load, pv, soc_initial=None, battery=None, **red)`."""
    def _fabrica(load, pv, soc_initial=None, battery_params=None, dt=1.0, static=None, **red):
        bat = battery_params or battery
        net = network_params(bat, soc_initial=soc_initial, **red)
        return DispatchProblem(load=np.asarray(load, dtype=float), pv=np.asarray(pv, dtype=float),
                               battery=bat, network=net, cost=cost, dt=dt, static_efficiencies=static)
    return _fabrica


@pytest.fixture
def write_csv(tmp_path):
    """Escribe un CSV de serie con el encabezado dado y devuelve su ruta."""
    def _escribir(nombre, encabezado, filas):
        ruta = tmp_path / nombre
        lineas = [",".join(encabezado)] + [f"{t},{v}" for t, v in filas]
        ruta.write_text("\n".join(lineas) + "\n", encoding="utf-8")
        return str(ruta)
    return _escribir


@pytest.fixture
def hourly_stamps():
    def _marcas(n, inicio="2023-07-15T00:30:00"):
        return [t.strftime("%Y-%m-%dT%H:%M:%S") for t in pd.date_range(inicio, periods=n, freq="h")]
    return _marcas
