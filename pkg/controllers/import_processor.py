import os

import numpy as np
import pandas as pd
from typing import List

from config.mappings import COLUMNAS_CARGA, COLUMNAS_IRRADIANCIA
from models.schemas import TimeSeries
from utilities.exceptions import (ColumnError, EmptySeriesError, NegativeValueError, OrderingError,
                                  SpacingError, TimeSeriesError)
from utilities.sanitizer import Sanitizer
from utilities.logger import obtener_logger

log = obtener_logger("import")

SPACING_RTOL = 1e-6
HORAS_POR_DIA = 24.0


class TimeSeriesEngine:
    """Motor de carga y validación de series temporales en CSV.

    Lee el archivo físico, normaliza los encabezados y verifica que el archivo
    tenga exactamente las columnas esperadas, marcas de tiempo estrictamente
    crecientes con paso uniforme y valores no negativos.
    """

    def __init__(self, filepath: str, columnas: List[str]):
        """Inicializa el motor con la ruta del archivo.

        Args:
            filepath (str): Ruta al archivo .csv.
            columnas (List[str]): Encabezado exacto esperado, marca de tiempo primero.
        """
        self.filepath = filepath
        self.columnas = columnas
        self.df = None

    def cargar(self) -> pd.DataFrame:
        """Carga el CSV y normaliza encabezados.

        Raises:
            FileNotFoundError: Si el archivo no existe.
            EmptySeriesError: Si el archivo no tiene filas de datos.
            ColumnError: Si faltan o sobran columnas.
        """
        if not os.path.exists(self.filepath):
            raise FileNotFoundError(f"No se encontró el archivo en: {self.filepath}")
        try:
            self.df = pd.read_csv(self.filepath, dtype=str, skipinitialspace=True)
        except pd.errors.EmptyDataError:
            raise EmptySeriesError(f"{self.filepath}: archivo vacío")
        self.df.columns = [Sanitizer.limpiar_encabezado(col) for col in self.df.columns]

        faltan = [c for c in self.columnas if c not in self.df.columns]
        sobran = [c for c in self.df.columns if c not in self.columnas]
        if faltan or sobran:
            raise ColumnError(
                f"{self.filepath}: se esperaba {','.join(self.columnas)} "
                f"(faltan: {faltan or '-'}, sobran: {sobran or '-'})")
        if self.df.empty:
            raise EmptySeriesError(f"{self.filepath}: sin filas de datos")
        return self.df

    def validar(self) -> TimeSeries:
        """Convierte el DataFrame cargado en una `TimeSeries` validada.

        Una serie de una sola fila se toma con paso de 1 h.

        Raises:
            TimeSeriesError: Si una marca de tiempo o un valor no se puede interpretar.
            OrderingError: Si las marcas no son estrictamente crecientes.
            NegativeValueError: Si hay valores negativos.
            SpacingError: Si el paso no es uniforme.
        """
        col_tiempo, col_valor = self.columnas
        try:
            marcas = pd.DatetimeIndex(pd.to_datetime(self.df[col_tiempo].str.strip(), format="ISO8601"))
        except (ValueError, TypeError) as e:
            raise TimeSeriesError(f"{self.filepath}: marca de tiempo inválida ({e})")

        valores = pd.to_numeric(self.df[col_valor].str.strip(), errors="coerce").to_numpy(dtype=float)
        if np.isnan(valores).any():
            fila = int(np.argmax(np.isnan(valores))) + 2
            raise TimeSeriesError(f"{self.filepath}: valor no numérico en la fila {fila}")
        if (valores < 0).any():
            fila = int(np.argmax(valores < 0)) + 2
            raise NegativeValueError(f"{self.filepath}: valor negativo en la fila {fila}")

        if len(marcas) == 1:
            return TimeSeries(timestamps=marcas, values=valores, dt=1.0, name=col_valor)

        pasos = np.diff(marcas.asi8) / 3.6e12   # ns → h
        if (pasos <= 0).any():
            fila = int(np.argmax(pasos <= 0)) + 3
            raise OrderingError(f"{self.filepath}: marcas de tiempo no crecientes en la fila {fila}")
        if not np.allclose(pasos, pasos[0], rtol=SPACING_RTOL, atol=0.0):
            raise SpacingError(f"{self.filepath}: el paso temporal no es uniforme")
        return TimeSeries(timestamps=marcas, values=valores, dt=float(pasos[0]), name=col_valor)


def aggregate_daily_mean(series: TimeSeries) -> TimeSeries:
    """Promedia todas las observaciones de cada día calendario (dt pasa a 24 h).

    La marca de cada día es su medianoche.
    """
    datos = pd.Series(series.values, index=series.timestamps)
    diario = datos.groupby(datos.index.normalize()).mean()
    return TimeSeries(timestamps=pd.DatetimeIndex(diario.index), values=diario.to_numpy(dtype=float),
                      dt=HORAS_POR_DIA, name=series.name)


def _parse(path: str, columnas: List[str], daily_mean: bool) -> TimeSeries:
    engine = TimeSeriesEngine(path, columnas)
    engine.cargar()
    serie = engine.validar()
    log.debug("Leída %s: %d filas, dt=%g h", path, len(serie), serie.dt)
    return aggregate_daily_mean(serie) if daily_mean else serie


def parse_load_csv(path: str, daily_mean: bool = False) -> TimeSeries:
    """Lee un CSV `timestamp,load_kw` (kW).

    Args:
        path (str): Ruta al archivo.
        daily_mean (bool): Agrega a medias diarias.

    Returns:
        TimeSeries: Serie validada.
    """
    return _parse(path, COLUMNAS_CARGA, daily_mean)


def parse_irradiance_csv(path: str, daily_mean: bool = False) -> TimeSeries:
    """Lee un CSV `timestamp,irradiance_kwh_m2` (kWh/m² por hora)."""
    return _parse(path, COLUMNAS_IRRADIANCIA, daily_mean)


def write_series_csv(series: TimeSeries, path: str, column: str) -> str:
    """Escribe una serie con encabezado `timestamp,<column>` e ISO-8601.

    Los valores se escriben con `repr` de float para que la relectura sea exacta.

    Returns:
        str: Ruta escrita.
    """
    df = pd.DataFrame({
        'timestamp': series.timestamps.strftime("%Y-%m-%dT%H:%M:%S"),
        column: [repr(float(v)) for v in series.values],
    })
    df.to_csv(path, index=False, lineterminator="\n")
    return path
