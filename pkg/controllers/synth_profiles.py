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

"""Perfiles sintéticos de demanda e irradiancia.

Sustituyen a las series medidas. Las fórmulas están documentadas en
`docs/perfiles_sinteticos.md`; cualquier cambio aquí debe reflejarse allí.
"""
import os
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from dotenv import set_key

from config.mappings import COLUMNAS_CARGA, COLUMNAS_IRRADIANCIA, TIPOS_PERFIL
from controllers.import_processor import write_series_csv
from models.schemas import TimeSeries
from utilities.exceptions import DomainError
from utilities.logger import obtener_logger

log = obtener_logger("synth")

RUIDO_CARGA = 0.05      # desviación del ruido multiplicativo sobre la forma
RUIDO_NUBES = 0.10
FACTOR_FIN_DE_SEMANA = 0.8


@dataclass(frozen=True)
class PerfilDiario:
    """Parámetros de un día tipo."""
    fecha: str
    amanecer: float         # h
    atardecer: float        # h
    irradiancia_pico: float  # kWh/m²
    peso_manana: float
    peso_mediodia: float
    peso_noche: float
    pico: float             # kW
    base: float             # kW


PERFILES = {
    'summer-day': PerfilDiario("2023-07-15", 5.0, 20.0, 0.90, 0.3, 1.0, 0.5, 3.5, 1.0),
    'winter-day': PerfilDiario("2023-01-15", 8.0, 17.0, 0.45, 0.2, 0.7, 1.0, 4.0, 1.2),
}
ANUAL_PICO, ANUAL_BASE = 4.2, 1.0


def _campana(horas, centro, ancho):
    return np.exp(-0.5 * ((horas - centro) / ancho) ** 2)


def _forma_carga(horas, manana, mediodia, noche):
    """Forma diaria en [0, 1]: campanas de mañana (8 h), mediodía (13 h) y noche (19.5 h)."""
    forma = manana * _campana(horas, 8.0, 1.5) + mediodia * _campana(horas, 13.0, 3.0) \
        + noche * _campana(horas, 19.5, 2.0)
    return forma / max(manana, mediodia, noche)


def _irradiancia(horas, amanecer, atardecer, pico, nubes):
    """Medio seno entre amanecer y atardecer, atenuado por el factor de nubes."""
    fase = (horas - amanecer) / (atardecer - amanecer)
    dia = (fase > 0) & (fase < 1)
    return np.where(dia, pico * np.sin(np.pi * np.clip(fase, 0.0, 1.0)) * nubes, 0.0)


def _carga(forma, pico, base, ruido):
    return base + (pico - base) * np.clip(forma * (1.0 + ruido), 0.0, 1.0)


def _marcas(inicio: str, horas: int) -> pd.DatetimeIndex:
    # Cada muestra representa la hora completa y se fecha en su punto medio
    return pd.date_range(pd.Timestamp(inicio) + pd.Timedelta(minutes=30), periods=horas, freq="h")


def synth_profile(kind: str, peak: Optional[float] = None, base: Optional[float] = None,
                  seed: int = 0) -> Tuple[TimeSeries, TimeSeries]:
    """Genera el par (demanda, irradiancia) de un perfil sintético.

    Args:
        kind (str): "summer-day", "winter-day" o "annual".
        peak (float, optional): Demanda máxima en kW; por defecto la del perfil.
        base (float, optional): Demanda mínima en kW; por defecto la del perfil.
        seed (int): Semilla del generador; misma semilla, misma serie.

    Returns:
        Tuple[TimeSeries, TimeSeries]: Demanda (kW) e irradiancia (kWh/m²), horarias.

    Raises:
        DomainError: Si el tipo no existe o no se cumple peak >= base >= 0.
    """
    if kind not in TIPOS_PERFIL:
        raise DomainError(f"tipo de perfil desconocido: '{kind}' (válidos: {', '.join(TIPOS_PERFIL)})")
    if kind == 'annual':
        pico = ANUAL_PICO if peak is None else peak
        base_kw = ANUAL_BASE if base is None else base
    else:
        pico = PERFILES[kind].pico if peak is None else peak
        base_kw = PERFILES[kind].base if base is None else base
    if not pico >= base_kw >= 0:
        raise DomainError(f"se requiere peak >= base >= 0 (peak={pico}, base={base_kw})")

    rng = np.random.default_rng(seed)
    if kind == 'annual':
        return _anual(rng, pico, base_kw)

    perfil = PERFILES[kind]
    horas = np.arange(24) + 0.5
    ruido = rng.normal(0.0, RUIDO_CARGA, horas.shape[0])
    nubes = np.clip(1.0 - np.abs(rng.normal(0.0, RUIDO_NUBES, horas.shape[0])), 0.0, 1.0)
    forma = _forma_carga(horas, perfil.peso_manana, perfil.peso_mediodia, perfil.peso_noche)
    marcas = _marcas(perfil.fecha, 24)
    carga = _carga(forma, pico, base_kw, ruido)
    irradiancia = _irradiancia(horas, perfil.amanecer, perfil.atardecer, perfil.irradiancia_pico, nubes)
    return (TimeSeries(marcas, carga, 1.0, COLUMNAS_CARGA[1]),
            TimeSeries(marcas, irradiancia, 1.0, COLUMNAS_IRRADIANCIA[1]))


def _anual(rng, pico, base_kw) -> Tuple[TimeSeries, TimeSeries]:
    """Año horario (8760 h) que interpola entre el día de verano y el de invierno."""
    marcas = _marcas("2023-01-01", 8760)
    horas = np.asarray(marcas.hour, dtype=float) + 0.5
    dia = np.asarray(marcas.dayofyear, dtype=float) - 1.0
    # s = 1 a mediados de enero, −1 a mediados de julio
    s = np.cos(2.0 * np.pi * (dia - 14.0) / 365.0)
    invierno = 0.5 * (1.0 + s)

    verano_p, invierno_p = PERFILES['summer-day'], PERFILES['winter-day']
    forma = (1.0 - invierno) * _forma_carga(horas, verano_p.peso_manana, verano_p.peso_mediodia,
                                            verano_p.peso_noche) \
        + invierno * _forma_carga(horas, invierno_p.peso_manana, invierno_p.peso_mediodia,
                                  invierno_p.peso_noche)
    forma = forma * (0.8 + 0.2 * invierno)
    forma = np.where(marcas.dayofweek >= 5, FACTOR_FIN_DE_SEMANA * forma, forma)

    ruido = rng.normal(0.0, RUIDO_CARGA, horas.shape[0])
    nubes = np.clip(1.0 - np.abs(rng.normal(0.0, RUIDO_NUBES, horas.shape[0])), 0.0, 1.0)
    amanecer = 6.5 + 1.5 * s
    atardecer = 18.5 - 1.5 * s
    pico_irr = 0.675 - 0.225 * s
    carga = _carga(forma, pico, base_kw, ruido)
    irradiancia = _irradiancia(horas, amanecer, atardecer, pico_irr, nubes)
    return (TimeSeries(marcas, carga, 1.0, COLUMNAS_CARGA[1]),
            TimeSeries(marcas, irradiancia, 1.0, COLUMNAS_IRRADIANCIA[1]))


def exportar_perfil(kind: str, seed: int, outdir: str, peak: Optional[float] = None,
                    base: Optional[float] = None) -> dict:
    """Escribe `load.csv`, `irradiance.csv` y un `escenario.env` listo para `solve`.

    El escenario anual se configura con medias diarias.

    Returns:
        dict: Rutas escritas por nombre lógico.
    """
    carga, irradiancia = synth_profile(kind, peak=peak, base=base, seed=seed)
    os.makedirs(outdir, exist_ok=True)
    rutas = {
        'load': write_series_csv(carga, os.path.join(outdir, "load.csv"), COLUMNAS_CARGA[1]),
        'irradiance': write_series_csv(irradiancia, os.path.join(outdir, "irradiance.csv"),
                                       COLUMNAS_IRRADIANCIA[1]),
    }

    escenario = os.path.join(outdir, "escenario.env")
    with open(escenario, 'w', encoding='utf-8') as f:
        f.write(f"# Escenario sintético {kind}, semilla {seed}\n")
    set_key(escenario, "LOAD_CSV", "load.csv", quote_mode="never")
    set_key(escenario, "IRRADIANCE_CSV", "irradiance.csv", quote_mode="never")
    set_key(escenario, "MODE", "all", quote_mode="never")
    set_key(escenario, "DAILY_MEAN", "true" if kind == 'annual' else "false", quote_mode="never")
    rutas['scenario'] = escenario
    log.info("Perfil %s (semilla %d) escrito en %s", kind, seed, outdir)
    return rutas
