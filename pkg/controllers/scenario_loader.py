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

"""Lectura y validación de archivos de escenario `CLAVE=VALOR`."""
import os
from typing import Dict

from dotenv import dotenv_values

from config import settings
from config.mappings import CLAVES_ENTERAS, CLAVES_ESCENARIO, CLAVES_GENERALES, MODO_TODOS, MODOS
from models.microgrid_model import network_params
from models.schemas import BatteryParams, CostParams, PvParams, ScenarioConfig, SolverOptions
from utilities.exceptions import ConfigError, DomainError
from utilities.logger import obtener_logger
from utilities.sanitizer import Sanitizer

log = obtener_logger("escenario")

VERDADEROS = {'1', 'true', 'yes', 'si', 'sí', 'on'}
FALSOS = {'0', 'false', 'no', 'off', ''}


def _booleano(clave: str, valor: str) -> bool:
    texto = str(valor).strip().lower()
    if texto in VERDADEROS:
        return True
    if texto in FALSOS:
        return False
    raise ConfigError(f"{clave}: '{valor}' no es un valor booleano", clave=clave)


def _ruta(clave: str, valor: str, directorio: str) -> str:
    ruta = os.path.expanduser(str(valor).strip())
    return ruta if os.path.isabs(ruta) else os.path.normpath(os.path.join(directorio, ruta))


def _numeros(valores: Dict[str, str]) -> Dict[str, Dict[str, float]]:
    """Agrupa las claves numéricas por registro destino."""
    grupos = {'cost': {}, 'battery': {}, 'pv': {}, 'network': {}, 'solver': {}}
    for clave, (grupo, campo) in CLAVES_ESCENARIO.items():
        if clave not in valores or valores[clave] is None:
            continue
        try:
            numero = Sanitizer.a_float(valores[clave], clave)
        except DomainError as e:
            raise ConfigError(str(e), clave=clave)
        if clave in CLAVES_ENTERAS:
            if not numero.is_integer():
                raise ConfigError(f"{clave}: se esperaba un entero (recibido {valores[clave]})", clave=clave)
            numero = int(numero)
        grupos[grupo][campo] = numero
    return grupos


def _construir(grupo: str, fabrica, kwargs: dict):
    try:
        return fabrica(**kwargs)
    except DomainError as e:
        claves = [k for k, (g, campo) in CLAVES_ESCENARIO.items() if g == grupo and str(e).startswith(campo + " ")]
        raise ConfigError(f"parámetros de {grupo} inválidos: {e}", clave=claves[0] if claves else None)


def load_scenario(path: str) -> ScenarioConfig:
    """Lee un archivo de escenario y construye un `ScenarioConfig` validado.

    Las claves ausentes toman los valores por defecto de `config.settings`; las
    rutas relativas se resuelven contra la carpeta del archivo.

    Args:
        path (str): Ruta del archivo de escenario.

    Returns:
        ScenarioConfig: Configuración lista para `run_scenario`.

    Raises:
        ConfigError: Archivo inexistente, clave desconocida, valor inválido o
            CSV referenciado inexistente. `clave` indica la clave culpable.
    """
    if not os.path.isfile(path):
        raise ConfigError(f"No existe el archivo de escenario: {path}")
    valores = dotenv_values(path)
    directorio = os.path.dirname(os.path.abspath(path))

    desconocidas = [k for k in valores if k not in CLAVES_ESCENARIO and k not in CLAVES_GENERALES]
    if desconocidas:
        raise ConfigError(f"clave desconocida en el escenario: {desconocidas[0]}", clave=desconocidas[0])

    grupos = _numeros(valores)
    battery = _construir('battery', BatteryParams, grupos['battery'])
    pv = _construir('pv', PvParams, grupos['pv'])
    cost = _construir('cost', CostParams, grupos['cost'])
    solver = _construir('solver', SolverOptions, grupos['solver'])
    network = _construir('network', lambda **kw: network_params(battery, **kw), grupos['network'])

    rutas = {}
    for clave in ('LOAD_CSV', 'IRRADIANCE_CSV'):
        if not valores.get(clave):
            raise ConfigError(f"falta la clave obligatoria {clave}", clave=clave)
        rutas[clave] = _ruta(clave, valores[clave], directorio)
        if not os.path.isfile(rutas[clave]):
            raise ConfigError(f"{clave}: no existe el archivo {rutas[clave]}", clave=clave)

    modo = str(valores.get('MODE') or settings.DEFAULT_MODE).strip()
    if modo not in MODOS and modo != MODO_TODOS:
        raise ConfigError(f"MODE: '{modo}' no es una estrategia válida", clave='MODE')

    salida = valores.get('OUTPUT_DIR')
    config = ScenarioConfig(
        load_csv=rutas['LOAD_CSV'],
        irradiance_csv=rutas['IRRADIANCE_CSV'],
        pv=pv,
        network=network,
        battery=battery,
        cost=cost,
        solver=solver,
        mode=modo,
        output_dir=_ruta('OUTPUT_DIR', salida, directorio) if salida else settings.OUTPUT_DIR,
        daily_mean=_booleano('DAILY_MEAN', valores.get('DAILY_MEAN') or ''),
        source=os.path.abspath(path),
    )
    log.debug("Escenario %s cargado (modo %s)", path, modo)
    return config
