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

"""Jerarquía de excepciones del despacho económico.

Todas derivan de `DispatchError` para que la CLI pueda traducirlas a códigos
de salida sin capturar excepciones ajenas al dominio.
"""


class DispatchError(Exception):
    """Raíz de todos los errores del paquete."""


class DomainError(DispatchError, ValueError):
    """Argumento fuera del dominio de una ecuación del modelo."""


class ProblemShapeError(DispatchError, ValueError):
    """Series o bloques con dimensiones inconsistentes."""


class InfeasibleProblemError(DispatchError):
    """La instancia no admite ningún despacho factible.

    Args:
        mensaje (str): Descripción del motivo.
        paso (int, optional): Índice del paso de tiempo que falla.
    """

    def __init__(self, mensaje, paso=None):
        super().__init__(mensaje)
        self.paso = paso


class OracleLimitError(DispatchError, ValueError):
    """El oráculo de fuerza bruta rechaza horizontes demasiado largos."""


class ConfigError(DispatchError):
    """Archivo de escenario inválido.

    Args:
        mensaje (str): Descripción del problema.
        clave (str, optional): Clave del escenario involucrada.
    """

    def __init__(self, mensaje, clave=None):
        super().__init__(mensaje)
        self.clave = clave


class ScheduleValidationError(DispatchError):
    """Un despacho convergido viola los invariantes de la microred."""

    def __init__(self, mensaje, violaciones=None):
        super().__init__(mensaje)
        self.violaciones = list(violaciones or [])


# ----------------------------
# ERRORES DE SERIES TEMPORALES
# ----------------------------

class TimeSeriesError(DispatchError, ValueError):
    """Base de los errores de lectura de CSV."""


class ColumnError(TimeSeriesError):
    """Faltan columnas o sobran columnas en el encabezado."""


class OrderingError(TimeSeriesError):
    """Marcas de tiempo no estrictamente crecientes."""


class NegativeValueError(TimeSeriesError):
    """Valores negativos en una serie de potencia o irradiancia."""


class EmptySeriesError(TimeSeriesError):
    """Archivo sin filas de datos."""


class SpacingError(TimeSeriesError):
    """Paso temporal no uniforme."""
