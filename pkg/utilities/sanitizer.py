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
import math
import numpy as np
import pandas as pd
from typing import Any

from utilities.exceptions import DomainError


class Sanitizer:
    """Clase utilitaria estática para limpieza y validación de datos numéricos."""

    @staticmethod
    def limpiar_encabezado(texto: Any) -> str:
        """
        Normaliza un encabezado de CSV: sin espacios, sin BOM y en minúsculas.

        Args:
            texto (Any): Encabezado leído del archivo.

        Returns:
            str: Encabezado limpio.
        """
        if pd.isna(texto):
            return ""
        return str(texto).replace("﻿", "").strip().lower()

    @staticmethod
    def a_float(valor: Any, nombre: str = "valor") -> float:
        """
        Convierte un valor de configuración a float aceptando coma decimal.

        Args:
            valor (Any): Valor de entrada (str, float, int).
            nombre (str): Nombre usado en el mensaje de error.

        Returns:
            float: Valor numérico finito.

        Raises:
            DomainError: Si el valor no es numérico o no es finito.
        """
        s_val = str(valor).strip().replace(",", ".")
        try:
            numero = float(s_val)
        except ValueError:
            raise DomainError(f"{nombre}: '{valor}' no es numérico")
        if not math.isfinite(numero):
            raise DomainError(f"{nombre}: '{valor}' no es finito")
        return numero

    @staticmethod
    def no_negativo(valor: float, nombre: str) -> float:
        """Exige `valor >= 0`."""
        if valor < 0:
            raise DomainError(f"{nombre} debe ser no negativo (recibido {valor})")
        return valor

    @staticmethod
    def positivo(valor: float, nombre: str) -> float:
        """Exige `valor > 0`."""
        if not valor > 0:
            raise DomainError(f"{nombre} debe ser positivo (recibido {valor})")
        return valor

    @staticmethod
    def fraccion(valor: float, nombre: str) -> float:
        """Exige `valor` en [0, 1]."""
        if not 0.0 <= valor <= 1.0:
            raise DomainError(f"{nombre} debe estar en [0, 1] (recibido {valor})")
        return valor

    @staticmethod
    def serie_no_negativa(valores, nombre: str) -> np.ndarray:
        """
        Convierte una secuencia a arreglo float y verifica que no tenga negativos
        ni valores faltantes.

        Args:
            valores: Secuencia numérica.
            nombre (str): Nombre usado en el mensaje de error.

        Returns:
            np.ndarray: Copia unidimensional en float64.
        """
        arr = np.asarray(valores, dtype=float).reshape(-1)
        if np.isnan(arr).any():
            raise DomainError(f"{nombre} contiene valores faltantes")
        if (arr < 0).any():
            paso = int(np.argmax(arr < 0))
            raise DomainError(f"{nombre} tiene un valor negativo en el paso {paso}")
        return arr.copy()
