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

"""Mapeos y constantes para escenarios, series y archivos de salida.

Este módulo define las estructuras estáticas usadas para leer archivos de
escenario, validar los encabezados de los CSV de entrada y nombrar las columnas
de los resultados.
"""

# Claves del archivo de escenario y el registro/campo que alimentan
CLAVES_ESCENARIO = {
    'FUEL_A': ('cost', 'a'),
    'FUEL_B': ('cost', 'b'),
    'G1': ('cost', 'g1'),
    'G2': ('cost', 'g2'),
    'G3': ('cost', 'g3'),
    'G4': ('cost', 'g4'),
    'W1': ('cost', 'w1'),
    'W2': ('cost', 'w2'),
    'W3': ('cost', 'w3'),
    'FADE_U': ('battery', 'u'),
    'FADE_V': ('battery', 'v'),
    'P_MAX': ('battery', 'p_max'),
    'ALPHA': ('battery', 'alpha'),
    'Q0': ('battery', 'q0'),
    'DOD': ('battery', 'dod'),
    'SOC_MAX': ('battery', 'soc_max'),
    'CELL_V0': ('battery', 'v0'),
    'CELL_R': ('battery', 'r_internal'),
    'STATIC_ETA_C': ('battery', 'eta_c_static'),
    'STATIC_ETA_D': ('battery', 'eta_d_static'),
    'PV_AREA': ('pv', 'area'),
    'PV_EFFICIENCY': ('pv', 'efficiency'),
    'PV_CAPACITY': ('pv', 'capacity_cap'),
    'GEN_MIN': ('network', 'gen_min'),
    'GEN_MAX': ('network', 'gen_max'),
    'LOSS_FACTOR': ('network', 'loss_factor'),
    'H_MAX': ('network', 'h_max'),
    'SOC_INITIAL': ('network', 'soc_initial'),
    'RHO': ('solver', 'rho'),
    'TOL_PRIMAL': ('solver', 'tol_primal'),
    'TOL_DUAL': ('solver', 'tol_dual'),
    'MAX_ITERS': ('solver', 'max_iters'),
    'NEWTON_TOL': ('solver', 'newton_tol'),
    'NEWTON_MAX_ITERS': ('solver', 'newton_max_iters'),
    'PROJECTION_INTERVAL': ('solver', 'projection_interval'),
}
"""dict: Asocia cada clave numérica del escenario con (grupo, campo).

El grupo identifica el registro de `models.schemas` que recibe el valor
(`cost` → CostParams, `battery` → BatteryParams, `pv` → PvParams,
`network` → NetworkParams, `solver` → SolverOptions).
"""

CLAVES_ENTERAS = {'MAX_ITERS', 'NEWTON_MAX_ITERS', 'PROJECTION_INTERVAL'}
"""set: Claves que se interpretan como enteros."""

CLAVES_GENERALES = {'LOAD_CSV', 'IRRADIANCE_CSV', 'DAILY_MEAN', 'MODE', 'OUTPUT_DIR'}
"""set: Claves no numéricas (rutas, banderas y selección de estrategia)."""

# Encabezados obligatorios de los CSV de entrada
COLUMNAS_CARGA = ['timestamp', 'load_kw']
COLUMNAS_IRRADIANCIA = ['timestamp', 'irradiance_kwh_m2']
"""list: Encabezados exactos esperados en los CSV de carga e irradiancia.

Las marcas de tiempo van en ISO-8601; la carga en kW y la irradiancia en kWh/m².
"""

# Estrategias de despacho disponibles
MODOS = ['proposed', 'no-degradation', 'diesel-only']
MODO_TODOS = 'all'
"""str: Selector que ejecuta las tres estrategias de `MODOS`."""

TIPOS_PERFIL = ['summer-day', 'winter-day', 'annual']
"""list: Perfiles sintéticos que sabe generar `controllers.synth_profiles`."""

# Columnas de los archivos de resultados
COLUMNAS_DESPACHO = ['timestamp', 'p_gl', 'p_pvl', 'p_pves', 'p_esl', 'soc']
"""list: Columnas del CSV de despacho. `soc` es el estado de carga al cierre del paso."""

COLUMNAS_COSTOS_GRAFICO = ['strategy', 'objective', 'j1_total', 'j2_total', 'j3_total']
"""list: Columnas del CSV de barras con el costo de cada estrategia."""

MARCA_INDEFINIDO = "indefinido"
"""str: Marca de porcentaje de ahorro sin sentido (costo base cero o negativo)."""
