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
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import pandas as pd

from config.mappings import MODO_TODOS, MODOS
from controllers.import_processor import parse_irradiance_csv, parse_load_csv
from models.microgrid_model import pv_output, validate_schedule
from models.schemas import (CostBreakdown, DispatchProblem, DispatchReport, SavingsReport, ScenarioConfig,
                            TimeSeries)
from services.admm_engine import solve
from services.baselines_bench import diesel_only_dispatch, evaluate_dynamic, savings_report, static_hybrid_dispatch
from services.report_writer import ReportWriter, emit_plot_data
from utilities.exceptions import ConfigError, ScheduleValidationError
from utilities.logger import obtener_logger

log = obtener_logger("escenario")


@dataclass
class ResultadoEscenario:
    """Resultado de `run_scenario`: reportes por estrategia, ahorros y archivos escritos."""
    problem: DispatchProblem
    reports: Dict[str, DispatchReport]
    full_costs: Dict[str, CostBreakdown]
    savings: SavingsReport
    files: List[str] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return all(r.diagnostics is None or r.diagnostics.converged for r in self.reports.values())

    @property
    def has_violations(self) -> bool:
        return any(r.violations for r in self.reports.values())


class ScenarioService:
    """
    Servicio que orquesta una corrida completa: lectura de series, armado del
    problema, ejecución de las estrategias y escritura de resultados.
    """

    def __init__(self, config: ScenarioConfig, progress: bool = False):
        """
        Args:
            config (ScenarioConfig): Escenario validado.
            progress (bool): Muestra la barra de progreso del solucionador.
        """
        self.config = config
        self.opts = replace(config.solver, progress=progress) if progress else config.solver

    def cargar_series(self) -> Tuple[TimeSeries, TimeSeries]:
        """
        Lee demanda e irradiancia y las alinea por marca de tiempo.

        Returns:
            Tuple[TimeSeries, TimeSeries]: Series alineadas de igual longitud.

        Raises:
            ConfigError: Si los pasos difieren o no hay marcas comunes.
        """
        carga = parse_load_csv(self.config.load_csv, daily_mean=self.config.daily_mean)
        irradiancia = parse_irradiance_csv(self.config.irradiance_csv, daily_mean=self.config.daily_mean)
        if abs(carga.dt - irradiancia.dt) > 1e-9 * carga.dt:
            raise ConfigError(f"las series tienen pasos distintos ({carga.dt} h y {irradiancia.dt} h)")

        comunes = carga.timestamps.intersection(irradiancia.timestamps)
        if len(comunes) == 0:
            raise ConfigError("las series de demanda e irradiancia no comparten marcas de tiempo")
        if len(comunes) < max(len(carga), len(irradiancia)):
            log.warning("Se descartan %d pasos sin dato en ambas series",
                        max(len(carga), len(irradiancia)) - len(comunes))

        def recortar(serie: TimeSeries) -> TimeSeries:
            datos = pd.Series(serie.values, index=serie.timestamps).loc[comunes]
            return TimeSeries(pd.DatetimeIndex(datos.index), datos.to_numpy(dtype=float), serie.dt, serie.name)

        return recortar(carga), recortar(irradiancia)

    def construir_problema(self) -> DispatchProblem:
        carga, irradiancia = self.cargar_series()
        return DispatchProblem(
            load=carga.values,
            pv=pv_output(irradiancia.values, self.config.pv),
            battery=self.config.battery,
            network=self.config.network,
            cost=self.config.cost,
            dt=carga.dt,
            timestamps=carga.timestamps,
        )

    def _ejecutar_modo(self, modo: str, problem: DispatchProblem) -> DispatchReport:
        if modo == 'proposed':
            return solve(problem, self.opts)
        if modo == 'no-degradation':
            return static_hybrid_dispatch(problem, opts=self.opts)
        return diesel_only_dispatch(problem.load, problem.network, problem.cost, problem.battery)

    def ejecutar(self, modos: List[str], problem: DispatchProblem) -> Dict[str, DispatchReport]:
        """Corre las estrategias; con más de una, en paralelo (problemas independientes)."""
        if len(modos) == 1:
            return {modos[0]: self._ejecutar_modo(modos[0], problem)}
        with ThreadPoolExecutor(max_workers=len(modos)) as pool:
            futuros = {m: pool.submit(self._ejecutar_modo, m, problem) for m in modos}
            return {m: futuros[m].result() for m in modos}

    @staticmethod
    def validar(reports: Dict[str, DispatchReport], problem: DispatchProblem) -> None:
        """
        Aplica `validate_schedule` a cada despacho.

        Raises:
            ScheduleValidationError: Si un despacho convergido (o de línea base)
                viola los invariantes; los no convergidos solo quedan marcados.
        """
        for modo, rep in reports.items():
            rep.violations = validate_schedule(rep.schedule, problem)
            if not rep.violations:
                continue
            convergido = rep.diagnostics is None or rep.diagnostics.converged
            if convergido:
                raise ScheduleValidationError(f"el despacho {modo} viola los invariantes de la microred",
                                              rep.violations)
            log.warning("Despacho %s no convergido con %d violaciones", modo, len(rep.violations))

    def guardar(self, resultado: ResultadoEscenario, outdir: str, plot_data: bool = False,
                figures: bool = False) -> List[str]:
        """Escribe todos los artefactos en `outdir`, en el hilo que llama."""
        os.makedirs(outdir, exist_ok=True)
        escritos = []
        for modo in [m for m in MODOS if m in resultado.reports]:
            rep = resultado.reports[modo]
            escritos.append(ReportWriter.schedule_csv(rep, os.path.join(outdir, f"schedule_{modo}.csv"),
                                                      resultado.problem.timestamps))
            if rep.diagnostics is not None:
                escritos.append(ReportWriter.convergence_log(rep.diagnostics,
                                                             os.path.join(outdir, f"convergence_{modo}.log")))
        escritos.append(ReportWriter.costs_json(resultado.reports, resultado.full_costs,
                                                os.path.join(outdir, "costs.json")))
        escritos.append(ReportWriter.savings_json(resultado.savings, os.path.join(outdir, "savings.json")))
        if plot_data:
            escritos.extend(emit_plot_data(resultado.reports, outdir, resultado.full_costs, figures=figures))
        return escritos


def modes_for(mode: str) -> List[str]:
    """Traduce el selector de la CLI a la lista de estrategias."""
    if mode == MODO_TODOS:
        return list(MODOS)
    if mode not in MODOS:
        raise ConfigError(f"modo desconocido: '{mode}'", clave='MODE')
    return [mode]


def run_scenario(config: ScenarioConfig, mode: Optional[str] = None, outdir: Optional[str] = None,
                 plot_data: bool = False, figures: bool = False, progress: bool = False) -> ResultadoEscenario:
    """Ejecuta un escenario de punta a punta y escribe sus artefactos.

    Nada se escribe hasta que todas las estrategias terminan y sus despachos
    pasan la validación, de modo que un fallo no deja salidas parciales.

    Args:
        config (ScenarioConfig): Escenario validado.
        mode (str, optional): Estrategia o "all"; por defecto la del escenario.
        outdir (str, optional): Carpeta de salida; por defecto la del escenario.
        plot_data (bool): Escribe también los CSV de gráficos.
        figures (bool): Con `plot_data`, dibuja además los PNG.
        progress (bool): Barra de progreso del solucionador.

    Returns:
        ResultadoEscenario: Reportes, costos completos, ahorros y archivos.

    Raises:
        ConfigError: Series incompatibles o modo inválido.
        TimeSeriesError: CSV mal formado.
        InfeasibleProblemError: Instancia sin despacho factible.
        ScheduleValidationError: Despacho convergido que viola invariantes.
    """
    modos = modes_for(mode or config.mode)
    servicio = ScenarioService(config, progress=progress)
    problem = servicio.construir_problema()
    log.info("Escenario %s: %d pasos de %g h, estrategias %s",
             config.source or "-", problem.horizon, problem.dt, ", ".join(modos))

    reports = servicio.ejecutar(modos, problem)
    servicio.validar(reports, problem)

    completos = {m: evaluate_dynamic(r.schedule, problem) for m, r in reports.items()}
    ahorros = savings_report({m: c.objective for m, c in completos.items()},
                            fuel_costs={m: c.j1_total for m, c in completos.items()})
    for rep in reports.values():
        rep.savings = ahorros

    resultado = ResultadoEscenario(problem=problem, reports=reports, full_costs=completos, savings=ahorros)
    resultado.files = servicio.guardar(resultado, outdir or config.output_dir, plot_data, figures)
    log.info("Escenario terminado: %d archivos en %s", len(resultado.files), outdir or config.output_dir)
    return resultado
