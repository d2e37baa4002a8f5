"""Escritura de artefactos: despacho, costos, ahorros, registro de convergencia y datos de gráficos."""
import json
import os
from typing import Dict, List, Optional

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from config.mappings import COLUMNAS_COSTOS_GRAFICO, COLUMNAS_DESPACHO, MODOS
from models.schemas import AdmmDiagnostics, CostBreakdown, DispatchReport, SavingsReport
from utilities.logger import obtener_logger

log = obtener_logger("reportes")

FORMATO_FLOAT = "%.10g"


def _csv(df: pd.DataFrame, ruta: str) -> str:
    df.to_csv(ruta, index=False, float_format=FORMATO_FLOAT, lineterminator="\n")
    return ruta


def _json(datos: dict, ruta: str) -> str:
    with open(ruta, 'w', encoding='utf-8') as f:
        json.dump(datos, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")
    return ruta


def _ordenados(reports: Dict[str, DispatchReport]) -> List[str]:
    return [m for m in MODOS if m in reports]


class ReportWriter:
    """
    Clase utilitaria que vuelca los resultados de una corrida a archivos de texto
    deterministas (mismos datos, mismos bytes).
    """

    @staticmethod
    def schedule_csv(report: DispatchReport, ruta: str, timestamps: Optional[pd.DatetimeIndex] = None) -> str:
        """
        Escribe el despacho por paso con las columnas `COLUMNAS_DESPACHO`.

        Args:
            report (DispatchReport): Resultado de una estrategia.
            ruta (str): Archivo CSV de salida.
            timestamps (pd.DatetimeIndex, optional): Marcas de cada paso; sin
                ellas se escribe el índice del paso.

        Returns:
            str: Ruta escrita.
        """
        s = report.schedule
        marcas = timestamps.strftime("%Y-%m-%dT%H:%M:%S") if timestamps is not None else np.arange(s.horizon)
        df = pd.DataFrame(dict(zip(COLUMNAS_DESPACHO, (marcas, s.p_gl, s.p_pvl, s.p_pves, s.p_esl, s.soc[1:]))))
        return _csv(df, ruta)

    @staticmethod
    def convergence_log(diagnostics: AdmmDiagnostics, ruta: str) -> str:
        """Una línea por iteración: iteración, residuo primal, objetivo."""
        with open(ruta, 'w', encoding='utf-8') as f:
            for k, primal, objetivo in diagnostics.history:
                f.write(f"{k} {primal:.6e} {objetivo:.10g}\n")
        return ruta

    @staticmethod
    def costs_json(reports: Dict[str, DispatchReport], completos: Dict[str, CostBreakdown], ruta: str) -> str:
        """
        Desglose de costos por estrategia.

        `objective` es el objetivo propio de cada estrategia y `objective_full`
        el objetivo con eficiencias dinámicas, el que usan los ahorros.
        """
        datos = {}
        for modo in _ordenados(reports):
            rep = reports[modo]
            entrada = rep.costs.as_dict()
            entrada['objective_full'] = float(completos[modo].objective)
            if rep.diagnostics is not None:
                entrada['converged'] = bool(rep.diagnostics.converged)
                entrada['iterations'] = int(rep.diagnostics.iterations)
                entrada['primal_residual'] = float(rep.diagnostics.primal_residual)
                entrada['warnings'] = list(rep.diagnostics.warnings)
            datos[modo] = entrada
        return _json(datos, ruta)

    @staticmethod
    def savings_json(savings: SavingsReport, ruta: str) -> str:
        """Porcentajes de ahorro; los indefinidos se escriben como null con su etiqueta."""
        return _json({
            'cost_diesel_only': savings.cost_diesel_only,
            'cost_static_hybrid': savings.cost_static_hybrid,
            'cost_proposed': savings.cost_proposed,
            'pct_vs_diesel': savings.pct_vs_diesel,
            'pct_vs_static': savings.pct_vs_static,
            'fuel_pct_vs_diesel': savings.fuel_pct_vs_diesel,
            'fuel_pct_vs_static': savings.fuel_pct_vs_static,
            'labels': dict(savings.labels),
        }, ruta)

    @staticmethod
    def flows_png(report: DispatchReport, ruta: str) -> str:
        s = report.schedule
        t = np.arange(s.horizon)
        fig, (ax_p, ax_soc) = plt.subplots(2, 1, sharex=True, figsize=(8, 6))
        for nombre, serie in zip(COLUMNAS_DESPACHO[1:5], s.flows()):
            ax_p.step(t, serie, where="mid", label=nombre)
        ax_p.set_ylabel("kW")
        ax_p.legend(loc="upper right", fontsize="small")
        ax_soc.plot(np.arange(s.horizon + 1), s.soc, color="black")
        ax_soc.set_ylabel("SOC (kWh)")
        ax_soc.set_xlabel("paso")
        ax_p.set_title(f"Flujos de potencia: {report.strategy}")
        fig.tight_layout()
        fig.savefig(ruta, metadata={"Software": None})
        plt.close(fig)
        return ruta

    @staticmethod
    def costs_png(tabla: pd.DataFrame, ruta: str) -> str:
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.bar(tabla['strategy'], tabla['objective'], color=["#888888", "#4c72b0", "#55a868"][:len(tabla)])
        ax.axhline(0.0, color="black", linewidth=0.8)
        ax.set_ylabel("objetivo")
        ax.set_title("Costo por estrategia")
        fig.tight_layout()
        fig.savefig(ruta, metadata={"Software": None})
        plt.close(fig)
        return ruta


def emit_plot_data(reports: Dict[str, DispatchReport], outdir: str,
                   completos: Optional[Dict[str, CostBreakdown]] = None,
                   figures: bool = False) -> List[str]:
    """Escribe los datos de los gráficos de una corrida.

    `flows_<modo>.csv` lleva t, los cuatro flujos y el SOC al cierre de cada
    paso; `costs_plot.csv` una fila por estrategia. Con `figures` también se
    dibujan los PNG correspondientes.

    Args:
        reports (Dict[str, DispatchReport]): Resultados por estrategia.
        outdir (str): Carpeta de salida existente.
        completos (Dict[str, CostBreakdown], optional): Costos con eficiencias
            dinámicas; por defecto los de cada reporte.
        figures (bool): Genera además las figuras PNG.

    Returns:
        List[str]: Rutas escritas.

    Raises:
        OSError: Si la carpeta no existe o no se puede escribir.
    """
    if not os.path.isdir(outdir):
        raise FileNotFoundError(f"No existe la carpeta de salida: {outdir}")
    completos = completos or {m: r.costs for m, r in reports.items()}
    escritos = []
    for modo in _ordenados(reports):
        s = reports[modo].schedule
        df = pd.DataFrame({
            't': np.arange(s.horizon),
            'p_gl': s.p_gl, 'p_pvl': s.p_pvl, 'p_pves': s.p_pves, 'p_esl': s.p_esl,
            'soc': s.soc[1:],
        })
        escritos.append(_csv(df, os.path.join(outdir, f"flows_{modo}.csv")))
        if figures:
            escritos.append(ReportWriter.flows_png(reports[modo], os.path.join(outdir, f"flows_{modo}.png")))

    tabla = pd.DataFrame([
        [modo, completos[modo].objective, completos[modo].j1_total, completos[modo].j2_total,
         completos[modo].j3_total]
        for modo in _ordenados(reports)
    ], columns=COLUMNAS_COSTOS_GRAFICO)
    escritos.append(_csv(tabla, os.path.join(outdir, "costs_plot.csv")))
    if figures:
        escritos.append(ReportWriter.costs_png(tabla, os.path.join(outdir, "costs.png")))
    log.info("Datos de gráficos escritos en %s (%d archivos)", outdir, len(escritos))
    return escritos
