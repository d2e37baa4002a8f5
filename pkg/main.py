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

"""Despacho económico con degradación para una microred FV-diésel-batería.

Usage:
  main.py solve --config=<archivo> [--mode=<modo>] [--out=<dir>] [--emit-plot-data] [--figures] [--progress] [--log-level=<nivel>]
  main.py synth --kind=<tipo> --seed=<n> --out=<dir> [--peak=<kw>] [--base=<kw>]
  main.py audit --config=<archivo> [--grid=<n>] [--margin=<m>]
  main.py (-h | --help)

Options:
  --config=<archivo>   Archivo de escenario CLAVE=VALOR.
  --mode=<modo>        proposed | no-degradation | diesel-only | all (por defecto MODE del escenario).
  --out=<dir>          Carpeta de salida (por defecto OUTPUT_DIR del escenario).
  --emit-plot-data     Escribe además los CSV de gráficos.
  --figures            Con --emit-plot-data, dibuja también los PNG.
  --progress           Barra de progreso del solucionador.
  --log-level=<nivel>  DEBUG, INFO, WARNING o ERROR.
  --kind=<tipo>        summer-day | winter-day | annual.
  --seed=<n>           Semilla del perfil sintético.
  --peak=<kw>          Demanda máxima del perfil (kW).
  --base=<kw>          Demanda mínima del perfil (kW).
  --grid=<n>           Puntos de la malla de auditoría.
  --margin=<m>         Fracción de P_max auditada.

Códigos de salida:
  0 éxito, 1 error de configuración o de entrada, 2 instancia infactible,
  3 sin convergencia o invariante violado, 4 error de E/S.
"""
import sys
import os

from docopt import docopt, DocoptExit

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from config import settings
from controllers.scenario_loader import load_scenario
from controllers.synth_profiles import exportar_perfil
from models.battery_model import convexity_audit
from services.scenario_runner import run_scenario
from utilities.exceptions import (ConfigError, DispatchError, DomainError, InfeasibleProblemError,
                                  ScheduleValidationError)
from utilities.logger import configurar_logging
from utilities.sanitizer import Sanitizer

EXITO, ERROR_CONFIG, INFACTIBLE, SIN_CONVERGENCIA, ERROR_IO = 0, 1, 2, 3, 4


def _fmt(valor):
    return "indefinido" if valor is None else f"{valor:.2f} %"


def comando_solve(args) -> int:
    config = load_scenario(args['--config'])
    resultado = run_scenario(config, mode=args['--mode'], outdir=args['--out'],
                             plot_data=args['--emit-plot-data'], figures=args['--figures'],
                             progress=args['--progress'])
    for modo, rep in resultado.reports.items():
        estado = "-" if rep.diagnostics is None else (
            f"convergió en {rep.diagnostics.iterations} it." if rep.diagnostics.converged
            else f"NO convergió ({rep.diagnostics.iterations} it.)")
        print(f"{modo:>15}: objetivo {resultado.full_costs[modo].objective:.6g}  {estado}")
        for aviso in (rep.diagnostics.warnings if rep.diagnostics else []):
            print(f"{'':>15}  aviso: {aviso}")
    if len(resultado.reports) > 1:
        print(f"Ahorro vs diésel: {_fmt(resultado.savings.pct_vs_diesel)}; "
              f"vs sin degradación: {_fmt(resultado.savings.pct_vs_static)}")
        print(f"Combustible (J1) vs diésel: {_fmt(resultado.savings.fuel_pct_vs_diesel)}; "
              f"vs sin degradación: {_fmt(resultado.savings.fuel_pct_vs_static)}")
    if not resultado.converged or resultado.has_violations:
        return SIN_CONVERGENCIA
    return EXITO


def comando_synth(args) -> int:
    semilla = Sanitizer.a_float(args['--seed'], "--seed")
    if not semilla.is_integer():
        raise DomainError(f"--seed debe ser entero (recibido {args['--seed']})")
    pico = Sanitizer.a_float(args['--peak'], "--peak") if args['--peak'] else None
    base = Sanitizer.a_float(args['--base'], "--base") if args['--base'] else None
    rutas = exportar_perfil(args['--kind'], int(semilla), args['--out'], peak=pico, base=base)
    for nombre, ruta in rutas.items():
        print(f"{nombre:>10}: {ruta}")
    return EXITO


def comando_audit(args) -> int:
    config = load_scenario(args['--config'])
    puntos = int(Sanitizer.a_float(args['--grid'], "--grid")) if args['--grid'] else settings.AUDIT_GRID_POINTS
    margen = Sanitizer.a_float(args['--margin'], "--margin") if args['--margin'] else settings.AUDIT_MARGIN
    reporte = convexity_audit(config.battery, grid_points=puntos, margin=margen)

    print(f"Malla: {reporte.grid_points} puntos en [h, {reporte.margin:g}·P_max], h = {reporte.step:.3g} kW")
    print(f"  descarga  min f''  = {reporte.min_discharge_second_diff:+.6e}  "
          f"{'convexa' if reporte.discharge_convex else 'NO convexa'}")
    print(f"  carga     max f''  = {reporte.max_charge_second_diff:+.6e}  "
          f"{'cóncava' if reporte.charge_concave else 'NO cóncava'}")
    print(f"  alpha·P_max        = {reporte.ragone_value:.3e}  "
          f"{'régimen válido' if reporte.ragone_valid else 'fuera del régimen válido'}")
    print("Veredicto:", "APROBADO" if reporte.passed else "RECHAZADO")
    return EXITO if reporte.passed else SIN_CONVERGENCIA


def main(argv=None) -> int:
    """
    Punto de entrada de la línea de comandos.

    Args:
        argv (list, optional): Argumentos sin el nombre del programa; por defecto sys.argv[1:].

    Returns:
        int: Código de salida.
    """
    try:
        args = docopt(__doc__, argv=argv)
    except DocoptExit as e:
        print(e, file=sys.stderr)
        return ERROR_CONFIG

    configurar_logging(args.get('--log-level') or settings.LOG_LEVEL)
    try:
        if args['solve']:
            return comando_solve(args)
        if args['synth']:
            return comando_synth(args)
        return comando_audit(args)
    except InfeasibleProblemError as e:
        print(f"Instancia infactible: {e}", file=sys.stderr)
        return INFACTIBLE
    except ScheduleValidationError as e:
        print(f"Despacho inválido: {e}", file=sys.stderr)
        for v in e.violaciones:
            print(f"  {v}", file=sys.stderr)
        return SIN_CONVERGENCIA
    except (ConfigError, DispatchError) as e:
        print(f"Error de configuración: {e}", file=sys.stderr)
        return ERROR_CONFIG
    except OSError as e:
        print(f"Error de E/S: {e}", file=sys.stderr)
        return ERROR_IO


if __name__ == "__main__":
    sys.exit(main())
