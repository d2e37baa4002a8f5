"""Registro (logging) del paquete.

Como biblioteca el paquete no emite nada: el logger raíz `microred` lleva un
`NullHandler`. Solo la CLI instala un manejador real.
"""
import logging

RAIZ = "microred"

logging.getLogger(RAIZ).addHandler(logging.NullHandler())


def obtener_logger(nombre: str) -> logging.Logger:
    """Devuelve el logger hijo `microred.<nombre>`."""
    return logging.getLogger(f"{RAIZ}.{nombre}")


def configurar_logging(nivel="INFO") -> logging.Logger:
    """Configura la salida de registros para la ejecución por consola.

    Args:
        nivel (str | int): Nivel mínimo (por ejemplo "DEBUG" o logging.INFO).

    Returns:
        logging.Logger: El logger raíz del paquete ya configurado.
    """
    raiz = logging.getLogger(RAIZ)
    if isinstance(nivel, str):
        nivel = logging.getLevelName(nivel.upper())
        if not isinstance(nivel, int):
            nivel = logging.INFO
    raiz.setLevel(nivel)

    formato = logging.Formatter("%(asctime)s %(levelname)-8s %(name)s: %(message)s")
    # Evita duplicar manejadores si main() se invoca varias veces (tests)
    for h in list(raiz.handlers):
        if not isinstance(h, logging.NullHandler):
            raiz.removeHandler(h)

    consola = logging.StreamHandler()
    consola.setFormatter(formato)
    raiz.addHandler(consola)
    return raiz
