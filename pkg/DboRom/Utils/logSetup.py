"""
logSetup.py - Configuration des logs de la CLI.

Un seul handler sur la sortie d'erreur, horodaté. Les modules obtiennent
leur logger par logging.getLogger(__name__).
"""

import logging
import sys

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: str = 'INFO', quiet: bool = False) -> logging.Logger:
    """Installe le handler stderr sur le logger racine.

    Args:
        level: Niveau (nom logging : DEBUG, INFO...)
        quiet: Relève le seuil à WARNING

    Returns:
        Le logger racine
    """
    numeric = logging.getLevelName(str(level).upper())
    if not isinstance(numeric, int):
        numeric = logging.INFO
    if quiet:
        numeric = max(numeric, logging.WARNING)

    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, '_dbo_rom', False):
            root.removeHandler(handler)

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler._dbo_rom = True
    root.addHandler(handler)
    root.setLevel(numeric)
    return root
