"""Point d'entrée de la CLI DboRom.

Codes de sortie : 0 succès, 1 usage, 2 configuration / contrat,
3 échec numérique ou d'exécution.
"""
import logging
import sys
from typing import List, Optional

import numpy as np

from config import Config
from Cli import compareCommands, configCommands, exportCommands, runCommands
from Cli.common import CliParser
from Utils.errors import DboRomError, NumericalFailure, UsageError
from Utils.logSetup import configure_logging

logger = logging.getLogger('dbo_rom')


def build_parser() -> CliParser:
    """Parseur principal avec les sous-commandes enregistrées."""
    parser = CliParser(prog='dbo-rom',
                       description="On-the-fly low-rank reduced model for many-species transport")
    subparsers = parser.add_subparsers(dest='command', metavar='command')
    subparsers.required = True

    runCommands.register(subparsers)
    compareCommands.register(subparsers)
    exportCommands.register(subparsers)
    configCommands.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Exécute une sous-commande et retourne son code de sortie."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        configure_logging(Config.LOG_LEVEL)
        logger.error("%s", exc)
        return exc.exit_code
    except SystemExit as exc:
        # --help
        return int(exc.code or 0)

    configure_logging(Config.LOG_LEVEL, quiet=args.quiet)
    if args.threads is not None:
        Config.THREADS = args.threads

    try:
        Config.validate()
        return args.handler(args)
    except DboRomError as exc:
        logger.error("%s failed: %s", args.command, exc)
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        logger.error("%s failed: %s", args.command, exc)
        return NumericalFailure.exit_code
    except ValueError as exc:
        logger.error("%s failed: %s", args.command, exc)
        return 2
    except OSError as exc:
        logger.error("%s failed: %s", args.command, exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
