"""Options et utilitaires partagés par les sous-commandes."""

import argparse
import logging
import pathlib

from sqlalchemy.exc import SQLAlchemyError

from config import Config
from Models.configModel import RunConfig
from Persistence.DBStorage import storage
from Utils.configParser import ConfigParser, U64_MAX
from Utils.errors import UsageError

logger = logging.getLogger(__name__)


class CliParser(argparse.ArgumentParser):
    """ArgumentParser dont les erreurs d'usage deviennent des UsageError (code 1)."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def u64(text: str) -> int:
    """Type argparse : entier non signé sur 64 bits."""
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not an integer") from None
    if not 0 <= value <= U64_MAX:
        raise argparse.ArgumentTypeError(f"{value} is not an unsigned 64-bit integer")
    return value


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def add_common_options(parser: argparse.ArgumentParser, config_required: bool = True) -> None:
    """--config, --out, --seed-override, --threads et --quiet."""
    parser.add_argument('--config', type=pathlib.Path, required=config_required,
                        help="run configuration file")
    parser.add_argument('--out', type=pathlib.Path, default=None,
                        help="output directory (overrides [outputs] directory)")
    parser.add_argument('--seed-override', type=u64, default=None,
                        help="replace [species] seed")
    add_runtime_options(parser)


def add_runtime_options(parser: argparse.ArgumentParser) -> None:
    """--threads et --quiet, communs à toutes les sous-commandes."""
    parser.add_argument('--threads', type=positive_int, default=None,
                        help="FFT worker threads (default: DBO_ROM_THREADS)")
    parser.add_argument('--quiet', action='store_true', help="only log warnings and errors")


def load_config(args) -> RunConfig:
    """Configuration du fichier --config, graine éventuellement remplacée."""
    cfg = ConfigParser.load(args.config)
    if getattr(args, 'seed_override', None) is not None:
        cfg = cfg.with_section('species', seed=args.seed_override)
    return cfg


def open_catalog(args):
    """Catalogue des runs prêt à l'emploi, None s'il est désactivé ou indisponible."""
    if getattr(args, 'no_catalog', False):
        return None
    try:
        storage.reload()
    except SQLAlchemyError as exc:
        logger.warning("run catalog unavailable (%s): %s", Config.CATALOG_URL, exc)
        return None
    return storage
