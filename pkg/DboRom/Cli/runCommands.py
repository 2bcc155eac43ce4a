"""Sous-commandes run-dbo et run-fom."""

import logging

from Cli.common import add_common_options, load_config, open_catalog
from Services.simulationService import SimulationService

logger = logging.getLogger(__name__)


# ************************************************
# RUN-DBO
# ************************************************
def run_dbo(args) -> int:
    """Intègre la décomposition DBO configurée."""
    cfg = load_config(args)
    catalog = open_catalog(args)
    try:
        summary = SimulationService.run_dbo(cfg, out_dir=args.out, resume=args.resume, catalog=catalog)
    finally:
        if catalog is not None:
            catalog.close()
    if summary.final_error is not None:
        logger.info("final relative error %.6e", summary.final_error)
    return 0


# ************************************************
# RUN-FOM
# ************************************************
def run_fom(args) -> int:
    """Intègre la solution complète configurée."""
    cfg = load_config(args)
    catalog = open_catalog(args)
    try:
        SimulationService.run_fom(cfg, out_dir=args.out, resume=args.resume, catalog=catalog)
    finally:
        if catalog is not None:
            catalog.close()
    return 0


def register(subparsers) -> None:
    for name, handler, help_text in (
        ('run-dbo', run_dbo, "integrate the low-rank DBO model"),
        ('run-fom', run_fom, "integrate the full-order species field"),
    ):
        parser = subparsers.add_parser(name, help=help_text)
        add_common_options(parser)
        parser.add_argument('--resume', action='store_true',
                            help="continue from the last snapshot in the output directory")
        parser.add_argument('--no-catalog', action='store_true', help="do not record the run")
        parser.set_defaults(handler=handler)
