"""Sous-commande compare."""

import pathlib

from Cli.common import add_runtime_options
from Services.figureService import FigureService


def compare(args) -> int:
    """Erreurs et écarts de spectre entre un run DBO et un run FOM."""
    FigureService.compare(args.dbo_run, args.fom_run, out_dir=args.out)
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser('compare', help="compare a DBO run against a FOM run")
    parser.add_argument('--dbo-run', type=pathlib.Path, required=True, help="DBO run directory")
    parser.add_argument('--fom-run', type=pathlib.Path, required=True, help="FOM run directory")
    parser.add_argument('--out', type=pathlib.Path, default=None,
                        help="where to write the tables (default: the DBO run directory)")
    add_runtime_options(parser)
    parser.set_defaults(handler=compare)
