"""Sous-commande export-figures."""

import pathlib

from Cli.common import add_common_options, load_config
from Services.figureService import FigureService


def export_figures(args) -> int:
    """Données en colonnes des figures (profils, erreurs, spectres, modes)."""
    cfg = load_config(args)
    out = args.out or pathlib.Path(cfg.outputs.directory) / 'figures'
    FigureService.export_figures(args.dbo_run, args.fom_run, out, species=cfg.outputs.profiles)
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser('export-figures', help="export figure data as text columns")
    add_common_options(parser)
    parser.add_argument('--dbo-run', type=pathlib.Path, action='append', required=True,
                        help="DBO run directory (repeat once per rank)")
    parser.add_argument('--fom-run', type=pathlib.Path, required=True, help="FOM run directory")
    parser.set_defaults(handler=export_figures)
