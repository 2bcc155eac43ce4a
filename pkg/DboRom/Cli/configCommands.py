"""Sous-commandes validate-config et list-runs."""

import json
import sys

from Cli.common import add_common_options, add_runtime_options, load_config, open_catalog
from Models.runModel import RunRecord
from Models.tablesSchema import RunKind, RunStatus
from Utils.configParser import ConfigParser
from Utils.errors import ContractViolation


# ************************************************
# VALIDATE-CONFIG
# ************************************************
def validate_config(args) -> int:
    """Vérifie la configuration et affiche sa forme résolue."""
    cfg = load_config(args)
    sys.stdout.write(ConfigParser.render(cfg))
    return 0


# ************************************************
# LIST-RUNS
# ************************************************
def list_runs(args) -> int:
    """Affiche le catalogue des runs (tableau, ou une ligne JSON par run avec --json)."""
    catalog = open_catalog(args)
    if catalog is None:
        return 0
    filters = {}
    if args.kind:
        filters['kind'] = RunKind(args.kind)
    if args.status:
        filters['status'] = RunStatus(args.status)
    try:
        if args.id:
            record = catalog.get(RunRecord, args.id)
            if record is None:
                raise ContractViolation(f"no run with id {args.id}")
            records = [record]
        else:
            records = catalog.filter_by(RunRecord, **filters)
        if args.json:
            for rec in records:
                sys.stdout.write(json.dumps(rec.to_dict(), sort_keys=True) + "\n")
            return 0
        sys.stdout.write("id        kind status     N     n_s   r   t_final  error         out_dir\n")
        for rec in records:
            error = f"{rec.final_error:.6e}" if rec.final_error is not None else "-"
            rank = rec.rank if rec.rank is not None else "-"
            sys.stdout.write(f"{rec.id[:8]}  {rec.kind.value:<4} {rec.status.value:<10} "
                             f"{rec.n_points:<5} {rec.n_species:<5} {rank!s:<3} "
                             f"{rec.t_final:<8g} {error:<13} {rec.out_dir}\n")
    finally:
        catalog.close()
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser('validate-config', help="check a configuration and echo it")
    add_common_options(parser)
    parser.set_defaults(handler=validate_config)

    parser = subparsers.add_parser('list-runs', help="list the recorded runs")
    parser.add_argument('--kind', choices=[k.value for k in RunKind], default=None)
    parser.add_argument('--status', choices=[s.value for s in RunStatus], default=None)
    parser.add_argument('--id', default=None, help="show a single run (full id)")
    parser.add_argument('--json', action='store_true', help="one JSON object per run")
    add_runtime_options(parser)
    parser.set_defaults(handler=list_runs)
