"""Package des sous-commandes de la CLI DboRom."""

from . import runCommands, compareCommands, exportCommands, configCommands

__all__ = ['runCommands', 'compareCommands', 'exportCommands', 'configCommands']
