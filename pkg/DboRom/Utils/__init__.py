"""Utils Module"""

from .errors import (DboRomError, UsageError, ConfigError, ContractViolation,
                     NumericalFailure, SnapshotFormatError, ObserverError)

__all__ = ['DboRomError', 'UsageError', 'ConfigError', 'ContractViolation',
           'NumericalFailure', 'SnapshotFormatError', 'ObserverError']
