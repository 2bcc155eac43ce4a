"""
errors.py - Hiérarchie d'exceptions de DboRom.

Chaque exception porte le code de sortie que la CLI renvoie :
- 1 : usage
- 2 : validation de configuration / contrat
- 3 : échec numérique ou d'exécution
"""

from typing import Optional


class DboRomError(Exception):
    """Erreur racine de l'application."""

    exit_code = 3


class UsageError(DboRomError):
    """Ligne de commande invalide."""

    exit_code = 1


class ConfigError(DboRomError, ValueError):
    """Fichier de configuration invalide.

    Args:
        message: Description du problème
        line: Numéro de ligne (1-based), 0 pour un contrôle croisé
    """

    exit_code = 2

    def __init__(self, message: str, line: int = 0, source: Optional[str] = None):
        self.line = line
        self.source = source
        where = f"{source or '<config>'}:{line}"
        super().__init__(f"{where}: {message}")


class ContractViolation(DboRomError, ValueError):
    """Pré-condition d'une opération non respectée (grilles, indices...)."""

    exit_code = 2


class NumericalFailure(DboRomError, ArithmeticError):
    """Valeur non finie produite pendant un calcul."""

    exit_code = 3

    def __init__(self, message: str, stage: Optional[int] = None,
                 species: Optional[int] = None, grid_index: Optional[int] = None):
        self.stage = stage
        self.species = species
        self.grid_index = grid_index
        super().__init__(message)


class SnapshotFormatError(DboRomError, ValueError):
    """Fichier snapshot corrompu ou incompatible."""

    exit_code = 3


class ObserverError(DboRomError):
    """Un observateur a échoué pendant l'intégration."""

    exit_code = 3

    def __init__(self, message: str, t: float):
        self.t = t
        super().__init__(f"observer failed at t={t!r}: {message}")
