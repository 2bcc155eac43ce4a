"""
FOM Model - Solution complète et PCA instantanée

Contient :
- FomState : champ complet Phi (N x n_s) au temps t
- IpcaResult : SVD instantanée de Phi
- SpectrumComparison : écarts DBO / I-PCA par mode
"""

from dataclasses import dataclass

import numpy as np

from Models.gridModel import Quasimatrix


@dataclass(frozen=True)
class FomState:
    """Champ complet des espèces."""

    phi: Quasimatrix
    t: float = 0.0

    @property
    def n_s(self) -> int:
        return self.phi.n_cols


@dataclass(frozen=True)
class IpcaResult:
    """SVD pondérée Phi = U_hat diag(singular_values) Y_hat^T.

    Colonnes :
        - singular_values : min(N, n_s) valeurs décroissantes
        - U_hat : fonctions singulières à gauche (orthonormées pour gram)
        - Y_hat : vecteurs singuliers à droite
        - t : temps du champ
    """

    singular_values: np.ndarray
    U_hat: Quasimatrix
    Y_hat: np.ndarray
    t: float

    def truncation_error(self, r: int) -> float:
        """Erreur relative de la troncature de rang r (Eckart-Young)."""
        total = float(np.sum(self.singular_values ** 2))
        if total == 0.0:
            return 0.0
        return float(np.sqrt(np.sum(self.singular_values[r:] ** 2) / total))


@dataclass(frozen=True)
class SpectrumComparison:
    """Écarts relatifs |sigma~_i - sigma^_i| / sigma^_i et angles principaux."""

    gaps: np.ndarray
    angles: np.ndarray
    t: float
