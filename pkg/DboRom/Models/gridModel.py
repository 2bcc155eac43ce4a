"""
Grid Model - Grille périodique 1D et quasimatrices

Contient :
- Grid1D : grille équirépartie sur [0, L)
- Quasimatrix : champ N x k échantillonné sur une grille
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from Utils.errors import ContractViolation, NumericalFailure


@dataclass(frozen=True)
class Grid1D:
    """Grille périodique équirépartie.

    Colonnes :
        - n_points : nombre de points N (pair)
        - length : longueur L du domaine [0, L)
        - dealias : filtre 2/3 sur les produits non linéaires
    """

    n_points: int
    length: float
    dealias: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.n_points < 2 or self.n_points % 2:
            raise ContractViolation(f"n_points must be even and >= 2, got {self.n_points}")
        if not self.length > 0:
            raise ContractViolation(f"length must be positive, got {self.length}")

    @property
    def dx(self) -> float:
        """Pas de grille constant L/N."""
        return self.length / self.n_points

    @cached_property
    def nodes(self) -> np.ndarray:
        """Coordonnées x_j = j L / N."""
        return np.arange(self.n_points) * self.dx

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Nombres d'onde 2 pi m / L pour m = 0..N/2 (transformée réelle)."""
        return 2.0 * np.pi / self.length * np.arange(self.n_points // 2 + 1)

    def __repr__(self) -> str:
        return f"<Grid1D(N={self.n_points}, L={self.length:.6g})>"


@dataclass(frozen=True)
class Quasimatrix:
    """Matrice dont une dimension indexe l'espace.

    Colonnes :
        - grid : grille partagée par toutes les colonnes
        - values : tableau N x k, colonne j = champ j aux noeuds
    """

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] != self.grid.n_points:
            raise ContractViolation(
                f"values of shape {values.shape} do not match {self.grid!r}"
            )
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))[0]
            raise NumericalFailure(
                f"non-finite value at grid index {bad[0]}, column {bad[1]}",
                species=int(bad[1]), grid_index=int(bad[0]),
            )
        object.__setattr__(self, 'values', values)

    @property
    def n_cols(self) -> int:
        """Nombre de colonnes k."""
        return self.values.shape[1]

    def column(self, j: int) -> 'Quasimatrix':
        """Retourne la colonne j comme quasimatrice N x 1."""
        return Quasimatrix(self.grid, self.values[:, j:j + 1])

    def with_values(self, values: np.ndarray) -> 'Quasimatrix':
        """Nouvelle quasimatrice sur la même grille."""
        return Quasimatrix(self.grid, values)

    def __repr__(self) -> str:
        return f"<Quasimatrix(N={self.grid.n_points}, k={self.n_cols})>"
