"""
Snapshot Model - Enregistrements des fichiers de snapshots

Contient :
- DboRecord : (t, U, Sigma, Y) tels que lus sur le disque
- FomRecord : (t, Phi)
"""

from dataclasses import dataclass

import numpy as np

from Models.dboModel import DboState
from Models.fomModel import FomState
from Models.gridModel import Grid1D, Quasimatrix


@dataclass(frozen=True)
class DboRecord:
    """Un enregistrement DBO1 (tableaux float64 natifs)."""

    t: float
    U: np.ndarray
    Sigma: np.ndarray
    Y: np.ndarray

    @property
    def dims(self):
        """(N, r, n_s)."""
        return self.U.shape[0], self.U.shape[1], self.Y.shape[0]

    def to_state(self, grid: Grid1D) -> DboState:
        return DboState(U=Quasimatrix(grid, self.U), Sigma=self.Sigma, Y=self.Y, t=self.t)


@dataclass(frozen=True)
class FomRecord:
    """Un enregistrement FOM1 ; Phi est N x n_s."""

    t: float
    phi: np.ndarray

    @property
    def dims(self):
        """(N, n_s)."""
        return self.phi.shape

    def to_state(self, grid: Grid1D) -> FomState:
        return FomState(phi=Quasimatrix(grid, self.phi), t=self.t)
