"""
DBO Model - Décomposition bi-orthonormale dynamique

Contient :
- DboState : le triplet {U, Sigma, Y} et le temps courant
- SkewGauge : matrices de jauge antisymétriques (phi, theta)
- CanonicalForm : forme canonique (SVD de Sigma)
- DiagnosticsRow : une ligne du fichier de diagnostics
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from Models.gridModel import Grid1D, Quasimatrix
from Utils.errors import ContractViolation, NumericalFailure

# Tolérance d'orthonormalité des modes (gram(U,U) = I, Y^T Y = I)
ORTH_TOL = 1e-8


@dataclass(frozen=True)
class DboState:
    """État compressé Phi ~ U Sigma Y^T.

    Colonnes :
        - U : modes spatiaux orthonormés (N x r)
        - Sigma : facteur de corrélation (r x r)
        - Y : modes d'espèces orthonormés (n_s x r)
        - t : temps courant
    """

    U: Quasimatrix
    Sigma: np.ndarray
    Y: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        Sigma = np.atleast_2d(np.asarray(self.Sigma, dtype=float))
        Y = np.asarray(self.Y, dtype=float)
        r = self.U.n_cols
        if Sigma.shape != (r, r):
            raise ContractViolation(f"Sigma must be {r}x{r}, got {Sigma.shape}")
        if Y.ndim != 2 or Y.shape[1] != r:
            raise ContractViolation(f"Y must have {r} columns, got {Y.shape}")
        if r > Y.shape[0] or r > self.U.grid.n_points:
            raise ContractViolation(f"rank {r} exceeds min(N, n_s)")
        if not (np.all(np.isfinite(Sigma)) and np.all(np.isfinite(Y))):
            raise NumericalFailure("non-finite Sigma or Y in DBO state")
        object.__setattr__(self, 'Sigma', Sigma)
        object.__setattr__(self, 'Y', Y)

    @property
    def grid(self) -> Grid1D:
        return self.U.grid

    @property
    def r(self) -> int:
        """Rang de la décomposition."""
        return self.U.n_cols

    @property
    def n_s(self) -> int:
        """Nombre d'espèces."""
        return self.Y.shape[0]

    def replace(self, **changes) -> 'DboState':
        """Copie de l'état avec certains champs remplacés."""
        fields = {'U': self.U, 'Sigma': self.Sigma, 'Y': self.Y, 't': self.t}
        fields.update(changes)
        return DboState(**fields)

    def __repr__(self) -> str:
        return f"<DboState(N={self.grid.n_points}, r={self.r}, n_s={self.n_s}, t={self.t:.6g})>"


@dataclass(frozen=True)
class SkewGauge:
    """Jauge antisymétrique de la rotation dans les sous-espaces.

    Construite via from_matrices : (A - A^T) / 2, donc antisymétrie exacte.
    """

    phi: np.ndarray
    theta: np.ndarray

    @classmethod
    def from_matrices(cls, a: np.ndarray, b: np.ndarray) -> 'SkewGauge':
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return cls(phi=(a - a.T) / 2.0, theta=(b - b.T) / 2.0)

    @classmethod
    def zero(cls, r: int) -> 'SkewGauge':
        """Jauge dynamiquement orthogonale phi = theta = 0."""
        return cls(phi=np.zeros((r, r)), theta=np.zeros((r, r)))

    @classmethod
    def random(cls, r: int, seed: int, scale: float = 1.0) -> 'SkewGauge':
        """Jauge aléatoire fixe, reproductible par graine."""
        rng = np.random.Generator(np.random.PCG64(seed))
        return cls.from_matrices(scale * rng.standard_normal((r, r)),
                                 scale * rng.standard_normal((r, r)))

    @property
    def is_zero(self) -> bool:
        return not (np.any(self.phi) or np.any(self.theta))


@dataclass(frozen=True)
class CanonicalForm:
    """Forme canonique : U~ = U R_U, Y~ = Y R_Y, Sigma = R_U diag(sigma~) R_Y^T."""

    U_tilde: Quasimatrix
    sigma_tilde: np.ndarray
    Y_tilde: np.ndarray
    R_U: np.ndarray
    R_Y: np.ndarray


@dataclass
class DiagnosticsRow:
    """Enregistrement par instant d'observation.

    relative_error reste None tant qu'aucune solution complète n'est disponible.
    """

    t: float
    sigma_tilde: np.ndarray
    orth_U: float
    orth_Y: float
    opt_residual: float
    sigma_condition: float
    relative_error: Optional[float] = None

    def as_values(self, with_error: bool) -> List[float]:
        """Valeurs dans l'ordre des colonnes du CSV."""
        values = [self.t, *map(float, self.sigma_tilde)]
        if with_error:
            values.append(np.nan if self.relative_error is None else self.relative_error)
        values += [self.orth_U, self.orth_Y, self.opt_residual, self.sigma_condition]
        return values
