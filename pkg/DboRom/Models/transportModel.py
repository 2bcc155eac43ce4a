"""
Transport Model - Composantes du second membre M(Phi)

Contient :
- DiffusivitySpec : diffusivités par espèce + facteur g(x, t)
- VelocityField : vitesse advectante (Burgers ou nulle)
- SourceModel : terme source S(Phi, rho, T) enfichable
- ProjectedRhs : projections M(Phi) Y et <M(Phi), U>
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional

import numpy as np

from Models.gridModel import Quasimatrix
from Utils.errors import ContractViolation

# g(x, t) -> facteur multiplicatif de toutes les diffusivités
ScalingHook = Callable[[np.ndarray, float], np.ndarray]

# (points (B, n_s), rho, T) -> sources (B, n_s)
SourceEvaluator = Callable[[np.ndarray, Optional[float], Optional[float]], np.ndarray]


@dataclass(frozen=True)
class DiffusivitySpec:
    """Diffusivités alpha_i >= 0 (matrice diagonale).

    Colonnes :
        - alpha : tableau (n_s,)
        - scaling : g(x, t) optionnel, multiplie tous les alpha_i
    """

    alpha: np.ndarray
    scaling: Optional[ScalingHook] = None

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float).ravel()
        if np.any(alpha < 0) or not np.all(np.isfinite(alpha)):
            raise ContractViolation("diffusivities must be finite and >= 0")
        object.__setattr__(self, 'alpha', alpha)

    @property
    def n_s(self) -> int:
        return self.alpha.size

    def scale_at(self, x: np.ndarray, t: float) -> Optional[np.ndarray]:
        """Valeurs de g(x, t) aux noeuds, None si g = 1."""
        if self.scaling is None:
            return None
        return np.asarray(self.scaling(x, t), dtype=float).reshape(-1)

    @classmethod
    def inverse_sqrt_law(cls, n_s: int, c: float) -> 'DiffusivitySpec':
        """Loi alpha_i = c / sqrt(i), i = 1..n_s."""
        return cls(c / np.sqrt(np.arange(1, n_s + 1)))

    @classmethod
    def constant(cls, n_s: int, c: float) -> 'DiffusivitySpec':
        """Diffusivités identiques alpha_i = c."""
        return cls(np.full(n_s, float(c)))


@dataclass(frozen=True)
class VelocityField:
    """Vitesse advectante au temps courant.

    Colonnes :
        - v : quasimatrice N x 1
        - nu : viscosité de Burgers
    """

    v: Quasimatrix
    nu: float = 0.0

    def __post_init__(self):
        if self.v.n_cols != 1:
            raise ContractViolation("velocity must be a single column")

    @property
    def is_zero(self) -> bool:
        return not np.any(self.v.values)


@dataclass(frozen=True)
class SourceModel:
    """Terme source enfichable.

    L'évaluateur reçoit un bloc de B vecteurs d'espèces (B, n_s) et
    retourne les sources (B, n_s). Un point isolé correspond à B = 1.
    """

    name: str
    evaluator: SourceEvaluator
    params: Dict[str, Any] = field(default_factory=dict)
    is_null: bool = False

    def evaluate(self, phi_points: np.ndarray, rho: Optional[float] = None,
                 T: Optional[float] = None) -> np.ndarray:
        """Évalue S sur un bloc de points."""
        return np.asarray(self.evaluator(phi_points, rho, T), dtype=float)


@dataclass(frozen=True)
class ProjectedRhs:
    """Projections du second membre sur les modes.

    Colonnes :
        - MY : M(Phi) Y, quasimatrice N x r
        - MtU : <M(Phi), U>, matrice n_s x r
        - alpha_Y : Y^T alpha Y (r x r)
        - alpha_scale : g(x, t) aux noeuds quand g != 1 (alpha_Y ponctuel = g(x) alpha_Y)
    """

    MY: Quasimatrix
    MtU: np.ndarray
    alpha_Y: np.ndarray
    alpha_scale: Optional[np.ndarray] = None
