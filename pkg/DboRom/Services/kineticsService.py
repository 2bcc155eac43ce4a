"""
kineticsService.py - Registre des modèles de source S(Phi, rho, T).

Modèles intégrés :
- "none"    : pas de réaction (S = 0)
- "toy_abc" : réaction irréversible A + B -> C, espèces inertes au-delà
"""

from typing import Any, Callable, Dict, Optional

import numpy as np

from Models.transportModel import SourceModel
from Utils.errors import ContractViolation


class KineticsService:
    """Fabrique et registre des modèles de source."""

    # nom -> fabrique(**params) -> SourceModel
    registry: Dict[str, Callable[..., SourceModel]] = {}

    @classmethod
    def register(cls, name: str):
        """Décorateur d'enregistrement d'une fabrique de source."""
        def decorator(factory):
            cls.registry[name] = factory
            return factory
        return decorator

    @classmethod
    def build(cls, name: str, params: Optional[Dict[str, Any]] = None) -> SourceModel:
        """Instancie un modèle de source par son nom.

        Raises:
            ContractViolation: Si le nom est inconnu
        """
        factory = cls.registry.get(name)
        if factory is None:
            raise ContractViolation(
                f"unknown source model '{name}' (known: {', '.join(sorted(cls.registry))})"
            )
        return factory(**(params or {}))


@KineticsService.register('none')
def null_source() -> SourceModel:
    """Source nulle, la boucle en flux est alors court-circuitée."""
    return SourceModel(name='none', evaluator=lambda phi, rho, T: np.zeros_like(phi),
                       params={}, is_null=True)


@KineticsService.register('toy_abc')
def toy_kinetics(k: float = 1.0, a: int = 0, b: int = 1, c: int = 2) -> SourceModel:
    """Réaction A + B -> C de constante k.

    S_A = S_B = -k phi_A phi_B et S_C = +k phi_A phi_B ; les autres espèces
    sont inertes.

    Args:
        k: Constante de vitesse
        a, b, c: Indices (0-based) des espèces A, B et C
    """
    if len({a, b, c}) != 3:
        raise ContractViolation("toy_abc needs three distinct species indices")

    def evaluate(phi: np.ndarray, rho: Optional[float], T: Optional[float]) -> np.ndarray:
        phi = np.atleast_2d(phi)
        if phi.shape[1] <= max(a, b, c):
            raise ContractViolation(f"toy_abc needs at least {max(a, b, c) + 1} species")
        rate = k * phi[:, a] * phi[:, b]
        out = np.zeros_like(phi)
        out[:, a] = -rate
        out[:, b] = -rate
        out[:, c] = rate
        return out

    return SourceModel(name='toy_abc', evaluator=evaluate, params={'k': k, 'a': a, 'b': b, 'c': c})
