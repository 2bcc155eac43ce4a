"""
Composite Model - État composite intégré par Runge-Kutta

Un CompositeState est une collection ordonnée de blocs nommés (U, Sigma,
Y, v, phi...) qui supporte l'addition pondérée bloc par bloc.
"""

from dataclasses import dataclass
from typing import Dict, Iterator, Sequence

import numpy as np

from Utils.errors import ContractViolation


@dataclass(frozen=True)
class CompositeState:
    """Blocs nommés d'un état et temps courant."""

    blocks: Dict[str, np.ndarray]
    t: float = 0.0

    def __getitem__(self, name: str) -> np.ndarray:
        return self.blocks[name]

    def __contains__(self, name: str) -> bool:
        return name in self.blocks

    def __iter__(self) -> Iterator[str]:
        return iter(self.blocks)

    def _check_layout(self, other: 'CompositeState') -> None:
        if list(self.blocks) != list(other.blocks):
            raise ContractViolation(f"block layout mismatch: {list(self.blocks)} vs {list(other.blocks)}")
        for name, value in self.blocks.items():
            if value.shape != other.blocks[name].shape:
                raise ContractViolation(f"block '{name}' changed shape")

    def combine(self, coeffs: Sequence[float], increments: Sequence['CompositeState'],
                t: float) -> 'CompositeState':
        """Retourne self + sum_i coeffs[i] * increments[i], bloc par bloc."""
        for inc in increments:
            self._check_layout(inc)
        blocks = {}
        for name, value in self.blocks.items():
            acc = sum(c * inc.blocks[name] for c, inc in zip(coeffs, increments))
            blocks[name] = value + acc
        return CompositeState(blocks, t)

    def first_non_finite(self):
        """Nom du premier bloc non fini, None si tout est fini."""
        for name, value in self.blocks.items():
            if not np.all(np.isfinite(value)):
                return name
        return None

    def replace(self, t: float = None, **blocks) -> 'CompositeState':
        """Copie avec certains blocs (et/ou le temps) remplacés."""
        merged = dict(self.blocks)
        for name, value in blocks.items():
            if name not in merged:
                raise ContractViolation(f"unknown block '{name}'")
            merged[name] = value
        return CompositeState(merged, self.t if t is None else t)
