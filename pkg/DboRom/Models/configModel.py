"""
Config Model - Configuration résolue d'une simulation

Contient :
- GridSection, TimeSection, ModelSection, SpeciesSection,
  ReductionSection, OutputsSection : une dataclass par section du fichier
- RunConfig : l'ensemble, avec les valeurs par défaut de la démonstration
  Burgers (N=512, dt=1/256, t_f=4, nu=0.01, n_s=1000, b=2, alpha_i=0.01/sqrt(i))
"""

import pathlib
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, Optional, Tuple

import numpy as np

from config import Config


@dataclass(frozen=True)
class GridSection:
    n_points: int = 512
    length: float = 2.0 * np.pi
    dealias: bool = False


@dataclass(frozen=True)
class TimeSection:
    """Pas de temps et cadences de sortie (en nombre de pas)."""

    dt: float = 1.0 / 256.0
    t_final: float = 4.0
    output_stride: int = 16
    ipca_stride: int = 16

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))


@dataclass(frozen=True)
class ModelSection:
    velocity: str = 'burgers'
    nu: float = 0.01
    alpha_law: str = 'c/sqrt(i)'
    alpha_c: float = 0.01
    alpha_list: Tuple[float, ...] = ()
    source: str = 'none'
    source_k: float = 1.0


@dataclass(frozen=True)
class SpeciesSection:
    n_species: int = 1000
    ic: str = 'spectrum'
    b: float = 2.0
    seed: int = 1234


@dataclass(frozen=True)
class ReductionSection:
    rank: int = 8
    gauge: str = 'zero'
    gauge_seed: int = 7
    gauge_scale: float = 0.1


@dataclass(frozen=True)
class OutputsSection:
    """Artefacts écrits ; profiles liste des espèces exportées (1-based)."""

    directory: str = field(default_factory=lambda: str(pathlib.Path(Config.OUTPUT_DIR) / 'default'))
    snapshots: bool = True
    diagnostics: bool = True
    fom_reference: bool = False
    profiles: Tuple[int, ...] = (1, 800)


@dataclass(frozen=True)
class RunConfig:
    """Configuration complète d'un run.

    source_path garde le fichier d'origine pour les messages d'erreur.
    """

    grid: GridSection = field(default_factory=GridSection)
    time: TimeSection = field(default_factory=TimeSection)
    model: ModelSection = field(default_factory=ModelSection)
    species: SpeciesSection = field(default_factory=SpeciesSection)
    reduction: ReductionSection = field(default_factory=ReductionSection)
    outputs: OutputsSection = field(default_factory=OutputsSection)
    source_path: Optional[str] = None

    # Ordre des sections dans le fichier
    SECTIONS = ('grid', 'time', 'model', 'species', 'reduction', 'outputs')

    def with_section(self, name: str, **changes) -> 'RunConfig':
        """Copie avec certains champs d'une section remplacés."""
        return replace(self, **{name: replace(getattr(self, name), **changes)})

    def as_sections(self) -> Dict[str, Dict[str, Any]]:
        """Sections -> {clé: valeur}, dans l'ordre de déclaration."""
        out = {}
        for name in self.SECTIONS:
            section = getattr(self, name)
            out[name] = {f.name: getattr(section, f.name) for f in fields(section)}
        return out

