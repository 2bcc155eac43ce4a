"""
Run Model - Entrée du catalogue des simulations

Hérite de BaseModel et ajoute :
- Colonnes spécifiques (kind, status, dimensions, erreur finale)
- Logique métier (complete, fail)
"""

from sqlalchemy import Column, String, Integer, Float, Text, Enum as SQLEnum, Index
from Models.baseModel import BaseModel
from Models.tablesSchema import RunKind, RunStatus


class RunRecord(BaseModel):
    """Un run DBO ou FOM lancé depuis la CLI.

    Colonnes :
        - kind : DBO ou FOM (Enum)
        - status : RUNNING, COMPLETED ou FAILED (Enum)
        - out_dir : Répertoire de sortie
        - config_path : Fichier de configuration source
        - n_points, n_species, rank : Dimensions
        - t_final : Temps final demandé
        - t_reached : Dernier temps intégré
        - final_error : Erreur relative finale (si une référence existe)
        - message : Message d'erreur éventuel
    """

    __tablename__ = 'runs'

    # ********************************************************
    # COLONNES SPÉCIFIQUES
    # ********************************************************

    kind = Column(SQLEnum(RunKind), nullable=False)
    status = Column(SQLEnum(RunStatus), nullable=False, default=RunStatus.RUNNING)
    out_dir = Column(String(500), nullable=False)
    config_path = Column(String(500), nullable=True)

    n_points = Column(Integer, nullable=False)
    n_species = Column(Integer, nullable=False)
    rank = Column(Integer, nullable=True)

    t_final = Column(Float, nullable=False)
    t_reached = Column(Float, nullable=True)
    final_error = Column(Float, nullable=True)
    message = Column(Text, nullable=True)

    __table_args__ = (
        Index('idx_runs_kind', 'kind'),
        Index('idx_runs_status', 'status'),
    )

    # ********************************************************
    # LOGIQUE MÉTIER
    # ********************************************************

    def complete(self, t_reached: float, final_error: float = None) -> None:
        """Marque le run comme terminé."""
        self.status = RunStatus.COMPLETED
        self.t_reached = t_reached
        self.final_error = final_error
        self.update_timestamp()

    def fail(self, message: str) -> None:
        """Marque le run comme échoué."""
        self.status = RunStatus.FAILED
        self.message = message[:2000]
        self.update_timestamp()

    def __repr__(self) -> str:
        kind = self.kind.value if self.kind else 'None'
        status = self.status.value if self.status else 'None'
        return f"<RunRecord(id={self.id[:8] if self.id else 'None'}, kind={kind}, status={status})>"
