"""
BaseModel - Classe de base des tables du catalogue

Fournit :
- Colonnes communes (id, created_at, updated_at)
- Méthodes utilitaires (to_dict, update_timestamp)
- Héritage SQLAlchemy via Base
"""

from sqlalchemy import Column, String, DateTime
from Models.tablesSchema import Base
from datetime import datetime, timezone
from typing import Dict, Any
import uuid


def _utcnow() -> datetime:
    return datetime.now(timezone.utc).replace(tzinfo=None)


class BaseModel(Base):
    """Classe de base pour les tables du catalogue.

    Colonnes automatiques :
        - id : UUID unique (primary key)
        - created_at : Date de création
        - updated_at : Date de dernière modification
    """

    __abstract__ = True  # Pas de table propre

    # ********************************************************
    # COLONNES COMMUNES
    # ********************************************************

    id = Column(String(60), primary_key=True, default=lambda: str(uuid.uuid4()))
    created_at = Column(DateTime, default=_utcnow, nullable=False)
    updated_at = Column(DateTime, default=_utcnow, onupdate=_utcnow, nullable=False)

    # ********************************************************
    # MÉTHODES UTILITAIRES
    # ********************************************************

    def to_dict(self) -> Dict[str, Any]:
        """Sérialise le modèle en dictionnaire (dates ISO, enums par valeur)."""
        data = {}
        for column in self.__table__.columns:
            value = getattr(self, column.name)
            if isinstance(value, datetime):
                data[column.name] = value.isoformat()
            elif hasattr(value, 'value'):
                data[column.name] = value.value
            else:
                data[column.name] = value
        return data

    def update_timestamp(self) -> None:
        """Met à jour le timestamp de modification."""
        self.updated_at = _utcnow()

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__}(id={self.id[:8] if self.id else 'None'})>"
