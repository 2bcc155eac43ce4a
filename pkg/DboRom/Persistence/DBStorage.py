"""Couche d'accès au catalogue des runs (SQLAlchemy).

Le catalogue est distinct des répertoires de run : snapshots et
diagnostics restent des fichiers déterministes, la base ne fait
qu'indexer les exécutions.
"""

from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker, scoped_session
from contextlib import contextmanager
from typing import Optional, List, Type

from config import Config
from Models.tablesSchema import Base
from Models.runModel import RunRecord  # noqa: F401  (enregistre la table sur Base.metadata)


class DBStorage:
    """Gestionnaire de stockage du catalogue.

    Pattern Repository : interface unifiée pour toutes les opérations DB
    """

    __engine = None
    __session = None

    def __init__(self, database_url: Optional[str] = None):
        """Prépare la connexion (aucune connexion ouverte avant la première requête)."""
        database_url = database_url or Config.CATALOG_URL

        if database_url.startswith('sqlite'):
            self.__engine = create_engine(
                database_url,
                echo=False,
                connect_args={'check_same_thread': False}
            )
        else:
            self.__engine = create_engine(database_url, echo=False, pool_pre_ping=True)

        session_factory = sessionmaker(bind=self.__engine, expire_on_commit=False)
        self.__session = scoped_session(session_factory)

    def new(self, obj: Base):
        """Ajoute un nouvel objet à la session."""
        self.__session.add(obj)

    def save(self):
        """Commit les changements, rollback en cas d'échec."""
        try:
            self.__session.commit()
        except Exception as e:
            self.__session.rollback()
            raise e

    def reload(self):
        """Crée les tables manquantes et rouvre la session."""
        Base.metadata.create_all(self.__engine)
        self.__session = scoped_session(
            sessionmaker(bind=self.__engine, expire_on_commit=False)
        )

    def close(self):
        """Ferme la session."""
        self.__session.remove()

    # ********************************************************
    # RECHERCHE
    # ********************************************************

    def get(self, cls: Type[Base], id: str) -> Optional[Base]:
        """Récupère un objet par son ID (None si absent)."""
        if not cls or not id:
            return None
        return self.__session.query(cls).filter(cls.id == id).first()

    def filter_by(self, cls: Type[Base], **filters) -> List[Base]:
        """Filtre les objets selon critères.

        Exemple:
            storage.filter_by(RunRecord, kind=RunKind.DBO)
        """
        query = self.__session.query(cls)
        for key, value in filters.items():
            if hasattr(cls, key):
                query = query.filter(getattr(cls, key) == value)
        return query.order_by(cls.created_at).all()

    # ********************************************************
    # CONTEXT MANAGER POUR TRANSACTIONS
    # ********************************************************

    @contextmanager
    def transaction(self):
        """Context manager pour transactions.

        Usage:
            with storage.transaction():
                storage.new(RunRecord(...))
                # Auto-rollback si erreur
        """
        try:
            yield self.__session
            self.__session.commit()
        except Exception as e:
            self.__session.rollback()
            raise e


# ********************************************************
# INSTANCE GLOBALE (Pattern Singleton)
# ********************************************************

storage = DBStorage()
