"""
Table Schema - Base SQLAlchemy et Enums.

Contient UNIQUEMENT :
- Base : Classe de base SQLAlchemy.
- Enums : Types énumérés pour RunKind et RunStatus.

Le catalogue des runs (RunRecord) est dans runModel.py et hérite de
BaseModel qui hérite lui-même de Base.
"""

from sqlalchemy.orm import declarative_base
import enum

# ****************************************************************************
# BASE SQLALCHEMY
# ****************************************************************************
Base = declarative_base()


# ****************************************************************************
# ENUMS
# ****************************************************************************
class RunKind(enum.Enum):
    """Type de simulation.

    - DBO : modèle réduit bi-orthonormal.
    - FOM : solution complète.
    """

    DBO = 'dbo'
    FOM = 'fom'


class RunStatus(enum.Enum):
    """État d'un run.

    - RUNNING : En cours.
    - COMPLETED : Terminé.
    - FAILED : Interrompu par une erreur.
    """

    RUNNING = 'running'
    COMPLETED = 'completed'
    FAILED = 'failed'
