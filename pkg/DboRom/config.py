"""Configuration centralisée de l'application DboRom."""
import os
from dotenv import load_dotenv

load_dotenv()  # Charge les variables depuis .env


class Config:
    """Configuration centralisée du processus (variables d'environnement).

    La configuration d'une simulation (grille, pas de temps, modèle...) vit
    dans un fichier de run, voir Utils/configParser.py.
    """

    # Parallélisme des FFT (scipy.fft workers)
    THREADS = int(os.getenv('DBO_ROM_THREADS', '1'))

    # Logs
    LOG_LEVEL = os.getenv('DBO_ROM_LOG_LEVEL', 'INFO')

    # Catalogue des runs (SQLAlchemy)
    CATALOG_URL = os.getenv('DBO_ROM_CATALOG_URL', 'sqlite:///dbo_runs.db')

    # Boucle source en flux : longueur des blocs de points de grille
    SOURCE_BLOCK = int(os.getenv('DBO_ROM_SOURCE_BLOCK', '1024'))

    # Répertoire de sortie par défaut
    OUTPUT_DIR = os.getenv('DBO_ROM_OUTPUT_DIR', 'runs')

    @classmethod
    def validate(cls):
        """Vérifie que les valeurs numériques sont utilisables."""
        for key in ('THREADS', 'SOURCE_BLOCK'):
            if getattr(cls, key) < 1:
                raise ValueError(f"{key} must be a positive integer")
