"""Script d'initialisation du catalogue des runs."""
import os
import sys

from sqlalchemy import create_engine

from config import Config
from Models.tablesSchema import Base
from Models.runModel import RunRecord  # noqa: F401  (enregistre la table sur Base.metadata)

engine = create_engine(Config.CATALOG_URL, echo=False)

# Protection : --reset requis pour effacer les tables
if '--reset' in sys.argv:
    print("WARNING: suppression de toutes les tables...")
    confirm = input("Confirmer ? (oui/non) : ")
    if confirm.strip().lower() == 'oui':
        Base.metadata.drop_all(engine)
        print("Tables supprimées.")
    else:
        print("Annulé.")
        sys.exit(0)

print("Création des tables...")
Base.metadata.create_all(engine)
print("Catalogue initialisé avec succès !")
if Config.CATALOG_URL.startswith('sqlite:///'):
    print(f"   Fichier : {os.path.abspath(Config.CATALOG_URL[len('sqlite:///'):])}")
