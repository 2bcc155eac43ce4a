"""
diagnosticsWriter.py - Tables CSV en ajout (diagnostics, I-PCA, figures).

L'en-tête est écrit une seule fois, à la création du fichier ; les réels
sont imprimés avec 17 chiffres significatifs, ce qui suffit à relire
exactement chaque float64.
"""

import csv
import logging
import pathlib
from typing import List, Sequence, Tuple, Union

import numpy as np

from Utils.errors import ContractViolation

logger = logging.getLogger(__name__)

PathLike = Union[str, pathlib.Path]


def format_number(value) -> str:
    """Réel sur 17 chiffres significatifs, entier tel quel."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return '%.17g' % float(value)


def diagnostics_header(r: int, with_error: bool) -> List[str]:
    """t, sigma_tilde_1..r, [relative_error], orth_U, orth_Y, opt_residual, sigma_condition."""
    header = ['t'] + [f'sigma_tilde_{i}' for i in range(1, r + 1)]
    if with_error:
        header.append('relative_error')
    return header + ['orth_U', 'orth_Y', 'opt_residual', 'sigma_condition']


class TableWriter:
    """Écrivain CSV à en-tête stable.

    Args:
        path: Fichier cible
        header: Noms de colonnes
        append: Conserver les lignes existantes (l'en-tête doit correspondre)
    """

    def __init__(self, path: PathLike, header: Sequence[str], append: bool = False):
        self.path = pathlib.Path(path)
        self.header = list(header)
        self.rows_written = 0
        self.path.parent.mkdir(parents=True, exist_ok=True)

        if append and self.path.exists() and self.path.stat().st_size > 0:
            with open(self.path, newline='') as f:
                existing = next(csv.reader(f), [])
            if existing != self.header:
                raise ContractViolation(f"{self.path}: header {existing} does not match {self.header}")
        else:
            with open(self.path, 'w', newline='') as f:
                csv.writer(f, lineterminator='\n').writerow(self.header)

    def write_row(self, values: Sequence) -> None:
        """Ajoute une ligne (autant de valeurs que de colonnes)."""
        if len(values) != len(self.header):
            raise ContractViolation(f"{self.path.name}: row has {len(values)} values, "
                                    f"header has {len(self.header)}")
        with open(self.path, 'a', newline='') as f:
            csv.writer(f, lineterminator='\n').writerow([format_number(v) for v in values])
        self.rows_written += 1


class TableReader:
    """Relecture des tables écrites par TableWriter."""

    @staticmethod
    def read(path: PathLike) -> Tuple[List[str], np.ndarray]:
        """Retourne (en-tête, valeurs) ; valeurs de forme (lignes, colonnes)."""
        path = pathlib.Path(path)
        with open(path, newline='') as f:
            reader = csv.reader(f)
            header = next(reader, [])
            rows = [[float(v) for v in row] for row in reader if row]
        values = np.array(rows, dtype=float).reshape(len(rows), len(header))
        return header, values

    @staticmethod
    def column(header: Sequence[str], values: np.ndarray, name: str) -> np.ndarray:
        if name not in header:
            raise ContractViolation(f"column '{name}' not found")
        return values[:, list(header).index(name)]

    @staticmethod
    def truncate_after(path: PathLike, t: float) -> int:
        """Retire les lignes de temps > t et une dernière ligne incomplète.

        Returns:
            Nombre de lignes de valeurs gardées
        """
        path = pathlib.Path(path)
        with open(path, newline='') as f:
            lines = f.read().splitlines(keepends=True)
        width = lines[0].count(',') + 1
        kept = [lines[0]] + [line for line in lines[1:]
                             if line.endswith('\n') and line.count(',') + 1 == width
                             and float(line.split(',', 1)[0]) <= t]
        with open(path, 'w', newline='') as f:
            f.writelines(kept)
        logger.debug("%s: kept %d rows up to t=%r", path.name, len(kept) - 1, t)
        return len(kept) - 1
