"""
snapshotStorage.py - Fichiers binaires de snapshots DBO1 / FOM1.

Format (petit-boutiste, quelle que soit la plateforme) :
- en-tête : 4 octets magiques ("DBO1" ou "FOM1") puis la version u32
- DBO1, par enregistrement : t f64, (N, r, n_s) u64, U en ordre colonne,
  Sigma puis Y en ordre ligne, tous en f64
- FOM1, par enregistrement : t f64, (N, n_s) u64, Phi en ordre colonne

Un fichier réduit à son en-tête contient zéro enregistrement.
"""

import logging
import pathlib
import struct
from typing import BinaryIO, Callable, Iterator, List, Optional, Union

import numpy as np

from Models.dboModel import DboState
from Models.snapshotModel import DboRecord, FomRecord
from Utils.errors import SnapshotFormatError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
DBO_MAGIC = b'DBO1'
FOM_MAGIC = b'FOM1'

_HEADER = struct.Struct('<4sI')
_TIME = struct.Struct('<d')
_F64 = np.dtype('<f8')

# Au-delà, une dimension est considérée comme corrompue
MAX_DIM = 2 ** 40

PathLike = Union[str, pathlib.Path]


class SnapshotStorage:
    """Écriture en ajout et lecture des fichiers de snapshots."""

    # ********************************************************
    # EN-TÊTE
    # ********************************************************

    @staticmethod
    def create(path: PathLike, magic: bytes) -> None:
        """Crée (ou tronque) un fichier ne contenant que l'en-tête."""
        path = pathlib.Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'wb') as f:
            f.write(_HEADER.pack(magic, FORMAT_VERSION))

    @staticmethod
    def _check_header(f: BinaryIO, magic: bytes, path) -> None:
        raw = f.read(_HEADER.size)
        if len(raw) < _HEADER.size:
            raise SnapshotFormatError(f"{path}: truncated header")
        found, version = _HEADER.unpack(raw)
        if found != magic:
            raise SnapshotFormatError(f"{path}: bad magic {found!r}, expected {magic!r}")
        if version != FORMAT_VERSION:
            raise SnapshotFormatError(f"{path}: unsupported format version {version}")

    @staticmethod
    def _open_append(path: PathLike, magic: bytes) -> BinaryIO:
        path = pathlib.Path(path)
        if not path.exists() or path.stat().st_size == 0:
            SnapshotStorage.create(path, magic)
        else:
            with open(path, 'rb') as f:
                SnapshotStorage._check_header(f, magic, path)
        return open(path, 'ab')

    # ********************************************************
    # ÉCRITURE
    # ********************************************************

    @staticmethod
    def write_dbo(path: PathLike, state: DboState) -> int:
        """Ajoute un enregistrement (t, U, Sigma, Y).

        Returns:
            Nombre d'octets écrits
        """
        N, r, n_s = state.grid.n_points, state.r, state.n_s
        payload = b''.join((
            _TIME.pack(float(state.t)),
            struct.pack('<3Q', N, r, n_s),
            np.asarray(state.U.values, dtype=_F64).tobytes(order='F'),
            np.asarray(state.Sigma, dtype=_F64).tobytes(order='C'),
            np.asarray(state.Y, dtype=_F64).tobytes(order='C'),
        ))
        with SnapshotStorage._open_append(path, DBO_MAGIC) as f:
            f.write(payload)
        return len(payload)

    @staticmethod
    def write_fom(path: PathLike, t: float, phi: np.ndarray) -> int:
        """Ajoute un enregistrement (t, Phi) ; Phi est N x n_s."""
        phi = np.asarray(phi, dtype=_F64)
        if phi.ndim == 1:
            phi = phi[:, None]
        N, n_s = phi.shape
        payload = b''.join((
            _TIME.pack(float(t)),
            struct.pack('<2Q', N, n_s),
            phi.tobytes(order='F'),
        ))
        with SnapshotStorage._open_append(path, FOM_MAGIC) as f:
            f.write(payload)
        return len(payload)

    # ********************************************************
    # LECTURE
    # ********************************************************

    @staticmethod
    def _read_exact(f: BinaryIO, size: int, path, what: str) -> bytes:
        raw = f.read(size)
        if len(raw) != size:
            raise SnapshotFormatError(f"{path}: truncated record ({what})")
        return raw

    @staticmethod
    def _read_array(f: BinaryIO, shape: tuple, order: str, path, what: str,
                    load: bool) -> Optional[np.ndarray]:
        size = int(np.prod(shape)) * _F64.itemsize
        if not load:
            f.seek(size, 1)
            return None
        raw = SnapshotStorage._read_exact(f, size, path, what)
        return np.frombuffer(raw, dtype=_F64).reshape(shape, order=order).astype(np.float64)

    @staticmethod
    def _record_values(magic: bytes, dims: tuple, path) -> int:
        """Nombre de f64 d'un enregistrement après ses dimensions."""
        if any(d == 0 or d > MAX_DIM for d in dims):
            raise SnapshotFormatError(f"{path}: dimension overflow or zero dimension {dims}")
        if magic == DBO_MAGIC:
            N, r, n_s = dims
            if r > min(N, n_s):
                raise SnapshotFormatError(f"{path}: rank {r} exceeds min({N}, {n_s})")
            return N * r + r * r + n_s * r
        N, n_s = dims
        return N * n_s

    @staticmethod
    def _iter(path: PathLike, magic: bytes, wanted: Optional[Callable[[int], bool]]):
        """Parcours générique ; seuls les enregistrements `wanted` sont chargés.

        Raises:
            SnapshotFormatError: Magique, version, troncature ou dimensions invalides
        """
        path = pathlib.Path(path)
        total = path.stat().st_size
        n_dims = 3 if magic == DBO_MAGIC else 2
        with open(path, 'rb') as f:
            SnapshotStorage._check_header(f, magic, path)
            index = 0
            while True:
                raw_t = f.read(_TIME.size)
                if not raw_t:
                    return
                if len(raw_t) != _TIME.size:
                    raise SnapshotFormatError(f"{path}: truncated record (time)")
                (t,) = _TIME.unpack(raw_t)
                dims = struct.unpack(f'<{n_dims}Q',
                                     SnapshotStorage._read_exact(f, 8 * n_dims, path, 'dims'))
                n_values = SnapshotStorage._record_values(magic, dims, path)
                if 8 * n_values > total - f.tell():
                    raise SnapshotFormatError(f"{path}: record #{index} at t={t!r} is truncated")

                load = wanted is None or wanted(index)
                if magic == DBO_MAGIC:
                    N, r, n_s = dims
                    U = SnapshotStorage._read_array(f, (N, r), 'F', path, 'U', load)
                    Sigma = SnapshotStorage._read_array(f, (r, r), 'C', path, 'Sigma', load)
                    Y = SnapshotStorage._read_array(f, (n_s, r), 'C', path, 'Y', load)
                    yield DboRecord(t=t, U=U, Sigma=Sigma, Y=Y)
                else:
                    N, n_s = dims
                    phi = SnapshotStorage._read_array(f, (N, n_s), 'F', path, 'Phi', load)
                    yield FomRecord(t=t, phi=phi)
                index += 1

    @staticmethod
    def iter_dbo(path: PathLike, load: bool = True) -> Iterator[DboRecord]:
        """Parcourt les enregistrements d'un fichier DBO1."""
        return SnapshotStorage._iter(path, DBO_MAGIC, None if load else (lambda i: False))

    @staticmethod
    def iter_fom(path: PathLike, load: bool = True) -> Iterator[FomRecord]:
        """Parcourt les enregistrements d'un fichier FOM1."""
        return SnapshotStorage._iter(path, FOM_MAGIC, None if load else (lambda i: False))

    @staticmethod
    def read_dbo(path: PathLike) -> List[DboRecord]:
        return list(SnapshotStorage.iter_dbo(path))

    @staticmethod
    def read_fom(path: PathLike) -> List[FomRecord]:
        return list(SnapshotStorage.iter_fom(path))

    @staticmethod
    def times(path: PathLike, magic: bytes) -> List[float]:
        """Temps des enregistrements, sans charger les tableaux."""
        return [rec.t for rec in SnapshotStorage._iter(path, magic, lambda i: False)]

    @staticmethod
    def record_at(path: PathLike, magic: bytes, index: int):
        """Enregistrement d'indice donné (négatif : depuis la fin), seul chargé.

        Raises:
            SnapshotFormatError: Indice hors bornes
        """
        n = len(SnapshotStorage.times(path, magic))
        position = index + n if index < 0 else index
        if not 0 <= position < n:
            raise SnapshotFormatError(f"{path}: no record #{index} ({n} records)")
        for i, rec in enumerate(SnapshotStorage._iter(path, magic, lambda i: i == position)):
            if i == position:
                return rec

    @staticmethod
    def truncate_after(path: PathLike, magic: bytes, t: float) -> int:
        """Supprime les enregistrements de temps > t (reprise).

        Returns:
            Nombre d'enregistrements conservés
        """
        path = pathlib.Path(path)
        n_dims = 3 if magic == DBO_MAGIC else 2
        keep = 0
        for rec in SnapshotStorage._iter(path, magic, lambda i: False):
            if rec.t > t:
                break
            keep += 1
        with open(path, 'rb') as f:
            SnapshotStorage._check_header(f, magic, path)
            for _ in range(keep):
                f.seek(_TIME.size, 1)
                dims = struct.unpack(f'<{n_dims}Q', f.read(8 * n_dims))
                f.seek(8 * SnapshotStorage._record_values(magic, dims, path), 1)
            offset = f.tell()
        with open(path, 'r+b') as f:
            f.truncate(offset)
        logger.info("%s: kept %d records up to t=%r", path.name, keep, t)
        return keep

    @staticmethod
    def drop_partial_tail(path: PathLike, magic: bytes) -> int:
        """Retire un dernier enregistrement incomplet (écriture interrompue).

        Le fichier est coupé à la fin du dernier enregistrement complet ; les
        enregistrements complets ne sont pas relus.

        Returns:
            Nombre d'octets retirés

        Raises:
            SnapshotFormatError: En-tête ou dimensions invalides
        """
        path = pathlib.Path(path)
        total = path.stat().st_size
        n_dims = 3 if magic == DBO_MAGIC else 2
        head_size = _TIME.size + 8 * n_dims
        with open(path, 'rb') as f:
            SnapshotStorage._check_header(f, magic, path)
            end = f.tell()
            while True:
                head = f.read(head_size)
                if len(head) < head_size:
                    break
                dims = struct.unpack_from(f'<{n_dims}Q', head, _TIME.size)
                size = 8 * SnapshotStorage._record_values(magic, dims, path)
                if f.tell() + size > total:
                    break
                f.seek(size, 1)
                end = f.tell()
        removed = total - end
        if removed:
            with open(path, 'r+b') as f:
                f.truncate(end)
            logger.warning("%s: dropped %d bytes of an incomplete trailing record", path.name, removed)
        return removed
