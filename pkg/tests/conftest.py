import numpy as np
import pytest

from Models.configModel import RunConfig
from Models.dboModel import DboState
from Models.gridModel import Grid1D, Quasimatrix
from Utils.configParser import ConfigParser


def _orthonormal(rng, n, r):
    Q, _ = np.linalg.qr(rng.standard_normal((n, r)))
    return Q


def _random_state(rng, grid, n_s, r, t=0.0, smooth=True):
    """Etat DBO aléatoire orthonormé, Sigma bien conditionnée (sv dans [1, 2])."""
    w = np.sqrt(grid.dx)
    if smooth:
        # combinaisons de quelques modes de Fourier
        x = grid.nodes
        k = 2.0 * np.pi / grid.length
        basis = np.column_stack([f(m * k * x) for m in range(1, 5) for f in (np.sin, np.cos)])
        raw = basis @ rng.standard_normal((basis.shape[1], r))
    else:
        raw = rng.standard_normal((grid.n_points, r))
    Q, _ = np.linalg.qr(w * raw)
    U = Quasimatrix(grid, Q / w)
    Sigma = _orthonormal(rng, r, r) @ np.diag(np.linspace(2.0, 1.0, r)) @ _orthonormal(rng, r, r).T
    return DboState(U=U, Sigma=Sigma, Y=_orthonormal(rng, n_s, r), t=t)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(20240611))


@pytest.fixture
def grid():
    return Grid1D(32, 2.0 * np.pi)


@pytest.fixture
def make_state():
    """Fabrique d'états : make_state(rng, grid, n_s, r, t=0.0, smooth=True)."""
    return _random_state


@pytest.fixture
def small_config():
    """Run Burgers réduit (N=32, n_s=6, r=2), quelques pas."""
    text = """
[grid]
n_points = 32
length = 2*pi

[time]
dt = 0.015625
t_final = 0.125
output_stride = 2
ipca_stride = 4

[model]
velocity = burgers
nu = 0.01
alpha_law = c/sqrt(i)
alpha_c = 0.02

[species]
n_species = 6
b = 2
seed = 11

[reduction]
rank = 2

[outputs]
directory = runs/small
profiles = 1, 6
"""
    return ConfigParser.parse(text, 'small.cfg')


@pytest.fixture
def write_config(tmp_path):
    """Écrit une RunConfig (ou du texte brut) et retourne le chemin."""
    def write(cfg, name='run.cfg'):
        path = tmp_path / name
        text = cfg if isinstance(cfg, str) else ConfigParser.render(cfg)
        path.write_text(text, encoding='utf-8')
        return path
    return write


@pytest.fixture
def default_config() -> RunConfig:
    return RunConfig()
