"""
transportService.py - Construction de M(Phi) et de ses projections.

Ce service gère :
1. L'équation de Burgers pour la vitesse advectante
2. Les conditions initiales des espèces passives (spectre aléatoire)
3. Les projections M(Phi) Y et <M(Phi), U> sans jamais stocker Phi ni S
   sous forme décompressée (boucle en flux sur les points de grille)
"""

from typing import Optional

import numpy as np

from config import Config
from Models.dboModel import DboState
from Models.gridModel import Grid1D, Quasimatrix
from Models.transportModel import DiffusivitySpec, ProjectedRhs, SourceModel, VelocityField
from Services.spectralService import SpectralService
from Utils.errors import ContractViolation, NumericalFailure


class TransportService:
    """Second membre du transport advection-diffusion-réaction."""

    # ********************************************************
    # VITESSE (BURGERS)
    # ********************************************************

    @staticmethod
    def burgers_initial_velocity(grid: Grid1D) -> Quasimatrix:
        """v(x, 0) = 0.5 (exp(cos x) - 1.5) sin(x + 2 pi 0.37)."""
        x = grid.nodes
        return Quasimatrix(grid, 0.5 * (np.exp(np.cos(x)) - 1.5) * np.sin(x + 2.0 * np.pi * 0.37))

    @staticmethod
    def burgers_rhs(v: VelocityField) -> Quasimatrix:
        """-v dv/dx + nu d2v/dx2."""
        u = v.v
        advection = SpectralService.product(u.values, SpectralService.ddx(u).values, u.grid)
        return u.with_values(-advection + v.nu * SpectralService.d2dx2(u).values)

    # ********************************************************
    # CONDITIONS INITIALES DES ESPÈCES
    # ********************************************************

    @staticmethod
    def species_ic(n_s: int, b: float, seed: int, grid: Grid1D) -> Quasimatrix:
        """phi_i(x, 0) = sum_n zeta_i^(n) / n^b sin(n pi x / L), n = 1..n_s.

        Les zeta sont tirés par PCG64 (normales par ziggourat de numpy),
        ligne i = espèce i : même graine, même champ, octet pour octet.

        Args:
            n_s: Nombre d'espèces
            b: Taux de décroissance du spectre (> 0)
            seed: Graine du générateur
            grid: Grille cible
        """
        if not b > 0:
            raise ContractViolation(f"spectrum decay b must be positive, got {b}")
        rng = np.random.Generator(np.random.PCG64(seed))
        zeta = rng.standard_normal((n_s, n_s))
        n = np.arange(1, n_s + 1, dtype=float)
        coeffs = zeta * np.power(n, -float(b))
        basis = np.sin(np.outer(grid.nodes, n * np.pi / grid.length))
        return Quasimatrix(grid, basis @ coeffs.T)

    # ********************************************************
    # PROJECTIONS DE M(PHI)
    # ********************************************************

    @staticmethod
    def advection(v: VelocityField, U: Quasimatrix) -> np.ndarray:
        """(v . grad) U, colonne par colonne."""
        if v.v.grid != U.grid:
            raise ContractViolation("velocity and field live on different grids")
        return SpectralService.product(v.v.values, SpectralService.ddx(U).values, U.grid)

    @staticmethod
    def project_model_rhs(s: DboState, v: VelocityField, diff: DiffusivitySpec,
                          src: SourceModel, block_size: Optional[int] = None,
                          rho: Optional[float] = None, T: Optional[float] = None) -> ProjectedRhs:
        """Projections MY = M(Phi) Y et MtU = <M(Phi), U>.

        MY  = -(v.grad) U Sigma + lap(U Sigma alpha_Y) + S Y
        MtU = -Y Sigma^T <(v.grad) U, U> + alpha Y Sigma^T <lap U, U> + <S, U>

        Le terme diffusif ne demande que r laplaciens. S Y et <S, U> sont
        accumulés dans une même boucle par blocs de points, où le vecteur
        des espèces est reconstruit par U(x*) Sigma Y^T.

        Raises:
            ContractViolation: Grilles ou nombre d'espèces incohérents
            NumericalFailure: Source non finie (indice de grille fourni)
        """
        if diff.n_s != s.n_s:
            raise ContractViolation(f"diffusivity has {diff.n_s} species, state has {s.n_s}")
        grid = s.grid
        U = s.U.values
        Sigma = s.Sigma
        Y = s.Y

        A = TransportService.advection(v, s.U)
        alpha_Y = Y.T @ (diff.alpha[:, None] * Y)
        g = diff.scale_at(grid.nodes, s.t)
        lap = SpectralService.d2dx2(s.U).values
        if g is not None:
            lap = g[:, None] * lap
        lap_U = s.U.with_values(lap)

        MY = -A @ Sigma + lap @ (Sigma @ alpha_Y)
        MtU = (-Y @ (Sigma.T @ SpectralService.gram(s.U.with_values(A), s.U))
               + diff.alpha[:, None] * (Y @ (Sigma.T @ SpectralService.gram(lap_U, s.U))))

        if not src.is_null:
            SY, StU = TransportService._stream_source(s, src, block_size or Config.SOURCE_BLOCK, rho, T)
            MY = MY + SY
            MtU = MtU + StU

        return ProjectedRhs(MY=s.U.with_values(MY), MtU=MtU, alpha_Y=alpha_Y, alpha_scale=g)

    @staticmethod
    def _stream_source(s: DboState, src: SourceModel, block_size: int,
                       rho: Optional[float], T: Optional[float]):
        """Accumule S Y et <S, U> bloc par bloc, sans stocker S (N x n_s)."""
        U = s.U.values
        N = U.shape[0]
        SigmaYt = s.Sigma @ s.Y.T
        SY = np.empty((N, s.r))
        StU = np.zeros((s.n_s, s.r))
        for j0 in range(0, N, block_size):
            j1 = min(j0 + block_size, N)
            phi_block = U[j0:j1] @ SigmaYt
            S_block = src.evaluate(phi_block, rho, T)
            if S_block.shape != phi_block.shape:
                raise ContractViolation(
                    f"source '{src.name}' returned shape {S_block.shape}, expected {phi_block.shape}"
                )
            finite = np.isfinite(S_block)
            if not finite.all():
                row, col = np.argwhere(~finite)[0]
                raise NumericalFailure(
                    f"source '{src.name}' is non-finite at grid index {j0 + row} (species {col})",
                    species=int(col), grid_index=int(j0 + row),
                )
            SY[j0:j1] = S_block @ s.Y
            StU += S_block.T @ U[j0:j1]
        return SY, s.grid.dx * StU
