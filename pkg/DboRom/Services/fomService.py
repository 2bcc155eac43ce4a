"""
fomService.py - Solution complète (oracle) et PCA instantanée.

Ce service gère :
1. Le second membre des n_s équations de transport, colonne par colonne
2. La SVD pondérée du champ complet (I-PCA)
3. La comparaison des spectres DBO / I-PCA
"""

from typing import Optional

import numpy as np
import scipy.linalg

from Models.dboModel import DboState
from Models.fomModel import FomState, IpcaResult, SpectrumComparison
from Models.gridModel import Quasimatrix
from Models.transportModel import DiffusivitySpec, SourceModel, VelocityField
from Services.lowrankService import LowRankService
from Services.spectralService import SpectralService
from Utils.errors import ContractViolation, NumericalFailure


class FomService:
    """Modèle d'ordre complet et décomposition instantanée."""

    # ********************************************************
    # SECOND MEMBRE COMPLET
    # ********************************************************

    @staticmethod
    def fom_rhs(s: FomState, v: VelocityField, diff: DiffusivitySpec,
                src: SourceModel) -> Quasimatrix:
        """Colonne i : -v dphi_i/dx + g(x, t) alpha_i d2phi_i/dx2 + S_i(Phi).

        Raises:
            NumericalFailure: Valeur non finie (espèce et indice de grille)
        """
        phi = s.phi
        grid = phi.grid
        if v.v.grid != grid:
            raise ContractViolation("velocity and species live on different grids")
        if diff.n_s != s.n_s:
            raise ContractViolation(f"diffusivity has {diff.n_s} species, field has {s.n_s}")

        advection = SpectralService.product(v.v.values, SpectralService.ddx(phi).values, grid)
        diffusion = SpectralService.d2dx2(phi).values * diff.alpha[None, :]
        g = diff.scale_at(grid.nodes, s.t)
        if g is not None:
            diffusion *= g[:, None]
        out = diffusion - advection
        if not src.is_null:
            out += src.evaluate(phi.values)

        finite = np.isfinite(out)
        if not finite.all():
            row, col = np.argwhere(~finite)[0]
            raise NumericalFailure(f"FOM right-hand side non-finite for species {col} at grid index {row}",
                                   species=int(col), grid_index=int(row))
        return phi.with_values(out)

    # ********************************************************
    # PCA INSTANTANÉE
    # ********************************************************

    @staticmethod
    def ipca(s: FomState) -> IpcaResult:
        """SVD pondérée par dx du champ complet.

        Les sigma^2 sont les valeurs propres de C(t) = <phi_i, phi_j>. Même
        convention de signe que la forme canonique : l'entrée de plus grand
        module de chaque colonne de U_hat est positive.
        """
        phi = s.phi
        w = np.sqrt(phi.grid.dx)
        W, sigma, Vt = np.linalg.svd(w * phi.values, full_matrices=False)
        U_hat = W / w
        Y_hat = Vt.T
        lead = np.argmax(np.abs(U_hat), axis=0)
        signs = np.where(U_hat[lead, np.arange(U_hat.shape[1])] < 0, -1.0, 1.0)
        return IpcaResult(singular_values=sigma, U_hat=phi.with_values(U_hat * signs),
                          Y_hat=Y_hat * signs, t=s.t)

    @staticmethod
    def compare_spectra(dbo: DboState, ref: IpcaResult, r: Optional[int] = None,
                        max_dt: float = 0.0) -> SpectrumComparison:
        """Écarts relatifs par mode et angles principaux entre sous-espaces.

        Args:
            dbo: État DBO
            ref: I-PCA du champ complet au même instant
            r: Nombre de modes comparés (rang DBO par défaut)
            max_dt: Décalage temporel toléré (un pas de temps)

        Raises:
            ContractViolation: Instants trop éloignés ou r trop grand
        """
        r = dbo.r if r is None else r
        if r > dbo.r or r > ref.singular_values.size:
            raise ContractViolation(f"cannot compare {r} modes")
        if abs(dbo.t - ref.t) > max_dt + 1e-12 * max(1.0, abs(ref.t)):
            raise ContractViolation(f"time mismatch: DBO at t={dbo.t}, I-PCA at t={ref.t}")

        canonical = LowRankService.canonical_form(dbo)
        sigma_dbo = canonical.sigma_tilde[:r]
        sigma_ref = ref.singular_values[:r]
        diff = np.abs(sigma_dbo - sigma_ref)
        with np.errstate(divide='ignore', invalid='ignore'):
            gaps = np.where(sigma_ref > 0, diff / sigma_ref, np.where(diff > 0, np.inf, 0.0))

        w = np.sqrt(dbo.grid.dx)
        angles = scipy.linalg.subspace_angles(w * canonical.U_tilde.values[:, :r],
                                              w * ref.U_hat.values[:, :r])
        return SpectrumComparison(gaps=gaps, angles=np.sort(angles), t=dbo.t)
