"""
lowrankService.py - Cœur de la décomposition DBO.

Ce service gère :
1. L'initialisation par SVD tronquée pondérée
2. La reconstruction (partielle) des espèces
3. Le second membre des équations d'évolution de U, Sigma et Y
4. La réorthonormalisation, la forme canonique et l'erreur relative
5. Les rotations de jauge (équivalence de deux décompositions)
"""

import logging
from typing import Iterable, Optional, Tuple

import numpy as np

from Models.dboModel import CanonicalForm, DboState, SkewGauge
from Models.gridModel import Quasimatrix
from Models.transportModel import ProjectedRhs
from Services.spectralService import SpectralService
from Utils.errors import ContractViolation

logger = logging.getLogger(__name__)

# Plancher relatif des valeurs singulières de Sigma
SIGMA_FLOOR_REL = 1e-12

# Conditionnement au-delà duquel on prévient
SIGMA_COND_CAP = 1e12

# Nombre d'espèces reconstruites à la fois dans relative_error
ERROR_BLOCK = 256


class LowRankService:
    """Opérations sur l'état DBO (fonctions pures : état entrant, état sortant)."""

    # ********************************************************
    # INVERSION DE SIGMA
    # ********************************************************

    @staticmethod
    def sigma_floor(singular_values: np.ndarray) -> float:
        """Plancher sigma_floor = 1e-12 * sigma_max."""
        smax = float(singular_values[0]) if singular_values.size else 0.0
        return SIGMA_FLOOR_REL * smax if smax > 0 else SIGMA_FLOOR_REL

    @staticmethod
    def condition_number(Sigma: np.ndarray) -> float:
        """Conditionnement de Sigma (inf si singulière)."""
        s = np.linalg.svd(Sigma, compute_uv=False)
        return float(s[0] / s[-1]) if s[-1] > 0 else float('inf')

    @staticmethod
    def regularized_inverse(Sigma: np.ndarray) -> np.ndarray:
        """Pseudo-inverse de Sigma avec plancher des valeurs singulières.

        Les valeurs sous 1e-12 * sigma_max sont remplacées par le plancher,
        Sigma^-1 reste donc fini même quand le vrai rang est < r.
        """
        P, s, Qt = np.linalg.svd(Sigma)
        floor = LowRankService.sigma_floor(s)
        if s[-1] < floor or s[0] > SIGMA_COND_CAP * s[-1]:
            logger.warning("Sigma ill-conditioned (singular values %s), regularized solve",
                           np.array2string(s, precision=3))
        s_reg = np.maximum(s, floor)
        return (Qt.T / s_reg) @ P.T

    # ********************************************************
    # INITIALISATION ET RECONSTRUCTION
    # ********************************************************

    @staticmethod
    def init_from_field(phi0: Quasimatrix, r: int) -> DboState:
        """Meilleure approximation de rang r (SVD tronquée pondérée par dx).

        Args:
            phi0: Champ initial N x n_s
            r: Rang de la décomposition

        Returns:
            DboState à t = 0

        Raises:
            ContractViolation: Si r dépasse min(N, n_s)
        """
        N, n_s = phi0.values.shape
        if not 1 <= r <= min(N, n_s):
            raise ContractViolation(f"rank {r} must lie in [1, min(N, n_s) = {min(N, n_s)}]")

        w = np.sqrt(phi0.grid.dx)
        W, s, Vt = np.linalg.svd(w * phi0.values, full_matrices=False)

        # Les vecteurs singuliers des valeurs nulles complètent déjà la base
        sigma = s[:r].copy()
        floor = LowRankService.sigma_floor(s)
        padded = sigma < floor
        if np.any(padded):
            logger.warning("initial field has numerical rank %d < %d, padding Sigma with %.3g",
                           int(np.count_nonzero(~padded)), r, floor)
            sigma[padded] = floor

        U = Quasimatrix(phi0.grid, W[:, :r] / w)
        return DboState(U=U, Sigma=np.diag(sigma), Y=Vt[:r].T.copy(), t=0.0)

    @staticmethod
    def reconstruct(s: DboState, species_indices: Optional[Iterable[int]] = None) -> Quasimatrix:
        """Reconstruit U Sigma Y_sub^T pour les espèces demandées (0-based)."""
        if species_indices is None:
            Y = s.Y
        else:
            idx = np.asarray(list(species_indices), dtype=int)
            if idx.size and (idx.min() < 0 or idx.max() >= s.n_s):
                raise ContractViolation(f"species index out of range [0, {s.n_s})")
            Y = s.Y[idx]
        return Quasimatrix(s.grid, s.U.values @ (s.Sigma @ Y.T))

    @staticmethod
    def low_rank_correlation(s: DboState) -> np.ndarray:
        """Corrélation de rang faible C = Sigma Sigma^T."""
        return s.Sigma @ s.Sigma.T

    # ********************************************************
    # ÉQUATIONS D'ÉVOLUTION
    # ********************************************************

    @staticmethod
    def dbo_rhs(s: DboState, MY: Quasimatrix, MtU: np.ndarray,
                gauge: Optional[SkewGauge] = None) -> Tuple[Quasimatrix, np.ndarray, np.ndarray]:
        """Dérivées temporelles (dU, dSigma, dY) de la décomposition.

        dU     = (MY - U <U, MY>) Sigma^-1 + U phi
        dSigma = <U, MY> - phi Sigma + Sigma theta
        dY     = (I - Y Y^T) MtU Sigma^-T + Y theta

        Le signe de Sigma theta découle de theta = Y^T dY : c'est lui qui
        laisse d(U Sigma Y^T) indépendant de la jauge.

        Args:
            s: État courant
            MY: M(Phi) Y (N x r)
            MtU: <M(Phi), U> (n_s x r)
            gauge: Jauge antisymétrique, nulle par défaut
        """
        r = s.r
        gauge = gauge if gauge is not None else SkewGauge.zero(r)
        U = s.U.values
        Y = s.Y
        G = SpectralService.gram(s.U, MY)
        Sinv = LowRankService.regularized_inverse(s.Sigma)

        dU = (MY.values - U @ G) @ Sinv
        dSigma = G.copy()
        dY = (MtU - Y @ (Y.T @ MtU)) @ Sinv.T
        if not gauge.is_zero:
            dU = dU + U @ gauge.phi
            dSigma = dSigma - gauge.phi @ s.Sigma + s.Sigma @ gauge.theta
            dY = dY + Y @ gauge.theta
        return s.U.with_values(dU), dSigma, dY

    @staticmethod
    def gauge_transport_rhs(R_U: np.ndarray, R_Y: np.ndarray, gauge_a: SkewGauge,
                            gauge_b: SkewGauge) -> Tuple[np.ndarray, np.ndarray]:
        """Évolution des rotations reliant deux jauges (a -> b).

        dR_U = R_U phi_b - phi_a R_U ; dR_Y = R_Y theta_b - theta_a R_Y
        """
        dR_U = R_U @ gauge_b.phi - gauge_a.phi @ R_U
        dR_Y = R_Y @ gauge_b.theta - gauge_a.theta @ R_Y
        return dR_U, dR_Y

    @staticmethod
    def optimality_residual(s: DboState, proj: ProjectedRhs, dU: Quasimatrix,
                            dSigma: np.ndarray, dY: np.ndarray) -> float:
        """Résidu des conditions d'optimalité dans l'espace tangent.

        Pour R = dU Sigma Y^T + U dSigma Y^T + U Sigma dY^T - M(Phi), on
        évalue sans former R :
            <U, R Y>, (I - Y Y^T) <R, U> et (I - U <U, .>) R Y.
        Le maximum des trois normes est divisé par ||MY|| + ||MtU||.
        """
        U = s.U
        Sigma = s.Sigma
        Y = s.Y
        G = SpectralService.gram(U, proj.MY)

        c1 = SpectralService.gram(U, dU) @ Sigma + dSigma + Sigma @ (dY.T @ Y) - G

        Z = dY @ Sigma.T - proj.MtU
        c2 = Z - Y @ (Y.T @ Z)

        V = dU.with_values(dU.values @ Sigma - proj.MY.values)
        c3 = V.with_values(V.values - U.values @ SpectralService.gram(U, V))

        scale = SpectralService.frobenius_norm(proj.MY) + np.linalg.norm(proj.MtU)
        worst = max(np.linalg.norm(c1), np.linalg.norm(c2), SpectralService.frobenius_norm(c3))
        return float(worst / scale) if scale > 0 else float(worst)

    # ********************************************************
    # RÉORTHONORMALISATION ET FORME CANONIQUE
    # ********************************************************

    @staticmethod
    def _qr_positive(A: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """QR réduite avec diagonale de T positive."""
        Q, T = np.linalg.qr(A)
        signs = np.sign(np.diag(T))
        signs[signs == 0] = 1.0
        return Q * signs, T * signs[:, None]

    @staticmethod
    def _floor_collapsed(T: np.ndarray, label: str) -> np.ndarray:
        d = np.abs(np.diag(T))
        floor = SIGMA_FLOOR_REL * d.max() if d.max() > 0 else SIGMA_FLOOR_REL
        collapsed = d < floor
        if np.any(collapsed):
            logger.warning("rank collapse in QR of %s (%d columns), flooring at %.3g",
                           label, int(np.count_nonzero(collapsed)), floor)
            T = T.copy()
            T[collapsed, collapsed] = floor
        return T

    @staticmethod
    def reorthonormalize(s: DboState) -> DboState:
        """Rétablit gram(U,U) = I et Y^T Y = I sans toucher U Sigma Y^T.

        U = Q_U T_U (produit pondéré), Y = Q_Y T_Y, Sigma <- T_U Sigma T_Y^T.
        """
        w = np.sqrt(s.grid.dx)
        Q_U, T_U = LowRankService._qr_positive(w * s.U.values)
        Q_Y, T_Y = LowRankService._qr_positive(s.Y)
        T_U = LowRankService._floor_collapsed(T_U, 'U')
        T_Y = LowRankService._floor_collapsed(T_Y, 'Y')
        return s.replace(U=s.U.with_values(Q_U / w), Sigma=T_U @ s.Sigma @ T_Y.T, Y=Q_Y)

    @staticmethod
    def canonical_form(s: DboState) -> CanonicalForm:
        """Forme canonique via la SVD Sigma = R_U diag(sigma~) R_Y^T.

        Convention de signe : dans chaque colonne de R_U, l'entrée de plus
        grand module est positive (R_Y suit le même signe).
        """
        P, sigma, Qt = np.linalg.svd(s.Sigma)
        R_U = P.copy()
        R_Y = Qt.T.copy()
        lead = np.argmax(np.abs(R_U), axis=0)
        signs = np.where(R_U[lead, np.arange(s.r)] < 0, -1.0, 1.0)
        R_U *= signs
        R_Y *= signs
        return CanonicalForm(U_tilde=s.U.with_values(s.U.values @ R_U),
                             sigma_tilde=sigma, Y_tilde=s.Y @ R_Y, R_U=R_U, R_Y=R_Y)

    # ********************************************************
    # MÉTRIQUES
    # ********************************************************

    @staticmethod
    def orthonormality_residuals(s: DboState) -> Tuple[float, float]:
        """Normes de Frobenius de gram(U,U) - I et Y^T Y - I."""
        eye = np.eye(s.r)
        orth_U = np.linalg.norm(SpectralService.gram(s.U, s.U) - eye)
        orth_Y = np.linalg.norm(s.Y.T @ s.Y - eye)
        return float(orth_U), float(orth_Y)

    @staticmethod
    def relative_error(s: DboState, phi_full: Quasimatrix) -> float:
        """||Phi - U Sigma Y^T||_F / ||Phi||_F, reconstruit par blocs d'espèces.

        Raises:
            ContractViolation: grille ou n_s différents, ou ||Phi|| nul
        """
        if phi_full.grid != s.grid or phi_full.n_cols != s.n_s:
            raise ContractViolation("relative_error: field and state disagree on grid or n_s")
        total = float(np.sum(phi_full.values ** 2))
        if total == 0.0:
            raise ContractViolation("relative_error undefined for a zero reference field")

        K = s.U.values @ s.Sigma
        acc = 0.0
        for j0 in range(0, s.n_s, ERROR_BLOCK):
            j1 = min(j0 + ERROR_BLOCK, s.n_s)
            diff = phi_full.values[:, j0:j1] - K @ s.Y[j0:j1].T
            acc += float(np.sum(diff ** 2))
        return float(np.sqrt(acc / total))
