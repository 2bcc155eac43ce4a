"""
spectralService.py - Discrétisation spectrale périodique 1D.

Ce service fournit :
1. Produits scalaires, matrices de Gram et normes de Frobenius
2. Dérivées de Fourier (premier et second ordre)
3. Filtre de désaliasage (règle des 2/3)

Convention de transformée : rfft non normalisée, 1/N sur la transformée inverse.
La quadrature est la règle des rectangles, exacte pour les polynômes
trigonométriques de degré < N/2.
"""

import numpy as np
import scipy.fft

from config import Config
from Models.gridModel import Grid1D, Quasimatrix
from Utils.errors import ContractViolation


class SpectralService:
    """Opérateurs spectraux et produits scalaires pondérés."""

    # ********************************************************
    # PRODUITS SCALAIRES
    # ********************************************************

    @staticmethod
    def _check_same_grid(u: Quasimatrix, v: Quasimatrix) -> None:
        if u.grid != v.grid:
            raise ContractViolation(f"grid mismatch: {u.grid!r} vs {v.grid!r}")

    @staticmethod
    def inner_product(u: Quasimatrix, v: Quasimatrix) -> float:
        """Produit scalaire <u, v> = dx * sum_j u_j v_j.

        Args:
            u: Quasimatrice à une colonne
            v: Quasimatrice à une colonne

        Returns:
            Valeur réelle (symétrique, bilinéaire)
        """
        SpectralService._check_same_grid(u, v)
        if u.n_cols != 1 or v.n_cols != 1:
            raise ContractViolation("inner_product expects single-column quasimatrices")
        return float(u.grid.dx * np.sum(u.values[:, 0] * v.values[:, 0]))

    @staticmethod
    def gram(U: Quasimatrix, V: Quasimatrix) -> np.ndarray:
        """Matrice m x n des produits scalaires colonne à colonne.

        gram(U R, V) = R^T gram(U, V) et gram(U, V R) = gram(U, V) R.
        """
        SpectralService._check_same_grid(U, V)
        return U.grid.dx * (U.values.T @ V.values)

    @staticmethod
    def frobenius_norm(A: Quasimatrix) -> float:
        """Norme de Frobenius sqrt(sum_i <a_i, a_i>)."""
        return float(np.sqrt(A.grid.dx * np.sum(A.values ** 2)))

    # ********************************************************
    # DÉRIVÉES SPECTRALES
    # ********************************************************

    @staticmethod
    def _spectral(values: np.ndarray) -> np.ndarray:
        return scipy.fft.rfft(values, axis=0, workers=Config.THREADS)

    @staticmethod
    def _physical(coeffs: np.ndarray, n: int) -> np.ndarray:
        return scipy.fft.irfft(coeffs, n=n, axis=0, workers=Config.THREADS)

    @staticmethod
    def ddx(u: Quasimatrix) -> Quasimatrix:
        """Dérivée première de Fourier, mode de Nyquist annulé."""
        grid = u.grid
        ik = 1j * grid.wavenumbers
        ik[-1] = 0.0
        coeffs = SpectralService._spectral(u.values) * ik[:, None]
        return u.with_values(SpectralService._physical(coeffs, grid.n_points))

    @staticmethod
    def d2dx2(u: Quasimatrix) -> Quasimatrix:
        """Dérivée seconde de Fourier, multiplication par -(2 pi m / L)^2."""
        grid = u.grid
        coeffs = SpectralService._spectral(u.values) * -(grid.wavenumbers ** 2)[:, None]
        return u.with_values(SpectralService._physical(coeffs, grid.n_points))

    @staticmethod
    def dealias(values: np.ndarray, n_points: int) -> np.ndarray:
        """Règle des 2/3 : annule les modes m > N/3 d'un produit non linéaire."""
        coeffs = SpectralService._spectral(values)
        coeffs[n_points // 3 + 1:] = 0.0
        return SpectralService._physical(coeffs, n_points)

    @staticmethod
    def product(a: np.ndarray, b: np.ndarray, grid: Grid1D) -> np.ndarray:
        """Produit ponctuel a * b, filtré si la grille le demande."""
        out = a * b
        if grid.dealias:
            out = SpectralService.dealias(out, grid.n_points)
        return out
