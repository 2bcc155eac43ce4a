"""
figureService.py - Comparaison DBO / FOM et export des données de figures.

Ce service gère :
1. compare : erreurs relatives et écarts de spectre aux instants communs
2. export-figures : tables texte en colonnes (profils d'espèces au temps
   final, erreur en fonction du temps par rang, valeurs singulières DBO
   et I-PCA, premiers modes spatiaux)

Les figures elles-mêmes sont laissées aux outils de tracé externes.
"""

import logging
import pathlib
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from Models.configModel import RunConfig
from Models.gridModel import Grid1D
from Models.snapshotModel import DboRecord, FomRecord
from Persistence.diagnosticsWriter import TableWriter
from Persistence.snapshotStorage import SnapshotStorage
from Services.fomService import FomService
from Services.lowrankService import LowRankService
from Services.simulationService import DBO_SNAPSHOTS, FOM_SNAPSHOTS, RESOLVED_CONFIG
from Utils.configParser import ConfigParser
from Utils.errors import ContractViolation

logger = logging.getLogger(__name__)

ERRORS_TABLE = 'errors.csv'
SPECTRUM_GAPS_TABLE = 'spectrum_gaps.csv'


@dataclass(frozen=True)
class RunPair:
    """Un run DBO et le run FOM de référence, vérifiés compatibles."""

    dbo_dir: pathlib.Path
    fom_dir: pathlib.Path
    dbo_cfg: RunConfig
    fom_cfg: RunConfig
    grid: Grid1D

    @property
    def rank(self) -> int:
        return self.dbo_cfg.reduction.rank

    @property
    def time_tolerance(self) -> float:
        return 0.5 * min(self.dbo_cfg.time.dt, self.fom_cfg.time.dt)


class FigureService:
    """Post-traitement des répertoires de run."""

    # ********************************************************
    # APPARIEMENT
    # ********************************************************

    @staticmethod
    def pair_runs(dbo_dir: pathlib.Path, fom_dir: pathlib.Path) -> RunPair:
        """Charge les configurations résolues et vérifie grilles et n_s.

        Raises:
            ContractViolation: Grilles ou nombre d'espèces différents
            ConfigError: resolved.cfg absent ou invalide
        """
        dbo_dir, fom_dir = pathlib.Path(dbo_dir), pathlib.Path(fom_dir)
        dbo_cfg = ConfigParser.load(dbo_dir / RESOLVED_CONFIG)
        fom_cfg = ConfigParser.load(fom_dir / RESOLVED_CONFIG)
        g1, g2 = dbo_cfg.grid, fom_cfg.grid
        if g1.n_points != g2.n_points or g1.length != g2.length:
            raise ContractViolation(
                f"grid mismatch: DBO run has N={g1.n_points}, L={g1.length!r}; "
                f"FOM run has N={g2.n_points}, L={g2.length!r}"
            )
        if dbo_cfg.species.n_species != fom_cfg.species.n_species:
            raise ContractViolation(
                f"species mismatch: {dbo_cfg.species.n_species} vs {fom_cfg.species.n_species}"
            )
        return RunPair(dbo_dir=dbo_dir, fom_dir=fom_dir, dbo_cfg=dbo_cfg, fom_cfg=fom_cfg,
                       grid=Grid1D(g1.n_points, g1.length, dealias=g1.dealias))

    @staticmethod
    def matched_records(pair: RunPair) -> Iterator[Tuple[DboRecord, FomRecord]]:
        """Enregistrements DBO et FOM aux instants communs (à dt/2 près).

        Les deux fichiers sont parcourus une seule fois, en parallèle.
        """
        tol = pair.time_tolerance
        fom_iter = SnapshotStorage.iter_fom(pair.fom_dir / FOM_SNAPSHOTS)
        fom = next(fom_iter, None)
        for dbo in SnapshotStorage.iter_dbo(pair.dbo_dir / DBO_SNAPSHOTS):
            while fom is not None and fom.t < dbo.t - tol:
                fom = next(fom_iter, None)
            if fom is None:
                return
            if abs(fom.t - dbo.t) <= tol:
                yield dbo, fom

    # ********************************************************
    # COMPARE
    # ********************************************************

    @staticmethod
    def compare(dbo_dir: pathlib.Path, fom_dir: pathlib.Path,
                out_dir: pathlib.Path = None) -> int:
        """Écrit errors.csv et spectrum_gaps.csv.

        Returns:
            Nombre d'instants comparés

        Raises:
            ContractViolation: Runs incompatibles ou sans instant commun
        """
        pair = FigureService.pair_runs(dbo_dir, fom_dir)
        out = pathlib.Path(out_dir or pair.dbo_dir)
        r = pair.rank
        errors = TableWriter(out / ERRORS_TABLE, ['t', 'relative_error', 'ipca_error'])
        gaps = TableWriter(out / SPECTRUM_GAPS_TABLE,
                           ['t'] + [f'gap_{i}' for i in range(1, r + 1)]
                           + [f'angle_{i}' for i in range(1, r + 1)])

        count = 0
        worst_gap = 0.0
        for dbo_rec, fom_rec in FigureService.matched_records(pair):
            state = dbo_rec.to_state(pair.grid)
            fom_state = fom_rec.to_state(pair.grid)
            ref = FomService.ipca(fom_state)
            error = LowRankService.relative_error(state, fom_state.phi)
            errors.write_row([state.t, error, ref.truncation_error(r)])
            comparison = FomService.compare_spectra(state, ref, r, max_dt=pair.time_tolerance)
            gaps.write_row([state.t, *comparison.gaps, *comparison.angles])
            worst_gap = max(worst_gap, float(comparison.gaps[0]))
            count += 1

        if count == 0:
            raise ContractViolation("the two runs share no output time")
        logger.info("compared %d instants, max leading-mode gap %.3e", count, worst_gap)
        return count

    # ********************************************************
    # EXPORT DES FIGURES
    # ********************************************************

    @staticmethod
    def _save_columns(path: pathlib.Path, columns: Sequence[np.ndarray], names: List[str]) -> None:
        data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
        np.savetxt(path, data, fmt='%.17g', header=' '.join(names))

    @staticmethod
    def _aligned_modes(dbo_modes: np.ndarray, ref_modes: np.ndarray, dx: float) -> np.ndarray:
        """Signe de chaque mode DBO aligné sur le mode I-PCA correspondant."""
        overlap = dx * np.sum(dbo_modes * ref_modes, axis=0)
        return dbo_modes * np.where(overlap < 0, -1.0, 1.0)

    @staticmethod
    def export_figures(dbo_dirs: Sequence[pathlib.Path], fom_dir: pathlib.Path,
                       out_dir: pathlib.Path, species: Sequence[int] = None) -> List[pathlib.Path]:
        """Écrit les données des figures de la démonstration Burgers.

        Fichiers :
            - profiles.dat : x, phi_i FOM et DBO (par rang) au dernier instant commun
            - error_vs_time.dat : t, erreur relative de chaque run DBO
            - singular_values_r{r}.dat : t, sigma~_1..r puis sigma^_1..r
            - modes.dat : x, deux premiers modes I-PCA et DBO (premier run)

        Args:
            dbo_dirs: Répertoires des runs DBO (un par rang)
            fom_dir: Répertoire du run FOM
            out_dir: Répertoire de sortie
            species: Indices d'espèces 1-based (outputs.profiles du premier run par défaut)

        Raises:
            ContractViolation: Runs incompatibles ou indices hors bornes
        """
        if not dbo_dirs:
            raise ContractViolation("export-figures needs at least one DBO run")
        out = pathlib.Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        pairs = [FigureService.pair_runs(d, fom_dir) for d in dbo_dirs]
        grid = pairs[0].grid
        if any(p.grid != grid for p in pairs):
            raise ContractViolation("grid mismatch between DBO runs")
        n_s = pairs[0].dbo_cfg.species.n_species
        species = list(species or pairs[0].dbo_cfg.outputs.profiles)
        if any(not 1 <= i <= n_s for i in species):
            raise ContractViolation(f"profile species must lie in [1, {n_s}]")
        idx = [i - 1 for i in species]

        written = []
        error_series = []
        final_profiles = []
        final_fom = None
        modes = None

        for k, pair in enumerate(pairs):
            r = pair.rank
            times, errs, sig_dbo, sig_ref = [], [], [], []
            last = None
            for dbo_rec, fom_rec in FigureService.matched_records(pair):
                state = dbo_rec.to_state(grid)
                fom_state = fom_rec.to_state(grid)
                ref = FomService.ipca(fom_state)
                times.append(state.t)
                errs.append(LowRankService.relative_error(state, fom_state.phi))
                sig_dbo.append(LowRankService.canonical_form(state).sigma_tilde)
                sig_ref.append(ref.singular_values[:r])
                last = (state, fom_state, ref)
            if last is None:
                raise ContractViolation(f"{pair.dbo_dir} shares no output time with {pair.fom_dir}")

            path = out / f'singular_values_r{r}.dat'
            FigureService._save_columns(
                path, [times, *np.array(sig_dbo).T, *np.array(sig_ref).T],
                ['t'] + [f'dbo_{i}' for i in range(1, r + 1)] + [f'ipca_{i}' for i in range(1, r + 1)],
            )
            written.append(path)
            error_series.append((r, np.array(times), np.array(errs)))

            state, fom_state, ref = last
            final_profiles.append((r, LowRankService.reconstruct(state, idx).values))
            if k == 0:
                final_fom = fom_state.phi.values[:, idx]
                n_modes = min(2, state.r)
                canonical = LowRankService.canonical_form(state)
                ref_modes = ref.U_hat.values[:, :n_modes]
                dbo_modes = FigureService._aligned_modes(canonical.U_tilde.values[:, :n_modes],
                                                         ref_modes, grid.dx)
                modes = (n_modes, ref_modes, dbo_modes)

        # Profils au dernier instant commun
        columns = [grid.nodes] + [final_fom[:, j] for j in range(len(idx))]
        names = ['x'] + [f'fom_phi_{i}' for i in species]
        for r, values in final_profiles:
            columns += [values[:, j] for j in range(len(idx))]
            names += [f'dbo_r{r}_phi_{i}' for i in species]
        path = out / 'profiles.dat'
        FigureService._save_columns(path, columns, names)
        written.append(path)

        # Erreur en fonction du temps, runs alignés sur le premier
        base_t = error_series[0][1]
        columns = [base_t]
        names = ['t']
        for r, t, e in error_series:
            if t.shape != base_t.shape or not np.allclose(t, base_t, rtol=0.0, atol=pairs[0].time_tolerance):
                raise ContractViolation(f"run of rank {r} has different output times")
            columns.append(e)
            names.append(f'error_r{r}')
        path = out / 'error_vs_time.dat'
        FigureService._save_columns(path, columns, names)
        written.append(path)

        n_modes, ref_modes, dbo_modes = modes
        path = out / 'modes.dat'
        FigureService._save_columns(
            path, [grid.nodes, *ref_modes.T, *dbo_modes.T],
            ['x'] + [f'ipca_mode_{i}' for i in range(1, n_modes + 1)]
            + [f'dbo_mode_{i}' for i in range(1, n_modes + 1)],
        )
        written.append(path)
        logger.info("exported %d figure tables to %s", len(written), out)
        return written
