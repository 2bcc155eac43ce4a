"""
simulationService.py - Orchestration des runs DBO et FOM.

Ce service gère :
1. La construction du modèle (grille, vitesse, diffusivités, source, jauge)
   à partir d'une RunConfig
2. L'assemblage de l'état composite (U, Sigma, Y, v, phi) et de son second
   membre ; la vitesse de Burgers avance dans le même pas RK4 et reste
   figée à sa valeur d'étage pendant chaque évaluation
3. Les observateurs : diagnostics, snapshots, I-PCA de la référence
4. La reprise depuis le dernier snapshot d'un répertoire de run
5. L'enregistrement des runs dans le catalogue
"""

import logging
import pathlib
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from sqlalchemy.exc import SQLAlchemyError

from Models.compositeModel import CompositeState
from Models.configModel import RunConfig
from Models.dboModel import DboState, DiagnosticsRow, SkewGauge
from Models.fomModel import FomState
from Models.gridModel import Grid1D, Quasimatrix
from Models.runModel import RunRecord
from Models.tablesSchema import RunKind, RunStatus
from Models.transportModel import DiffusivitySpec, SourceModel, VelocityField
from Persistence.diagnosticsWriter import TableReader, TableWriter, diagnostics_header
from Persistence.snapshotStorage import DBO_MAGIC, FOM_MAGIC, SnapshotStorage
from Services.fomService import FomService
from Services.kineticsService import KineticsService
from Services.lowrankService import LowRankService
from Services.timeintService import Observer, TimeIntegrationService
from Services.transportService import TransportService
from Utils.configParser import ConfigParser
from Utils.errors import ContractViolation

logger = logging.getLogger(__name__)

# Fichiers d'un répertoire de run
RESOLVED_CONFIG = 'resolved.cfg'
DBO_SNAPSHOTS = 'dbo.snap'
FOM_SNAPSHOTS = 'fom.snap'
VELOCITY_SNAPSHOTS = 'velocity.snap'
REFERENCE_CHECKPOINT = 'reference.snap'
DIAGNOSTICS = 'diagnostics.csv'
IPCA_TABLE = 'ipca.csv'


@dataclass(frozen=True)
class RunSetup:
    """Composantes du modèle résolues depuis la configuration."""

    config: RunConfig
    grid: Grid1D
    diff: DiffusivitySpec
    src: SourceModel
    gauge: SkewGauge
    burgers: bool
    nu: float

    def velocity(self, values: Optional[np.ndarray]) -> VelocityField:
        """Champ de vitesse ; None pour une vitesse nulle."""
        if values is None:
            values = np.zeros(self.grid.n_points)
        return VelocityField(Quasimatrix(self.grid, values), nu=self.nu)

    def initial_velocity(self) -> Optional[np.ndarray]:
        if not self.burgers:
            return None
        return TransportService.burgers_initial_velocity(self.grid).values[:, 0]

    def initial_field(self) -> Quasimatrix:
        species = self.config.species
        return TransportService.species_ic(species.n_species, species.b, species.seed, self.grid)


@dataclass(frozen=True)
class RunSummary:
    """Bilan d'un run."""

    out_dir: pathlib.Path
    steps: int
    t_reached: float
    final_error: Optional[float] = None


class SimulationService:
    """Exécution des simulations configurées."""

    # ********************************************************
    # CONSTRUCTION DU MODÈLE
    # ********************************************************

    @staticmethod
    def build_setup(cfg: RunConfig) -> RunSetup:
        """Résout grille, diffusivités, source et jauge."""
        grid = Grid1D(cfg.grid.n_points, cfg.grid.length, dealias=cfg.grid.dealias)
        model = cfg.model
        n_s = cfg.species.n_species

        if model.alpha_law == 'c/sqrt(i)':
            diff = DiffusivitySpec.inverse_sqrt_law(n_s, model.alpha_c)
        elif model.alpha_law == 'constant':
            diff = DiffusivitySpec.constant(n_s, model.alpha_c)
        else:
            diff = DiffusivitySpec(np.asarray(model.alpha_list, dtype=float))

        params = {'k': model.source_k} if model.source == 'toy_abc' else {}
        src = KineticsService.build(model.source, params)

        red = cfg.reduction
        if red.gauge == 'random':
            gauge = SkewGauge.random(red.rank, red.gauge_seed, red.gauge_scale)
        else:
            gauge = SkewGauge.zero(red.rank)

        return RunSetup(config=cfg, grid=grid, diff=diff, src=src, gauge=gauge,
                        burgers=model.velocity == 'burgers', nu=model.nu)

    # ********************************************************
    # SECOND MEMBRE COMPOSITE
    # ********************************************************

    @staticmethod
    def dbo_state(setup: RunSetup, cs: CompositeState) -> DboState:
        return DboState(U=Quasimatrix(setup.grid, cs['U']), Sigma=cs['Sigma'], Y=cs['Y'], t=cs.t)

    @staticmethod
    def composite_rhs(setup: RunSetup):
        """Évaluateur (t, état) -> dérivées pour les blocs présents.

        Blocs reconnus : U, Sigma, Y (DBO), v (Burgers), phi (solution complète).
        """
        def rhs(t: float, cs: CompositeState) -> CompositeState:
            v = setup.velocity(cs['v'] if 'v' in cs else None)
            blocks = {}
            if 'U' in cs:
                s = DboState(U=Quasimatrix(setup.grid, cs['U']), Sigma=cs['Sigma'], Y=cs['Y'], t=t)
                proj = TransportService.project_model_rhs(s, v, setup.diff, setup.src)
                dU, dSigma, dY = LowRankService.dbo_rhs(s, proj.MY, proj.MtU, setup.gauge)
                blocks.update(U=dU.values, Sigma=dSigma, Y=dY)
            if 'v' in cs:
                blocks['v'] = TransportService.burgers_rhs(v).values[:, 0]
            if 'phi' in cs:
                fom = FomState(Quasimatrix(setup.grid, cs['phi']), t)
                blocks['phi'] = FomService.fom_rhs(fom, v, setup.diff, setup.src).values
            return CompositeState({name: blocks[name] for name in cs}, t)

        return rhs

    @staticmethod
    def reorthonormalization_hook(setup: RunSetup):
        """Crochet post-pas : réorthonormalise U et Y, U Sigma Y^T inchangé."""
        def hook(cs: CompositeState) -> CompositeState:
            s = LowRankService.reorthonormalize(SimulationService.dbo_state(setup, cs))
            return cs.replace(U=s.U.values, Sigma=s.Sigma, Y=s.Y)

        return hook

    # ********************************************************
    # DIAGNOSTICS
    # ********************************************************

    @staticmethod
    def diagnose(setup: RunSetup, s: DboState, v: VelocityField,
                 phi: Optional[Quasimatrix] = None) -> DiagnosticsRow:
        """Ligne de diagnostics de l'état courant."""
        canonical = LowRankService.canonical_form(s)
        orth_U, orth_Y = LowRankService.orthonormality_residuals(s)
        proj = TransportService.project_model_rhs(s, v, setup.diff, setup.src)
        dU, dSigma, dY = LowRankService.dbo_rhs(s, proj.MY, proj.MtU, setup.gauge)
        residual = LowRankService.optimality_residual(s, proj, dU, dSigma, dY)
        error = LowRankService.relative_error(s, phi) if phi is not None else None
        return DiagnosticsRow(t=s.t, sigma_tilde=canonical.sigma_tilde, orth_U=orth_U,
                              orth_Y=orth_Y, opt_residual=residual,
                              sigma_condition=LowRankService.condition_number(s.Sigma),
                              relative_error=error)

    # ********************************************************
    # RUN DBO
    # ********************************************************

    @staticmethod
    def run_dbo(cfg: RunConfig, out_dir: Optional[pathlib.Path] = None, resume: bool = False,
                catalog=None) -> RunSummary:
        """Intègre la décomposition DBO et écrit snapshots et diagnostics.

        Args:
            cfg: Configuration résolue
            out_dir: Répertoire de sortie (outputs.directory par défaut)
            resume: Reprendre depuis le dernier snapshot du répertoire
            catalog: DBStorage du catalogue, None pour ne rien enregistrer

        Raises:
            ContractViolation: Reprise impossible
            NumericalFailure: Valeur non finie pendant l'intégration
        """
        out = pathlib.Path(out_dir or cfg.outputs.directory)
        out.mkdir(parents=True, exist_ok=True)
        setup = SimulationService.build_setup(cfg)
        outputs = cfg.outputs
        dt = cfg.time.dt
        r = cfg.reduction.rank
        record = SimulationService._catalog_start(catalog, RunKind.DBO, cfg, out)

        try:
            if resume:
                cs, step0 = SimulationService._resume_dbo(setup, out)
            else:
                cs, step0 = SimulationService._fresh_dbo(setup), 0
                if outputs.snapshots:
                    SnapshotStorage.create(out / DBO_SNAPSHOTS, DBO_MAGIC)
                    if setup.burgers:
                        SnapshotStorage.create(out / VELOCITY_SNAPSHOTS, FOM_MAGIC)

            (out / RESOLVED_CONFIG).write_text(ConfigParser.render(cfg), encoding='utf-8')
            with_ref = 'phi' in cs
            observers = []
            last_error = {'value': None}

            if outputs.diagnostics:
                diag = TableWriter(out / DIAGNOSTICS, diagnostics_header(r, with_ref), append=resume)

                def write_diagnostics(step: int, state: CompositeState) -> None:
                    s = SimulationService.dbo_state(setup, state)
                    phi = Quasimatrix(setup.grid, state['phi']) if with_ref else None
                    v = setup.velocity(state['v'] if 'v' in state else None)
                    row = SimulationService.diagnose(setup, s, v, phi)
                    diag.write_row(row.as_values(with_ref))
                    last_error['value'] = row.relative_error
                    logger.debug("t=%.6g sigma_1=%.6g orth=(%.2e, %.2e)", row.t,
                                 row.sigma_tilde[0], row.orth_U, row.orth_Y)

                observers.append(Observer(write_diagnostics, cfg.time.output_stride))

            if outputs.snapshots:
                def write_snapshots(step: int, state: CompositeState) -> None:
                    SnapshotStorage.write_dbo(out / DBO_SNAPSHOTS, SimulationService.dbo_state(setup, state))
                    if 'v' in state:
                        SnapshotStorage.write_fom(out / VELOCITY_SNAPSHOTS, state.t, state['v'])
                    if with_ref:
                        SnapshotStorage.create(out / REFERENCE_CHECKPOINT, FOM_MAGIC)
                        SnapshotStorage.write_fom(out / REFERENCE_CHECKPOINT, state.t, state['phi'])

                observers.append(Observer(write_snapshots, cfg.time.output_stride))

            if with_ref:
                ipca_table = TableWriter(out / IPCA_TABLE, SimulationService.ipca_header(r, True),
                                         append=resume)

                def write_ipca(step: int, state: CompositeState) -> None:
                    phi = Quasimatrix(setup.grid, state['phi'])
                    ref = FomService.ipca(FomState(phi, state.t))
                    s = SimulationService.dbo_state(setup, state)
                    dbo_error = LowRankService.relative_error(s, phi)
                    ipca_table.write_row([state.t, *ref.singular_values[:r],
                                          ref.truncation_error(r), dbo_error])

                observers.append(Observer(write_ipca, cfg.time.ipca_stride))

            logger.info("run-dbo: N=%d n_s=%d r=%d dt=%g t_final=%g -> %s",
                        setup.grid.n_points, cfg.species.n_species, r, dt, cfg.time.t_final, out)
            result = TimeIntegrationService.integrate(
                cs, SimulationService.composite_rhs(setup), dt, cfg.time.t_final,
                observers=observers, post_step=SimulationService.reorthonormalization_hook(setup),
                first_step=step0, t_origin=0.0, observe_initial=not resume,
            )
        except Exception as exc:
            SimulationService._catalog_fail(catalog, record, exc)
            raise

        summary = RunSummary(out_dir=out, steps=result.steps, t_reached=result.state.t,
                             final_error=last_error['value'])
        SimulationService._catalog_complete(catalog, record, summary)
        logger.info("run-dbo finished at t=%g after %d steps", summary.t_reached, summary.steps)
        return summary

    @staticmethod
    def _fresh_dbo(setup: RunSetup) -> CompositeState:
        cfg = setup.config
        phi0 = setup.initial_field()
        s0 = LowRankService.init_from_field(phi0, cfg.reduction.rank)
        blocks = {'U': s0.U.values, 'Sigma': s0.Sigma, 'Y': s0.Y}
        v0 = setup.initial_velocity()
        if v0 is not None:
            blocks['v'] = v0
        if cfg.outputs.fom_reference:
            blocks['phi'] = phi0.values
        return CompositeState(blocks, 0.0)

    @staticmethod
    def _resume_step(t: float, dt: float) -> int:
        step = int(round(t / dt))
        if abs(step * dt - t) > 1e-9 * max(1.0, abs(t)):
            raise ContractViolation(f"snapshot time {t!r} is not on the dt = {dt!r} grid")
        return step

    @staticmethod
    def _resume_dbo(setup: RunSetup, out: pathlib.Path):
        """État composite et indice de pas du dernier snapshot DBO complet."""
        cfg = setup.config
        snap = out / DBO_SNAPSHOTS
        SimulationService._drop_partial_records(out)
        required = []
        if setup.burgers:
            required.append(out / VELOCITY_SNAPSHOTS)
        if cfg.outputs.fom_reference:
            required.append(out / REFERENCE_CHECKPOINT)
        index = SimulationService._last_common_record(snap, DBO_MAGIC, required)
        if index is None:
            raise ContractViolation(f"cannot resume: no DBO snapshot in {out}")
        last = SnapshotStorage.record_at(snap, DBO_MAGIC, index)
        if last.dims != (setup.grid.n_points, cfg.reduction.rank, cfg.species.n_species):
            raise ContractViolation(f"cannot resume: snapshot dims {last.dims} do not match the configuration")
        step0 = SimulationService._resume_step(last.t, cfg.time.dt)
        blocks = {'U': last.U, 'Sigma': last.Sigma, 'Y': last.Y}

        if setup.burgers:
            vel = SimulationService._record_at_time(out / VELOCITY_SNAPSHOTS, last.t)
            blocks['v'] = vel.phi[:, 0]
        if cfg.outputs.fom_reference:
            ref = SimulationService._record_at_time(out / REFERENCE_CHECKPOINT, last.t)
            blocks['phi'] = ref.phi

        SimulationService._truncate_outputs(out, last.t)
        logger.info("resuming %s from t=%r (step %d)", out, last.t, step0)
        return CompositeState(blocks, last.t), step0

    @staticmethod
    def _drop_partial_records(out: pathlib.Path) -> None:
        """Coupe les enregistrements incomplets laissés par un run interrompu."""
        for name, magic in ((DBO_SNAPSHOTS, DBO_MAGIC), (FOM_SNAPSHOTS, FOM_MAGIC),
                            (VELOCITY_SNAPSHOTS, FOM_MAGIC), (REFERENCE_CHECKPOINT, FOM_MAGIC)):
            if (out / name).exists():
                SnapshotStorage.drop_partial_tail(out / name, magic)

    @staticmethod
    def _last_common_record(snap: pathlib.Path, magic: bytes,
                            required: List[pathlib.Path]) -> Optional[int]:
        """Indice du dernier enregistrement dont le temps figure aussi dans `required`."""
        if not snap.exists():
            return None
        times = SnapshotStorage.times(snap, magic)
        others = []
        for path in required:
            if not path.exists():
                raise ContractViolation(f"cannot resume: {path.name} is missing")
            others.append(set(SnapshotStorage.times(path, FOM_MAGIC)))
        for index in range(len(times) - 1, -1, -1):
            if all(times[index] in other for other in others):
                return index
        return None

    @staticmethod
    def _record_at_time(path: pathlib.Path, t: float):
        if not path.exists():
            raise ContractViolation(f"cannot resume: {path.name} is missing")
        times = SnapshotStorage.times(path, FOM_MAGIC)
        if t not in times:
            raise ContractViolation(f"cannot resume: {path.name} has no record at t={t!r}")
        return SnapshotStorage.record_at(path, FOM_MAGIC, times.index(t))

    @staticmethod
    def _truncate_outputs(out: pathlib.Path, t: float) -> None:
        """Retire tout ce qui a été écrit après t (run interrompu)."""
        for name, magic in ((DBO_SNAPSHOTS, DBO_MAGIC), (FOM_SNAPSHOTS, FOM_MAGIC),
                            (VELOCITY_SNAPSHOTS, FOM_MAGIC)):
            if (out / name).exists():
                SnapshotStorage.truncate_after(out / name, magic, t)
        for name in (DIAGNOSTICS, IPCA_TABLE):
            if (out / name).exists():
                TableReader.truncate_after(out / name, t)

    @staticmethod
    def ipca_header(r: int, with_dbo: bool):
        header = ['t'] + [f'sigma_hat_{i}' for i in range(1, r + 1)] + ['ipca_error']
        return header + ['dbo_error'] if with_dbo else header

    # ********************************************************
    # RUN FOM
    # ********************************************************

    @staticmethod
    def run_fom(cfg: RunConfig, out_dir: Optional[pathlib.Path] = None, resume: bool = False,
                catalog=None) -> RunSummary:
        """Intègre les n_s équations complètes (oracle) avec le même RK4.

        Écrit fom.snap (et velocity.snap) tous les output_stride pas et
        ipca.csv (t, sigma_hat_1..r, erreur de troncature de rang r) tous
        les ipca_stride pas.
        """
        out = pathlib.Path(out_dir or cfg.outputs.directory)
        out.mkdir(parents=True, exist_ok=True)
        setup = SimulationService.build_setup(cfg)
        dt = cfg.time.dt
        r = cfg.reduction.rank
        record = SimulationService._catalog_start(catalog, RunKind.FOM, cfg, out)

        try:
            if resume:
                snap = out / FOM_SNAPSHOTS
                SimulationService._drop_partial_records(out)
                required = [out / VELOCITY_SNAPSHOTS] if setup.burgers else []
                index = SimulationService._last_common_record(snap, FOM_MAGIC, required)
                if index is None:
                    raise ContractViolation(f"cannot resume: no FOM snapshot in {out}")
                last = SnapshotStorage.record_at(snap, FOM_MAGIC, index)
                if last.dims != (setup.grid.n_points, cfg.species.n_species):
                    raise ContractViolation(f"cannot resume: snapshot dims {last.dims} do not match the configuration")
                step0 = SimulationService._resume_step(last.t, dt)
                blocks = {'phi': last.phi}
                if setup.burgers:
                    blocks['v'] = SimulationService._record_at_time(out / VELOCITY_SNAPSHOTS, last.t).phi[:, 0]
                SimulationService._truncate_outputs(out, last.t)
                cs = CompositeState(blocks, last.t)
                logger.info("resuming %s from t=%r (step %d)", out, last.t, step0)
            else:
                step0 = 0
                blocks = {'phi': setup.initial_field().values}
                v0 = setup.initial_velocity()
                if v0 is not None:
                    blocks['v'] = v0
                cs = CompositeState(blocks, 0.0)
                if cfg.outputs.snapshots:
                    SnapshotStorage.create(out / FOM_SNAPSHOTS, FOM_MAGIC)
                    if setup.burgers:
                        SnapshotStorage.create(out / VELOCITY_SNAPSHOTS, FOM_MAGIC)

            (out / RESOLVED_CONFIG).write_text(ConfigParser.render(cfg), encoding='utf-8')
            observers = []
            if cfg.outputs.snapshots:
                def write_snapshots(step: int, state: CompositeState) -> None:
                    SnapshotStorage.write_fom(out / FOM_SNAPSHOTS, state.t, state['phi'])
                    if 'v' in state:
                        SnapshotStorage.write_fom(out / VELOCITY_SNAPSHOTS, state.t, state['v'])

                observers.append(Observer(write_snapshots, cfg.time.output_stride))

            if cfg.outputs.diagnostics:
                ipca_table = TableWriter(out / IPCA_TABLE, SimulationService.ipca_header(r, False),
                                         append=resume)

                def write_ipca(step: int, state: CompositeState) -> None:
                    ref = FomService.ipca(FomState(Quasimatrix(setup.grid, state['phi']), state.t))
                    ipca_table.write_row([state.t, *ref.singular_values[:r], ref.truncation_error(r)])

                observers.append(Observer(write_ipca, cfg.time.ipca_stride))

            logger.info("run-fom: N=%d n_s=%d dt=%g t_final=%g -> %s",
                        setup.grid.n_points, cfg.species.n_species, dt, cfg.time.t_final, out)
            result = TimeIntegrationService.integrate(
                cs, SimulationService.composite_rhs(setup), dt, cfg.time.t_final,
                observers=observers, first_step=step0, t_origin=0.0, observe_initial=not resume,
            )
        except Exception as exc:
            SimulationService._catalog_fail(catalog, record, exc)
            raise

        summary = RunSummary(out_dir=out, steps=result.steps, t_reached=result.state.t)
        SimulationService._catalog_complete(catalog, record, summary)
        logger.info("run-fom finished at t=%g after %d steps", summary.t_reached, summary.steps)
        return summary

    # ********************************************************
    # CATALOGUE
    # ********************************************************

    @staticmethod
    def _catalog_start(catalog, kind: RunKind, cfg: RunConfig, out: pathlib.Path):
        """Insère le run (RUNNING) ; un catalogue indisponible n'arrête pas le calcul."""
        if catalog is None:
            return None
        record = RunRecord(kind=kind, status=RunStatus.RUNNING, out_dir=str(out.resolve()),
                           config_path=cfg.source_path,
                           n_points=cfg.grid.n_points, n_species=cfg.species.n_species,
                           rank=cfg.reduction.rank if kind == RunKind.DBO else None,
                           t_final=cfg.time.t_final)
        try:
            with catalog.transaction():
                catalog.new(record)
        except SQLAlchemyError as exc:
            logger.warning("run catalog unavailable: %s", exc)
            return None
        return record

    @staticmethod
    def _catalog_complete(catalog, record: Optional[RunRecord], summary: RunSummary) -> None:
        if catalog is None or record is None:
            return
        record.complete(summary.t_reached, summary.final_error)
        try:
            catalog.save()
        except SQLAlchemyError as exc:
            logger.warning("could not update run catalog: %s", exc)

    @staticmethod
    def _catalog_fail(catalog, record: Optional[RunRecord], exc: Exception) -> None:
        if catalog is None or record is None:
            return
        record.fail(str(exc))
        try:
            catalog.save()
        except SQLAlchemyError as err:
            logger.warning("could not update run catalog: %s", err)
