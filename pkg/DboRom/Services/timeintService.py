"""
timeintService.py - Intégration Runge-Kutta d'ordre 4 à pas fixe.

Ce service gère :
1. Un pas RK4 classique sur un état composite
2. La marche en temps avec observateurs (diagnostics, snapshots)

Les crochets post-pas (réorthonormalisation) sont appliqués après la
combinaison finale, jamais entre les étages.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from Models.compositeModel import CompositeState
from Utils.errors import ContractViolation, NumericalFailure, ObserverError, DboRomError

logger = logging.getLogger(__name__)

# (t, état) -> dérivées, même disposition de blocs
RhsEvaluator = Callable[[float, CompositeState], CompositeState]
PostStepHook = Callable[[CompositeState], CompositeState]


@dataclass(frozen=True)
class Observer:
    """Rappel invoqué tous les `stride` pas (indice de pas global)."""

    callback: Callable[[int, CompositeState], None]
    stride: int = 1

    def __post_init__(self):
        if self.stride < 1:
            raise ContractViolation("observer stride must be >= 1")


@dataclass(frozen=True)
class IntegrationResult:
    """État final et nombre de pas effectués."""

    state: CompositeState
    steps: int
    last_step: int


class TimeIntegrationService:
    """Intégrateur RK4 à pas fixe."""

    # ********************************************************
    # UN PAS
    # ********************************************************

    @staticmethod
    def rk4_step(s: CompositeState, rhs: RhsEvaluator, dt: float,
                 post_step: Optional[PostStepHook] = None,
                 t_next: Optional[float] = None) -> CompositeState:
        """Pas RK4 classique (tableau 1/2, 1/2, 1 ; poids 1/6, 1/3, 1/3, 1/6).

        Raises:
            NumericalFailure: Étage non fini (indice 1..4)
        """
        if not dt > 0:
            raise ContractViolation(f"dt must be positive, got {dt}")
        t = s.t
        half = 0.5 * dt

        k1 = TimeIntegrationService._stage(rhs, t, s, 1)
        k2 = TimeIntegrationService._stage(rhs, t + half, s.combine([half], [k1], t + half), 2)
        k3 = TimeIntegrationService._stage(rhs, t + half, s.combine([half], [k2], t + half), 3)
        k4 = TimeIntegrationService._stage(rhs, t + dt, s.combine([dt], [k3], t + dt), 4)

        t_new = t + dt if t_next is None else t_next
        new = s.combine([dt / 6.0, dt / 3.0, dt / 3.0, dt / 6.0], [k1, k2, k3, k4], t_new)
        bad = new.first_non_finite()
        if bad is not None:
            raise NumericalFailure(f"non-finite block '{bad}' after RK4 combination at t={t_new!r}",
                                   stage=5)
        if post_step is not None:
            new = post_step(new)
        return new

    @staticmethod
    def _stage(rhs: RhsEvaluator, t: float, state: CompositeState, index: int) -> CompositeState:
        bad = state.first_non_finite()
        if bad is not None:
            raise NumericalFailure(f"non-finite block '{bad}' entering RK4 stage {index} at t={t!r}",
                                   stage=index)
        k = rhs(t, state)
        bad = k.first_non_finite()
        if bad is not None:
            raise NumericalFailure(f"non-finite derivative '{bad}' in RK4 stage {index} at t={t!r}",
                                   stage=index)
        return k

    # ********************************************************
    # MARCHE EN TEMPS
    # ********************************************************

    @staticmethod
    def integrate(s0: CompositeState, rhs: RhsEvaluator, dt: float, t_final: float,
                  observers: Sequence[Observer] = (),
                  post_step: Optional[PostStepHook] = None,
                  first_step: int = 0, t_origin: Optional[float] = None,
                  observe_initial: bool = True) -> IntegrationResult:
        """Marche à pas fixe jusqu'à t_final.

        Le temps du pas global k vaut t_origin + k * dt : une reprise depuis
        un snapshot (first_step > 0) retrouve exactement les mêmes instants.

        Args:
            s0: État initial
            rhs: Évaluateur du second membre
            dt: Pas de temps
            t_final: Temps final, (t_final - t0) / dt entier à l'arrondi près
            observers: Observateurs appelés aux pas multiples de leur stride
            post_step: Crochet appliqué après chaque pas accepté
            first_step: Indice global du pas de s0
            t_origin: Temps du pas global 0 (s0.t par défaut)
            observe_initial: Appeler les observateurs sur s0

        Raises:
            ContractViolation: Pas négatif ou intervalle non multiple de dt
            ObserverError: Échec d'un observateur (avec le temps)
        """
        if not dt > 0:
            raise ContractViolation(f"dt must be positive, got {dt}")
        if t_origin is None:
            t_origin = s0.t - first_step * dt
        span = t_final - s0.t
        n_steps = int(round(span / dt))
        if span < -1e-12 or abs(n_steps * dt - span) > 1e-9 * max(1.0, abs(t_final)):
            raise ContractViolation(
                f"t_final - t0 = {span!r} is not a non-negative multiple of dt = {dt!r}"
            )

        def notify(step: int, state: CompositeState) -> None:
            for obs in observers:
                if step % obs.stride:
                    continue
                try:
                    obs.callback(step, state)
                except DboRomError as exc:
                    if isinstance(exc, ObserverError):
                        raise
                    raise ObserverError(str(exc), state.t) from exc
                except Exception as exc:
                    raise ObserverError(f"{type(exc).__name__}: {exc}", state.t) from exc

        logger.info("integrating %d steps of dt=%g from t=%g", n_steps, dt, s0.t)
        state = s0
        if observe_initial:
            notify(first_step, state)
        for n in range(1, n_steps + 1):
            step = first_step + n
            state = TimeIntegrationService.rk4_step(state, rhs, dt, post_step=post_step,
                                                    t_next=t_origin + step * dt)
            notify(step, state)
        return IntegrationResult(state=state, steps=n_steps, last_step=first_step + n_steps)
