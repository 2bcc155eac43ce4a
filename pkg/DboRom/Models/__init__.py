"""Modèles de domaine et table du catalogue."""

from .runModel import RunRecord

__all__ = ['RunRecord']
