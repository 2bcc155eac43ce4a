"""Module DBStorage."""

from .DBStorage import storage

__all__ = ['storage']
