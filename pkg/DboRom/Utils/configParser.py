"""
configParser.py - Lecture, validation et écho des fichiers de run.

Grammaire :
- lignes vides et commentaires (#) ignorés, commentaire de fin de ligne retiré
- [section] ouvre une section, puis des lignes `clé = valeur`
- réels : syntaxe Python, plus `pi`, `<réel>*pi` et `<réel>pi`
- booléens : true/false/yes/no/1/0
- listes : valeurs séparées par des virgules

Toute erreur lève ConfigError avec le numéro de ligne (0 pour les
contrôles croisés entre sections).
"""

import logging
import math
import pathlib
from dataclasses import fields
from typing import Any, Callable, Dict, Optional, Tuple, Union

from Models.configModel import RunConfig
from Services.kineticsService import KineticsService
from Utils.errors import ConfigError

logger = logging.getLogger(__name__)

U64_MAX = 2 ** 64 - 1

_TRUE = {'true', 'yes', '1'}
_FALSE = {'false', 'no', '0'}


# ********************************************************
# CONVERSIONS
# ********************************************************

def parse_real(text: str) -> float:
    """Réel fini, avec prise en charge de pi.

    Raises:
        ValueError: Valeur mal formée ou non finie
    """
    token = text.strip().lower()
    if token.endswith('pi'):
        head = token[:-2].strip()
        if head.endswith('*'):
            head = head[:-1].strip()
        if head in ('', '+'):
            factor = 1.0
        elif head == '-':
            factor = -1.0
        else:
            factor = float(head)
        value = factor * math.pi
    else:
        value = float(token)
    if not math.isfinite(value):
        raise ValueError(f"'{text}' is not a finite real")
    return value


def parse_int(text: str) -> int:
    token = text.strip()
    try:
        return int(token)
    except ValueError:
        raise ValueError(f"'{text}' is not an integer") from None


def parse_bool(text: str) -> bool:
    token = text.strip().lower()
    if token in _TRUE:
        return True
    if token in _FALSE:
        return False
    raise ValueError(f"'{text}' is not a boolean (true/false/yes/no/1/0)")


def _list_of(item: Callable[[str], Any]) -> Callable[[str], Tuple[Any, ...]]:
    def convert(text: str) -> Tuple[Any, ...]:
        if not text.strip():
            return ()
        return tuple(item(part) for part in text.split(','))
    return convert


def _converter(default: Any) -> Callable[[str], Any]:
    """Convertisseur déduit de la valeur par défaut du champ."""
    if isinstance(default, bool):
        return parse_bool
    if isinstance(default, int):
        return parse_int
    if isinstance(default, float):
        return parse_real
    if isinstance(default, tuple):
        return _list_of(parse_int if all(isinstance(v, int) for v in default) and default else parse_real)
    return lambda text: text.strip()


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ', '.join(_format(v) for v in value)
    return str(value)


# ********************************************************
# RÈGLES PAR CLÉ
# ********************************************************

def _is_u64(v: int) -> bool:
    return 0 <= v <= U64_MAX


# (section, clé) -> (prédicat, message)
_RULES: Dict[Tuple[str, str], Tuple[Callable[[Any], bool], str]] = {
    ('grid', 'n_points'): (lambda v: v >= 4 and v % 2 == 0, "must be even and >= 4"),
    ('grid', 'length'): (lambda v: v > 0, "must be positive"),
    ('time', 'dt'): (lambda v: v > 0, "must be positive"),
    ('time', 't_final'): (lambda v: v >= 0, "must be >= 0"),
    ('time', 'output_stride'): (lambda v: v >= 1, "must be >= 1"),
    ('time', 'ipca_stride'): (lambda v: v >= 1, "must be >= 1"),
    ('model', 'velocity'): (lambda v: v in ('burgers', 'zero'), "must be burgers or zero"),
    ('model', 'nu'): (lambda v: v >= 0, "must be >= 0"),
    ('model', 'alpha_law'): (lambda v: v in ('c/sqrt(i)', 'constant', 'list'),
                             "must be c/sqrt(i), constant or list"),
    ('model', 'alpha_c'): (lambda v: v >= 0, "must be >= 0"),
    ('model', 'alpha_list'): (lambda v: all(a >= 0 for a in v), "diffusivities must be >= 0"),
    ('model', 'source'): (lambda v: v in KineticsService.registry,
                          "unknown source model"),
    ('species', 'n_species'): (lambda v: v >= 1, "must be >= 1"),
    ('species', 'ic'): (lambda v: v == 'spectrum', "only 'spectrum' is supported"),
    ('species', 'b'): (lambda v: v > 0, "must be positive"),
    ('species', 'seed'): (_is_u64, "must be an unsigned 64-bit integer"),
    ('reduction', 'rank'): (lambda v: v >= 1, "must be >= 1"),
    ('reduction', 'gauge'): (lambda v: v in ('zero', 'random'), "must be zero or random"),
    ('reduction', 'gauge_seed'): (_is_u64, "must be an unsigned 64-bit integer"),
    ('reduction', 'gauge_scale'): (lambda v: v >= 0, "must be >= 0"),
    ('outputs', 'profiles'): (lambda v: all(i >= 1 for i in v), "species indices are 1-based"),
}


class ConfigParser:
    """Lecture et validation des fichiers de configuration de run."""

    @staticmethod
    def load(path: Union[str, pathlib.Path]) -> RunConfig:
        """Lit et valide un fichier.

        Raises:
            ConfigError: Fichier illisible ou invalide
        """
        path = pathlib.Path(path)
        try:
            text = path.read_text(encoding='utf-8')
        except OSError as exc:
            raise ConfigError(f"cannot read configuration: {exc.strerror or exc}", 0, str(path)) from exc
        return ConfigParser.parse(text, str(path))

    @staticmethod
    def parse(text: str, source: Optional[str] = None) -> RunConfig:
        """Analyse le texte d'une configuration.

        Args:
            text: Contenu du fichier
            source: Nom affiché dans les messages d'erreur

        Returns:
            RunConfig résolue (défauts complétés)

        Raises:
            ConfigError: Erreur de syntaxe, clé inconnue, valeur hors domaine
        """
        config = RunConfig(source_path=source)
        changes: Dict[str, Dict[str, Any]] = {name: {} for name in RunConfig.SECTIONS}
        section = None

        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            if line.startswith('['):
                if not line.endswith(']'):
                    raise ConfigError(f"malformed section header '{line}'", lineno, source)
                section = line[1:-1].strip()
                if section not in RunConfig.SECTIONS:
                    raise ConfigError(f"unknown section [{section}]", lineno, source)
                continue
            if '=' not in line:
                raise ConfigError(f"expected 'key = value', got '{line}'", lineno, source)
            if section is None:
                raise ConfigError("key outside of any section", lineno, source)

            key, value = (part.strip() for part in line.split('=', 1))
            current = getattr(config, section)
            known = {f.name for f in fields(current)}
            if key not in known:
                raise ConfigError(f"unknown key '{key}' in [{section}]", lineno, source)
            if key in changes[section]:
                raise ConfigError(f"duplicate key '{key}' in [{section}]", lineno, source)

            default = getattr(current, key)
            if not value and not isinstance(default, tuple):
                raise ConfigError(f"missing value for '{key}'", lineno, source)
            try:
                parsed = _converter(default)(value)
            except ValueError as exc:
                raise ConfigError(f"invalid value for [{section}] {key}: {exc}", lineno, source) from None

            check, message = _RULES.get((section, key), (lambda v: True, ""))
            if not check(parsed):
                raise ConfigError(f"[{section}] {key} = {value}: {message}", lineno, source)
            changes[section][key] = parsed

        for name, values in changes.items():
            if values:
                config = config.with_section(name, **values)
        ConfigParser.check(config)
        logger.debug("configuration %s resolved", source or '<config>')
        return config

    @staticmethod
    def check(config: RunConfig) -> None:
        """Contrôles croisés entre sections (ligne 0).

        Raises:
            ConfigError: Combinaison incohérente
        """
        src = config.source_path
        N = config.grid.n_points
        n_s = config.species.n_species
        r = config.reduction.rank
        if r > min(N, n_s):
            raise ConfigError(f"rank {r} exceeds min(n_points, n_species) = {min(N, n_s)}", 0, src)

        dt = config.time.dt
        t_final = config.time.t_final
        steps = t_final / dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ConfigError(f"t_final = {t_final!r} is not an integer multiple of dt = {dt!r}", 0, src)

        model = config.model
        if model.alpha_law == 'list' and len(model.alpha_list) != n_s:
            raise ConfigError(f"alpha_list has {len(model.alpha_list)} entries, expected {n_s}", 0, src)
        if model.source == 'toy_abc' and n_s < 3:
            raise ConfigError("source toy_abc needs n_species >= 3", 0, src)

        bad = [i for i in config.outputs.profiles if i > n_s]
        if bad:
            raise ConfigError(f"profile species {bad} exceed n_species = {n_s}", 0, src)

    @staticmethod
    def render(config: RunConfig) -> str:
        """Écho de la configuration résolue, relisible par parse()."""
        lines = ["# resolved configuration"]
        for name, values in config.as_sections().items():
            lines.append("")
            lines.append(f"[{name}]")
            for key, value in values.items():
                lines.append(f"{key} = {_format(value)}".rstrip())
        return "\n".join(lines) + "\n"
