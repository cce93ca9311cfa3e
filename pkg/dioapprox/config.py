"""Configuration files and parameter validation."""
from __future__ import annotations

import configparser
import logging

import voluptuous as vol

from . import ParameterRejected
from .additive import AdditiveFunction, ResidueFilter, builtin, from_expression
from .const import (
    CONF_C,
    CONF_DELTA,
    CONF_DEPTH,
    CONF_EH,
    CONF_EPSILON,
    CONF_ERDOS_BOUND,
    CONF_ETA,
    CONF_EXPRESSION,
    CONF_GAMMA_ASSUMED,
    CONF_GAMMA_PRIME_ASSUMED,
    CONF_LAMBDA,
    CONF_MAX_CANDIDATES,
    CONF_MAX_CERTIFICATES,
    CONF_MAX_MODULUS_BITS,
    CONF_MAX_Z,
    CONF_MEMBERSHIP_PRIME_LIMIT,
    CONF_MEMBERSHIP_SAMPLES,
    CONF_MONOTONE_FROM,
    CONF_MU,
    CONF_N0_MARGIN,
    CONF_PRECISION_BITS,
    CONF_RESIDUE_FILTER,
    CONF_RHO_ATTEMPTS,
    CONF_RHO_ITERATIONS,
    CONF_SEARCH_LIMIT,
    CONF_SEED,
    CONF_SEGMENT_SIZE,
    CONF_SIEVE_MEMORY,
    CONF_T0,
    CONF_TRIAL_BOUND,
    CONF_V0,
    CONF_WORKERS,
    CONF_XI,
    CONF_XI_PRIME,
    CONF_Z,
    CONF_ZETA_MULTIPLICATIVE,
    DEFAULT_C,
    DEFAULT_DELTA,
    DEFAULT_LAMBDA,
    DEFAULT_MONOTONE_FROM,
    DEFAULT_PRECISION_BITS,
    DEFAULT_T0,
    DOMAIN,
)

_LOGGER = logging.getLogger(__name__)

FUNCTION_SECTION_PREFIX = "function:"


OPEN_UNIT = vol.All(
    vol.Coerce(float), vol.Range(min=0, max=1, min_included=False, max_included=False)
)
POSITIVE = vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False))


def _residue_filter(value):
    if value is None or isinstance(value, ResidueFilter):
        return value
    try:
        return ResidueFilter.parse(str(value))
    except ParameterRejected as err:
        raise vol.Invalid(str(err)) from err


PARAMETER_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_PRECISION_BITS): vol.All(
            vol.Coerce(int), vol.Range(min=64, max=8192)
        ),
        vol.Optional(CONF_SEED): vol.Coerce(int),
        vol.Optional(CONF_TRIAL_BOUND): vol.All(vol.Coerce(int), vol.Range(min=100)),
        vol.Optional(CONF_RHO_ITERATIONS): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_RHO_ATTEMPTS): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_SIEVE_MEMORY): vol.All(vol.Coerce(int), vol.Range(min=1024)),
        vol.Optional(CONF_MEMBERSHIP_PRIME_LIMIT): vol.All(
            vol.Coerce(int), vol.Range(min=2)
        ),
        vol.Optional(CONF_MEMBERSHIP_SAMPLES): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
        vol.Optional(CONF_XI): OPEN_UNIT,
        vol.Optional(CONF_XI_PRIME): OPEN_UNIT,
        vol.Optional(CONF_V0): OPEN_UNIT,
        vol.Optional(CONF_ETA): OPEN_UNIT,
        vol.Optional(CONF_DEPTH): vol.All(vol.Coerce(int), vol.Range(min=0, max=64)),
        vol.Optional(CONF_EPSILON): vol.All(
            vol.Coerce(float),
            vol.Range(min=0, max=1 / 3, min_included=False, max_included=False),
        ),
        vol.Optional(CONF_MU): POSITIVE,
        vol.Optional(CONF_Z): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_MAX_Z): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_SEGMENT_SIZE): vol.All(vol.Coerce(int), vol.Range(min=64)),
        vol.Optional(CONF_SEARCH_LIMIT): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_WORKERS): vol.All(vol.Coerce(int), vol.Clamp(min=1, max=64)),
        vol.Optional(CONF_EH): vol.Boolean(),
        vol.Optional(CONF_MAX_MODULUS_BITS): vol.All(
            vol.Coerce(int), vol.Range(min=8, max=4096)
        ),
        vol.Optional(CONF_MAX_CERTIFICATES): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_MAX_CANDIDATES): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_GAMMA_ASSUMED): OPEN_UNIT,
        vol.Optional(CONF_GAMMA_PRIME_ASSUMED): OPEN_UNIT,
        vol.Optional(CONF_N0_MARGIN): vol.All(vol.Coerce(float), vol.Range(min=0)),
        vol.Optional(CONF_ERDOS_BOUND): vol.All(
            vol.Coerce(int), vol.Range(min=2, max=10**8)
        ),
        vol.Optional(CONF_ZETA_MULTIPLICATIVE): vol.Coerce(str),
    }
)

FUNCTION_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_EXPRESSION): vol.All(str, vol.Length(min=1)),
        vol.Optional(CONF_DELTA, default=DEFAULT_DELTA): vol.All(
            vol.Coerce(float), vol.Range(min=0, max=1, min_included=False)
        ),
        vol.Optional(CONF_LAMBDA): POSITIVE,
        vol.Optional(CONF_C): POSITIVE,
        vol.Optional(CONF_T0): POSITIVE,
        vol.Optional(CONF_RESIDUE_FILTER): _residue_filter,
        vol.Optional(CONF_MONOTONE_FROM, default=DEFAULT_MONOTONE_FROM): vol.All(
            vol.Coerce(int), vol.Range(min=2)
        ),
    }
)


def _rejected(err: vol.Invalid, where: str) -> ParameterRejected:
    path = ".".join(str(part) for part in err.path)
    return ParameterRejected(
        f"{where}: {err.msg}" + (f" at '{path}'" if path else ""),
        key=path or where,
    )


def validate_parameters(raw: dict, where: str = DOMAIN) -> dict:
    """Coerce and range-check a parameter set; None values are dropped."""
    data = {key: value for key, value in raw.items() if value is not None}
    try:
        return PARAMETER_SCHEMA(data)
    except vol.Invalid as err:
        raise _rejected(err, where) from err


def validate_function(name: str, raw: dict) -> dict:
    try:
        return FUNCTION_SCHEMA(dict(raw))
    except vol.Invalid as err:
        raise _rejected(err, f"{FUNCTION_SECTION_PREFIX}{name}") from err


def build_function(
    name: str, settings: dict, precision: int = DEFAULT_PRECISION_BITS
) -> AdditiveFunction:
    """A custom expression, or a builtin with overridden constants."""
    settings = validate_function(name, settings)
    if CONF_EXPRESSION in settings:
        return from_expression(
            name,
            settings[CONF_EXPRESSION],
            delta=settings[CONF_DELTA],
            lam=settings.get(CONF_LAMBDA, DEFAULT_LAMBDA),
            C=settings.get(CONF_C, DEFAULT_C),
            t0=settings.get(CONF_T0, DEFAULT_T0),
            residue_filter=settings.get(CONF_RESIDUE_FILTER),
            monotone_from=settings[CONF_MONOTONE_FROM],
            precision=precision,
        )
    overrides = {
        key: settings[key]
        for key in (CONF_LAMBDA, CONF_C, CONF_T0, CONF_RESIDUE_FILTER)
        if key in settings
    }
    return builtin(name, precision=precision, **overrides)


class Config(object):
    """Validated parameters and function definitions from one config file"""

    def __init__(self, parameters=None, functions=None) -> None:
        self._parameters = validate_parameters(parameters or {})
        self._functions = dict(functions or {})

    @property
    def parameters(self) -> dict:
        return dict(self._parameters)

    @property
    def function_names(self) -> list:
        return sorted(self._functions)

    @classmethod
    def load(cls, path) -> Config:
        parser = configparser.ConfigParser(interpolation=None)
        # keys are case sensitive (C is not c)
        parser.optionxform = str
        try:
            with open(path, encoding="utf-8") as handle:
                parser.read_file(handle)
        except (OSError, configparser.Error) as err:
            raise ParameterRejected(
                f"cannot read config file {path}: {err}", key="config"
            ) from err

        parameters = {}
        functions = {}
        for section in parser.sections():
            items = dict(parser.items(section))
            if section == DOMAIN:
                parameters.update(items)
            elif section.startswith(FUNCTION_SECTION_PREFIX):
                name = section[len(FUNCTION_SECTION_PREFIX) :].strip()
                if not name:
                    raise ParameterRejected("function section without a name")
                functions[name] = validate_function(name, items)
            else:
                _LOGGER.warning(f"ignoring unknown config section [{section}]")
        _LOGGER.debug(
            f"loaded {path}: {len(parameters)} parameters, functions {sorted(functions)}"
        )
        return cls(parameters, functions)

    def merged(self, overrides: dict) -> dict:
        """Config values with every non-None override applied on top."""
        merged = self.parameters
        merged.update(validate_parameters(overrides, "command line"))
        return merged

    def function(self, name: str, precision: int = DEFAULT_PRECISION_BITS):
        if name in self._functions:
            return build_function(name, self._functions[name], precision)
        return builtin(name, precision=precision)
