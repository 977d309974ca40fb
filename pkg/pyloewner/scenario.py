"""
Encapsulation of scenario data. Handles the JSON scenario files driving the
command line: strict schema, defaults, conversion of [re, im] pairs into
complex arrays and validation of every field, with line-precise errors.

"""

from collections import OrderedDict
import numpy as np
from .io_utils import ConfigError, load_json, locate_key, pairs_to_complex
from .series_core import (check_coefficients, check_functional,
                          koebe_coefficients)
from .loewner_dynamics import make_driving_function
from .extremal_search import SearchConfig

DEFAULT_TOLERANCES = OrderedDict([
    ("residual", 1e-9), ("degeneracy", 1e-8), ("convergence", 1e-8),
    ("argmax", 1e-6)])

DEFAULT_EXAMPLE = OrderedDict([
    ("scan_lambdas", [-.90, -1.05]),
    ("proposition_lambdas", [0., -.5, -.9, -1.2, -1.5])])

SEARCH_KEYS = tuple(SearchConfig().to_dict().keys())

# key -> default value
SCENARIO_KEYS = OrderedDict([
    ("n", None), ("lambda", None), ("mu", None), ("a", "koebe"),
    ("driving", None), ("horizon", 30.), ("step", 1e-3),
    ("sample_every", 1), ("exact_tail", False),
    ("tolerances", None), ("m_max", None), ("normalize_rotation", True),
    ("search", None), ("example", None)])

# fields each command needs
REQUIRED = dict(simulate=("n",), check=("n", "lambda", "mu"), example=())


class ScenarioConfig(object):
    """
    Encapsulation of one scenario (one config file).

    Parameters
    ----------
    n: int
        truncation order, n >= 2

    lambda_, mu: lists of [re, im] pairs (or reals)
        functionals (lambda_2, ..., lambda_n) and (mu_2, ..., mu_n)

    a: string or list of [re, im] pairs, optional (default "koebe")
        coefficients (a_1, ..., a_n), or "koebe" for (1, 2, ..., n)

    driving: dict, optional (default constant pi)
        driving function description

    horizon, step: floats, optional (defaults 30 and 1e-3)
        integration settings

    sample_every: int, optional (default 1)
        trajectory subsampling

    exact_tail: bool, optional (default False)
        close the tail exactly for eventually constant driving functions

    tolerances: dict, optional
        residual, degeneracy, convergence and argmax tolerances

    m_max: int, optional (default None, meaning n - 1)

    normalize_rotation: bool, optional (default True)

    search: dict, optional
        SearchConfig settings

    example: dict, optional
        scan_lambdas and proposition_lambdas

    path, text: strings, optional
        origin of the config, for error messages

    """

    def __init__(self, n=None, lambda_=None, mu=None, a="koebe",
                 driving=None, horizon=30., step=1e-3, sample_every=1,
                 exact_tail=False, tolerances=None, m_max=None,
                 normalize_rotation=True, search=None, example=None,
                 path=None, text=None):
        self.n = n
        self.lambda_ = lambda_
        self.mu = mu
        self.a = a
        self.driving = driving
        self.horizon = horizon
        self.step = step
        self.sample_every = sample_every
        self.exact_tail = exact_tail
        self.tolerances = tolerances
        self.m_max = m_max
        self.normalize_rotation = normalize_rotation
        self.search = search
        self.example = example
        self.path = path
        self.text = text

    def __repr__(self):
        return str(self.__dict__)

    def _error(self, msg, key=None):
        lineno = None
        if key is not None and self.text is not None:
            lineno = locate_key(self.text, key)
        return ConfigError(msg, path=self.path, lineno=lineno)

    @classmethod
    def from_json(cls, path):
        """Loads a scenario file; unknown keys are rejected.

        Raises
        ------
        ConfigError

        """
        doc, text = load_json(path)
        if not isinstance(doc, dict):
            raise ConfigError("top-level value must be an object", path=path,
                              lineno=1)
        for key in doc:
            if key not in SCENARIO_KEYS:
                raise ConfigError("unknown field '%s'" % key, path=path,
                                  lineno=locate_key(text, key))
        kwargs = dict((key if key != "lambda" else "lambda_", value)
                      for key, value in doc.items())
        return cls(path=path, text=text, **kwargs)

    def _check_nested(self, name, value, allowed):
        if value is None:
            return OrderedDict()
        if not isinstance(value, dict):
            raise self._error("'%s' must be an object" % name, key=name)
        for key in value:
            if key not in allowed:
                raise self._error("unknown field '%s' in '%s'" % (key, name),
                                  key=key)
        return value

    def _positive(self, name, value, key=None, integer=False):
        ok = (not isinstance(value, bool) and
              isinstance(value, (int, float)) and value > 0 and
              np.isfinite(value))
        if ok and integer:
            ok = int(value) == value
        if not ok:
            raise self._error("'%s' must be a positive %s, got %r" % (
                name, "integer" if integer else "number", value),
                key=key or name)
        return int(value) if integer else float(value)

    def sanitize(self, command="simulate"):
        """Validates every field and converts it to its working type.

        Parameters
        ----------
        command: string, optional (default "simulate")
            one of "simulate", "check", "example"; decides which fields are
            mandatory

        Returns
        -------
        self: ScenarioConfig

        Raises
        ------
        ConfigError

        """
        for field in REQUIRED[command]:
            attr = "lambda_" if field == "lambda" else field
            if getattr(self, attr) is None:
                raise self._error("missing field '%s'" % field)

        if self.n is not None:
            self.n = self._positive("n", self.n, integer=True)
            if self.n < 2:
                raise self._error("'n' must be >= 2, got %i" % self.n,
                                  key="n")

        for key, attr in [("lambda", "lambda_"), ("mu", "mu")]:
            value = getattr(self, attr)
            if value is None:
                continue
            try:
                if not isinstance(value, list):
                    raise ValueError("'%s' must be a list of [re, im] pairs"
                                     % key)
                value = check_functional(pairs_to_complex(value, name=key),
                                         n=self.n, nondegenerate=True)
            except ValueError as exc:
                raise self._error(str(exc), key=key)
            setattr(self, attr, value)

        if self.n is not None:
            try:
                if isinstance(self.a, str):
                    if self.a != "koebe":
                        raise ValueError("'a' must be \"koebe\" or a list of "
                                         "[re, im] pairs, got %r" % self.a)
                    self.a = koebe_coefficients(self.n)
                elif isinstance(self.a, list):
                    self.a = check_coefficients(
                        pairs_to_complex(self.a, name="a"), n=self.n)
                elif not isinstance(self.a, np.ndarray):
                    raise ValueError("'a' must be \"koebe\" or a list of "
                                     "[re, im] pairs, got %r" % (self.a,))
            except ValueError as exc:
                raise self._error(str(exc), key="a")

        if self.driving is None:
            self.driving = OrderedDict([("kind", "constant"),
                                        ("value", np.pi)])
        if not isinstance(self.driving, dict):
            raise self._error("'driving' must be an object", key="driving")
        try:
            make_driving_function(self.driving)
        except ValueError as exc:
            raise self._error(str(exc), key="driving")

        self.horizon = self._positive("horizon", self.horizon)
        self.step = self._positive("step", self.step)
        if self.step > self.horizon:
            raise self._error("'step' exceeds 'horizon'", key="step")
        self.sample_every = self._positive("sample_every", self.sample_every,
                                           integer=True)
        for key in ["exact_tail", "normalize_rotation"]:
            if not isinstance(getattr(self, key), bool):
                raise self._error("'%s' must be true or false" % key, key=key)
        if self.m_max is not None:
            self.m_max = self._positive("m_max", self.m_max, integer=True)

        tolerances = self._check_nested("tolerances", self.tolerances,
                                        DEFAULT_TOLERANCES)
        self.tolerances = OrderedDict(
            (key, self._positive("tolerances.%s" % key,
                                 tolerances.get(key, default), key=key))
            for key, default in DEFAULT_TOLERANCES.items())

        search = self._check_nested("search", self.search, SEARCH_KEYS)
        try:
            self.search = SearchConfig(**search).sanitize()
        except (TypeError, ValueError) as exc:
            raise self._error(str(exc), key="search")

        example = self._check_nested("example", self.example,
                                     DEFAULT_EXAMPLE)
        self.example = OrderedDict()
        for key, default in DEFAULT_EXAMPLE.items():
            value = example.get(key, default)
            if (not isinstance(value, list) or not value or not all(
                    isinstance(x, (int, float)) and not isinstance(x, bool)
                    and np.isfinite(x) for x in value)):
                raise self._error("'%s' must be a nonempty list of numbers"
                                  % key, key=key)
            self.example[key] = [float(x) for x in value]
        return self

    def to_dict(self):
        """Plain (JSON-ready) view of the sanitized scenario."""
        out = OrderedDict()
        for key in SCENARIO_KEYS:
            value = getattr(self, "lambda_" if key == "lambda" else key)
            if isinstance(value, SearchConfig):
                value = value.to_dict()
            out[key] = value
        return out
