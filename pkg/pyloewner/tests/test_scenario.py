from collections import OrderedDict
import numpy as np
from numpy.testing import assert_raises
from ..io_utils import ConfigError, dumps_json
from ..extremal_search import SearchConfig
from ..scenario import ScenarioConfig, DEFAULT_TOLERANCES, SCENARIO_KEYS
from ._test_utils import make_output_dir, write_scenario

# global setup
OUTPUT_DIR = make_output_dir("scenario")

CHECK_DOC = OrderedDict([
    ("n", 4), ("lambda", [[-.5, 0.], [0., 0.], [1., 0.]]),
    ("mu", [0., 0., 1.]), ("a", "koebe"),
    ("tolerances", OrderedDict([("residual", 1e-10)]))])


def _load(doc, command="check", basename="scenario.json"):
    path = write_scenario(doc, OUTPUT_DIR, basename=basename)
    return ScenarioConfig.from_json(path).sanitize(command)


def test_valid_scenario():
    scenario = _load(CHECK_DOC)
    assert scenario.n == 4
    np.testing.assert_array_equal(scenario.lambda_, [-.5, 0., 1.])
    np.testing.assert_array_equal(scenario.mu, [0., 0., 1.])
    np.testing.assert_array_equal(scenario.a, [1., 2., 3., 4.])
    assert scenario.tolerances["residual"] == 1e-10
    assert scenario.tolerances["argmax"] == DEFAULT_TOLERANCES["argmax"]
    assert scenario.driving["kind"] == "constant"
    assert isinstance(scenario.search, SearchConfig)
    assert scenario.example["scan_lambdas"] == [-.90, -1.05]

    doc = scenario.to_dict()
    assert list(doc.keys()) == list(SCENARIO_KEYS.keys())
    assert '"lambda": [\n' in dumps_json(doc)


def test_explicit_coefficients_and_driving():
    doc = OrderedDict([
        ("n", 3), ("a", [1., [0., 1.], [.5, -.5]]),
        ("driving", OrderedDict([("kind", "piecewise"),
                                 ("breakpoints", [.5]),
                                 ("values", [3., 2.])])),
        ("horizon", 5), ("step", .01), ("sample_every", 10),
        ("exact_tail", True)])
    scenario = _load(doc, command="simulate")
    np.testing.assert_array_equal(scenario.a, [1., 1j, .5 - .5j])
    assert scenario.horizon == 5.
    assert scenario.sample_every == 10
    assert scenario.exact_tail


def test_unknown_key_reports_line():
    text = '{\n  "n": 4,\n  "lambda": [1, 0, 1],\n  "lamda": [1]\n}\n'
    path = write_scenario(text, OUTPUT_DIR, basename="typo.json")
    with assert_raises(ConfigError) as cm:
        ScenarioConfig.from_json(path)
    assert cm.exception.lineno == 4
    assert "lamda" in str(cm.exception)


def test_nested_unknown_key():
    doc = OrderedDict(CHECK_DOC)
    doc["search"] = OrderedDict([("n_starts", 4), ("n_start", 4)])
    with assert_raises(ConfigError) as cm:
        _load(doc, basename="nested.json")
    assert "n_start" in str(cm.exception)
    assert cm.exception.lineno is not None


def test_zero_leading_functional_is_rejected():
    doc = OrderedDict(CHECK_DOC)
    doc["lambda"] = [1., 0., 0.]
    with assert_raises(ConfigError) as cm:
        _load(doc, basename="zero.json")
    assert cm.exception.lineno == 3


def test_missing_fields():
    doc = OrderedDict([("n", 4), ("lambda", [0., 0., 1.])])
    assert_raises(ConfigError, _load, doc, "check", "missing.json")
    _load(doc, "simulate", "missing.json")
    scenario = _load(OrderedDict(), "example", "empty.json")
    assert scenario.n is None
    assert_raises(ConfigError, _load, OrderedDict(), "simulate",
                  "empty.json")


def test_invalid_values():
    for key, value in [("n", 1), ("n", 2.5), ("n", True), ("step", -1.),
                       ("step", 100.), ("sample_every", 0),
                       ("exact_tail", "yes"), ("a", "identity"),
                       ("a", [2., 0., 0., 0.]), ("mu", [0., 1.]),
                       ("m_max", 0), ("tolerances", [1.]),
                       ("driving", OrderedDict([("kind", "brownian")])),
                       ("example", OrderedDict([("scan_lambdas", [])]))]:
        doc = OrderedDict(CHECK_DOC)
        doc[key] = value
        assert_raises(ConfigError, _load, doc, "check", "invalid.json")

    path = write_scenario("[1, 2]", OUTPUT_DIR, basename="list.json")
    assert_raises(ConfigError, ScenarioConfig.from_json, path)


def test_search_section():
    doc = OrderedDict(CHECK_DOC)
    doc["search"] = OrderedDict([("n_starts", 8), ("max_iter", 200)])
    scenario = _load(doc, basename="search.json")
    assert scenario.search.n_starts == 8
    assert scenario.search.max_iter == 200
    assert scenario.search.n_segments == 8

    doc["search"] = OrderedDict([("eps0", -1.)])
    assert_raises(ConfigError, _load, doc, "check", "search.json")
