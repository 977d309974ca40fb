import os
import json
from collections import OrderedDict
import numpy as np
from numpy.testing import assert_raises
from ..loewner_dynamics import ConstantDriving, integrate
from ..io_utils import (ConfigError, complex_to_pairs, pairs_to_complex,
                        locate_key, load_json, dumps_json, save_json,
                        save_trajectory_csv, save_table_csv,
                        trajectory_to_dict)
from ._test_utils import make_output_dir, write_scenario


def test_pairs():
    z = np.array([1. + 2j, -.5j, 3.])
    assert complex_to_pairs(z) == [[1., 2.], [0., -.5], [3., 0.]]
    np.testing.assert_array_equal(pairs_to_complex(complex_to_pairs(z)), z)
    np.testing.assert_array_equal(pairs_to_complex([1, [0, 2]]), [1., 2j])
    for bad in [["1"], [[1., 2., 3.]], [True], [[1., None]]]:
        assert_raises(ValueError, pairs_to_complex, bad)
    with assert_raises(ValueError) as cm:
        pairs_to_complex([1., "x"], name="lambda")
    assert "lambda[1]" in str(cm.exception)


def test_dumps_json_format():
    doc = OrderedDict([("b", .1), ("a", [1, 2.5]), ("z", 1. - 2j),
                       ("flag", True), ("missing", None),
                       ("bad", np.nan), ("nested", OrderedDict(x=[]))])
    text = dumps_json(doc)
    assert text.endswith("}\n")
    assert '"b": 0.10000000000000001' in text
    assert '"a": [1, 2.5]' in text
    assert '"z": [1, -2]' in text
    assert '"bad": null' in text
    assert text.index('"b"') < text.index('"a"')
    parsed = json.loads(text)
    assert parsed["z"] == [1, -2]
    assert parsed["nested"] == dict(x=[])
    assert parsed["flag"] is True

    # deterministic, and floats survive the round trip
    assert dumps_json(doc) == text
    x = np.random.RandomState(0).randn(5)
    np.testing.assert_array_equal(json.loads(dumps_json(list(x))), x)
    assert_raises(TypeError, dumps_json, object())


def test_config_error_message():
    exc = ConfigError("unknown key", path="scenario.json", lineno=4)
    assert str(exc) == "scenario.json:4: unknown key"
    assert str(ConfigError("oops", path="x.json")) == "x.json:?: oops"
    assert str(ConfigError("oops")) == "oops"
    assert isinstance(exc, ValueError)


def test_locate_key():
    text = '{\n  "n": 4,\n  "lambda": [1]\n}'
    assert locate_key(text, "lambda") == 3
    assert locate_key(text, "mu") is None


def test_load_json():
    output_dir = make_output_dir("io")
    path = write_scenario('{\n  "n": 4,\n  "mu": [1 2]\n}', output_dir)
    with assert_raises(ConfigError) as cm:
        load_json(path)
    assert cm.exception.lineno == 3
    assert str(cm.exception).startswith(path + ":3:")

    path = write_scenario(OrderedDict([("n", 4), ("a", "koebe")]),
                          output_dir, basename="ok.json")
    doc, text = load_json(path)
    assert list(doc.keys()) == ["n", "a"]
    assert '"koebe"' in text

    assert_raises(ConfigError, load_json,
                  os.path.join(output_dir, "nonexistent.json"))


def test_save_json():
    output_dir = os.path.join(make_output_dir("io"), "deep", "er")
    path = save_json(dict(x=1.5), output_dir, "out.json")
    with open(path) as fd:
        assert json.load(fd) == dict(x=1.5)


def test_save_trajectory_csv():
    output_dir = make_output_dir("io")
    traj = integrate(ConstantDriving(np.pi), 3, T=1., h=.1, sample_every=5)
    path = save_trajectory_csv(traj, output_dir, "traj.csv")
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (len(traj.times), 5)
    np.testing.assert_array_equal(data[:, 0], traj.times)
    np.testing.assert_array_equal(data[:, 3], traj.a_samples[:, 2].real)
    np.testing.assert_array_equal(data[:, 4], traj.a_samples[:, 2].imag)
    assert_raises(ValueError, save_trajectory_csv, traj, output_dir, "x.csv",
                  include_adjoint=True)

    traj = integrate(ConstantDriving(np.pi), 3, T=1., h=.1,
                     psi0=[0., 1., 1j])
    path = save_trajectory_csv(traj, output_dir, "traj_psi.csv")
    with open(path) as fd:
        header = fd.readline().strip().split(",")
    assert header[-2:] == ["re_psi3", "im_psi3"]
    assert len(header) == 11

    doc = trajectory_to_dict(traj)
    assert list(doc.keys()) == ["t", "a", "psi"]
    assert doc["a"][0] == [[1., 0.], [0., 0.], [0., 0.]]


def test_save_table_csv():
    output_dir = make_output_dir("io")
    path = save_table_csv([(-.9, np.pi, 1., 2., "MAX_AT_PI"),
                           (-1.05, 2., 3., 4., "MAX_OFF_PI")],
                          ["lambda", "argmax", "p", "max_p", "verdict"],
                          output_dir, "table.csv")
    with open(path) as fd:
        lines = fd.read().splitlines()
    assert lines[0] == "lambda,argmax,p,max_p,verdict"
    assert lines[1].split(",")[0] == "-0.90000000000000002"
    assert lines[2].endswith(",MAX_OFF_PI")
    assert float(lines[1].split(",")[1]) == np.pi
