"""
:Module: io_utils
:Synopsis: routine business related to i/o: JSON configs and reports,
CSV trajectories and tables, complex <-> [re, im] conversions

"""

import os
import json
from collections import OrderedDict
import numpy as np

# fixed float format of every report, 17 significant digits round-trip
FLOAT_FORMAT = "%.17g"
INDENT = "  "


class ConfigError(ValueError):
    """Raised on malformed or invalid configuration files.

    The message reads 'path:line: message' when the line is known.
    """

    def __init__(self, msg, path=None, lineno=None):
        self.path = path
        self.lineno = lineno
        if path is not None:
            msg = "%s:%s: %s" % (path, lineno if lineno else "?", msg)
        super(ConfigError, self).__init__(msg)


def complex_to_pairs(z):
    """Converts a complex array into a list of [re, im] pairs."""
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    return [[float(x.real), float(x.imag)] for x in z]


def pairs_to_complex(pairs, name="value"):
    """Converts a list of [re, im] pairs (or of reals) into a complex array.

    Raises
    ------
    ValueError
        if an entry is neither a real nor a pair of reals

    """
    out = []
    for i, p in enumerate(pairs):
        if isinstance(p, bool):
            raise ValueError("%s[%i]: expecting a number or [re, im], got "
                             "%r" % (name, i, p))
        if isinstance(p, (int, float)):
            out.append(complex(p, 0.))
        elif (isinstance(p, (list, tuple)) and len(p) == 2 and
              all(isinstance(x, (int, float)) and not isinstance(x, bool)
                  for x in p)):
            out.append(complex(p[0], p[1]))
        else:
            raise ValueError("%s[%i]: expecting a number or [re, im], got "
                             "%r" % (name, i, p))
    return np.array(out, dtype=np.complex128)


def locate_key(text, key):
    """Returns the (1-based) line number of the first occurrence of the
    JSON key `key` in `text`, or None."""
    token = '"%s"' % key
    for lineno, line in enumerate(text.splitlines(), 1):
        if token in line:
            return lineno
    return None


def load_json(path):
    """Loads a JSON document, keeping key order.

    Returns
    -------
    doc: OrderedDict

    text: string
        raw text of the file (for error localization)

    Raises
    ------
    ConfigError
        if the file can't be read or parsed

    """
    try:
        with open(path) as fd:
            text = fd.read()
    except (IOError, OSError) as exc:
        raise ConfigError("can't read config: %s" % exc, path=path)
    try:
        doc = json.loads(text, object_pairs_hook=OrderedDict)
    except ValueError as exc:
        raise ConfigError(getattr(exc, "msg", str(exc)), path=path,
                          lineno=getattr(exc, "lineno", None))
    return doc, text


def _is_scalar(obj):
    return not isinstance(obj, (dict, list, tuple, np.ndarray))


def _encode(obj, level=0):
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return FLOAT_FORMAT % obj if np.isfinite(obj) else "null"
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode([obj.real, obj.imag], level)
    if isinstance(obj, str):
        return json.dumps(obj)
    pad = INDENT * (level + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ["%s%s: %s" % (pad, json.dumps(str(k)), _encode(v, level + 1))
                 for k, v in obj.items()]
        return "{\n%s\n%s}" % (",\n".join(items), INDENT * level)
    if isinstance(obj, (list, tuple, np.ndarray)):
        obj = list(obj)
        if not obj:
            return "[]"
        if all(_is_scalar(x) and not isinstance(
                x, (complex, np.complexfloating)) for x in obj):
            return "[%s]" % ", ".join(_encode(x, level) for x in obj)
        items = [pad + _encode(x, level + 1) for x in obj]
        return "[\n%s\n%s]" % (",\n".join(items), INDENT * level)
    raise TypeError("Can't encode object of type %s" % type(obj))


def dumps_json(obj):
    """Serializes obj deterministically: keys in insertion order, floats
    with 17 significant digits, non-finite floats as null, complex numbers
    as [re, im]."""
    return _encode(obj) + "\n"


def save_json(obj, output_dir, basename):
    """Writes obj as JSON into output_dir/basename and returns the path."""
    if not os.path.exists(output_dir):
        os.makedirs(output_dir)
    path = os.path.join(output_dir, basename)
    with open(path, "w") as fd:
        fd.write(dumps_json(obj))
    return path


def save_trajectory_csv(traj, output_dir, basename, include_adjoint=None):
    """Writes a trajectory as CSV.

    Columns are t, Re a_k, Im a_k for k = 2..n, followed by Re psi_k,
    Im psi_k for k = 1..n when the adjoint is included (by default, iff it
    was integrated). One row per sample, header row first.

    Returns
    -------
    path: string

    """
    if include_adjoint is None:
        include_adjoint = traj.psi_samples is not None
    if include_adjoint and traj.psi_samples is None:
        raise ValueError("Trajectory carries no adjoint samples")
    n = traj.n
    columns = ["t"]
    blocks = [np.asarray(traj.times)[:, None]]
    for k in range(2, n + 1):
        columns += ["re_a%i" % k, "im_a%i" % k]
    a = traj.a_samples[:, 1:]
    blocks.append(np.dstack((a.real, a.imag)).reshape(len(a), -1))
    if include_adjoint:
        for k in range(1, n + 1):
            columns += ["re_psi%i" % k, "im_psi%i" % k]
        psi = traj.psi_samples
        blocks.append(np.dstack((psi.real, psi.imag)).reshape(len(psi), -1))
    return save_table_csv(np.hstack(blocks), columns, output_dir, basename)


def trajectory_to_dict(traj):
    """JSON view of a trajectory: times and [re, im] samples."""
    out = OrderedDict([("t", list(traj.times)),
                       ("a", [complex_to_pairs(a) for a in traj.a_samples])])
    if traj.psi_samples is not None:
        out["psi"] = [complex_to_pairs(psi) for psi in traj.psi_samples]
    return out


def save_table_csv(rows, columns, output_dir, basename):
    """Writes a table (numbers and strings) as CSV with a header row."""
    if not os.path.exists(output_dir):
        os.makedirs(output_dir)
    path = os.path.join(output_dir, basename)
    rows = np.array(rows, dtype=object)
    if rows.ndim == 1:
        rows = rows[None, :]
    fmt = [FLOAT_FORMAT if isinstance(x, (float, np.floating)) else "%s"
           for x in rows[0]]
    np.savetxt(path, rows, fmt=fmt, delimiter=",", header=",".join(columns),
               comments="")
    return path
