"""Command-line front end: encode, classify, invariants, timeseries, export."""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from fractions import Fraction

from .classifier import (
    CANONICAL,
    PAPER_BINARY,
    ClusterHierarchy,
    classify,
    encode_dendrogram,
    field_from_json,
)
from .dendrogram import ProjectiveDendrogram
from .errors import (
    DegenerateError,
    InvalidInputError,
    NonDiscreteError,
    PrecisionError,
    UnsupportedOperationError,
)
from .invariants import balance_report
from .padic_core import POLYNOMIAL, TEICHMULLER, FieldDescriptor, parse_padic
from .strings import baire_distance, build_code, encode_string, preset, read_sequences
from .timeseries import DendrogramSeries, series_report

EXIT_OK = 0
EXIT_INPUT = 3
EXIT_PRECISION = 4
EXIT_UNSUPPORTED = 5
EXIT_NON_DISCRETE = 6

REPS = {"poly": POLYNOMIAL, "teich": TEICHMULLER}

DEFAULTS = {
    "prime": 2,
    "degree": 1,
    "reps": "poly",
    "preset": None,
    "alphabet": None,
    "convention": CANONICAL,
    "precision": None,
    "normalize": False,
    "format": "json",
    "cutoff_k": None,
    "genus2": False,
    "u": None,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="padic-dendro",
        description="p-adic encoding, classification and dendrogram invariants",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", help="read from FILE instead of stdin")
    common.add_argument("--output", "-o", help="write to FILE instead of stdout")
    common.add_argument("--config", help="JSON file with default option values")
    common.add_argument("--prime", "-p", type=int, default=argparse.SUPPRESS)
    common.add_argument("--degree", "-f", type=int, default=argparse.SUPPRESS)
    common.add_argument("--reps", choices=sorted(REPS), default=argparse.SUPPRESS)
    common.add_argument("--preset", default=argparse.SUPPRESS)
    common.add_argument("--alphabet", default=argparse.SUPPRESS,
                        help="custom alphabet, blank first (e.g. '-ACGT')")
    common.add_argument("--convention", choices=[CANONICAL, PAPER_BINARY], default=argparse.SUPPRESS)
    common.add_argument("--precision", type=int, default=argparse.SUPPRESS)
    common.add_argument("--normalize", action="store_true", default=argparse.SUPPRESS)
    common.add_argument("--format", choices=["json", "dot", "newick"], default=argparse.SUPPRESS)
    common.add_argument("--cutoff-k", dest="cutoff_k", type=int, default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("encode", parents=[common],
                   help="strings (one per line or FASTA) or a dendrogram JSON to p-adic numbers")
    sub.add_parser("classify", parents=[common],
                   help="numbers, encoded strings or an encode result to a cluster hierarchy")
    sub.add_parser("invariants", parents=[common],
                   help="volume, branch weights and balance of dendrograms")
    ts = sub.add_parser("timeseries", parents=[common],
                        help="balance trend and curve data of a series of frames")
    ts.add_argument("--genus2", action="store_true", default=argparse.SUPPRESS,
                    help="also build genus-2 data from an invariant branch")
    ts.add_argument("--u", type=Fraction, default=argparse.SUPPRESS,
                    help="translation length along the second axis")
    sub.add_parser("export", parents=[common],
                   help="convert a hierarchy or dendrogram to json, dot or newick")
    return parser


def resolve_config(ns):
    """Flags win over the config file, which wins over the defaults."""
    cfg = dict(DEFAULTS)
    if getattr(ns, "config", None):
        with open(ns.config, encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        unknown = set(file_cfg) - set(DEFAULTS)
        if unknown:
            raise InvalidInputError(f"config file: unknown keys {sorted(unknown)}")
        cfg.update(file_cfg)
    for key in DEFAULTS:
        if key in vars(ns):
            cfg[key] = getattr(ns, key)
    if cfg["reps"] not in REPS:
        raise InvalidInputError(f"config: reps must be one of {sorted(REPS)}")
    if cfg["u"] is not None:
        cfg["u"] = Fraction(cfg["u"])
    cfg["command"] = ns.command
    return cfg


def field_of(cfg) -> FieldDescriptor:
    return FieldDescriptor(cfg["prime"], cfg["degree"], REPS[cfg["reps"]])


def alphabet_code(cfg):
    if cfg["preset"] and cfg["alphabet"]:
        raise InvalidInputError("give either --preset or --alphabet, not both")
    if cfg["preset"]:
        code = preset(cfg["preset"])
        if cfg["reps"] != "poly" and code.field.rep_system == POLYNOMIAL:
            code = code.with_rep_system(REPS[cfg["reps"]])
        return code
    if cfg["alphabet"]:
        f = cfg["degree"] if cfg["degree"] != 1 else None
        return build_code(list(cfg["alphabet"]), cfg["prime"], REPS[cfg["reps"]], f=f)
    return None


# -- input readers ------------------------------------------------------------------

def _load_json(text, what):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{what}: malformed JSON at line {exc.lineno}: {exc.msg}") from None


def _looks_like_json(text):
    return text.lstrip()[:1] in ("{", "[")


def read_numbers(text, cfg):
    """``(label, PAdicNumber)`` pairs from lines ``label<TAB>number``, ``label: number`` or ``number``."""
    fd = field_of(cfg)
    points = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "\t" in line:
            label, num = (s.strip() for s in line.split("\t", 1))
        elif ":" in line:
            label, num = (s.strip() for s in line.split(":", 1))
        else:
            label, num = line, line
        try:
            points.append((label, parse_padic(num, fd, cfg["precision"])))
        except InvalidInputError as exc:
            raise InvalidInputError(f"line {lineno} ({label!r}): {exc}") from None
    if not points:
        raise InvalidInputError("no input records")
    return points


def encode_records(text, cfg):
    code = alphabet_code(cfg)
    if code is None:
        raise InvalidInputError("encoding strings needs --preset or --alphabet")
    out = []
    for label, s in read_sequences(text.splitlines()):
        try:
            out.append((label, encode_string(code, s, cfg["precision"])))
        except InvalidInputError as exc:
            raise InvalidInputError(f"record {label!r}: {exc}") from None
    if not out:
        raise InvalidInputError("no input records")
    return code, out


def points_from_encoded(obj):
    fd = field_from_json(obj["field"])
    points = []
    for label, num in obj["codes"].items():
        try:
            points.append((label, parse_padic(num, fd)))
        except InvalidInputError as exc:
            raise InvalidInputError(f"record {label!r}: {exc}") from None
    return points


def points_from_records(records, cfg):
    """``[{"label": ..., "number": ...}, ...]`` with numbers in the text form."""
    fd = field_of(cfg)
    points = []
    for k, rec in enumerate(records):
        if not isinstance(rec, dict) or "label" not in rec or "number" not in rec:
            raise InvalidInputError(f"record {k}: expected an object with 'label' and 'number'")
        try:
            points.append((rec["label"], parse_padic(str(rec["number"]), fd, cfg["precision"])))
        except InvalidInputError as exc:
            raise InvalidInputError(f"record {k} ({rec['label']!r}): {exc}") from None
    return points


def read_points(text, cfg):
    """Points to classify: an encode result, strings (with an alphabet) or numbers."""
    if _looks_like_json(text):
        obj = _load_json(text, "input")
        if isinstance(obj, dict) and "codes" in obj and "field" in obj:
            return points_from_encoded(obj)
        if isinstance(obj, list):
            return points_from_records(obj, cfg)
        raise InvalidInputError("input JSON is neither an encode result nor a list of records")
    if cfg["preset"] or cfg["alphabet"]:
        return encode_records(text, cfg)[1]
    return read_numbers(text, cfg)


def read_trees(text, cfg):
    """Dendrograms (or hierarchies) from JSON, Newick, or data to be classified first."""
    stripped = text.strip()
    if not stripped:
        raise InvalidInputError("empty input")
    if _looks_like_json(stripped):
        obj = _load_json(stripped, "input")
        if isinstance(obj, dict) and "codes" in obj:
            return [classify(points_from_encoded(obj), cfg["normalize"])]
        if isinstance(obj, list) and obj and all(isinstance(r, dict) and "number" in r for r in obj):
            return [classify(points_from_records(obj, cfg), cfg["normalize"])]
        items = obj if isinstance(obj, list) else [obj]
        out = []
        for k, item in enumerate(items):
            try:
                if isinstance(item, dict) and "vertex_disc" in item:
                    out.append(ClusterHierarchy.from_json(item))
                else:
                    out.append(ProjectiveDendrogram.from_json(item))
            except (KeyError, TypeError) as exc:
                raise InvalidInputError(f"tree {k}: missing or malformed field {exc}") from None
            except InvalidInputError as exc:
                raise InvalidInputError(f"tree {k}: {exc}") from None
        return out
    if stripped.endswith(";"):
        out = []
        for k, chunk in enumerate(s for s in stripped.split(";") if s.strip()):
            try:
                out.append(ProjectiveDendrogram.from_newick(chunk.strip() + ";"))
            except InvalidInputError as exc:
                raise InvalidInputError(f"tree {k}: {exc}") from None
        return out
    return [classify(read_points(text, cfg), cfg["normalize"])]


def read_frames(text, cfg):
    obj = _load_json(text, "time series")
    if not isinstance(obj, list):
        raise InvalidInputError("time series must be a JSON array of frames")
    fd = field_of(cfg)
    codings = []
    for t, frame in enumerate(obj):
        if not isinstance(frame, dict):
            raise InvalidInputError(f"frame {t}: expected an object label -> number")
        coding = {}
        for label, num in frame.items():
            try:
                coding[label] = parse_padic(str(num), fd, cfg["precision"])
            except InvalidInputError as exc:
                raise InvalidInputError(f"frame {t}, particle {label!r}: {exc}") from None
        codings.append(coding)
    return DendrogramSeries.from_codings(codings)


# -- commands ---------------------------------------------------------------------

def _dump(obj):
    return json.dumps(obj, indent=2, ensure_ascii=False, sort_keys=False) + "\n"


def _tree_of(x):
    return x.dendrogram if isinstance(x, ClusterHierarchy) else x


def _render_tree(x, fmt):
    tree = _tree_of(x)
    if fmt == "dot":
        return tree.to_dot()
    if fmt == "newick":
        return tree.to_newick() + "\n"
    return _dump(x.to_json())


def cmd_encode(text, cfg):
    if _looks_like_json(text):
        obj = _load_json(text, "input")
        try:
            tree = ProjectiveDendrogram.from_json(obj)
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"dendrogram: missing or malformed field {exc}") from None
        coding = encode_dendrogram(tree, cfg["convention"], cfg["prime"], REPS[cfg["reps"]],
                                   cfg["precision"])
        fd = next(iter(coding.values())).field
        distances = None
    else:
        code, records = encode_records(text, cfg)
        coding, fd = dict(records), code.field
        if len(coding) == 1:
            warnings.warn("a single point gives a degenerate dendrogram", stacklevel=2)
        distances = None
        if cfg["cutoff_k"] is not None:
            strings = dict(read_sequences(text.splitlines()))
            distances = {
                a: {b: str(baire_distance(strings[a], strings[b], fd.p, cfg["cutoff_k"], code.blank))
                    for b in strings}
                for a in strings
            }
    if cfg["format"] != "json":
        raise InvalidInputError(f"format {cfg['format']!r} is only available for trees")
    out = {"field": fd.describe(), "codes": {str(k): str(v) for k, v in coding.items()}}
    if distances is not None:
        out["distances"] = distances
    return _dump(out)


def cmd_classify(text, cfg):
    h = classify(read_points(text, cfg), cfg["normalize"])
    return _render_tree(h, cfg["format"])


def cmd_invariants(text, cfg):
    reports = [balance_report(_tree_of(x)).to_json() for x in read_trees(text, cfg)]
    return _dump(reports[0] if len(reports) == 1 else reports)


def cmd_timeseries(text, cfg):
    series = read_frames(text, cfg)
    return _dump(series_report(series, genus2=cfg["genus2"], u=cfg["u"]))


def cmd_export(text, cfg):
    trees = read_trees(text, cfg)
    if len(trees) == 1:
        return _render_tree(trees[0], cfg["format"])
    if cfg["format"] == "json":
        return _dump([x.to_json() for x in trees])
    return "".join(_render_tree(x, cfg["format"]) for x in trees)


COMMANDS = {
    "encode": cmd_encode,
    "classify": cmd_classify,
    "invariants": cmd_invariants,
    "timeseries": cmd_timeseries,
    "export": cmd_export,
}


def run(cfg, text):
    """Run one command on the input text; returns ``(output, exit status, messages)``."""
    messages = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            out = COMMANDS[cfg["command"]](text, cfg)
            status = EXIT_OK
        except NonDiscreteError as exc:
            out, status = "", EXIT_NON_DISCRETE
            messages.append(f"error: non-discrete group: {exc}")
        except UnsupportedOperationError as exc:
            out, status = "", EXIT_UNSUPPORTED
            messages.append(f"error: unsupported operation: {exc}")
        except PrecisionError as exc:
            out, status = "", EXIT_PRECISION
            messages.append(f"error: precision: {exc}")
        except (InvalidInputError, DegenerateError) as exc:
            out, status = "", EXIT_INPUT
            messages.append(f"error: invalid input: {exc}")
    messages = [f"warning: {w.message}" for w in caught] + messages
    return out, status, messages


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = resolve_config(ns)
        field_of(cfg)
    except (InvalidInputError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        if ns.input:
            with open(ns.input, encoding="utf-8") as fh:
                text = fh.read()
        else:
            text = sys.stdin.read()
    except OSError as exc:
        print(f"error: cannot read input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out, status, messages = run(cfg, text)
    for msg in messages:
        print(msg, file=sys.stderr)
    if status == EXIT_OK:
        if ns.output:
            with open(ns.output, "w", encoding="utf-8") as fh:
                fh.write(out)
        else:
            sys.stdout.write(out)
    return status


if __name__ == "__main__":
    sys.exit(main())
