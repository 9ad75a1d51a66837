"""Fold BN + activation quantizer into integer-only operators.

After a quantized conv/linear layer the pre-BN value is ``N/(A*W) + c`` for
an integer ``N``.  BN followed by the activation quantizer then reduces to
``clip(floor((N + b) / t), A*y_min, A*y_max)`` with

    t = W * sigma / gamma
    b = A * W * (beta * sigma / gamma + c - mu)

and that in turn is replaced by ``clip(floor((N*K + B) / T), ...)``.

Model documents are JSON::

    {"layers": [{"name": "conv1", "mu": "0.5", "sigma": "2", "gamma": "1",
                 "beta": "0.25", "c": "0", "W": 15, "A": 15,
                 "y_min": 0, "y_max": 1}, ...]}

Layers with a ``"kind"`` other than ``"bn"`` and all other top-level keys
pass through untouched.
"""

from __future__ import annotations

import copy
import json
import logging
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Union

from ._rational import clip, to_fraction
from .convert import (
    DegenerateSign,
    FixedAffine,
    NoSolution,
    QuantRange,
    SignThreshold,
    solve_tb,
)
from .oracle import DEFAULT_MARGIN, EquivalenceReport, eval_float_side, transition_window, verify_equivalence
from .scale_search import default_scale, next_satisfied_k
from .seqgen import AffineReal

log = logging.getLogger(__name__)

FORMAT = "bnquant-model/1"
BN_FIELDS = ("mu", "sigma", "gamma", "beta", "c", "W", "A")

Replacement = Union[FixedAffine, SignThreshold]


class SchemaError(ValueError):
    pass


class InvalidParams(ValueError):
    pass


class CertificationError(RuntimeError):
    def __init__(self, report: EquivalenceReport):
        super().__init__(f"replacement disagrees at {report.first_failure}")
        self.report = report


@dataclass(frozen=True)
class BnLayerParams:
    mu: Fraction
    sigma: Fraction
    gamma: Fraction
    beta: Fraction
    c: Fraction
    W: int
    A: int
    range: QuantRange = QuantRange(0, 1)
    name: str = ""

    def __post_init__(self):
        if self.sigma <= 0:
            raise InvalidParams(f"{self.name or 'layer'}: sigma must be positive")
        if self.gamma == 0:
            raise InvalidParams(f"{self.name or 'layer'}: gamma must be nonzero")
        if self.W < 1 or self.A < 1:
            raise InvalidParams(f"{self.name or 'layer'}: W and A must be positive integers")

    @property
    def level_range(self) -> QuantRange:
        """Clip range in integer activation levels, ``[A*y_min, A*y_max]``."""
        return QuantRange(self.A * self.range.y_min, self.A * self.range.y_max)


@dataclass
class FoldedLayer:
    source: BnLayerParams
    affine: AffineReal
    fixed: Replacement
    certificate: EquivalenceReport


@dataclass
class FoldOutcome:
    document: dict
    certified: int = 0
    failed: list[str] = field(default_factory=list)
    notices: list[str] = field(default_factory=list)


def fold_bn(p: BnLayerParams) -> AffineReal:
    t = p.W * p.sigma / p.gamma
    b = p.A * p.W * (p.beta * p.sigma / p.gamma + p.c - p.mu)
    return AffineReal(t, b)


def two_affine_levels(n: int, p: BnLayerParams) -> int:
    """Unfolded path: BN on ``N/(A*W) + c``, clip, quantize; returned in levels (times ``A``)."""
    x = Fraction(n, p.A * p.W) + p.c
    y = p.gamma * (x - p.mu) / p.sigma + p.beta
    return math.floor(p.A * clip(y, p.range.y_min, p.range.y_max))


def _certified(f: AffineReal, k: int, rng: QuantRange, margin: int) -> tuple[Replacement, EquivalenceReport]:
    try:
        rep: Replacement = solve_tb(f.t, f.b, k, rng, mode="first")[0]
    except DegenerateSign as exc:
        rep = exc.threshold
    except NoSolution as exc:
        exc.suggested_k = next_satisfied_k(rng.width, k)
        raise
    report = verify_equivalence(f.t, f.b, rep, margin)
    if not report.certified:
        raise CertificationError(report)
    return rep, report


def quantize_layer(f: AffineReal, k: int, rng: QuantRange, margin: int = DEFAULT_MARGIN) -> Replacement:
    """Integer replacement for ``f`` at scale ``k``, verified before return.

    Falls back to a sign threshold when the operator is a two-level step.
    :class:`NoSolution` is re-raised with ``suggested_k`` filled in.
    """
    return _certified(f, k, rng, margin)[0]


def fold_layer(p: BnLayerParams, k: Optional[int] = None, margin: int = DEFAULT_MARGIN) -> FoldedLayer:
    f = fold_bn(p)
    rng = p.level_range
    if k is None:
        k = default_scale(rng.width)
    rep, report = _certified(f, k, rng, margin)
    return FoldedLayer(p, f, rep, report)


def _exact(value: Any, where: str, notices: list[str]) -> Fraction:
    if isinstance(value, bool) or value is None:
        raise SchemaError(f"{where}: expected a number or decimal string, got {value!r}")
    if isinstance(value, float):
        exact = to_fraction(value)
        notices.append(f"{where}: binary float {value!r} taken as exact value {exact}")
        return exact
    try:
        return to_fraction(value)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: {exc}") from exc


def _integer(value: Any, where: str, notices: list[str]) -> int:
    x = _exact(value, where, notices)
    if x.denominator != 1:
        raise SchemaError(f"{where}: expected an integer, got {value!r}")
    return int(x)


def is_bn_layer(layer: dict) -> bool:
    return layer.get("kind", "bn") == "bn"


def parse_layer(layer: dict, notices: Optional[list[str]] = None) -> BnLayerParams:
    if notices is None:
        notices = []
    if not isinstance(layer, dict):
        raise SchemaError(f"layer entries must be objects, got {type(layer).__name__}")
    name = str(layer.get("name", ""))
    missing = [k for k in BN_FIELDS if k not in layer]
    if missing:
        raise SchemaError(f"layer {name!r}: missing fields {', '.join(missing)}")
    where = f"layer {name!r}"
    vals = {k: _exact(layer[k], f"{where} field {k}", notices) for k in ("mu", "sigma", "gamma", "beta", "c")}
    W = _integer(layer["W"], f"{where} field W", notices)
    A = _integer(layer["A"], f"{where} field A", notices)
    y_min = _integer(layer.get("y_min", 0), f"{where} field y_min", notices)
    y_max = _integer(layer.get("y_max", 1), f"{where} field y_max", notices)
    try:
        return BnLayerParams(W=W, A=A, range=QuantRange(y_min, y_max), name=name, **vals)
    except (InvalidParams, ValueError) as exc:
        raise SchemaError(str(exc)) from exc


def _layers(doc: Any) -> list:
    if not isinstance(doc, dict) or not isinstance(doc.get("layers"), list):
        raise SchemaError("model document must be an object with a 'layers' list")
    return doc["layers"]


def _fold_entry(layer: dict, k: Optional[int], margin: int) -> tuple[dict, Optional[str], list[str]]:
    notices: list[str] = []
    p = parse_layer(layer, notices)
    out = copy.deepcopy(layer)
    f = fold_bn(p)
    rng = p.level_range
    scale = k if k is not None else default_scale(rng.width)
    out["t"] = str(f.t)
    out["b"] = str(f.b)
    out["range"] = [rng.y_min, rng.y_max]
    try:
        rep, report = _certified(f, scale, rng, margin)
    except NoSolution as exc:
        out["error"] = {
            "type": "NoSolution",
            "message": str(exc),
            "K": scale,
            "suggested_k": getattr(exc, "suggested_k", None),
            "sequence": list(exc.sequence.s) if exc.sequence else None,
        }
        return out, p.name, notices
    if isinstance(rep, FixedAffine):
        out["fixed"] = rep.as_dict()
    else:
        out["sign"] = rep.as_dict()
    out["certificate"] = report.as_dict()
    return out, None, notices


def fold_model(doc: dict, k: Optional[int] = None, margin: int = DEFAULT_MARGIN, workers: int = 1) -> FoldOutcome:
    """Replace every BN layer in ``doc`` by its certified integer operator.

    Layers that cannot be solved at ``k`` carry an ``error`` record instead;
    the rest of the model is still folded.
    """
    layers = _layers(doc)
    result = copy.deepcopy({key: val for key, val in doc.items() if key != "layers"})
    work = [(i, layer) for i, layer in enumerate(layers) if isinstance(layer, dict) and is_bn_layer(layer)]
    for layer in layers:
        if not isinstance(layer, dict):
            raise SchemaError("layer entries must be objects")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            folded = list(pool.map(lambda item: _fold_entry(item[1], k, margin), work))
    else:
        folded = [_fold_entry(layer, k, margin) for _, layer in work]
    new_layers = [copy.deepcopy(layer) for layer in layers]
    outcome = FoldOutcome(document=result)
    for (i, _), (entry, failed, notices) in zip(work, folded):
        new_layers[i] = entry
        outcome.notices.extend(notices)
        if failed is None:
            outcome.certified += 1
        else:
            outcome.failed.append(failed)
    result["layers"] = new_layers
    result["fold"] = {
        "format": FORMAT,
        "K": k,
        "certified": outcome.certified,
        "failed": outcome.failed,
        "notices": outcome.notices,
    }
    return outcome


def load_document(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc


def dump_document(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=True) + "\n"


def _replacement_from(entry: dict, rng: QuantRange) -> Replacement:
    if "fixed" in entry:
        fx = entry["fixed"]
        return FixedAffine(int(fx["T"]), int(fx["B"]), int(fx["K"]), rng)
    if "sign" in entry:
        sg = entry["sign"]
        return SignThreshold(int(sg["n0"]), rng, bool(sg.get("increasing", True)))
    raise SchemaError(f"layer {entry.get('name')!r} has no fixed or sign record")


def simulate_compare(model_in: dict, folded: dict, samples: int = 1000, seed: int = 0, margin: int = DEFAULT_MARGIN) -> dict:
    """Evaluate the unfolded, one-affine and integer paths per layer.

    Inputs are every ``N`` in the transition window plus ``samples`` random
    ``N`` spread well beyond it.  Agreement counts are reported per path pair.
    """
    src = [layer for layer in _layers(model_in) if isinstance(layer, dict) and is_bn_layer(layer)]
    dst = [layer for layer in _layers(folded) if isinstance(layer, dict) and is_bn_layer(layer)]
    if [layer.get("name") for layer in src] != [layer.get("name") for layer in dst]:
        raise SchemaError("model and folded document describe different layers")
    rnd = random.Random(seed)
    report = {"layers": [], "points": 0, "float_bt": 0, "bt_BT": 0, "float_BT": 0}
    for layer_in, layer_out in zip(src, dst):
        p = parse_layer(layer_in)
        name = p.name
        if "error" in layer_out:
            report["layers"].append({"name": name, "skipped": layer_out["error"]["type"]})
            continue
        rng = p.level_range
        t = to_fraction(layer_out.get("t", str(fold_bn(p).t)))
        b = to_fraction(layer_out.get("b", str(fold_bn(p).b)))
        rep = _replacement_from(layer_out, rng)
        lo, hi = transition_window(t, b, rng, margin)
        width = hi - lo + 1
        points = list(range(lo, hi + 1))
        points += [rnd.randint(lo - 1000 * width, hi + 1000 * width) for _ in range(samples)]
        row = {"name": name, "points": len(points), "float_bt": 0, "bt_BT": 0, "float_BT": 0, "first_disagreement": None}
        for n in points:
            two = two_affine_levels(n, p)
            one = eval_float_side(n, t, b, rng)
            fixed = rep.evaluate(n)
            row["float_bt"] += two == one
            row["bt_BT"] += one == fixed
            row["float_BT"] += two == fixed
            if row["first_disagreement"] is None and not two == one == fixed:
                row["first_disagreement"] = [n, two, one, fixed]
        row["agreement"] = row["bt_BT"] / row["points"]
        for key in ("points", "float_bt", "bt_BT", "float_BT"):
            report[key] += row[key]
        report["layers"].append(row)
    report["agreement"] = report["bt_BT"] / report["points"] if report["points"] else 1.0
    return report
