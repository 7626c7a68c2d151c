"""
JSON encodings for algebras, elements, Jordan maps, superoperators, triples and c.f.m.s.

Complex numbers are [re, im] pairs and matrices are lists of rows. Decoders check every
shape and raise CodecError naming the offending path, e.g. "$.slots[1].mode".
"""

import json
import logging
from pathlib import Path

import numpy as np

from .algebra import AlgebraDescriptor, AlgebraElement, SuperOperator
from .cfm import BlochCFM
from .errors import CodecError, NclpError
from .isometry import LinearMap, TypicalTriple, YeadonTriple
from .jordan import JordanMono, Mode, Slot
from .lp_space import LpElement, StateDensity
from .projections import PositiveProjection

logger = logging.getLogger(__name__)


def dumps(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2)


def read_json(path) -> object:
    """Load a JSON file; syntax errors become CodecError with the line and column."""
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise CodecError("$", f"malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None
    except OSError as e:
        raise CodecError("$", f"cannot read {path}: {e.strerror}") from None


def write_json(payload, path=None) -> str:
    text = dumps(payload)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


# Encoders


def encode_complex(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def encode_matrix(m: np.ndarray) -> list:
    return [[encode_complex(z) for z in row] for row in np.asarray(m)]


def encode_algebra(algebra: AlgebraDescriptor) -> dict:
    return {"dims": list(algebra.block_dims), "weights": list(algebra.trace_weights)}


def encode_element(x: AlgebraElement) -> dict:
    return {"blocks": [encode_matrix(b) for b in x.blocks]}


def encode_lp(xi: LpElement) -> dict:
    return {"p": xi.p, "element": encode_element(xi.element)}


def encode_state(phi: StateDensity) -> dict:
    return {"algebra": encode_algebra(phi.algebra), "d": encode_element(phi.d)}


def encode_basis(algebra: AlgebraDescriptor) -> list[dict]:
    return [{"block": i, "row": a, "col": b} for i, a, b in algebra.basis_labels]


def encode_jordan(J: JordanMono) -> dict:
    return {
        "source": encode_algebra(J.source),
        "target": encode_algebra(J.target),
        "slots": [{"src": s.src, "dst": s.dst, "offset": s.offset, "mode": s.mode.value} for s in J.slots],
        "conjugator": None if J.conjugator is None else encode_element(J.conjugator),
    }


def encode_superoperator(K: SuperOperator) -> dict:
    payload = {
        "domain": encode_algebra(K.domain),
        "codomain": encode_algebra(K.codomain),
        "matrix": encode_matrix(K.matrix),
        "domain_basis": encode_basis(K.domain),
        "codomain_basis": encode_basis(K.codomain),
    }
    if isinstance(K, LinearMap):
        payload["p"] = K.p
    return payload


def encode_yeadon(t: YeadonTriple) -> dict:
    return {"kind": "yeadon", "p": t.p, "w": encode_element(t.w), "B": encode_element(t.B), "J": encode_jordan(t.J)}


def encode_typical(t: TypicalTriple) -> dict:
    return {"kind": "typical", "p": t.p, "w": encode_element(t.w), "J": encode_jordan(t.J),
            "P": encode_superoperator(t.P.map)}


def encode_cfm(rho: BlochCFM) -> dict:
    return rho.to_json()


# Decoders


def _field(data, key: str, path: str):
    if not isinstance(data, dict):
        raise CodecError(path, "expected an object")
    if key not in data:
        raise CodecError(f"{path}.{key}", "missing field")
    return data[key]


def _list(data, path: str) -> list:
    if not isinstance(data, list):
        raise CodecError(path, "expected a list")
    return data


def _number(data, path: str) -> float:
    if isinstance(data, bool) or not isinstance(data, (int, float)):
        raise CodecError(path, f"expected a number, got {type(data).__name__}")
    return float(data)


def _integer(data, path: str) -> int:
    if isinstance(data, bool) or not isinstance(data, int):
        raise CodecError(path, f"expected an integer, got {type(data).__name__}")
    return data


def decode_complex(data, path: str = "$") -> complex:
    pair = _list(data, path)
    if len(pair) != 2:
        raise CodecError(path, "a complex entry is [re, im]")
    return complex(_number(pair[0], f"{path}[0]"), _number(pair[1], f"{path}[1]"))


def decode_matrix(data, shape: tuple[int, int] | None = None, path: str = "$") -> np.ndarray:
    rows = _list(data, path)
    out = [[decode_complex(z, f"{path}[{r}][{c}]") for c, z in enumerate(_list(row, f"{path}[{r}]"))]
           for r, row in enumerate(rows)]
    widths = {len(row) for row in out}
    if len(widths) > 1:
        raise CodecError(path, "rows have different lengths")
    m = np.array(out, dtype=complex).reshape(len(out), widths.pop() if widths else 0)
    if shape is not None and m.shape != tuple(shape):
        raise CodecError(path, f"expected a {shape[0]}x{shape[1]} matrix, got {m.shape[0]}x{m.shape[1]}")
    return m


def _guard(path: str, build):
    """Run a domain constructor, reporting its validation error against path."""
    try:
        return build()
    except CodecError:
        raise
    except NclpError as e:
        raise CodecError(path, str(e)) from e


def decode_algebra(data, path: str = "$") -> AlgebraDescriptor:
    dims = [_integer(d, f"{path}.dims[{k}]") for k, d in enumerate(_list(_field(data, "dims", path), f"{path}.dims"))]
    raw = data.get("weights")
    if raw is None:
        weights = [1.0] * len(dims)
    else:
        weights = [_number(w, f"{path}.weights[{k}]") for k, w in enumerate(_list(raw, f"{path}.weights"))]
    return _guard(path, lambda: AlgebraDescriptor(tuple(dims), tuple(weights)))


def decode_element(data, algebra: AlgebraDescriptor, path: str = "$") -> AlgebraElement:
    blocks = _list(_field(data, "blocks", path), f"{path}.blocks")
    if len(blocks) != algebra.num_blocks:
        raise CodecError(f"{path}.blocks", f"expected {algebra.num_blocks} blocks, got {len(blocks)}")
    return algebra.element(
        decode_matrix(b, (n, n), f"{path}.blocks[{k}]") for k, (b, n) in enumerate(zip(blocks, algebra.block_dims))
    )


def decode_lp(data, algebra: AlgebraDescriptor, path: str = "$") -> LpElement:
    p = _number(_field(data, "p", path), f"{path}.p")
    element = decode_element(_field(data, "element", path), algebra, f"{path}.element")
    return _guard(path, lambda: LpElement(element, p))


def decode_state(data, path: str = "$") -> StateDensity:
    algebra = decode_algebra(_field(data, "algebra", path), f"{path}.algebra")
    d = decode_element(_field(data, "d", path), algebra, f"{path}.d")
    return _guard(path, lambda: StateDensity(algebra, d))


def decode_jordan(data, path: str = "$") -> JordanMono:
    source = decode_algebra(_field(data, "source", path), f"{path}.source")
    target = decode_algebra(_field(data, "target", path), f"{path}.target")
    slots = []
    for k, raw in enumerate(_list(_field(data, "slots", path), f"{path}.slots")):
        at = f"{path}.slots[{k}]"
        mode = _field(raw, "mode", at)
        if mode not in (m.value for m in Mode):
            raise CodecError(f"{at}.mode", f"expected MULT or ANTI, got {mode!r}")
        slots.append(Slot(
            _integer(_field(raw, "src", at), f"{at}.src"),
            _integer(_field(raw, "dst", at), f"{at}.dst"),
            _integer(_field(raw, "offset", at), f"{at}.offset"),
            Mode(mode),
        ))
    raw_u = data.get("conjugator")
    u = None if raw_u is None else decode_element(raw_u, target, f"{path}.conjugator")
    return _guard(path, lambda: JordanMono(source, target, tuple(slots), u))


def _check_basis(data, algebra: AlgebraDescriptor, key: str, path: str):
    if key not in data:
        return
    if data[key] != encode_basis(algebra):
        raise CodecError(f"{path}.{key}", "basis does not match the canonical matrix-unit ordering")


def decode_superoperator(data, path: str = "$") -> SuperOperator:
    domain = decode_algebra(_field(data, "domain", path), f"{path}.domain")
    codomain = decode_algebra(_field(data, "codomain", path), f"{path}.codomain")
    _check_basis(data, domain, "domain_basis", path)
    _check_basis(data, codomain, "codomain_basis", path)
    matrix = decode_matrix(_field(data, "matrix", path), (codomain.dimension, domain.dimension), f"{path}.matrix")
    return _guard(path, lambda: SuperOperator(domain, codomain, matrix))


def decode_linear_map(data, path: str = "$") -> LinearMap:
    K = decode_superoperator(data, path)
    p = _number(_field(data, "p", path), f"{path}.p")
    if not p >= 1:
        raise CodecError(f"{path}.p", f"p must be >= 1, got {p}")
    return _guard(path, lambda: LinearMap(K.domain, K.codomain, K.matrix, p=p))


def decode_yeadon(data, path: str = "$") -> YeadonTriple:
    p = _number(_field(data, "p", path), f"{path}.p")
    J = decode_jordan(_field(data, "J", path), f"{path}.J")
    w = decode_element(_field(data, "w", path), J.target, f"{path}.w")
    B = decode_element(_field(data, "B", path), J.target, f"{path}.B")
    return _guard(path, lambda: YeadonTriple(w, B, J, p))


def decode_typical(data, path: str = "$") -> TypicalTriple:
    p = _number(_field(data, "p", path), f"{path}.p")
    J = decode_jordan(_field(data, "J", path), f"{path}.J")
    w = decode_element(_field(data, "w", path), J.target, f"{path}.w")
    K = decode_superoperator(_field(data, "P", path), f"{path}.P")
    if K.domain != J.target or K.codomain != J.target:
        raise CodecError(f"{path}.P", "P must act on the target algebra of J")
    return _guard(path, lambda: TypicalTriple(w, J, PositiveProjection(J.target, J, K), p))


def decode_triple(data, path: str = "$") -> YeadonTriple | TypicalTriple:
    kind = _field(data, "kind", path)
    if kind == "yeadon":
        return decode_yeadon(data, path)
    if kind == "typical":
        return decode_typical(data, path)
    raise CodecError(f"{path}.kind", f"expected 'yeadon' or 'typical', got {kind!r}")


def decode_cfm(data, path: str = "$") -> BlochCFM:
    c = _number(_field(data, "c", path), f"{path}.c")
    raw = _field(data, "odd_poly", path)
    if not isinstance(raw, dict):
        raise CodecError(f"{path}.odd_poly", "expected an object of monomial coefficients")
    poly = {key: _number(v, f"{path}.odd_poly.{key}") for key, v in raw.items()}
    p = _number(data.get("p", 1.0), f"{path}.p")
    return _guard(path, lambda: BlochCFM(c, poly, p))
