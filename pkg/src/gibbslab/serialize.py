"""JSON forms of spaces, configurations and interactions.

Coordinates are integer arrays (or ``"(i,j)"`` strings as dictionary keys)
and symbols are strings from the space's alphabet.
"""

from __future__ import annotations

import hashlib
import json
import re
from pathlib import Path
from typing import Any

from .cocycles import Interaction
from .errors import InputError
from .lattice import Configuration, Pattern, Shape, Site, SftSpace


def _site(value: Any) -> Site:
    if isinstance(value, str):
        nums = re.findall(r"-?\d+", value)
        if not nums:
            raise InputError(f"bad site literal {value!r}")
        return tuple(int(v) for v in nums)
    if isinstance(value, int):
        return (value,)
    return tuple(int(v) for v in value)


def site_key(site: Site) -> str:
    return "(" + ",".join(str(c) for c in site) + ")"


def _symbol(sft: SftSpace, s: Any) -> int:
    return sft.symbol_index(str(s))


def sft_to_dict(sft: SftSpace) -> dict:
    out = {
        "dimension": sft.dimension,
        "alphabet": list(sft.alphabet),
        "forbidden": [
            {"shape": [list(s) for s in f.shape], "symbols": [sft.alphabet[c] for c in f.symbols]}
            for f in sft.forbidden
        ],
        "asserted": {
            "ssf": sft.ssf,
            "safe_symbol": None if sft.safe_symbol is None else sft.alphabet[sft.safe_symbol],
            "pivot": sft.pivot,
            "tmp": sft.tmp,
        },
    }
    if sft.count_limits:
        out["count_limits"] = [[sft.alphabet[s], c] for s, c in sft.count_limits]
    if sft.name:
        out["name"] = sft.name
    return out


def sft_from_dict(d: dict) -> SftSpace:
    try:
        alphabet = tuple(str(a) for a in d["alphabet"])
        dim = int(d["dimension"])
    except KeyError as exc:
        raise InputError(f"space definition lacks {exc}") from None
    index = {a: i for i, a in enumerate(alphabet)}

    def sym(s: Any) -> int:
        if str(s) not in index:
            raise InputError(f"symbol {s!r} is not in the alphabet")
        return index[str(s)]

    forbidden = []
    for f in d.get("forbidden", []):
        sites = [_site(s) for s in f["shape"]]
        symbols = [sym(s) for s in f["symbols"]]
        if len(sites) != len(symbols):
            raise InputError("forbidden shape and symbols differ in length")
        forbidden.append(Pattern.from_dict(dict(zip(sites, symbols))))
    asserted = d.get("asserted", {})
    safe = asserted.get("safe_symbol")
    return SftSpace(
        alphabet,
        dim,
        tuple(forbidden),
        ssf=bool(asserted.get("ssf", False)),
        safe_symbol=None if safe is None else sym(safe),
        pivot=bool(asserted.get("pivot", False)),
        tmp=bool(asserted.get("tmp", True)),
        count_limits=tuple((sym(s), int(c)) for s, c in d.get("count_limits", [])),
        name=str(d.get("name", "")),
    )


def configuration_to_dict(x: Configuration, sft: SftSpace) -> dict:
    return {
        "background": {
            "period": list(x.period),
            "cell": {site_key(s): sft.alphabet[v] for s, v in sorted(x.cell.items())},
        },
        "patch": {site_key(s): sft.alphabet[v] for s, v in sorted(x.patch.items())},
    }


def configuration_from_dict(d: dict, sft: SftSpace) -> Configuration:
    bg = d.get("background")
    if bg is None:
        raise InputError("configuration lacks a background")
    period = [p[0] if isinstance(p, list) else p for p in bg["period"]]
    cell = {_site(k): _symbol(sft, v) for k, v in bg["cell"].items()}
    patch = {_site(k): _symbol(sft, v) for k, v in d.get("patch", {}).items()}
    return Configuration(period, cell, patch)


def _pattern_string(sft: SftSpace | None, key: tuple[int, ...]) -> str:
    if sft is None:
        return "".join(str(c) for c in key) if all(c < 10 for c in key) else ",".join(str(c) for c in key)
    syms = [sft.alphabet[c] for c in key]
    return "".join(syms) if all(len(s) == 1 for s in syms) else ",".join(syms)


def _parse_pattern_string(sft: SftSpace | None, text: str, size: int) -> tuple[int, ...]:
    parts = text.split(",") if "," in text else list(text)
    if len(parts) != size:
        raise InputError(f"pattern string {text!r} does not match a shape of {size} sites")
    if sft is None:
        return tuple(int(p) for p in parts)
    return tuple(_symbol(sft, p) for p in parts)


def interaction_to_dict(phi: Interaction, sft: SftSpace | None = None) -> dict:
    return {
        "mode": phi.mode,
        "entries": [
            {
                "shape": [list(s) for s in shape],
                "table": {_pattern_string(sft, k): v for k, v in sorted(table.items())},
            }
            for shape, table in phi.entries.items()
        ],
    }


def interaction_from_dict(d: dict, sft: SftSpace | None = None) -> Interaction:
    mode = d.get("mode", "shift_invariant")
    if mode not in ("shift_invariant", "site_indexed"):
        raise InputError(f"unknown interaction mode {mode!r}")
    phi = Interaction(shift_invariant=mode == "shift_invariant")
    for entry in d.get("entries", []):
        # table keys follow the sorted order of the shape's sites
        shape = Shape.of(_site(s) for s in entry["shape"])
        table = {_parse_pattern_string(sft, k, len(shape)): float(v) for k, v in entry["table"].items()}
        phi.add_entry(shape, table)
    return phi


def load_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InputError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


def dumps(obj: Any) -> str:
    """Deterministic JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, default=_default) + "\n"


def _default(obj: Any) -> Any:
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if isinstance(obj, Pattern):
        return {"shape": [list(s) for s in obj.shape], "symbols": list(obj.symbols)}
    if isinstance(obj, Shape):
        return [list(s) for s in obj]
    if isinstance(obj, Configuration):
        return {
            "period": list(obj.period),
            "cell": {site_key(s): v for s, v in sorted(obj.cell.items())},
            "patch": {site_key(s): v for s, v in sorted(obj.patch.items())},
        }
    if isinstance(obj, (set, frozenset, tuple)):
        return list(obj)
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def sha256_file(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
