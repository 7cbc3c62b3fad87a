"""Plain-text ``key = value`` configuration files.

One assignment per line; ``#`` starts a comment; list values are
separated by whitespace or commas.
"""
from __future__ import annotations

import hashlib
from pathlib import Path

__all__ = ["parse_kv", "load_kv", "as_ints", "as_floats", "as_words", "digest_kv"]


def parse_kv(text: str, source: str = "<string>") -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        if not key:
            raise ValueError(f"{source}:{lineno}: empty key")
        if key in out:
            raise ValueError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def load_kv(path) -> dict[str, str]:
    path = Path(path)
    return parse_kv(path.read_text(), str(path))


def as_words(value: str) -> list[str]:
    return value.replace(",", " ").split()


def as_ints(value: str) -> list[int]:
    """Integer list; ``2^k`` tokens and ``a..b`` ranges of exponents (``2^1..2^9``) allowed."""
    out = []
    for tok in as_words(value):
        if ".." in tok:
            lo, hi = tok.split("..", 1)
            if lo.startswith("2^") and hi.startswith("2^"):
                out.extend(2**k for k in range(int(lo[2:]), int(hi[2:]) + 1))
            else:
                out.extend(range(int(lo), int(hi) + 1))
        elif tok.startswith("2^"):
            out.append(2 ** int(tok[2:]))
        else:
            out.append(int(tok))
    return out


def as_floats(value: str) -> list[float]:
    return [float(v) for v in as_words(value)]


def digest_kv(kv: dict) -> str:
    text = "\n".join(f"{k}={kv[k]}" for k in sorted(kv))
    return hashlib.sha256(text.encode()).hexdigest()[:12]
