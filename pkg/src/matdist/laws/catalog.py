"""Synthetic laws with hand-checkable solution spaces."""

from ..exceptions import UnknownLaw
from .parser import parse_law


def _block(name, n):
    return [f"{name}[{j}][{i}]" for j in range(1, n + 1) for i in range(1, n + 1)]


def _uniform_frame(n):
    return _block("yA", n)


def _fgm_axis(n):
    return [f"x[{n}]"] + _block("yA", n)


def _strict_cosserat(n):
    return [f"{a} - {b}" for a, b in zip(_block("yA", n), _block("yB", n))]


def _prolonged(n):
    # i < k only: the i > k entries are negatives and the diagonal vanishes
    anti = [f"yC[{j}][{i}][{k}] - yC[{j}][{k}][{i}]"
            for j in range(1, n + 1) for i in range(1, n + 1) for k in range(i + 1, n + 1)]
    return _strict_cosserat(n) + anti


CATALOG = {
    "uniform_frame": _uniform_frame,
    "fgm_axis": _fgm_axis,
    "strict_cosserat": _strict_cosserat,
    "prolonged": _prolonged,
}

DESCRIPTIONS = {
    "uniform_frame": "frame block yA, flattened",
    "fgm_axis": "last body coordinate followed by the flattened frame block",
    "strict_cosserat": "yA - yB, flattened",
    "prolonged": "yA - yB followed by the antisymmetric part of yC",
}


def catalog_names():
    return sorted(CATALOG)


def catalog_text(name, n=3):
    try:
        build = CATALOG[name]
    except KeyError:
        raise UnknownLaw(f"unknown catalog entry {name!r}; known: {', '.join(catalog_names())}") from None
    return " ; ".join(build(n))


def catalog(name, n=3):
    return parse_law(catalog_text(name, n), n, name=name)
