"""Embedded reference tables and the row-matching rule used against them."""
from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

TABLE_COLUMNS = ("rbar_minus_A", "max_Qhat", "max_K0", "max_K1", "min_P")
DEFAULT_TOL_ABS = 0.02
DEFAULT_TOL_REL = 0.02


@lru_cache(maxsize=1)
def load_reference() -> dict:
    text = resources.files("capcone").joinpath("data/reference_tables.json").read_text()
    return json.loads(text)


def supersolution_rows() -> list:
    return list(load_reference()["supersolution_rows"])


def quadratic_examples() -> list:
    return list(load_reference()["quadratic_examples"])


def find_row(n: int, k: int, beta: float):
    for row in supersolution_rows():
        if row["n"] == n and row["k"] == k and row["beta"] == beta:
            return row
    return None


def value_matches(computed: float, expected: float, tol_abs: float = DEFAULT_TOL_ABS,
                  tol_rel: float = DEFAULT_TOL_REL) -> bool:
    return abs(computed - expected) <= max(tol_abs, tol_rel * abs(expected))


def row_matches(computed: dict, expected: dict, tol_abs: float = DEFAULT_TOL_ABS,
                tol_rel: float = DEFAULT_TOL_REL) -> bool:
    return all(value_matches(computed[c], expected[c], tol_abs, tol_rel) for c in TABLE_COLUMNS)
