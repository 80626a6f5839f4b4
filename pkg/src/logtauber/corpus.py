"""Built-in test functions, each tagged with the classifications it should receive."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Optional

from .funcspec import FunctionSpec, parse

# lambda_0 of L2: the drop over every window (x, x^2] is exactly -1
L2_LAMBDA0 = 2.0
C1_VALUE = 3.5
V1_LIMIT = 2.0


@dataclass(frozen=True)
class Classification:
    slowly_decreasing: Optional[bool]  # None for complex-valued functions
    slowly_oscillating: bool
    l1_summable: bool
    statistical: bool
    ordinary: bool
    tau_limit: Optional[float] = None
    stat_limit: Optional[float] = None

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class CorpusEntry:
    spec: FunctionSpec
    expected: Classification
    note: str = ""

    @property
    def name(self):
        return self.spec.name


_SOURCES = {
    "C1": (f"{C1_VALUE!r}",
           Classification(True, True, True, True, True, C1_VALUE, C1_VALUE),
           "constant: every property holds"),
    "S1": ("sin(log(x))",
           Classification(False, False, True, False, False, 0.0, None),
           "(L,1)-summable to 0 without an ordinary limit"),
    "S2": ("0 spikes(2, 2, 1, 1)",
           Classification(False, False, True, True, False, 0.0, 0.0),
           "unit spikes on [n^2, n^2+1): statistical limit 0, no ordinary limit"),
    "L1": ("piece [1, e): 0; piece [e, inf): loglog(x);",
           Classification(True, True, False, False, False, None, None),
           "slowly oscillating, drifts to infinity"),
    "L2": (f"piece [1, e): 0; piece [e, inf): -loglog(x) / log({L2_LAMBDA0!r});",
           Classification(True, True, False, False, False, None, None),
           "drop over (x, x^2] is exactly -1"),
    "O1": ("piece [1, e): 0; piece [e, inf): sin(loglog(x));",
           Classification(True, True, False, False, False, None, None),
           "slowly oscillating but not (L,1)-summable"),
    "V1": (f"piece [1, e): {V1_LIMIT!r}; piece [e, inf): {V1_LIMIT!r} + 1 / log(x);",
           Classification(True, True, True, True, True, V1_LIMIT, V1_LIMIT),
           "converges to 2 like 1/log x"),
}


def builtin_corpus() -> list[CorpusEntry]:
    return [CorpusEntry(parse(src, name=name), cls, note)
            for name, (src, cls, note) in _SOURCES.items()]


def corpus_by_name() -> dict[str, CorpusEntry]:
    return {e.name: e for e in builtin_corpus()}


def get(name: str) -> FunctionSpec:
    try:
        return corpus_by_name()[name].spec
    except KeyError:
        raise KeyError(f"no corpus function {name!r}; known: {', '.join(_SOURCES)}") from None


def l2_family(lambda0: float) -> FunctionSpec:
    """-loglog(x)/log(lambda0): drop over every (x, x^lambda0] equals -1."""
    if not lambda0 > 1:
        raise ValueError("lambda0 must exceed 1")
    return parse(f"piece [1, e): 0; piece [e, inf): -loglog(x) / {math.log(lambda0)!r};",
                 name=f"L2[{lambda0:g}]")
