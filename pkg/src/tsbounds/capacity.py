"""VC dimensions of the supported forecasting classes and the growth-function
bound."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional, Tuple, Union

INFINITE = math.inf

ClassKind = Literal["mean", "ar", "var", "linear", "statespace-truncated", "sine-frequency"]


class InfiniteCapacityError(ValueError):
    """The model class has infinite VC dimension, so no finite bound exists."""


@dataclass(frozen=True)
class ModelClassDescriptor:
    """A model class identified by kind and its size parameters.

    ``ar`` uses ``d``; ``var`` uses ``k`` and ``d``; ``linear`` uses ``p``;
    ``statespace-truncated`` uses ``d`` and ``p`` (series dimension) and an
    optional ``override`` capping the VC dimension.
    """

    kind: ClassKind
    d: int = 0
    k: int = 1
    p: int = 1
    override: Optional[int] = None

    @classmethod
    def parse(cls, text: str) -> "ModelClassDescriptor":
        """Parse strings such as ``mean``, ``ar(2)``, ``var(4,1)``, ``linear(3)``."""
        text = text.strip().lower().replace(" ", "")
        name, _, rest = text.partition("(")
        args = [int(x) for x in rest.rstrip(")").split(",") if x] if rest else []
        if name == "mean":
            return cls("mean")
        if name == "ar":
            return cls("ar", d=args[0])
        if name == "var":
            return cls("var", k=args[0], d=args[1])
        if name == "linear":
            return cls("linear", p=args[0])
        if name in ("statespace", "statespace-truncated", "ss"):
            return cls("statespace-truncated", d=args[0], p=args[1] if len(args) > 1 else 1)
        if name in ("sine", "sine-frequency"):
            return cls("sine-frequency")
        raise ValueError(f"unknown model class {text!r}")


def vc_dimension(desc: ModelClassDescriptor) -> Union[int, float]:
    """VC dimension from the catalog; ``math.inf`` for the sine class."""
    kind = desc.kind
    if kind == "mean":
        return 1
    if kind == "ar":
        return desc.d + 1
    if kind == "var":
        return desc.k * desc.d + 1
    if kind == "linear":
        return desc.p + 1
    if kind == "statespace-truncated":
        v = desc.p * desc.d + 1
        return v if desc.override is None else min(v, desc.override)
    if kind == "sine-frequency":
        return INFINITE
    raise ValueError(f"unknown model class {kind!r}")


def finite_vcd(vcd) -> int:
    """Return ``vcd`` as an int, raising if it is infinite."""
    if isinstance(vcd, ModelClassDescriptor):
        vcd = vc_dimension(vcd)
    if vcd is None or math.isinf(vcd):
        raise InfiniteCapacityError("model class has infinite VC dimension: no finite bound")
    if vcd < 1 or int(vcd) != vcd:
        raise ValueError(f"VC dimension must be a positive integer, got {vcd}")
    return int(vcd)


def growth_function_bound(n: int, vcd) -> Tuple[float, Optional[float]]:
    """Return ``((n+1)**vcd, exact)`` where ``exact = 2**n`` when ``n <= vcd``
    and ``None`` otherwise."""
    h = finite_vcd(vcd)
    if n < 0:
        raise ValueError("n must be nonnegative")
    bound = float((n + 1) ** h)
    exact = float(2**n) if n <= h else None
    return bound, exact
