"""
Layer widths that spend a fixed parameter budget

The parameter count of a network with widths w_0..w_D is

    Σ_d (w_{d-1} + 1) · w_d

i.e. every weight and every bias, output layer included. Under this count a
784-input, 10-output network at 4e6 parameters gets N = 88 at depth 512 and
N = 1229 at depth 4 (N = 1228 falls 5306 parameters short).
"""

from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

from numeric_core import ArgumentError

CODE_LAYER_WIDTH = 30
_SEARCH_CEILING = 1 << 40


class SizingFamily(str, Enum):
    CONSTANT = "constant"
    AUTOENCODER = "autoencoder"


@dataclass(frozen=True)
class SizingPlan:
    p_lim: int
    depth: int
    input_dim: int
    output_dim: int
    family: SizingFamily
    widths: Tuple[int, ...]
    parameter_count: int
    step: Optional[int] = None

    @property
    def layer_sizes(self) -> Tuple[int, ...]:
        """Widths of h_1..h_D"""
        return self.widths[1:]

    @property
    def hidden_width(self) -> int:
        return self.widths[1]

    @property
    def code_layer(self) -> Optional[int]:
        """Index d of the bottleneck h_d of an autoencoder plan"""
        if self.family is SizingFamily.AUTOENCODER and self.depth > 1:
            return self.depth // 2
        return None

    @property
    def linear_layers(self) -> Tuple[int, ...]:
        """Hidden layers that stay linear: the autoencoder code layer"""
        return () if self.code_layer is None else (self.code_layer,)


def count_parameters(widths: Sequence[int]) -> int:
    widths = [int(w) for w in widths]
    return sum((fan_in + 1) * fan_out for fan_in, fan_out in zip(widths[:-1], widths[1:]))


def constant_widths(width: int, depth: int, input_dim: int, output_dim: int) -> List[int]:
    return [input_dim] + [width] * (depth - 1) + [output_dim]


def autoencoder_widths(step: int, depth: int, input_dim: int, output_dim: int) -> List[int]:
    """Symmetric arithmetic taper: the code layer sits at index depth // 2"""
    code = depth // 2
    hidden = [CODE_LAYER_WIDTH + abs(d - code) * step for d in range(1, depth)]
    return [input_dim] + hidden + [output_dim]


def _smallest(builder: Callable[[int], List[int]], start: int, p_lim: int) -> int:
    if count_parameters(builder(start)) >= p_lim:
        return start
    if count_parameters(builder(start + 1)) == count_parameters(builder(start)):
        raise ArgumentError("Layer sizes are fixed at this depth; the budget cannot be met")
    low, high = start, start + 1
    while count_parameters(builder(high)) < p_lim:
        low, high = high, 2 * high
        if high > _SEARCH_CEILING:
            raise ArgumentError(f"Budget {p_lim} is out of reach")
    # count(low) < p_lim <= count(high)
    while high - low > 1:
        middle = (low + high) // 2
        if count_parameters(builder(middle)) >= p_lim:
            high = middle
        else:
            low = middle
    return high


def size_layers(
    p_lim: int, depth: int, input_dim: int, output_dim: int, family: SizingFamily
) -> SizingPlan:
    """Smallest integer-width plan in ``family`` whose parameter count reaches ``p_lim``"""
    family = SizingFamily(family)
    if p_lim < 1 or depth < 1 or input_dim < 1 or output_dim < 1:
        raise ArgumentError(
            f"Invalid sizing request p_lim={p_lim}, depth={depth}, dims=({input_dim}, {output_dim})"
        )
    if family is SizingFamily.CONSTANT:
        width = _smallest(lambda w: constant_widths(w, depth, input_dim, output_dim), 1, int(p_lim))
        widths, step = constant_widths(width, depth, input_dim, output_dim), None
    else:
        step = _smallest(lambda s: autoencoder_widths(s, depth, input_dim, output_dim), 0, int(p_lim))
        widths = autoencoder_widths(step, depth, input_dim, output_dim)
    return SizingPlan(
        p_lim=int(p_lim),
        depth=depth,
        input_dim=input_dim,
        output_dim=output_dim,
        family=family,
        widths=tuple(widths),
        parameter_count=count_parameters(widths),
        step=step,
    )
