"""Architecture and weight-prior description of a fully connected network."""

import math
from dataclasses import dataclass, replace
from typing import Tuple

from .errors import ConfigurationError

ACTIVATIONS = ("linear", "relu")


@dataclass(frozen=True)
class NetworkSpec:
    """A depth-d network without biases and a single input of fixed norm.

    Parameters
    ----------
    widths : tuple of int
        Layer widths n_0, n_1, ..., n_d (input width first, output width last).
    weight_std : tuple of float
        Per-layer weight standard deviations sigma_1..sigma_d.  Weights of
        layer l are iid N(0, sigma_l^2).
    input_norm : float
        Euclidean norm of the (single) input.  Only the norm matters.
    activation : {"linear", "relu"}
    """

    widths: Tuple[int, ...]
    weight_std: Tuple[float, ...]
    input_norm: float = 1.0
    activation: str = "linear"

    def __post_init__(self):
        widths = tuple(self.widths)
        if len(widths) < 2:
            raise ConfigurationError("need at least input and output widths")
        if any(int(n) != n or n < 1 for n in widths):
            raise ConfigurationError(f"widths must be positive integers, got {widths}")
        object.__setattr__(self, "widths", tuple(int(n) for n in widths))
        stds = tuple(float(s) for s in self.weight_std)
        if len(stds) != len(widths) - 1:
            raise ConfigurationError("need one weight std per layer")
        if not all(s > 0 and math.isfinite(s) for s in stds):
            raise ConfigurationError("weight standard deviations must be positive and finite")
        object.__setattr__(self, "weight_std", stds)
        if not (self.input_norm > 0 and math.isfinite(self.input_norm)):
            raise ConfigurationError("input norm must be positive")
        object.__setattr__(self, "input_norm", float(self.input_norm))
        if self.activation not in ACTIVATIONS:
            raise ConfigurationError(f"activation must be one of {ACTIVATIONS}")

    @property
    def depth(self) -> int:
        return len(self.widths) - 1

    @property
    def hidden_widths(self) -> Tuple[int, ...]:
        return self.widths[1:-1]

    @property
    def out_width(self) -> int:
        return self.widths[-1]

    @property
    def log_kappa(self) -> float:
        return sum(math.log(s) for s in self.weight_std) + math.log(self.input_norm)

    @property
    def kappa(self) -> float:
        """Overall scale sigma_1 * ... * sigma_d * |x|."""
        return math.exp(self.log_kappa)

    def with_widths(self, hidden=None, out_width=None):
        """Same overall scale, different hidden and/or output widths."""
        hidden = self.hidden_widths if hidden is None else tuple(hidden)
        out = self.out_width if out_width is None else out_width
        if len(hidden) != self.depth - 1:
            raise ConfigurationError("changing widths must keep the depth")
        return replace(self, widths=(self.widths[0],) + tuple(hidden) + (out,))

    def with_out_width(self, out_width):
        return self.with_widths(out_width=out_width)

    def with_activation(self, activation):
        return replace(self, activation=activation)

    @classmethod
    def from_kappa(cls, widths, kappa=1.0, activation="linear"):
        """Unit input, the whole scale on the first layer, unit stds afterwards."""
        depth = len(widths) - 1
        return cls(tuple(widths), (float(kappa),) + (1.0,) * (depth - 1), 1.0, activation)

    @classmethod
    def equal_variance(cls, widths, activation="linear"):
        """Scale chosen so the output variance per unit is the same for every width.

        kappa^2 = 1 / (n_1 ... n_{d-1}) for linear networks and
        2^(d-1) / (n_1 ... n_{d-1}) for ReLU networks, both with unit input.
        """
        widths = tuple(widths)
        depth = len(widths) - 1
        log_k2 = -sum(math.log(n) for n in widths[1:-1])
        if activation == "relu":
            log_k2 += (depth - 1) * math.log(2)
        return cls.from_kappa(widths, math.exp(0.5 * log_k2), activation)
