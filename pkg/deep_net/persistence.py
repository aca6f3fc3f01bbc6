"""
Portable parameter files

A network is stored as a NumPy ``.npz`` archive: ``weight_<d>`` and
``bias_<d>`` arrays for d = 1..D plus a ``header`` entry holding JSON with the
format version, layer widths, explicit per-layer shapes, gains, activations,
the linear hidden layers and the initialization seed.
"""

import json
from pathlib import Path
from typing import Any, Dict, Tuple, Union

import numpy as np

from numeric_core import ArgumentError, Matrix

from .network import NetworkParams

FORMAT_VERSION = 1


def _header(params: NetworkParams) -> Dict[str, Any]:
    return {
        "format_version": FORMAT_VERSION,
        "layer_widths": list(params.layer_widths),
        "weight_shapes": [list(w.shape) for w in params.weights],
        "bias_shapes": [[b.shape[0]] for b in params.biases],
        "g": params.g,
        "input_gain": params.input_gain,
        "output_gain": params.output_gain,
        "nonlinearity": params.nonlinearity.value,
        "output_activation": params.output_activation.value,
        "seed": params.seed,
        "linear_layers": list(params.linear_layers),
    }


def save_network(params: NetworkParams, path: Union[str, Path]) -> Path:
    path = Path(path)
    arrays = {"header": np.array(json.dumps(_header(params), sort_keys=True))}
    for d, (weight, bias) in enumerate(zip(params.weights, params.biases), start=1):
        arrays[f"weight_{d}"] = weight.values
        arrays[f"bias_{d}"] = bias
    with open(path, "wb") as handle:
        np.savez(handle, **arrays)
    return path


def load_network(path: Union[str, Path]) -> Tuple[NetworkParams, Dict[str, Any]]:
    """Read a parameter file; returns the network and its header"""
    with np.load(Path(path), allow_pickle=False) as archive:
        header = json.loads(str(archive["header"]))
        if header.get("format_version") != FORMAT_VERSION:
            raise ArgumentError(f"Unsupported parameter file version {header.get('format_version')}")
        depth = len(header["layer_widths"]) - 1
        weights = [archive[f"weight_{d}"] for d in range(1, depth + 1)]
        biases = [archive[f"bias_{d}"] for d in range(1, depth + 1)]

    for d, (weight, shape) in enumerate(zip(weights, header["weight_shapes"]), start=1):
        if list(weight.shape) != shape:
            raise ArgumentError(f"Layer {d} weight shape {weight.shape} disagrees with header {shape}")

    params = NetworkParams(
        layer_widths=tuple(header["layer_widths"]),
        weights=tuple(Matrix(w) for w in weights),
        biases=tuple(biases),
        g=header["g"],
        nonlinearity=header["nonlinearity"],
        output_activation=header["output_activation"],
        input_gain=header["input_gain"],
        output_gain=header["output_gain"],
        seed=header["seed"],
        linear_layers=tuple(header.get("linear_layers", ())),
    )
    return params, header
