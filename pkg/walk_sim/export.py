"""
CSV export of walk traces and gain curves
"""

from pathlib import Path
from typing import Sequence, Union

import pandas as pd

from numeric_core import write_csv

from .walks import GainCurvePoint, WalkTrace

PER_SAMPLE_COLUMN_LIMIT = 100


def trace_frame(trace: WalkTrace) -> pd.DataFrame:
    """layer, mean_lnZ, var_lnZ and, for small ensembles, one column per trajectory"""
    frame = pd.DataFrame(
        {"layer": trace.layers, "mean_lnZ": trace.mean, "var_lnZ": trace.variance}
    )
    if trace.ln_z is not None and trace.samples <= PER_SAMPLE_COLUMN_LIMIT:
        samples = pd.DataFrame(
            trace.ln_z.T, columns=[f"sample_{i}" for i in range(trace.samples)]
        )
        frame = pd.concat([frame, samples], axis=1)
    return frame


def gain_curve_frame(points: Sequence[GainCurvePoint]) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "g": [p.g for p in points],
            "mean_log_ratio": [p.mean for p in points],
            "std_error": [p.standard_error for p in points],
            "discarded": [p.discarded for p in points],
        }
    )


def write_trace_csv(trace: WalkTrace, path: Union[str, Path]) -> Path:
    return write_csv(trace_frame(trace), path)
