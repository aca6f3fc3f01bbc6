"""
Deterministic CSV output for result tables
"""

from pathlib import Path
from typing import Union

import pandas as pd

FLOAT_FORMAT = "%.10g"
UNDEFINED = "undefined"


def write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    """Fixed float format and line endings; NaN cells are written as 'undefined'"""
    path = Path(path)
    frame.to_csv(
        path, index=False, float_format=FLOAT_FORMAT, na_rep=UNDEFINED, lineterminator="\n"
    )
    return path
