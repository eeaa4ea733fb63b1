import json
from typing import Any

import numpy as np


def clean_result(result: Any) -> Any:
    """
    Convert numpy containers and scalars into plain Python types for JSON output.

    Floats are kept at full precision; json writes their shortest round-trip repr.
    """
    if isinstance(result, dict):
        return {str(key): clean_result(value) for key, value in result.items()}
    elif isinstance(result, (list, tuple)):
        return [clean_result(item) for item in result]
    elif isinstance(result, np.ndarray):
        return clean_result(result.tolist())
    elif isinstance(result, np.bool_):
        return bool(result)
    elif isinstance(result, np.integer):
        return int(result)
    elif isinstance(result, np.floating):
        return float(result)
    else:
        return result


def dumps_line(record: Any) -> str:
    return json.dumps(clean_result(record), separators=(",", ":"))
