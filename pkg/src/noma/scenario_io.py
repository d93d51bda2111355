"""JSON documents for scenarios and solver configs.

Scenario document keys: gains (input user order), noise_power_mw, p_max_mw,
dc_bias, peak_intensity, pam_coefficient, and an optional provenance object.
Floats are written with Python's shortest round-trip repr, so saving and
loading is lossless and repeated saves are byte-identical.
"""
import json
import logging
import math
import os
from typing import Any, Dict, List, Optional, Type, TypeVar

from pydantic import BaseModel, ConfigDict, ValidationError

from src.exceptions import ConfigError, ScenarioError
from src.noma.noma_model import Scenario, build_scenario

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)


class ScenarioDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    gains: List[float]
    noise_power_mw: float
    p_max_mw: float
    dc_bias: float
    peak_intensity: float
    pam_coefficient: float
    provenance: Optional[Dict[str, Any]] = None


def first_error(exc: ValidationError) -> tuple:
    """(field, message) of the first validation error, field in dotted/indexed form"""
    err = exc.errors()[0]
    field = ""
    for part in err.get("loc", ()):
        field += f"[{part}]" if isinstance(part, int) else (f".{part}" if field else str(part))
    return field or "document", err.get("msg", "invalid value")


def validate_model(model: Type[ModelT], data: Any, error: Type[ScenarioError] = ScenarioError) -> ModelT:
    if not isinstance(data, dict):
        raise error("expected a JSON object", field="document")
    try:
        return model.model_validate(data)
    except ValidationError as e:
        field, message = first_error(e)
        raise error(message, field=field) from None


def scenario_to_document(s: Scenario) -> Dict[str, Any]:
    doc = {
        "gains": s.to_original(s.gains).tolist(),
        "noise_power_mw": s.noise_power_mw,
        "p_max_mw": s.p_max_mw,
        "dc_bias": s.dc_bias,
        "peak_intensity": s.peak_intensity,
        "pam_coefficient": s.pam_coefficient,
    }
    if s.provenance is not None:
        doc["provenance"] = s.provenance
    return doc


def scenario_from_document(data: Any) -> Scenario:
    doc = validate_model(ScenarioDocument, data)
    return build_scenario(
        doc.gains,
        noise_power=doc.noise_power_mw,
        p_max=doc.p_max_mw,
        dc_bias=doc.dc_bias,
        peak_intensity=doc.peak_intensity,
        pam_coefficient=doc.pam_coefficient,
        provenance=doc.provenance,
    )


def read_json(path: str, error: Type[ScenarioError] = ScenarioError) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise error(f"file not found: {path}", field="path") from None
    except json.JSONDecodeError as e:
        raise error(f"malformed JSON at line {e.lineno} column {e.colno}", field="document") from None


def json_safe(value: Any) -> Any:
    """JSON has no inf/nan; report them as null"""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value


def write_json(path: str, data: Any):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(json_safe(data), f, indent=2, allow_nan=False)
        f.write("\n")


def save_scenario(s: Scenario, path: str):
    write_json(path, scenario_to_document(s))
    logger.info(f"Wrote scenario with {s.num_users} users to {path}")


def load_scenario(path: str) -> Scenario:
    return scenario_from_document(read_json(path))


def load_config(model: Type[ModelT], path: str) -> ModelT:
    """Load a flat key-value config document; unknown keys are errors"""
    return validate_model(model, read_json(path, ConfigError), ConfigError)
