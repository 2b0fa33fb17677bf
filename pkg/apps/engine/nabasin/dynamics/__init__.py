from nabasin.dynamics.orbits import orbit, sup_norm
from nabasin.dynamics.filtration import (
    FiltrationReport,
    FiltrationSpec,
    find_filtration_spec,
    in_V,
    in_V_minus,
    in_V_plus,
    in_W_minus,
    verify_filtration,
)
from nabasin.dynamics.green import (
    GreenEstimate,
    ScaledPoint,
    cauchy_rate_check,
    green_batch,
    green_estimate,
    green_functional_check,
    green_trajectory,
)
from nabasin.dynamics.classify import (
    AttractionCertificate,
    Classification,
    certify_attraction_radius,
    classify_batch,
    classify_point,
)
from nabasin.dynamics.render import RenderResult, render_basin

__all__ = [
    "AttractionCertificate",
    "Classification",
    "FiltrationReport",
    "FiltrationSpec",
    "GreenEstimate",
    "RenderResult",
    "ScaledPoint",
    "cauchy_rate_check",
    "certify_attraction_radius",
    "classify_batch",
    "classify_point",
    "find_filtration_spec",
    "green_batch",
    "green_estimate",
    "green_functional_check",
    "green_trajectory",
    "in_V",
    "in_V_minus",
    "in_V_plus",
    "in_W_minus",
    "orbit",
    "render_basin",
    "sup_norm",
    "verify_filtration",
]
