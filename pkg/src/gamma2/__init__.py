"""Double forms, sigma_k and Gauss-Bonnet curvature invariants, model
spaces and cone experiments for algebraic curvature structures."""

__version__ = "0.1.0"

from .double_forms import (  # noqa: E402
    CurvatureStructure,
    DegreeError,
    DoubleForm,
    bianchi_project,
    contraction,
    exterior_product,
    g_power,
    hodge_star,
    inner_product,
    kulkarni_nomizu,
    metric,
    norm_sq,
)
from .invariants import (  # noqa: E402
    IdentityError,
    InvariantReport,
    gauss_bonnet,
    identity_residuals,
    invariant_report,
    lovelock,
    newton,
    ricci,
    schouten,
    sigma_k,
    weyl,
)

__all__ = [
    "CurvatureStructure", "DegreeError", "DoubleForm", "IdentityError", "InvariantReport",
    "bianchi_project", "contraction", "exterior_product", "g_power", "gauss_bonnet",
    "hodge_star", "identity_residuals", "inner_product", "invariant_report", "kulkarni_nomizu",
    "lovelock", "metric", "newton", "norm_sq", "ricci", "schouten", "sigma_k", "weyl",
]
