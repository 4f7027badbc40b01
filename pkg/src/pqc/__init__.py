"""Exact verification engine for paraquaternionic contact (pqc) structures on
Lie algebra models: canonical connection, curvature, Bianchi and Ricci
identities, the fundamental 4-form and the para 3-Sasakian structure equations."""

__version__ = "0.1.0"

from .connection import build_connection
from .curvature import curvature_tensor, ricci_contractions
from .models import builtin_heisenberg, builtin_l0, gauge_transform, load_model, random_gauge, save_model
from .sasakian import classify, formal_dga_verify
from .structure import solve_reeb, validate_pqc

__all__ = [
    "__version__",
    "build_connection",
    "curvature_tensor",
    "ricci_contractions",
    "builtin_heisenberg",
    "builtin_l0",
    "gauge_transform",
    "load_model",
    "random_gauge",
    "save_model",
    "classify",
    "formal_dga_verify",
    "solve_reeb",
    "validate_pqc",
]
