"""Thermodynamic phase space with the Gibbs one-form, its potential lattice,
system embeddings, and line integrals along processes."""

from .calculus import (
    Dual,
    DomainError,
    QuadratureSpec,
    ScalarField,
    adaptive_simpson,
    fd_gradient,
    gradient,
    hessian,
    second_partial,
    solve_bracketed,
)
from .geometry import (
    DimensionError,
    PhaseSpace,
    State,
    TangentVector,
    gibbs_form,
    gibbs_form_energy_split,
    make_standard_model,
    symplectic_form,
    symplectic_gram,
    universal_energy,
)
from .lattice import (
    IndexSet,
    associated_variables,
    complement_pair,
    differential_expansion,
    enumerate_lattice,
    gibbs_form_via_potential,
    gibbs_relations,
    maxwell_identities,
    potential_difference,
    potential_value,
    potential_values,
    splitting_potential,
)
from .process import (
    AxisRectangle,
    ProcessCurve,
    energy_budget,
    holonomy,
    is_admissible,
    polyline,
    stokes_check,
    work,
)
from .systems import (
    DefiningFunction,
    EosConstraint,
    Embedding,
    build_embedding,
    catalog_fundamental,
    eos_residual,
    gibbs_duhem_residual,
    maxwell_residual,
    solve_eos,
)
from .tables import emit_tables

__version__ = "0.1.0"

__all__ = [
    "AxisRectangle",
    "DefiningFunction",
    "DimensionError",
    "DomainError",
    "Dual",
    "Embedding",
    "EosConstraint",
    "IndexSet",
    "PhaseSpace",
    "ProcessCurve",
    "QuadratureSpec",
    "ScalarField",
    "State",
    "TangentVector",
    "adaptive_simpson",
    "associated_variables",
    "build_embedding",
    "catalog_fundamental",
    "complement_pair",
    "differential_expansion",
    "emit_tables",
    "energy_budget",
    "enumerate_lattice",
    "eos_residual",
    "fd_gradient",
    "gibbs_duhem_residual",
    "gibbs_form",
    "gibbs_form_energy_split",
    "gibbs_form_via_potential",
    "gibbs_relations",
    "gradient",
    "hessian",
    "holonomy",
    "is_admissible",
    "make_standard_model",
    "maxwell_identities",
    "maxwell_residual",
    "polyline",
    "potential_difference",
    "potential_value",
    "potential_values",
    "second_partial",
    "solve_bracketed",
    "solve_eos",
    "splitting_potential",
    "stokes_check",
    "symplectic_form",
    "symplectic_gram",
    "universal_energy",
    "work",
    "__version__",
]
