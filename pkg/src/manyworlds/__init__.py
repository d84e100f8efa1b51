"""World-labeled string diagrams over commutative semirings.

The package provides diagram terms with world labels, fixed and
world-agnostic composition, a linear-map semantics, a sound rewrite
library, normal forms that decide semantic equivalence, a gallery of
standard constructions, and a small reversible pattern-matching
language that compiles to diagrams.
"""

__version__ = "0.1.0"

from .kernel import (DiagObject, EMPTY_OBJECT, Enabling, Prod, QUBIT, Sum,
                     UNIT, dim_type, interp_dim, obj, parse_object, parse_type)
from .ringmat import (BOOLEAN, COMPLEX, NONNEG, QSQRT2I, RATIONAL, RINGS,
                      SemiringMatrix)
from .diagram import (AgnosticDiagram, LabeledDiagram, compose_par_agnostic,
                      compose_par_fixed, compose_seq_agnostic,
                      compose_seq_fixed, dagger, drop_dead_worlds,
                      par_agnostic, seq_agnostic, validate, with_star)
from .semantics import Interpretation, sem, sem_agnostic
from .normform import NormalForm, equivalent, normalize, synthesize

__all__ = [
    "DiagObject", "EMPTY_OBJECT", "Enabling", "Prod", "QUBIT", "Sum", "UNIT",
    "dim_type", "interp_dim", "obj", "parse_object", "parse_type",
    "BOOLEAN", "COMPLEX", "NONNEG", "QSQRT2I", "RATIONAL", "RINGS",
    "SemiringMatrix",
    "AgnosticDiagram", "LabeledDiagram", "compose_par_agnostic",
    "compose_par_fixed", "compose_seq_agnostic", "compose_seq_fixed",
    "dagger", "drop_dead_worlds", "par_agnostic", "seq_agnostic",
    "validate", "with_star",
    "Interpretation", "sem", "sem_agnostic",
    "NormalForm", "equivalent", "normalize", "synthesize",
]
