"""Material uniformity, homogeneity and foliations of Cosserat constitutive laws on jet groupoids."""

from .equations import (CoefficientVector, DistributionSample, HolonomicCoefficientVector, SolverConfig,
                        admissible_field_at, assemble_holonomic, assemble_nonholonomic,
                        directional_derivative, embedding_matrix, is_material_isomorphism,
                        sample_jets_at, solve_point)
from .exceptions import *  # noqa: F401,F403
from .field import BodyGrid, FieldReport, analyze_grid, symmetry_probe
from .foliation import LeafLabeling, flow_containment_check, foliate
from .homogeneity import (HomogeneityAnsatz, HomogeneitySolution, homogeneity_residual_rows,
                          homogeneous_section_at, induced_field, leafwise_homogeneity, solve_homogeneity)
from .jets import (Jet, TangentJet, compose, identity_jet, inverse, is_holonomic, left_translate_tangent,
                   project_to_1jets, random_jet)
from .laws import LawExpr, catalog, evaluate, parse_law
from .linalg import Subspace, least_squares, nullspace, subspace_compare

__version__ = "0.1.0"
