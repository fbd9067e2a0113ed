"""Trees with maximal largest Laplacian eigenvalue in a degree class.

The usual entry points::

    from spectree import parse_degree_sequence, build_bfd_tree, max_laplacian_eigenpair
    t = build_bfd_tree(parse_degree_sequence("4^2,3^4,2^3,1^10"))
    max_laplacian_eigenpair(t).lam
"""

from .degseq import (DegreeSequence, Majorization, enumerate_tree_sequences,
                     format_degree_sequence, is_tree_sequence, majorization_compare,
                     parse_degree_sequence, spider_sequence, star_sequence)
from .exceptions import (BudgetExceededError, ConvergenceError, InvalidMoveError,
                         InvalidSequenceError, InvalidTreeError, SpectreeError,
                         VerificationAnomaly)
from .oracle import (ExtremalReport, VerificationReport, enumerate_trees,
                     find_extremal_bruteforce, labeled_class_size, sweep, verify_corollary3,
                     verify_corollary4, verify_theorem1, verify_theorem2)
from .rearrange import (RearrangeStep, improve_once, local_search, majorization_chain,
                        prec_ordering, shift_edges, switch_edges)
from .spectral import (SpectralResult, check_sign_structure, dense_max_eigenvalue,
                       eigen_residual, laplacian_apply, max_laplacian_eigenpair,
                       rayleigh_quotient)
from .tree import (Tree, build_bfd_tree, canonical_code, has_bfd_ordering, is_bfd_ordering,
                   path_tree, prufer_decode, prufer_encode, random_tree, read_edgelist,
                   spider_legs, spider_tree, star_tree)

__version__ = "0.1.0"

__all__ = sorted(name for name, obj in globals().items()
                 if not name.startswith("_") and not isinstance(obj, type(spectral)))
