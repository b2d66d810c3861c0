"""hcgl: exact gadget synthesis and reduction compiling for the hard-core model
at negative activities, with every construction certified against independent
brute-force partition-function oracles.
"""

from .errors import (CapacityError, CertificateError, CompositionError,
                     DomainError, HcglError, InternalError,
                     SearchExhaustedError, UndefinedRatioError,
                     VerificationFailedError, ZeroDenominatorError)
from .graphs import (ActivityVector, Gadget, Graph, add_pendant, attach_at,
                     dary_tree, disjoint_union, is_bipartite, path,
                     validate_gadget)
from .numerics import (ApproxReal, CubicNumber, acos_lambda, cbrt_interval,
                       cubic_to_approx, format_rational, parse_rational,
                       sqrt_interval, working_precision)
from .partition import (SplitValue, TwoSpinParams, path_ratio, ratio_R,
                        z_bruteforce, z_exact, z_path_closed,
                        z_path_recurrence, z_tree, z_twospin)

__version__ = "0.1.0"
