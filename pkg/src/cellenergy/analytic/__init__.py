from .bell import bell_polynomial, bell_polynomials
from .edgeworth import (EdgeworthModel, TailProbability, approximation_error_bound, edgeworth_tail,
                        hermite3)
from .functional import FunctionalEstimate, mobility_functional
from .moments import (MaxDistanceLaw, MomentReport, QuadratureError, additive_cumulants,
                      campbell_moments, ja_mean_singular, ja_moments_motionless,
                      jb_moments_power_control, jb_no_power_control, kappa, m_ratio,
                      m_ratio_at_unit_density, max_distance_density, power_control_gain)
