"""Numerical tolerances and tuning knobs, with library-wide defaults."""

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    # curve / points
    point_rel: float = 1e-10          # |y^2 - f(x)| / (1 + |f(x)|)
    duplicate_branch: float = 1e-8    # min pairwise branch-point distance
    # quadrature
    quad_piece: float = 1e-12         # per-piece absolute error target
    quad_total: float = 1e-10         # per-contour error budget
    quad_max_depth: int = 16
    # homology
    lattice_residual: float = 1e-6    # max residual after integer rounding
    # periods
    tau_symmetry: float = 1e-8
    # real normalization
    rn_certificate: float = 1e-9
    rn_condition_cap: float = 1e12
    exactness: float = 1e-8           # |period| threshold for is_exact
    stratum_c_rel: float = 1e-3       # c = stratum_c_rel * max |r_i|
    # ray tracing
    ray_tol_per_phi: float = 1e-9     # local error per unit Phi
    ray_launch_offset: float = 1e-5   # times local scale
    ray_capture_rel: float = 1e-4     # times min pairwise zero distance
    ray_max_steps: int = 40000
    ray_re_drift: float = 1e-7
    jump_agreement: float = 1e-7
    dual_period_real: float = 1e-8
    dual_period_match: float = 1e-7
    # leaf walking
    fd_step_rel: float = 1e-6
    rank_rel: float = 1e-6            # singular value cutoff, relative to largest
    leaf_drift: float = 1e-8
    leaf_max_newton: int = 16

    def replaced(self, **kw) -> "Tolerances":
        return replace(self, **kw)


DEFAULT_TOL = Tolerances()
