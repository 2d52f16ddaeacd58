"""Dirichlet-to-Neumann spectra and Born approximations on the unit ball."""

from .born3d import (
    BornEvaluation,
    averaged_born_hat,
    cartesian_ball_grid,
    fourier_via_moments_3d,
    reconstruct_3d,
    scattering_pairing,
    taylor_angular_coeff,
    taylor_angular_constant,
)
from .born_radial import (
    SeriesValue,
    born_hat_radial,
    fourier_from_moments,
    reconstruct_radial,
    scattering_transform_radial,
)
from .dtn3d import (
    ChannelSolution,
    MatrixElementTable,
    MomentTable3D,
    PotentialSH,
    matrix_element,
    matrix_element_table,
    moment_3d,
    moment_table_3d,
    project_potential,
    rotate_potential,
    solve_channel_system,
)
from .errors import (
    AccuracyError,
    BornCalderonError,
    ConvergenceError,
    ResonanceError,
    SchemaError,
    SolverError,
)
from .gaunt import cg_00, cg_km, gaunt_numeric, product_expansion
from .quadrature import BallRule, SphereRule, fourier_oracle, gauss_panels, make_ball_rule, make_sphere_rule
from .radial import (
    DtnSpectrum,
    RadialPotential,
    contraction_ratio,
    dtn_spectrum,
    eigenvalue_series,
    lambda_remainder_bound,
    liouville_operator_norm,
    potential_from_radial_conductivity,
    radial_moment_table,
    sigma_bound,
    sigma_k1,
    sigma_kn,
    sigma_series,
    solve_radial_channel,
)
from .specfun import (
    Frame,
    ZetaVector,
    assoc_legendre,
    bessel_series,
    c_k,
    frame_from_omega,
    ladder_coeff,
    legendre,
    mu_kl,
    random_zeta,
    sph_harm,
    sph_harm_rotated,
    sph_harm_xyz,
    spherical_bessel,
    zeta_pair_e3,
    zeta_pair_frame,
    zeta_pair_radial,
)

__version__ = "0.1.0"
