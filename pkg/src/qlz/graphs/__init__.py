"""Pairing permutations, momentum matrices and graph amplitudes."""
from .amplitudes import (
    AmplitudeEstimate,
    GraphSumReport,
    LatticeState,
    MomentumPacket,
    amplitude,
    contour_identity_check,
    e_eta_bound,
    graph_sum_vs_disorder,
    same_site_sum,
    torus_pairing_sum,
    torus_pairing_sum_direct,
)
from .permutations import (
    GraphPermutation,
    VertexClassification,
    build_M,
    census_envelope,
    classify,
    degree,
    degree_census,
    format_matrix,
    integer_determinant,
    is_invertible,
    is_totally_unimodular,
    momentum_residuals,
    parse_matrix,
    permutations,
)
