#pragma once

#include "spo/admm.hpp"
#include "spo/relocation.hpp"

#include <cstdint>

namespace spo {

/// Random feasible relocation instance (y = 0 is always feasible): mixed
/// time-feasible and infeasible arcs, distance-like costs, a budget that is
/// occasionally binding.
RelocationInstance random_instance(int n_grids, std::uint64_t seed);

/// Random predicted free-vehicle distribution compatible with inst.
Eigen::VectorXd random_prediction(const RelocationInstance& inst, std::uint64_t seed);

struct GradCheckResult {
    double max_rel_error = 0.0;
    bool degenerate = false;  // some slack coordinate within tol of its kink
};

/// Compares the unrolled Jacobian dy*/dtheta against central finite
/// differences of the forward solve (step eps). The relative error is
/// normalized by the larger of the finite-difference magnitude and 1.
/// Points with a slack coordinate within kink_tol of its clamp are flagged
/// degenerate; the Jacobian is not differentiable there.
GradCheckResult check_admm_jacobian(const RelocationInstance& inst,
                                    const Eigen::VectorXd& prediction, const AdmmConfig& cfg,
                                    double eps = 1e-4, double kink_tol = 1e-3);

/// Compares predictor_vjp against central finite differences over every
/// weight of a small model.
double check_predictor_vjp(int n_grids, int window, int hidden, std::uint64_t seed,
                           double eps = 1e-5);

}  // namespace spo
