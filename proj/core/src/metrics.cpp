#include "spo/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace spo {

double rmse(const Eigen::VectorXd& matched, const Eigen::VectorXd& target) {
    if (matched.size() == 0 || matched.size() != target.size()) {
        throw std::invalid_argument("rmse: empty input or length mismatch");
    }
    return std::sqrt((matched - target).squaredNorm() / static_cast<double>(matched.size()));
}

double smape(const Eigen::VectorXd& matched, const Eigen::VectorXd& target) {
    if (matched.size() == 0 || matched.size() != target.size()) {
        throw std::invalid_argument("smape: empty input or length mismatch");
    }
    double acc = 0.0;
    for (Eigen::Index i = 0; i < matched.size(); ++i) {
        const double denom = (std::abs(matched(i)) + std::abs(target(i))) / 2.0;
        if (denom > 0.0) {
            acc += std::abs(matched(i) - target(i)) / denom;
        }
    }
    return 100.0 * acc / static_cast<double>(matched.size());
}

Eigen::MatrixXd divergence_table(const Eigen::MatrixXd& matched, const Eigen::MatrixXd& target) {
    if (matched.rows() != target.rows() || matched.cols() != target.cols()) {
        throw std::invalid_argument("divergence_table: shape mismatch");
    }
    return (matched - target).cwiseAbs();
}

}  // namespace spo
