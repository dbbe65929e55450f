#include "herglotz/report.hpp"

#include <cmath>

namespace herglotz {

ResidualReport ResidualReport::make(std::string name, Eigen::VectorXd times, Eigen::MatrixXd values,
                                    std::vector<bool> included)
{
    ResidualReport r;
    r.name = std::move(name);
    if (included.empty())
        included.assign(static_cast<std::size_t>(values.cols()), true);
    double sum_sq = 0.0;
    long count = 0;
    for (Eigen::Index k = 0; k < values.cols(); ++k) {
        if (!included[static_cast<std::size_t>(k)]) {
            ++r.skipped;
            continue;
        }
        for (Eigen::Index i = 0; i < values.rows(); ++i) {
            const double a = std::abs(values(i, k));
            r.max_abs = std::max(r.max_abs, a);
            sum_sq += a * a;
            ++count;
        }
    }
    r.l2 = count > 0 ? std::sqrt(sum_sq / static_cast<double>(count)) : 0.0;
    r.times = std::move(times);
    r.values = std::move(values);
    r.included = std::move(included);
    return r;
}

} // namespace herglotz
