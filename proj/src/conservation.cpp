#include "noether/conservation.hpp"

#include <cmath>
#include <sstream>

namespace noether {

double default_conservation_tolerance(double h) { return std::max(1e-8, 100.0 * std::pow(h, 4)); }

ConservationRecord evaluate_current_along(const NoetherCurrent& current, const Trajectory& traj,
                                          std::optional<double> tolerance) {
    ConservationRecord rec;
    rec.i = current.i;
    rec.j = current.j;
    rec.trajectory = traj.name;
    rec.tolerance = tolerance.value_or(default_conservation_tolerance(traj.step));
    rec.values.resize(traj.nodes());
    for (Eigen::Index k = 0; k < traj.nodes(); ++k) {
        try {
            rec.values(k) = eval(current.expr, traj.env_at(k));
        } catch (const EvalError& ex) {
            rec.error = ex.what();
            rec.error_node = k;
            rec.conserved = false;
            return rec;
        }
    }
    rec.mean = rec.values.mean();
    rec.drift = (rec.values.array() - rec.mean).abs().maxCoeff();
    rec.relative_drift = rec.drift / (1.0 + std::abs(rec.mean));
    rec.conserved = rec.relative_drift <= rec.tolerance;
    return rec;
}

ConservationSummary conservation_suite(std::span<const NoetherCurrent> currents, std::span<const Trajectory> trajectories,
                                       std::optional<double> tolerance) {
    ConservationSummary out;
    if (trajectories.empty()) out.warnings.emplace_back("no trajectories: conservation holds vacuously");
    if (currents.empty()) out.warnings.emplace_back("no currents: conservation holds vacuously");
    for (const auto& traj : trajectories) {
        for (const auto& c : currents) {
            out.records.push_back(evaluate_current_along(c, traj, tolerance));
            const auto& rec = out.records.back();
            out.pass = out.pass && rec.conserved;
            const std::size_t idx = out.records.size() - 1;
            if (!rec.error.empty()) {
                out.worst = idx;
            } else if (!out.worst || (out.records[*out.worst].error.empty() &&
                                      rec.relative_drift > out.records[*out.worst].relative_drift)) {
                out.worst = idx;
            }
        }
    }
    return out;
}

std::string conservation_csv(const ConservationRecord& record, const Trajectory& traj) {
    std::ostringstream os;
    os.precision(17);
    os << "t,current_value\n";
    for (Eigen::Index k = 0; k < record.values.size() && k < traj.nodes(); ++k)
        os << traj.t(k) << ',' << record.values(k) << '\n';
    return os.str();
}

}  // namespace noether
