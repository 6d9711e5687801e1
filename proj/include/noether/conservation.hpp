#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "noether/currents.hpp"
#include "noether/extremal.hpp"

namespace noether {

// Values of one current along one trajectory. `mean` is the measured
// conservation-law constant; drift is measured against it.
struct ConservationRecord {
    int i = 0;
    int j = 1;
    std::string trajectory;
    Eigen::VectorXd values;
    double mean = 0.0;
    double drift = 0.0;           // max |value - mean|
    double relative_drift = 0.0;  // drift / (1 + |mean|)
    double tolerance = 0.0;
    bool conserved = false;
    std::string error;
    Eigen::Index error_node = -1;
};

// max(1e-8, 100 h^4): tied to the RK4 order.
double default_conservation_tolerance(double h);

ConservationRecord evaluate_current_along(const NoetherCurrent& current, const Trajectory& traj,
                                          std::optional<double> tolerance = std::nullopt);

struct ConservationSummary {
    std::vector<ConservationRecord> records;
    std::vector<std::string> warnings;
    std::optional<std::size_t> worst;  // index of the largest relative drift
    bool pass = true;
};

// Every current against every trajectory. Per-pair errors are recorded, not thrown.
ConservationSummary conservation_suite(std::span<const NoetherCurrent> currents, std::span<const Trajectory> trajectories,
                                       std::optional<double> tolerance = std::nullopt);

// Header t, current_value.
std::string conservation_csv(const ConservationRecord& record, const Trajectory& traj);

}  // namespace noether
