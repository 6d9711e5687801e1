#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "noether/extremal.hpp"
#include "noether/problem.hpp"
#include "noether/symmetry.hpp"

namespace noether {

// Malformed or inconsistent input document. `field` names the offending key.
class DocumentError : public std::runtime_error {
public:
    DocumentError(std::string field, const std::string& message)
        : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

// Problem document (JSON):
//   { "name": "...", "n": 1, "r": 1, "a": 0, "b": 1, "L": "1", "phi": ["u1"],
//     "omega": [ { "lower": -1, "upper": 1, "lower_open": true, "upper_open": true } ] }
// Infinite bounds are null, "inf" or "-inf". Expressions may use t, x<i>, u<j>.
OcpProblem problem_from_json(const nlohmann::json& doc);

// Symmetry document (JSON):
//   { "k": 1, "m": 2, "T": "p1 + t", "X": ["(dp1 + 1)^2 * x1"],
//     "U": ["2 * ddp1 * x1 + (dp1 + 1) * u1"], "F": "p1", "lambda": [[0, 0, 0]] }
// F defaults to 0 and lambda to zeros. The result is not yet checked for the
// identity-at-zero property; see make_gauge_symmetry.
GaugeSymmetry symmetry_from_json(const nlohmann::json& doc, const OcpProblem& problem);

struct TrajectorySeed {
    std::string name;
    ControlLaw law;
    Eigen::VectorXd x0;
    double psi0 = -1.0;
    Eigen::VectorXd psi_a;
};

// Trajectory-spec document (JSON):
//   { "steps": 1000,
//     "trajectories": [
//       { "name": "a", "x0": [0.5], "psi0": -1, "psi_a": [0],
//         "law": { "type": "piecewise", "breakpoints": [0.5], "values": [[0.3], [-0.6]] } },
//       { "name": "b", "x0": [0], "psi0": -1, "psi_a": [1],
//         "law": { "type": "feedback", "u": ["psi1"] } } ] }
struct TrajectorySpec {
    std::optional<int> steps;
    std::vector<TrajectorySeed> trajectories;
};

TrajectorySpec trajectory_spec_from_json(const nlohmann::json& doc, const OcpProblem& problem);

nlohmann::json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string fnv1a_digest(const std::string& bytes);

}  // namespace noether
