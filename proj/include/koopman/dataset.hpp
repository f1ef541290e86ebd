#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "koopman/numerics.hpp"

namespace koopman {

/// Uniformly sampled time series. Each field stores one time sample per column.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(double dt, Matrix states, Matrix inputs = {}, Matrix disturbances = {}, double t0 = 0.0);

    double dt() const { return dt_; }
    double t0() const { return t0_; }
    Index length() const { return states_.cols(); }

    Index state_dim() const { return states_.rows(); }
    Index input_dim() const { return inputs_.rows(); }
    Index disturbance_dim() const { return disturbances_.rows(); }
    bool has_inputs() const { return input_dim() > 0; }
    bool has_disturbances() const { return disturbance_dim() > 0; }

    const Matrix& states() const { return states_; }
    const Matrix& inputs() const { return inputs_; }
    const Matrix& disturbances() const { return disturbances_; }

    /// Seed of the input generator, when the trajectory was simulated with one.
    std::optional<std::uint64_t> seed;

private:
    double dt_ = 1.0;
    double t0_ = 0.0;
    Matrix states_;
    Matrix inputs_;
    Matrix disturbances_;
};

/// Aligned snapshot matrices: column j of xp is one step after column j of x.
struct SnapshotPair {
    Matrix x;
    Matrix xp;
    std::vector<Index> col_times;

    Index rows() const { return x.rows(); }
    Index cols() const { return x.cols(); }
};

/// Sliding windows y_{t:t+h} stacked oldest-first.
struct EmbeddedTrajectory {
    Index depth = 1;
    std::shared_ptr<const Trajectory> base;
    Matrix states;
    Matrix inputs;
    Matrix disturbances;

    Index length() const { return states.cols(); }
};

Trajectory load_trajectory(const std::filesystem::path& path);
Trajectory parse_trajectory(std::istream& in);
void save_trajectory(const Trajectory& traj, const std::filesystem::path& path);
void write_trajectory(const Trajectory& traj, std::ostream& out);

/// Plain CSV table with a header row. Used for trajectories and initial conditions.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

CsvTable parse_csv(std::istream& in);

/// Formats a double with 17 significant digits.
std::string format_double(double value);

SnapshotPair snapshot_pairs(const Trajectory& traj, bool augment_inputs = false);
SnapshotPair snapshot_pairs(const EmbeddedTrajectory& traj, bool augment_inputs = false);

EmbeddedTrajectory delay_embed(const Trajectory& traj, Index depth);

/// Stacks pairs from independent trajectories column-wise; never pairs across a boundary.
SnapshotPair concat_pairs(const std::vector<SnapshotPair>& pairs);

/// Observable vector for one time index, in the column layout snapshot_pairs produces.
Vector observable_at(const Trajectory& traj, Index t, bool augment_inputs);
Vector observable_at(const EmbeddedTrajectory& traj, Index t, bool augment_inputs);

}  // namespace koopman
