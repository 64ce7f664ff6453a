#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace condaj {

// Right-continuous piecewise-constant curve on [0, inf). values[i] is held
// on [times[i], times[i+1]); initial_value on [0, times[0]).
class StepCurve {
public:
    StepCurve() = default;
    StepCurve(std::vector<double> times, std::vector<double> values, double initial_value);

    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& values() const { return values_; }
    double initial_value() const { return initial_; }
    std::size_t size() const { return times_.size(); }

    double at(double t) const;
    // Left limit at t, i.e. the value held just before t.
    double before(double t) const;
    // Value held just before the i-th grid time.
    double before_index(std::size_t i) const { return i == 0 ? initial_ : values_[i - 1]; }

private:
    std::vector<double> times_;
    std::vector<double> values_;
    double initial_ = 0.0;
};

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

// Square-matrix-valued step function starting at 0 on [0, times[0]).
// Stores the jump at each grid time and the running sum.
class StepMatrix {
public:
    StepMatrix() = default;
    StepMatrix(std::vector<double> times, std::size_t states);

    const std::vector<double>& times() const { return times_; }
    std::size_t size() const { return times_.size(); }
    std::size_t states() const { return states_; }

    double& jump(std::size_t i, std::size_t j, std::size_t k) { return jumps_[offset(i, j, k)]; }
    double jump(std::size_t i, std::size_t j, std::size_t k) const { return jumps_[offset(i, j, k)]; }
    double cumulative(std::size_t i, std::size_t j, std::size_t k) const { return cumulative_[offset(i, j, k)]; }

    Matrix jump_matrix(std::size_t i) const;
    Matrix value(double t) const;
    double value(double t, std::size_t j, std::size_t k) const;

    // Off-diagonal (j, k) as a StepCurve.
    StepCurve entry(std::size_t j, std::size_t k) const;

    // Rebuild running sums from jumps; call after filling jumps.
    void accumulate();
    // Set each diagonal jump to minus its off-diagonal row sum, then accumulate.
    void set_generator_diagonal();

    // Index of the last grid time <= t, or -1.
    std::ptrdiff_t index_at(double t) const;

private:
    std::size_t offset(std::size_t i, std::size_t j, std::size_t k) const {
        return (i * states_ + j) * states_ + k;
    }

    std::vector<double> times_;
    std::size_t states_ = 0;
    std::vector<double> jumps_;
    std::vector<double> cumulative_;
};

}  // namespace condaj
