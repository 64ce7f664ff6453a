#include "condaj/step.hpp"

#include <algorithm>
#include <stdexcept>

namespace condaj {

StepCurve::StepCurve(std::vector<double> times, std::vector<double> values, double initial_value)
    : times_(std::move(times)), values_(std::move(values)), initial_(initial_value) {
    if (times_.size() != values_.size()) throw std::invalid_argument("StepCurve: times/values size mismatch");
}

double StepCurve::at(double t) const {
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) return initial_;
    return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

double StepCurve::before(double t) const {
    auto it = std::lower_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) return initial_;
    return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

StepMatrix::StepMatrix(std::vector<double> times, std::size_t states)
    : times_(std::move(times)),
      states_(states),
      jumps_(times_.size() * states * states, 0.0),
      cumulative_(times_.size() * states * states, 0.0) {}

Matrix StepMatrix::jump_matrix(std::size_t i) const {
    Matrix m(states_, states_);
    for (std::size_t j = 0; j < states_; ++j)
        for (std::size_t k = 0; k < states_; ++k) m(j, k) = jump(i, j, k);
    return m;
}

std::ptrdiff_t StepMatrix::index_at(double t) const {
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    return static_cast<std::ptrdiff_t>(it - times_.begin()) - 1;
}

Matrix StepMatrix::value(double t) const {
    Matrix m = Matrix::Zero(states_, states_);
    auto i = index_at(t);
    if (i < 0) return m;
    for (std::size_t j = 0; j < states_; ++j)
        for (std::size_t k = 0; k < states_; ++k) m(j, k) = cumulative(static_cast<std::size_t>(i), j, k);
    return m;
}

double StepMatrix::value(double t, std::size_t j, std::size_t k) const {
    auto i = index_at(t);
    return i < 0 ? 0.0 : cumulative(static_cast<std::size_t>(i), j, k);
}

StepCurve StepMatrix::entry(std::size_t j, std::size_t k) const {
    std::vector<double> v(times_.size());
    for (std::size_t i = 0; i < times_.size(); ++i) v[i] = cumulative(i, j, k);
    return StepCurve(times_, std::move(v), 0.0);
}

void StepMatrix::accumulate() {
    const std::size_t block = states_ * states_;
    for (std::size_t i = 0; i < times_.size(); ++i)
        for (std::size_t e = 0; e < block; ++e)
            cumulative_[i * block + e] = jumps_[i * block + e] + (i ? cumulative_[(i - 1) * block + e] : 0.0);
}

void StepMatrix::set_generator_diagonal() {
    for (std::size_t i = 0; i < times_.size(); ++i)
        for (std::size_t j = 0; j < states_; ++j) {
            double row = 0.0;
            for (std::size_t k = 0; k < states_; ++k)
                if (k != j) row += jump(i, j, k);
            jump(i, j, j) = -row;
        }
    accumulate();
}

}  // namespace condaj
