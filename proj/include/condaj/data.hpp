#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace condaj {

using StateLabel = int;

// Finite state space. Labels are kept sorted so that a label maps to a
// dense index in [0, size()).
class StateSpace {
public:
    StateSpace() = default;
    StateSpace(std::vector<StateLabel> states, std::vector<StateLabel> absorbing);

    std::size_t size() const { return states_.size(); }
    const std::vector<StateLabel>& states() const { return states_; }
    const std::vector<StateLabel>& absorbing() const { return absorbing_; }

    bool contains(StateLabel label) const;
    bool is_absorbing(StateLabel label) const;
    // Throws ValidationError for unknown labels.
    std::size_t index_of(StateLabel label) const;
    StateLabel label_at(std::size_t index) const { return states_.at(index); }

    friend bool operator==(const StateSpace&, const StateSpace&) = default;

private:
    std::vector<StateLabel> states_;
    std::vector<StateLabel> absorbing_;
};

enum class EndReason { censored, absorbed };

struct Jump {
    double time;
    StateLabel to_state;

    friend bool operator==(const Jump&, const Jump&) = default;
};

// One subject: covariates, initial state, observed jumps and the time at
// which observation stopped (censoring R, or absorption tau).
struct ObservedPath {
    std::string id;
    std::vector<double> covariates;
    StateLabel initial_state{};
    std::vector<Jump> jumps;
    double end_time{};
    EndReason end_reason{EndReason::censored};

    // State occupied at time t (right-continuous), ignoring censoring.
    StateLabel state_at(double t) const;
    // State held immediately before t.
    StateLabel state_before(double t) const;
    StateLabel final_state() const { return jumps.empty() ? initial_state : jumps.back().to_state; }

    // Observation window: censored paths stop at end_time, absorbed paths
    // are observed forever (they never leave the absorbing state).
    bool observed_at(double t) const { return end_reason == EndReason::absorbed || t < end_time; }
    // Left limit of observed_at, i.e. 1{t <= R}.
    bool observed_before(double t) const { return end_reason == EndReason::absorbed || t <= end_time; }

    friend bool operator==(const ObservedPath&, const ObservedPath&) = default;
};

struct Sample {
    StateSpace state_space;
    std::vector<ObservedPath> paths;

    std::size_t size() const { return paths.size(); }
    std::size_t dimension() const { return paths.empty() ? 0 : paths.front().covariates.size(); }

    friend bool operator==(const Sample&, const Sample&) = default;
};

struct Transition {
    double time;
    StateLabel from_state;
    StateLabel to_state;

    friend bool operator==(const Transition&, const Transition&) = default;
};

// Column mapping for long-format CSV input. Covariate columns are the ones
// named covariate_prefix followed by 1..d. When state_space is absent it is
// inferred: all observed labels, absorbing = labels ending absorbed paths.
struct CsvSchema {
    std::string id_column = "id";
    std::string time_column = "time";
    std::string state_column = "state";
    std::string end_column = "end";
    std::string covariate_prefix = "x";
    std::optional<StateSpace> state_space;
};

Sample load_sample(const std::filesystem::path& path, const CsvSchema& schema = {});
Sample parse_sample(const std::string& text, const CsvSchema& schema = {});
std::string format_sample(const Sample& sample);
void write_sample(const Sample& sample, const std::filesystem::path& path);

// Empty iff every invariant of the sample and its paths holds.
std::vector<std::string> validate(const Sample& sample);

std::vector<Transition> counting_increments(const ObservedPath& path);

}  // namespace condaj
