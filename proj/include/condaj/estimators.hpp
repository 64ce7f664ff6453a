#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "condaj/data.hpp"
#include "condaj/kernels.hpp"
#include "condaj/step.hpp"

namespace condaj {

// Sorted union of every observed jump time and censoring time in the sample.
// All kernel-weighted curves live on this grid; subjects with zero weight
// contribute grid points with zero increments.
std::vector<double> event_grid(const Sample& sample);

// Kernel-weighted transition counts, sum_l w_l N^l_jk(t ^ R^l).
StepMatrix estimate_counts(const Sample& sample, const WeightVector& w);
StepMatrix estimate_counts(const Sample& sample, const WeightVector& w, const std::vector<double>& grid);

// Kernel-weighted distribution of (R, Z_R) over censored subjects, per state.
std::vector<StepCurve> estimate_censoring(const Sample& sample, const WeightVector& w);
std::vector<StepCurve> estimate_censoring(const Sample& sample, const WeightVector& w,
                                          const std::vector<double>& grid);

// Weighted initial-state distribution; every subject is observed at 0.
std::vector<double> initial_exposure(const Sample& sample, const WeightVector& w);

// Exposure from the sojourn/transition identity
//   I_j(t) = I_j(0) - C_j(t) + sum_{k != j} (N_kj(t) - N_jk(t)),
// which avoids tracking each subject's at-risk indicator.
std::vector<StepCurve> estimate_exposure(const StepMatrix& counts, const std::vector<StepCurve>& censoring,
                                         const std::vector<double>& initial);

struct HazardEstimate {
    StepMatrix hazard;  // increments dN_jk / max(I_j(t-), eps); diagonal = -row sum
    double epsilon = 0.0;
    std::vector<StepCurve> exposure;
    StepMatrix counts;
    // Per state: grid times where I_j(t-) < eps while state j has a positive
    // outgoing count increment, i.e. where the floor changed the estimate.
    std::vector<std::vector<double>> floor_active;
};

HazardEstimate nelson_aalen(const StepMatrix& counts, std::vector<StepCurve> exposure, double epsilon);
HazardEstimate nelson_aalen(const Sample& sample, const WeightVector& w, double epsilon);
// Throws DegenerateError("no kernel mass at x") when the weights degenerate.
HazardEstimate nelson_aalen(const Sample& sample, const EvalPoint& x, const KernelSpec& spec,
                            const BandwidthSchedule& schedule, double epsilon);

// Ordered product of (Id + dLambda(u)) over grid times u in (s, t].
Matrix product_integral(const StepMatrix& hazard, double s, double t);

struct OccupationEstimate {
    std::vector<StepCurve> occupation;  // one curve per state index
    std::vector<double> initial;

    RowVector at(double t) const;
};

OccupationEstimate aalen_johansen(const StepMatrix& hazard, const std::vector<double>& initial);
OccupationEstimate aalen_johansen(const HazardEstimate& hazard, const std::vector<double>& initial);

struct FitOptions {
    KernelSpec kernel;
    double eta = 0.75;
    std::optional<double> bandwidth;  // overrides the schedule
    double epsilon = 1e-4;
    std::optional<double> theta;      // estimation horizon
};

struct ConditionalFit {
    EvalPoint x;
    double bandwidth = 0.0;
    WeightVector weights;
    std::vector<StepCurve> censoring;
    HazardEstimate hazard;
    OccupationEstimate occupation;
    // Horizon; defaults to the largest censoring time among subjects with
    // positive weight (+inf when none is censored). Values past it are
    // computed but lie outside the range where the estimator is consistent.
    double theta = 0.0;

    std::size_t first_index_beyond_theta() const;
};

ConditionalFit fit(const Sample& sample, const EvalPoint& x, const FitOptions& options);
ConditionalFit fit(const Sample& sample, const EvalPoint& x, const FitOptions& options,
                   const std::vector<double>& grid);

}  // namespace condaj
