#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "condaj/estimators.hpp"

namespace condaj {

struct InfluenceCurve {
    std::size_t subject = 0;
    StepCurve curve;
};

// Plug-in influence curve of the (j, k) cumulative hazard for one subject,
// on the hazard's event grid:
//   sqrt(phi) * sum_{s <= t} [ (dN^l_jk(s) - dN_jk(s)) / (I_j(s-) v eps)
//       - 1{I_j(s-) > eps} (Y^l_j(s) - I_j(s-)) / I_j(s-) * dLambda_jk(s) ]
// with Y^l_j(s) = 1{s <= R^l} 1{Z^l_{s-} = j}.
InfluenceCurve influence_zeta(const Sample& sample, const WeightVector& w, const HazardEstimate& hazard,
                              double phi, std::size_t subject, std::size_t j, std::size_t k);

// All (j, k) influence curves of one subject at once. Jumps hold the
// increments of each curve; the diagonal follows the generator convention
// (minus the off-diagonal row sum).
StepMatrix influence_zeta_matrix(const Sample& sample, const HazardEstimate& hazard, double phi,
                                 std::size_t subject);

// Occupation-probability influence curves (one per state) for the subject
// whose zeta increments are given:
//   gamma(t) = I(0) sum_{s <= t} P(0, s-) dZeta(s) P(s, t),
// evaluated by the recursion gamma(t_m) = gamma(t_{m-1})(Id + dLambda(t_m))
// + p(t_{m-1}) dZeta(t_m).
std::vector<InfluenceCurve> influence_gamma(const HazardEstimate& hazard, const OccupationEstimate& occupation,
                                            const StepMatrix& zeta, std::size_t subject);

struct CovarianceSurface {
    std::vector<double> grid;
    Matrix values;  // symmetric, values(a, b) = Sigma(grid[a], grid[b])
};

// Sigma(s, t) = sum_l w_l c_l(s) c_l(t) over the given subjects' curves.
CovarianceSurface cov_hazard(const std::vector<InfluenceCurve>& influences, const WeightVector& w,
                             const std::vector<double>& grid);
CovarianceSurface cov_occupation(const std::vector<InfluenceCurve>& influences, const WeightVector& w,
                                 const std::vector<double>& grid);

// m equispaced quantiles (i/m, i = 1..m) of the grid times not beyond theta.
std::vector<double> quantile_grid(const std::vector<double>& times, double theta, std::size_t m);

struct CovarianceResult {
    std::vector<double> grid;
    double phi = 0.0;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // state indices (j, k)
    std::vector<CovarianceSurface> hazard;                    // aligned with pairs
    std::vector<CovarianceSurface> occupation;                // one per state
};

// Surfaces for every transition type with positive kernel-weighted count,
// and for every state. Only subjects with positive weight contribute.
CovarianceResult covariance(const Sample& sample, const ConditionalFit& fit, const KernelSpec& spec,
                            std::size_t grid_size = 50);

}  // namespace condaj
