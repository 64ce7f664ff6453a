#include "condaj/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "condaj/covariance.hpp"
#include "condaj/error.hpp"
#include "condaj/estimators.hpp"
#include "json.hpp"

namespace condaj {

using ordered_json = nlohmann::ordered_json;

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

ordered_json number_or_null(double v) {
    return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

std::vector<std::pair<std::size_t, std::size_t>> observed_pairs(const ConditionalFit& fit) {
    const StepMatrix& counts = fit.hazard.counts;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (counts.size() == 0) return pairs;
    for (std::size_t j = 0; j < counts.states(); ++j)
        for (std::size_t k = 0; k < counts.states(); ++k)
            if (j != k && counts.cumulative(counts.size() - 1, j, k) > 0.0) pairs.emplace_back(j, k);
    return pairs;
}

// Like ordered_json::dump(1), but numbers carry 17 significant digits.
void dump_json(const ordered_json& j, std::ostringstream& os, int depth) {
    const std::string pad(static_cast<std::size_t>(depth), ' ');
    const std::string inner(static_cast<std::size_t>(depth + 1), ' ');
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (std::isfinite(v)) os << format_number(v);
        else os << "null";
    } else if (j.is_array()) {
        if (j.empty()) {
            os << "[]";
            return;
        }
        os << "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            os << inner;
            dump_json(j[i], os, depth + 1);
            os << (i + 1 < j.size() ? ",\n" : "\n");
        }
        os << pad << ']';
    } else if (j.is_object()) {
        if (j.empty()) {
            os << "{}";
            return;
        }
        os << "{\n";
        std::size_t i = 0;
        for (auto it = j.begin(); it != j.end(); ++it, ++i) {
            os << inner << ordered_json(it.key()).dump() << ": ";
            dump_json(it.value(), os, depth + 1);
            os << (i + 1 < j.size() ? ",\n" : "\n");
        }
        os << pad << '}';
    } else {
        os << j.dump();
    }
}

std::string dump_json(const ordered_json& j) {
    std::ostringstream os;
    dump_json(j, os, 0);
    os << '\n';
    return os.str();
}

}  // namespace

std::string fit_hazard_csv(const ConditionalFit& fit, const StateSpace& states) {
    const StepMatrix& hz = fit.hazard.hazard;
    const StepMatrix& counts = fit.hazard.counts;
    const auto pairs = observed_pairs(fit);
    std::ostringstream os;
    os << "time,quantity,j,k,value\n";
    auto emit = [&](double t, std::ptrdiff_t i) {
        const std::string ts = format_number(t);
        for (auto [j, k] : pairs) {
            const double h = i < 0 ? 0.0 : hz.cumulative(static_cast<std::size_t>(i), j, k);
            os << ts << ",cumulative_hazard," << states.label_at(j) << ',' << states.label_at(k) << ','
               << format_number(h) << '\n';
        }
        for (auto [j, k] : pairs) {
            const double c = i < 0 ? 0.0 : counts.cumulative(static_cast<std::size_t>(i), j, k);
            os << ts << ",count," << states.label_at(j) << ',' << states.label_at(k) << ',' << format_number(c)
               << '\n';
        }
        for (std::size_t j = 0; j < states.size(); ++j) {
            const auto& e = fit.hazard.exposure[j];
            const double v = i < 0 ? e.initial_value() : e.values()[static_cast<std::size_t>(i)];
            os << ts << ",exposure," << states.label_at(j) << ",," << format_number(v) << '\n';
        }
    };
    emit(0.0, -1);
    for (std::size_t i = 0; i < hz.size(); ++i) emit(hz.times()[i], static_cast<std::ptrdiff_t>(i));
    return os.str();
}

std::string fit_occupation_csv(const ConditionalFit& fit, const StateSpace& states) {
    const auto& occ = fit.occupation.occupation;
    std::ostringstream os;
    os << "time,j,value\n";
    for (std::size_t j = 0; j < states.size(); ++j)
        os << "0," << states.label_at(j) << ',' << format_number(occ[j].initial_value()) << '\n';
    const auto& times = fit.hazard.hazard.times();
    for (std::size_t i = 0; i < times.size(); ++i) {
        const std::string ts = format_number(times[i]);
        for (std::size_t j = 0; j < states.size(); ++j)
            os << ts << ',' << states.label_at(j) << ',' << format_number(occ[j].values()[i]) << '\n';
    }
    return os.str();
}

std::string fit_json(const ConditionalFit& fit, const StateSpace& states) {
    ordered_json j;
    j["x"] = fit.x.coords;
    std::vector<bool> flags(fit.x.atom_flags.begin(), fit.x.atom_flags.end());
    j["atom_flags"] = flags;
    j["bandwidth"] = fit.bandwidth;
    j["density"] = fit.weights.density_value;
    j["epsilon"] = fit.hazard.epsilon;
    j["theta"] = number_or_null(fit.theta);
    j["first_index_beyond_theta"] = fit.first_index_beyond_theta();
    j["states"] = states.states();
    j["times"] = fit.hazard.hazard.times();

    auto state_curves = [&](const std::vector<StepCurve>& curves) {
        ordered_json o = ordered_json::array();
        for (std::size_t s = 0; s < curves.size(); ++s)
            o.push_back({{"state", states.label_at(s)},
                         {"initial", curves[s].initial_value()},
                         {"values", curves[s].values()}});
        return o;
    };
    j["occupation"] = state_curves(fit.occupation.occupation);
    j["exposure"] = state_curves(fit.hazard.exposure);
    j["censoring"] = state_curves(fit.censoring);

    ordered_json hazards = ordered_json::array(), counts = ordered_json::array();
    for (auto [a, b] : observed_pairs(fit)) {
        hazards.push_back({{"from", states.label_at(a)},
                           {"to", states.label_at(b)},
                           {"values", fit.hazard.hazard.entry(a, b).values()}});
        counts.push_back({{"from", states.label_at(a)},
                          {"to", states.label_at(b)},
                          {"values", fit.hazard.counts.entry(a, b).values()}});
    }
    j["cumulative_hazard"] = hazards;
    j["counts"] = counts;

    ordered_json floor = ordered_json::array();
    for (std::size_t s = 0; s < fit.hazard.floor_active.size(); ++s)
        floor.push_back({{"state", states.label_at(s)}, {"times", fit.hazard.floor_active[s]}});
    j["floor_active"] = floor;
    return dump_json(j);
}

std::string surface_csv(const CovarianceResult& cov, bool hazard, std::size_t index) {
    const CovarianceSurface& s = hazard ? cov.hazard.at(index) : cov.occupation.at(index);
    std::ostringstream os;
    os << "s,t,value\n";
    for (std::size_t a = 0; a < s.grid.size(); ++a)
        for (std::size_t b = 0; b < s.grid.size(); ++b)
            os << format_number(s.grid[a]) << ',' << format_number(s.grid[b]) << ','
               << format_number(s.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))) << '\n';
    return os.str();
}

std::string covariance_json(const CovarianceResult& cov, const ConditionalFit& fit, const StateSpace& states) {
    ordered_json j;
    j["x"] = fit.x.coords;
    j["bandwidth"] = fit.bandwidth;
    j["density"] = fit.weights.density_value;
    j["phi"] = cov.phi;
    j["epsilon"] = fit.hazard.epsilon;
    j["theta"] = number_or_null(fit.theta);
    j["grid"] = cov.grid;
    auto rows = [](const CovarianceSurface& s) {
        std::vector<std::vector<double>> out(s.grid.size());
        for (std::size_t a = 0; a < s.grid.size(); ++a)
            for (std::size_t b = 0; b < s.grid.size(); ++b)
                out[a].push_back(s.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
        return out;
    };
    ordered_json hz = ordered_json::array();
    for (std::size_t p = 0; p < cov.pairs.size(); ++p)
        hz.push_back({{"from", states.label_at(cov.pairs[p].first)},
                      {"to", states.label_at(cov.pairs[p].second)},
                      {"values", rows(cov.hazard[p])}});
    j["hazard"] = hz;
    ordered_json oc = ordered_json::array();
    for (std::size_t s = 0; s < cov.occupation.size(); ++s)
        oc.push_back({{"state", states.label_at(s)}, {"values", rows(cov.occupation[s])}});
    j["occupation"] = oc;
    return dump_json(j);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace condaj
