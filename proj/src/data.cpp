#include "condaj/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "condaj/error.hpp"
#include "condaj/io.hpp"

namespace condaj {

StateSpace::StateSpace(std::vector<StateLabel> states, std::vector<StateLabel> absorbing)
    : states_(std::move(states)), absorbing_(std::move(absorbing)) {
    std::sort(states_.begin(), states_.end());
    std::sort(absorbing_.begin(), absorbing_.end());
    if (std::adjacent_find(states_.begin(), states_.end()) != states_.end())
        throw ValidationError("state labels must be distinct");
    absorbing_.erase(std::unique(absorbing_.begin(), absorbing_.end()), absorbing_.end());
    if (states_.size() < 2)
        throw ValidationError("state space needs at least 2 states");
    for (StateLabel a : absorbing_)
        if (!contains(a))
            throw ValidationError("absorbing state " + std::to_string(a) + " is not in the state space");
}

bool StateSpace::contains(StateLabel label) const {
    return std::binary_search(states_.begin(), states_.end(), label);
}

bool StateSpace::is_absorbing(StateLabel label) const {
    return std::binary_search(absorbing_.begin(), absorbing_.end(), label);
}

std::size_t StateSpace::index_of(StateLabel label) const {
    auto it = std::lower_bound(states_.begin(), states_.end(), label);
    if (it == states_.end() || *it != label)
        throw ValidationError("unknown state label " + std::to_string(label));
    return static_cast<std::size_t>(it - states_.begin());
}

StateLabel ObservedPath::state_at(double t) const {
    StateLabel s = initial_state;
    for (const Jump& j : jumps) {
        if (j.time > t) break;
        s = j.to_state;
    }
    return s;
}

StateLabel ObservedPath::state_before(double t) const {
    StateLabel s = initial_state;
    for (const Jump& j : jumps) {
        if (j.time >= t) break;
        s = j.to_state;
    }
    return s;
}

std::vector<Transition> counting_increments(const ObservedPath& path) {
    std::vector<Transition> out;
    out.reserve(path.jumps.size());
    StateLabel from = path.initial_state;
    for (const Jump& j : path.jumps) {
        out.push_back({j.time, from, j.to_state});
        from = j.to_state;
    }
    return out;
}

std::vector<std::string> validate(const Sample& sample) {
    std::vector<std::string> issues;
    if (sample.paths.empty()) issues.push_back("sample has no subjects");
    const std::size_t d = sample.dimension();
    const StateSpace& space = sample.state_space;
    for (const ObservedPath& p : sample.paths) {
        const std::string who = "subject '" + p.id + "': ";
        if (p.covariates.size() != d)
            issues.push_back(who + "covariate dimension " + std::to_string(p.covariates.size()) +
                             " differs from " + std::to_string(d));
        for (double c : p.covariates)
            if (!std::isfinite(c)) issues.push_back(who + "non-finite covariate");
        if (!space.contains(p.initial_state))
            issues.push_back(who + "unknown initial state " + std::to_string(p.initial_state));
        if (!(p.end_time > 0.0) || !std::isfinite(p.end_time))
            issues.push_back(who + "end time must be positive and finite");
        StateLabel prev = p.initial_state;
        double prev_time = 0.0;
        for (const Jump& j : p.jumps) {
            if (!(j.time > prev_time))
                issues.push_back(who + "jump times must be positive and strictly increasing (at " +
                                 format_number(j.time) + ")");
            if (j.time > p.end_time)
                issues.push_back(who + "jump at " + format_number(j.time) + " after end time " +
                                 format_number(p.end_time));
            if (j.to_state == prev)
                issues.push_back(who + "jump at " + format_number(j.time) + " does not change state");
            if (!space.contains(j.to_state))
                issues.push_back(who + "unknown state " + std::to_string(j.to_state));
            prev = j.to_state;
            prev_time = j.time;
        }
        if (p.end_reason == EndReason::absorbed) {
            if (!space.is_absorbing(p.final_state()))
                issues.push_back(who + "absorbed in non-absorbing state " + std::to_string(p.final_state()));
            if (p.jumps.empty() || p.jumps.back().time != p.end_time)
                issues.push_back(who + "absorbed path must end at its final jump");
        }
    }
    return issues;
}

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(trim(field));
            field.clear();
        } else {
            field += c;
        }
    }
    out.push_back(trim(field));
    return out;
}

double parse_double(const std::string& s, std::size_t line, const std::string& column) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw ParseError("line " + std::to_string(line) + ": bad number '" + s + "' in column " + column);
    return v;
}

int parse_int(const std::string& s, std::size_t line, const std::string& column) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError("line " + std::to_string(line) + ": bad integer '" + s + "' in column " + column);
    return v;
}

std::vector<int> parse_label_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!trim(item).empty()) out.push_back(parse_int(trim(item), 0, "state list"));
    return out;
}

struct Row {
    std::size_t line;
    double time;
    StateLabel state;
    std::optional<int> end;
    std::vector<std::optional<double>> covariates;
};

}  // namespace

Sample parse_sample(const std::string& text, const CsvSchema& schema) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::vector<StateLabel>> declared_states, declared_absorbing;

    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '#') {
            // "# states=1,2,3 absorbing=3"
            std::istringstream meta(t.substr(1));
            std::string tok;
            while (meta >> tok) {
                auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                auto key = tok.substr(0, eq), val = tok.substr(eq + 1);
                if (key == "states") declared_states = parse_label_list(val);
                else if (key == "absorbing") declared_absorbing = parse_label_list(val);
            }
            continue;
        }
        header = split_csv(t);
        break;
    }
    if (header.empty()) throw ValidationError("no subjects");

    auto find_col = [&](const std::string& name) -> std::optional<std::size_t> {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - header.begin());
    };
    auto require_col = [&](const std::string& name) {
        auto c = find_col(name);
        if (!c) throw ParseError("line " + std::to_string(line_no) + ": missing column '" + name + "'");
        return *c;
    };
    const std::size_t id_col = require_col(schema.id_column);
    const std::size_t time_col = require_col(schema.time_column);
    const std::size_t state_col = require_col(schema.state_column);
    const std::size_t end_col = require_col(schema.end_column);
    std::vector<std::size_t> cov_cols;
    for (std::size_t i = 1;; ++i) {
        auto c = find_col(schema.covariate_prefix + std::to_string(i));
        if (!c) break;
        cov_cols.push_back(*c);
    }

    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<Row>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto fields = split_csv(t);
        if (fields.size() != header.size())
            throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                             " fields, got " + std::to_string(fields.size()));
        Row r;
        r.line = line_no;
        const std::string& id = fields[id_col];
        if (id.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty id");
        r.time = parse_double(fields[time_col], line_no, schema.time_column);
        r.state = parse_int(fields[state_col], line_no, schema.state_column);
        if (!fields[end_col].empty()) {
            int e = parse_int(fields[end_col], line_no, schema.end_column);
            if (e != 0 && e != 1)
                throw ParseError("line " + std::to_string(line_no) + ": end flag must be 0 or 1");
            r.end = e;
        }
        for (std::size_t c : cov_cols) {
            if (fields[c].empty()) r.covariates.emplace_back();
            else r.covariates.emplace_back(parse_double(fields[c], line_no, header[c]));
        }
        auto [it, inserted] = rows.try_emplace(id);
        if (inserted) order.push_back(id);
        it->second.push_back(std::move(r));
    }
    if (order.empty()) throw ValidationError("no subjects");

    Sample sample;
    std::set<StateLabel> seen, absorbed_in;
    for (const std::string& id : order) {
        auto& rs = rows[id];
        std::stable_sort(rs.begin(), rs.end(), [](const Row& a, const Row& b) { return a.time < b.time; });
        for (std::size_t i = 1; i < rs.size(); ++i)
            if (rs[i].time == rs[i - 1].time)
                throw ValidationError("subject '" + id + "': duplicate rows at time " + format_number(rs[i].time));
        if (rs.front().time != 0.0)
            throw ValidationError("subject '" + id + "': first row must be at time 0");
        for (std::size_t i = 0; i + 1 < rs.size(); ++i)
            if (rs[i].end.value_or(0) == 1)
                throw ValidationError("subject '" + id + "': censoring flag on a non-terminal row (line " +
                                      std::to_string(rs[i].line) + ")");

        ObservedPath p;
        p.id = id;
        for (std::size_t c = 0; c < cov_cols.size(); ++c) {
            std::optional<double> v;
            for (const Row& r : rs) {
                if (!r.covariates[c]) continue;
                if (v && *v != *r.covariates[c])
                    throw ValidationError("subject '" + id + "': conflicting values for " + header[cov_cols[c]]);
                v = r.covariates[c];
            }
            if (!v) throw ValidationError("subject '" + id + "': missing " + header[cov_cols[c]]);
            p.covariates.push_back(*v);
        }
        p.initial_state = rs.front().state;
        seen.insert(p.initial_state);
        StateLabel current = p.initial_state;
        for (std::size_t i = 1; i < rs.size(); ++i) {
            seen.insert(rs[i].state);
            if (rs[i].state != current) {
                p.jumps.push_back({rs[i].time, rs[i].state});
                current = rs[i].state;
            } else if (i + 1 != rs.size()) {
                throw ValidationError("subject '" + id + "': row at time " + format_number(rs[i].time) +
                                      " repeats the current state");
            }
        }
        const Row& last = rs.back();
        p.end_time = last.time;
        if (last.end.value_or(1) == 1) {
            p.end_reason = EndReason::censored;
        } else {
            p.end_reason = EndReason::absorbed;
            absorbed_in.insert(current);
        }
        if (!(p.end_time > 0.0))
            throw ValidationError("subject '" + id + "': observation must extend past time 0");
        sample.paths.push_back(std::move(p));
    }

    if (schema.state_space) {
        sample.state_space = *schema.state_space;
    } else if (declared_states) {
        sample.state_space = StateSpace(*declared_states, declared_absorbing.value_or(std::vector<StateLabel>{}));
    } else {
        sample.state_space = StateSpace({seen.begin(), seen.end()}, {absorbed_in.begin(), absorbed_in.end()});
    }

    auto issues = validate(sample);
    if (!issues.empty()) throw ValidationError(issues.front());
    return sample;
}

Sample load_sample(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_sample(ss.str(), schema);
}

std::string format_sample(const Sample& sample) {
    std::ostringstream os;
    os << "# states=";
    const auto& states = sample.state_space.states();
    for (std::size_t i = 0; i < states.size(); ++i) os << (i ? "," : "") << states[i];
    os << " absorbing=";
    const auto& abs = sample.state_space.absorbing();
    for (std::size_t i = 0; i < abs.size(); ++i) os << (i ? "," : "") << abs[i];
    os << "\nid,time,state,end";
    const std::size_t d = sample.dimension();
    for (std::size_t i = 1; i <= d; ++i) os << ",x" << i;
    os << '\n';

    for (const ObservedPath& p : sample.paths) {
        auto row = [&](double t, StateLabel s, const char* end, bool first) {
            os << p.id << ',' << format_number(t) << ',' << s << ',' << end;
            for (double c : p.covariates) {
                os << ',';
                if (first) os << format_number(c);
            }
            os << '\n';
        };
        const bool censored = p.end_reason == EndReason::censored;
        const bool end_on_jump = !p.jumps.empty() && p.jumps.back().time == p.end_time;
        row(0.0, p.initial_state, "", true);
        for (std::size_t i = 0; i < p.jumps.size(); ++i) {
            const bool terminal = i + 1 == p.jumps.size() && end_on_jump;
            row(p.jumps[i].time, p.jumps[i].to_state, terminal ? (censored ? "1" : "0") : "", false);
        }
        if (!end_on_jump) row(p.end_time, p.final_state(), censored ? "1" : "0", false);
    }
    return os.str();
}

void write_sample(const Sample& sample, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << format_sample(sample);
}

}  // namespace condaj
