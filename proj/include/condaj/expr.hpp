#pragma once

#include <memory>
#include <span>
#include <string>

namespace condaj {

struct ExprVars {
    double t = 0.0;
    double duration = 0.0;
    std::span<const double> x;
};

// Rate expression over t, duration and covariates x (= x1), x1, x2, ...
// Grammar: numbers, + - * / ^, unary minus, parentheses and the functions
// exp, log, sqrt, abs, min, max, pow.
class Expression {
public:
    Expression() = default;
    static Expression parse(const std::string& text);
    static Expression constant(double value);

    double eval(const ExprVars& vars) const;
    bool uses_time() const { return uses_time_; }
    bool uses_duration() const { return uses_duration_; }
    // Highest covariate index referenced (1-based), 0 if none.
    std::size_t max_covariate() const { return max_covariate_; }
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
    bool uses_time_ = false;
    bool uses_duration_ = false;
    std::size_t max_covariate_ = 0;
};

}  // namespace condaj
