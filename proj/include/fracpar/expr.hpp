#pragma once

#include <memory>
#include <string>
#include <vector>

namespace fracpar {

/// Small arithmetic expression over the spatial coordinates.
/// Grammar: numbers, x (same as x1), x1..x9, pi, + - * / ^, unary minus,
/// parentheses and the functions sin cos tan exp log sqrt abs tanh.
class expression {
public:
    explicit expression(const std::string& text);
    double operator()(const std::vector<double>& x) const;
    const std::string& text() const noexcept { return text_; }
    /// Largest coordinate index referenced (0 when constant).
    int max_variable() const noexcept;

    struct node;

private:
    std::string text_;
    std::shared_ptr<const node> root_;
};

}  // namespace fracpar
