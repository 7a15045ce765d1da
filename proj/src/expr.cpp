#include "fracpar/expr.hpp"

#include <cctype>
#include <cmath>
#include <functional>

#include "fracpar/error.hpp"
#include "fracpar/types.hpp"

namespace fracpar {

struct expression::node {
    enum kind { number, variable, unary_minus, binary, call } k;
    double value = 0.0;
    int var = 0;
    char op = 0;
    std::string fn;
    std::shared_ptr<const node> a, b;

    double eval(const std::vector<double>& x) const {
        switch (k) {
            case number: return value;
            case variable:
                if (var < 1 || static_cast<std::size_t>(var) > x.size())
                    throw config_error("expression: coordinate x" + std::to_string(var) +
                                       " not available in this dimension");
                return x[var - 1];
            case unary_minus: return -a->eval(x);
            case binary: {
                const double l = a->eval(x), r = b->eval(x);
                switch (op) {
                    case '+': return l + r;
                    case '-': return l - r;
                    case '*': return l * r;
                    case '/': return l / r;
                    case '^': return std::pow(l, r);
                }
                return 0.0;
            }
            case call: {
                const double v = a->eval(x);
                if (fn == "sin") return std::sin(v);
                if (fn == "cos") return std::cos(v);
                if (fn == "tan") return std::tan(v);
                if (fn == "exp") return std::exp(v);
                if (fn == "log") return std::log(v);
                if (fn == "sqrt") return std::sqrt(v);
                if (fn == "abs") return std::abs(v);
                if (fn == "tanh") return std::tanh(v);
                return 0.0;
            }
        }
        return 0.0;
    }
    int max_var() const {
        int m = (k == variable) ? var : 0;
        if (a) m = std::max(m, a->max_var());
        if (b) m = std::max(m, b->max_var());
        return m;
    }
};

namespace {

using node_ptr = std::shared_ptr<const expression::node>;

class parser {
public:
    explicit parser(const std::string& s) : s_(s) {}

    node_ptr parse() {
        node_ptr n = sum();
        skip();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw config_error("expression '" + s_ + "': " + why + " at position " + std::to_string(pos_));
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    static node_ptr make_binary(char op, node_ptr l, node_ptr r) {
        auto n = std::make_shared<expression::node>();
        n->k = expression::node::binary;
        n->op = op;
        n->a = std::move(l);
        n->b = std::move(r);
        return n;
    }
    node_ptr sum() {
        node_ptr l = product();
        for (;;) {
            if (eat('+')) l = make_binary('+', l, product());
            else if (eat('-')) l = make_binary('-', l, product());
            else return l;
        }
    }
    node_ptr product() {
        node_ptr l = unary();
        for (;;) {
            if (eat('*')) l = make_binary('*', l, unary());
            else if (eat('/')) l = make_binary('/', l, unary());
            else return l;
        }
    }
    node_ptr unary() {
        if (eat('-')) {
            auto n = std::make_shared<expression::node>();
            n->k = expression::node::unary_minus;
            n->a = unary();
            return n;
        }
        if (eat('+')) return unary();
        return power();
    }
    node_ptr power() {
        node_ptr base = primary();
        if (eat('^')) return make_binary('^', base, unary());  // right associative
        return base;
    }
    node_ptr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        if (eat('(')) {
            node_ptr n = sum();
            if (!eat(')')) fail("missing ')'");
            return n;
        }
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(s_.substr(pos_), &used);
            } catch (const std::exception&) {
                fail("bad number");
            }
            pos_ += used;
            auto n = std::make_shared<expression::node>();
            n->k = expression::node::number;
            n->value = v;
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            const std::string id = s_.substr(start, pos_ - start);
            auto n = std::make_shared<expression::node>();
            if (id == "pi") {
                n->k = expression::node::number;
                n->value = pi;
                return n;
            }
            if (id == "x") {
                n->k = expression::node::variable;
                n->var = 1;
                return n;
            }
            if (id.size() == 2 && id[0] == 'x' && std::isdigit(static_cast<unsigned char>(id[1])) && id[1] != '0') {
                n->k = expression::node::variable;
                n->var = id[1] - '0';
                return n;
            }
            static const char* fns[] = {"sin", "cos", "tan", "exp", "log", "sqrt", "abs", "tanh"};
            for (const char* f : fns) {
                if (id == f) {
                    if (!eat('(')) fail("expected '(' after " + id);
                    n->k = expression::node::call;
                    n->fn = id;
                    n->a = sum();
                    if (!eat(')')) fail("missing ')'");
                    return n;
                }
            }
            pos_ = start;
            fail("unknown identifier '" + id + "'");
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

}  // namespace

expression::expression(const std::string& text) : text_(text) {
    parser p(text_);
    root_ = p.parse();
}

double expression::operator()(const std::vector<double>& x) const { return root_->eval(x); }

int expression::max_variable() const noexcept { return root_->max_var(); }

}  // namespace fracpar
