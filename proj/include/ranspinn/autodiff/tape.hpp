#pragma once

// Reverse-mode accumulation over scalars.
//
// A ParamTape records every elementary operation on Var as a node with at most
// two parents and the local partial derivatives. The first `n` leaves created
// by register_params() are the parameters; backward() writes d(output)/d(param)
// into a gradient buffer aligned with them. Var operations compose with Jet2,
// so Jet2<Var> records spatial derivatives on the tape and a loss containing
// d2u/dx2 can be differentiated with respect to the network parameters.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ranspinn/autodiff/jet2.hpp"
#include "ranspinn/common/error.hpp"

namespace ranspinn::ad {

class ParamTape;

/// A tape-tracked scalar. Vars without a tape are constants.
class Var {
public:
    static constexpr std::uint32_t kConstant = std::numeric_limits<std::uint32_t>::max();

    Var() = default;
    Var(double v) : value_(v) {}  // NOLINT: constants lift implicitly

    double value() const noexcept { return value_; }
    bool is_constant() const noexcept { return index_ == kConstant; }
    std::uint32_t index() const noexcept { return index_; }
    ParamTape* tape() const noexcept { return tape_; }

private:
    friend class ParamTape;
    Var(double v, std::uint32_t index, ParamTape* tape) : value_(v), index_(index), tape_(tape) {}

    double value_ = 0.0;
    std::uint32_t index_ = kConstant;
    ParamTape* tape_ = nullptr;
};

inline double primal(const Var& v) noexcept { return v.value(); }

class ParamTape {
public:
    ParamTape() = default;
    ParamTape(const ParamTape&) = delete;
    ParamTape& operator=(const ParamTape&) = delete;

    /// Clears all nodes and the gradient buffer. Capacity is kept.
    void reset() {
        nodes_.clear();
        gradient_.clear();
        n_params_ = 0;
        replayed_ = false;
    }

    /// Registers parameter leaves. Must be called once, before any other node is recorded.
    std::vector<Var> register_params(std::span<const double> values) {
        if (!nodes_.empty()) throw TapeError("register_params: tape already holds nodes; call reset() first");
        n_params_ = values.size();
        gradient_.assign(n_params_, 0.0);
        std::vector<Var> vars;
        vars.reserve(values.size());
        for (double v : values) vars.push_back(push_node(v, Var::kConstant, 0.0, Var::kConstant, 0.0));
        return vars;
    }

    std::size_t parameter_count() const noexcept { return n_params_; }
    std::size_t node_count() const noexcept { return nodes_.size(); }

    /// Reverse sweep from `output`. A second call without reset() is an error.
    void backward(const Var& output) {
        if (replayed_) throw TapeError("backward: tape already replayed; reset() before accumulating again");
        replayed_ = true;
        std::fill(gradient_.begin(), gradient_.end(), 0.0);
        if (output.is_constant()) return;
        if (output.tape() != this) throw TapeError("backward: output belongs to another tape");
        adjoint_.assign(nodes_.size(), 0.0);
        adjoint_[output.index()] = 1.0;
        for (std::size_t i = output.index() + 1; i-- > 0;) {
            const double a = adjoint_[i];
            if (a == 0.0) continue;
            const Node& n = nodes_[i];
            if (n.parent[0] != Var::kConstant) adjoint_[n.parent[0]] += a * n.partial[0];
            if (n.parent[1] != Var::kConstant) adjoint_[n.parent[1]] += a * n.partial[1];
        }
        for (std::size_t i = 0; i < n_params_; ++i) gradient_[i] = adjoint_[i];
    }

    std::span<const double> gradient() const noexcept { return gradient_; }

    // Node construction, used by the Var operators below.
    Var unary(const Var& a, double value, double da) {
        if (a.is_constant()) return Var(value);
        return push_node(value, a.index(), da, Var::kConstant, 0.0);
    }

    Var binary(const Var& a, const Var& b, double value, double da, double db) {
        if (a.is_constant()) return unary(b, value, db);
        if (b.is_constant()) return unary(a, value, da);
        return push_node(value, a.index(), da, b.index(), db);
    }

private:
    struct Node {
        std::array<std::uint32_t, 2> parent;
        std::array<double, 2> partial;
    };

    Var push_node(double value, std::uint32_t p0, double d0, std::uint32_t p1, double d1) {
        if (nodes_.size() >= Var::kConstant) throw TapeError("tape overflow");
        nodes_.push_back(Node{{p0, p1}, {d0, d1}});
        return Var(value, static_cast<std::uint32_t>(nodes_.size() - 1), this);
    }

    std::vector<Node> nodes_;
    std::vector<double> adjoint_;
    std::vector<double> gradient_;
    std::size_t n_params_ = 0;
    bool replayed_ = false;
};

namespace detail {
inline ParamTape* tape_of(const Var& a, const Var& b) {
    ParamTape* t = a.tape() ? a.tape() : b.tape();
    if (a.tape() && b.tape() && a.tape() != b.tape()) throw TapeError("operands recorded on different tapes");
    return t;
}
}  // namespace detail

inline Var operator+(const Var& a, const Var& b) {
    ParamTape* t = detail::tape_of(a, b);
    const double v = a.value() + b.value();
    return t ? t->binary(a, b, v, 1.0, 1.0) : Var(v);
}

inline Var operator-(const Var& a, const Var& b) {
    ParamTape* t = detail::tape_of(a, b);
    const double v = a.value() - b.value();
    return t ? t->binary(a, b, v, 1.0, -1.0) : Var(v);
}

inline Var operator*(const Var& a, const Var& b) {
    ParamTape* t = detail::tape_of(a, b);
    const double v = a.value() * b.value();
    return t ? t->binary(a, b, v, b.value(), a.value()) : Var(v);
}

inline Var operator/(const Var& a, const Var& b) {
    if (b.value() == 0.0) throw DomainError("div: division by zero");
    ParamTape* t = detail::tape_of(a, b);
    const double r = 1.0 / b.value();
    const double v = a.value() / b.value();
    return t ? t->binary(a, b, v, r, -v * r) : Var(v);
}

inline Var operator-(const Var& a) {
    return a.tape() ? a.tape()->unary(a, -a.value(), -1.0) : Var(-a.value());
}

inline Var operator+(const Var& a, double c) { return a + Var(c); }
inline Var operator+(double c, const Var& a) { return Var(c) + a; }
inline Var operator-(const Var& a, double c) { return a - Var(c); }
inline Var operator-(double c, const Var& a) { return Var(c) - a; }
inline Var operator*(const Var& a, double c) { return a * Var(c); }
inline Var operator*(double c, const Var& a) { return Var(c) * a; }
inline Var operator/(const Var& a, double c) { return a / Var(c); }
inline Var operator/(double c, const Var& a) { return Var(c) / a; }

inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }

namespace detail {
inline Var lift(const Var& a, double value, double da) {
    return a.tape() ? a.tape()->unary(a, value, da) : Var(value);
}
}  // namespace detail

inline Var tanh(const Var& a) {
    const double s = std::tanh(a.value());
    return detail::lift(a, s, 1.0 - s * s);
}

inline Var exp(const Var& a) {
    const double e = std::exp(a.value());
    if (!std::isfinite(e)) throw DomainError("exp: result is not finite");
    return detail::lift(a, e, e);
}

inline Var log(const Var& a) {
    if (!(a.value() > 0.0)) throw DomainError("ln: argument must be positive");
    return detail::lift(a, std::log(a.value()), 1.0 / a.value());
}

inline Var sqrt(const Var& a) {
    if (!(a.value() > 0.0)) throw DomainError("sqrt: argument must be positive");
    const double s = std::sqrt(a.value());
    return detail::lift(a, s, 0.5 / s);
}

inline Var pow(const Var& a, double p) {
    const double v = a.value();
    if (std::floor(p) != p && !(v > 0.0)) throw DomainError("pow: non-integer power of a nonpositive value");
    const double f = std::pow(v, p);
    if (!std::isfinite(f)) throw DomainError("pow: result is not finite");
    return detail::lift(a, f, p * std::pow(v, p - 1.0));
}

inline Var sin(const Var& a) { return detail::lift(a, std::sin(a.value()), std::cos(a.value())); }
inline Var cos(const Var& a) { return detail::lift(a, std::cos(a.value()), -std::sin(a.value())); }

inline Var softplus(const Var& a) {
    const double v = a.value();
    const double sig = v > 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    return detail::lift(a, ad::softplus(v), sig);
}

inline bool isfinite(const Var& a) { return std::isfinite(a.value()); }

/// One named contribution to a scalar loss.
struct LossTerm {
    std::string name;
    Var value;
};

/// Gradient of sum(terms(params)) with respect to params.
/// Throws NonFiniteError naming the first non-finite term.
inline std::vector<double> loss_gradient(std::span<const double> params,
                                         const std::function<std::vector<LossTerm>(std::span<const Var>)>& terms) {
    ParamTape tape;
    const std::vector<Var> vars = tape.register_params(params);
    const std::vector<LossTerm> parts = terms(vars);
    Var total(0.0);
    for (const LossTerm& term : parts) {
        if (!std::isfinite(term.value.value()))
            throw NonFiniteError("loss_gradient: term '" + term.name + "' is not finite");
        total = total + term.value;
    }
    tape.backward(total);
    const auto g = tape.gradient();
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!std::isfinite(g[i])) throw NonFiniteError("loss_gradient: gradient entry " + std::to_string(i) + " is not finite");
    return {g.begin(), g.end()};
}

/// Single-term convenience overload.
inline std::vector<double> loss_gradient(std::span<const double> params,
                                         const std::function<Var(std::span<const Var>)>& loss) {
    return loss_gradient(params, std::function<std::vector<LossTerm>(std::span<const Var>)>(
                                     [&](std::span<const Var> p) { return std::vector<LossTerm>{{"loss", loss(p)}}; }));
}

}  // namespace ranspinn::ad
