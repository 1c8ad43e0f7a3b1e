#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include <gmpxx.h>

#include "error.hpp"

namespace oim {

/// Exactness grade of a probability value, ordered from strongest to weakest.
enum class Grade : std::uint8_t {
    exact_rational,
    exact_quadratic,
    floating,
    monte_carlo,
};

inline const char* grade_name(Grade g) {
    switch (g) {
        case Grade::exact_rational: return "exact-rational";
        case Grade::exact_quadratic: return "exact-quadratic";
        case Grade::floating: return "float";
        case Grade::monte_carlo: return "monte-carlo";
    }
    return "?";
}

inline Grade weaker(Grade a, Grade b) { return a < b ? b : a; }

/// Number of the form a + b*sqrt(5) with a, b rational.  Arithmetic is exact.
class Quad {
public:
    Quad() : a_(0), b_(0) {}
    Quad(int v) : a_(v), b_(0) {}
    Quad(mpq_class a) : a_(std::move(a)), b_(0) {}
    Quad(mpq_class a, mpq_class b) : a_(std::move(a)), b_(std::move(b)) {}

    static Quad sqrt5() { return Quad(mpq_class(0), mpq_class(1)); }
    /// (sqrt(5) - 1) / 2, the reciprocal golden ratio.
    static Quad golden() { return Quad(mpq_class(-1, 2), mpq_class(1, 2)); }

    const mpq_class& rational_part() const { return a_; }
    const mpq_class& surd_part() const { return b_; }
    bool is_rational() const { return b_ == 0; }
    bool is_zero() const { return a_ == 0 && b_ == 0; }

    const mpq_class& as_rational() const {
        if (!is_rational()) throw Error("quadratic value is not rational");
        return a_;
    }

    double to_double() const {
        return a_.get_d() + b_.get_d() * std::sqrt(5.0);
    }

    Quad operator-() const { return Quad(-a_, -b_); }
    Quad operator+(const Quad& o) const { return Quad(a_ + o.a_, b_ + o.b_); }
    Quad operator-(const Quad& o) const { return Quad(a_ - o.a_, b_ - o.b_); }
    Quad operator*(const Quad& o) const {
        return Quad(a_ * o.a_ + 5 * b_ * o.b_, a_ * o.b_ + b_ * o.a_);
    }
    Quad operator/(const Quad& o) const {
        // 1/(c + d*sqrt5) = (c - d*sqrt5) / (c^2 - 5 d^2); the norm is nonzero
        // for nonzero arguments since sqrt5 is irrational.
        mpq_class norm = o.a_ * o.a_ - 5 * o.b_ * o.b_;
        if (norm == 0) throw Error("division by zero in Q(sqrt5)");
        return Quad((a_ * o.a_ - 5 * b_ * o.b_) / norm, (b_ * o.a_ - a_ * o.b_) / norm);
    }
    Quad& operator+=(const Quad& o) { return *this = *this + o; }
    Quad& operator-=(const Quad& o) { return *this = *this - o; }
    Quad& operator*=(const Quad& o) { return *this = *this * o; }
    Quad& operator/=(const Quad& o) { return *this = *this / o; }

    bool operator==(const Quad& o) const { return a_ == o.a_ && b_ == o.b_; }
    bool operator!=(const Quad& o) const { return !(*this == o); }

    /// Sign of the real value a + b*sqrt5, computed exactly.
    int sign() const {
        int sa = sgn(a_), sb = sgn(b_);
        if (sb == 0) return sa;
        if (sa == 0) return sb;
        if (sa == sb) return sa;
        // a and b*sqrt5 have opposite signs: compare a^2 with 5 b^2.
        int cmp = cmp_abs(a_ * a_, 5 * b_ * b_);
        return cmp >= 0 ? (cmp == 0 ? 0 : sa) : sb;
    }

    Quad abs() const { return sign() < 0 ? -*this : *this; }

    Quad pow(unsigned k) const {
        Quad r(1);
        Quad base = *this;
        while (k) {
            if (k & 1) r *= base;
            base *= base;
            k >>= 1;
        }
        return r;
    }

private:
    static int cmp_abs(const mpq_class& x, const mpq_class& y) {
        mpq_class ax = ::abs(x), ay = ::abs(y);
        return cmp(ax, ay);
    }
    mpq_class a_, b_;
};

/// A probability value together with its exactness grade.  Exact grades carry
/// a Quad (rational values have zero surd part); float/monte-carlo grades
/// carry a double with an error bound.
class Prob {
public:
    Prob() : grade_(Grade::exact_rational), exact_(0) {}

    static Prob rational(mpq_class q) {
        Prob p;
        p.grade_ = Grade::exact_rational;
        p.exact_ = Quad(std::move(q));
        return p;
    }
    static Prob quadratic(Quad q) {
        Prob p;
        p.grade_ = q.is_rational() ? Grade::exact_rational : Grade::exact_quadratic;
        p.exact_ = std::move(q);
        return p;
    }
    static Prob approximate(double v, double err, Grade g = Grade::floating) {
        Prob p;
        p.grade_ = g;
        p.approx_ = v;
        p.err_ = err;
        return p;
    }

    Grade grade() const { return grade_; }
    bool is_exact() const { return grade_ <= Grade::exact_quadratic; }
    const Quad& exact() const {
        if (!is_exact()) throw Error("probability value is not exact");
        return exact_;
    }
    double err() const { return is_exact() ? 0.0 : err_; }
    double to_double() const { return is_exact() ? exact_.to_double() : approx_; }

    Prob operator+(const Prob& o) const { return combine(o, exact_ + o.exact_, to_double() + o.to_double()); }
    Prob operator-(const Prob& o) const { return combine(o, exact_ - o.exact_, to_double() - o.to_double()); }
    Prob operator*(const Prob& o) const {
        Prob r = combine(o, exact_ * o.exact_, to_double() * o.to_double());
        if (!r.is_exact())
            r.err_ = err() * std::abs(o.to_double()) + o.err() * std::abs(to_double()) + err() * o.err();
        return r;
    }
    Prob operator/(const Prob& o) const {
        if (is_exact() && o.is_exact()) return quadratic(exact_ / o.exact_);
        Prob r = approximate(to_double() / o.to_double(), 0.0, weaker(grade_, o.grade_));
        double d = std::abs(o.to_double());
        r.err_ = (err() + o.err() * std::abs(r.approx_)) / d;
        return r;
    }

    bool operator==(const Prob& o) const {
        if (is_exact() && o.is_exact()) return exact_ == o.exact_;
        return to_double() == o.to_double();
    }

private:
    Prob combine(const Prob& o, Quad ex, double ap) const {
        Grade g = weaker(grade_, o.grade_);
        if (g <= Grade::exact_quadratic) return quadratic(std::move(ex));
        Prob r = approximate(ap, err_ + o.err_, g);
        return r;
    }
    Grade grade_;
    Quad exact_;
    double approx_ = 0.0;
    double err_ = 0.0;
};

} // namespace oim
