#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <ostream>
#include <stdexcept>
#include <string>

namespace dirc::sos {

using Rational = boost::multiprecision::cpp_rational;

/// p + q√3 with exact rational p, q.
class QuadExt {
public:
    QuadExt() = default;
    QuadExt(Rational p, Rational q = 0) : p_(std::move(p)), q_(std::move(q)) {}
    QuadExt(int p) : p_(p) {}

    static QuadExt sqrt3() { return {0, 1}; }

    const Rational& rational_part() const { return p_; }
    const Rational& sqrt3_part() const { return q_; }

    bool is_zero() const { return p_ == 0 && q_ == 0; }

    QuadExt operator-() const { return {-p_, -q_}; }
    QuadExt& operator+=(const QuadExt& o) {
        p_ += o.p_;
        q_ += o.q_;
        return *this;
    }
    QuadExt& operator-=(const QuadExt& o) {
        p_ -= o.p_;
        q_ -= o.q_;
        return *this;
    }
    QuadExt& operator*=(const QuadExt& o) {
        Rational p = p_ * o.p_ + 3 * q_ * o.q_;
        q_ = p_ * o.q_ + q_ * o.p_;
        p_ = std::move(p);
        return *this;
    }
    /// Conjugate p − q√3.
    QuadExt conjugate() const { return {p_, -q_}; }
    /// p² − 3q², nonzero for every nonzero element since √3 is irrational.
    Rational norm() const { return p_ * p_ - 3 * q_ * q_; }

    QuadExt inverse() const {
        if (is_zero()) throw std::domain_error("QuadExt: division by zero");
        const Rational n = norm();
        return {p_ / n, -q_ / n};
    }
    QuadExt& operator/=(const QuadExt& o) { return *this *= o.inverse(); }

    friend QuadExt operator+(QuadExt a, const QuadExt& b) { return a += b; }
    friend QuadExt operator-(QuadExt a, const QuadExt& b) { return a -= b; }
    friend QuadExt operator*(QuadExt a, const QuadExt& b) { return a *= b; }
    friend QuadExt operator/(QuadExt a, const QuadExt& b) { return a /= b; }
    friend bool operator==(const QuadExt& a, const QuadExt& b) { return a.p_ == b.p_ && a.q_ == b.q_; }

    double to_double() const { return p_.convert_to<double>() + q_.convert_to<double>() * 1.7320508075688772; }

    std::string to_string() const {
        if (q_ == 0) return p_.str();
        std::string s = p_ == 0 ? "" : p_.str() + (q_ > 0 ? " + " : " - ");
        const Rational a = p_ == 0 ? q_ : abs(q_);
        if (a == 1) s += "√3";
        else if (a == -1) s += "-√3";
        else s += "(" + a.str() + ")√3";
        return s;
    }

    friend std::ostream& operator<<(std::ostream& os, const QuadExt& x) { return os << x.to_string(); }

private:
    Rational p_ = 0;
    Rational q_ = 0;
};

}  // namespace dirc::sos
