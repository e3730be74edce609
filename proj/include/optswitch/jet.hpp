#pragma once

namespace optswitch {

/// Value with first and second derivative in the state variable
struct Jet {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;

    Jet& operator+=(const Jet& o) { v += o.v; d1 += o.d1; d2 += o.d2; return *this; }
    Jet& operator-=(const Jet& o) { v -= o.v; d1 -= o.d1; d2 -= o.d2; return *this; }
    Jet& operator*=(double s) { v *= s; d1 *= s; d2 *= s; return *this; }
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator*(double s, Jet a) { return a *= s; }
inline Jet operator*(Jet a, double s) { return a *= s; }
inline Jet operator-(Jet a) { return a *= -1.0; }

/// Product rule up to second order
inline Jet operator*(const Jet& a, const Jet& b) {
    return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}

inline Jet constant_jet(double c) { return {c, 0.0, 0.0}; }

}  // namespace optswitch
