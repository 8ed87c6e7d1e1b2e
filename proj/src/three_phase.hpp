#pragma once

#include <cmath>

namespace gridfdd {

/// One sample of a three-phase quantity. Units depend on context
/// (volts, amps, per-unit, or a modulation index).
struct ThreePhase {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    double& operator[](int i) { return i == 0 ? a : (i == 1 ? b : c); }
    double operator[](int i) const { return i == 0 ? a : (i == 1 ? b : c); }

    ThreePhase operator+(const ThreePhase& o) const { return {a + o.a, b + o.b, c + o.c}; }
    ThreePhase operator-(const ThreePhase& o) const { return {a - o.a, b - o.b, c - o.c}; }
    ThreePhase operator*(double s) const { return {a * s, b * s, c * s}; }
    ThreePhase& operator+=(const ThreePhase& o) {
        a += o.a; b += o.b; c += o.c;
        return *this;
    }

    bool finite() const {
        return std::isfinite(a) && std::isfinite(b) && std::isfinite(c);
    }

    double norm2() const { return a * a + b * b + c * c; }
};

inline ThreePhase operator*(double s, const ThreePhase& x) { return x * s; }

} // namespace gridfdd
