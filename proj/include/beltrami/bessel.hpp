#pragma once

namespace beltrami::bessel {

/// Spherical Bessel j1(x) = sin x / x^2 - cos x / x (series below |x| < 1e-2).
double j1(double x);
/// Derivative j1'(x) = j0(x) - 2 j1(x) / x.
double j1_prime(double x);

/// j_n(x) / x^n for n = 0..3, smooth through x = 0.
double reduced(int n, double x);

/// First positive root of j1, by bisection on [4, 5] to 1e-14.
double j1_first_root();

} // namespace beltrami::bessel
