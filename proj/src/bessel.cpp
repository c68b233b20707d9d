#include "beltrami/bessel.hpp"

#include "beltrami/error.hpp"

#include <cmath>

namespace beltrami::bessel {

namespace {

// sum_k (-x^2/2)^k / (k! (2n+2k+1)!!)
double reduced_series(int n, double x)
{
    double odd_fact = 1.0; // (2n+1)!!
    for (int m = 3; m <= 2 * n + 1; m += 2)
        odd_fact *= m;
    const double q = -0.5 * x * x;
    double term = 1.0 / odd_fact;
    double sum = term;
    for (int k = 1; k < 40; ++k) {
        term *= q / (k * (2.0 * n + 2.0 * k + 1.0));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum))
            break;
    }
    return sum;
}

} // namespace

double j1(double x)
{
    if (std::abs(x) < 1e-2)
        return x * reduced_series(1, x);
    return std::sin(x) / (x * x) - std::cos(x) / x;
}

double j1_prime(double x)
{
    if (std::abs(x) < 1e-2) {
        // d/dx [x * r1(x)] with r1 = 1/3 - x^2/30 + x^4/840 - ...
        const double x2 = x * x;
        return 1.0 / 3.0 - x2 / 10.0 + x2 * x2 / 168.0 - x2 * x2 * x2 / 6480.0;
    }
    const double j0 = std::sin(x) / x;
    return j0 - 2.0 * j1(x) / x;
}

double reduced(int n, double x)
{
    if (n < 0 || n > 3)
        throw ParameterError("bessel::reduced: order must be in 0..3");
    if (std::abs(x) < 2.0)
        return reduced_series(n, x);
    const double s = std::sin(x);
    const double c = std::cos(x);
    const double x2 = x * x;
    switch (n) {
    case 0:
        return s / x;
    case 1:
        return (s / x - c) / x2;
    case 2:
        return ((3.0 / x2 - 1.0) * s / x - 3.0 * c / x2) / x2;
    default:
        return ((15.0 / (x2 * x) - 6.0 / x) * s / x - (15.0 / x2 - 1.0) * c / x) / (x2 * x);
    }
}

double j1_first_root()
{
    double lo = 4.0;
    double hi = 5.0;
    double flo = j1(lo);
    while (hi - lo > 1e-14) {
        const double mid = 0.5 * (lo + hi);
        const double fm = j1(mid);
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace beltrami::bessel
